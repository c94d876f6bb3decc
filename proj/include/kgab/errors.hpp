#pragma once

#include <stdexcept>
#include <string>

namespace kgab {

/// Base for every error the harness raises. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration: parameters out of range, inconsistent flags, guards exceeded.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Bad input data (KG file, QA file, manifest). Carries a 1-based line number when known.
class InputError : public Error {
  public:
    explicit InputError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Unknown entity/relation/triple id.
class LookupError : public Error {
  public:
    using Error::Error;
};

/// A mask or manifest that does not belong to the Kg it is applied to.
class ConsistencyError : public Error {
  public:
    using Error::Error;
};

/// Remote generation failed after retries.
class TransportError : public Error {
  public:
    TransportError(const std::string& what, int last_status)
        : Error(what), last_status_(last_status) {}

    [[nodiscard]] int last_status() const noexcept { return last_status_; }

  private:
    int last_status_;
};

/// Remote endpoint answered with something that is not a chat-completion reply.
class ProtocolError : public Error {
  public:
    using Error::Error;
};

}  // namespace kgab
