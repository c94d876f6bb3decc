#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgab/datasets.hpp"
#include "kgab/retrievers.hpp"

namespace kgab {

struct GenRequest {
    std::string system_text;
    std::string user_text;
    int max_tokens = 256;
    double temperature = 0.0;

    bool operator==(const GenRequest&) const = default;
};

struct TokenUsage {
    int prompt = 0;
    int completion = 0;
};

struct GenResponse {
    std::string output_text;
    TokenUsage usage;
    double latency_ms = 0.0;
};

/// Anything that turns a prompt into text. Implementations must be safe to call concurrently.
class Generator {
  public:
    virtual ~Generator() = default;
    virtual GenResponse generate(const GenRequest& request) = 0;
    /// Short label recorded in reports.
    [[nodiscard]] virtual std::string name() const = 0;
};

struct PromptTemplate {
    std::string system_text =
        "Answer the question using only the evidence provided. Reply with the answer entity names "
        "separated by commas, or \"unknown\" if the evidence does not contain the answer.";
    std::string no_evidence_marker = "No evidence.";
    std::string question_prefix = "Question: ";
};

/// user text = evidence (or the no-evidence marker), a blank line, then "Question: <text>".
GenRequest build_prompt(const Question& q, const RetrievalResult& retrieval, const PromptTemplate& tpl = {});

/// Entity labels mentioned by evidence lines of a prompt built with `tpl`: both ends of every
/// `head --relation--> tail` line, and bare lines taken whole.
std::vector<std::string> evidence_entities(std::string_view user_text, const PromptTemplate& tpl = {});

/// Deterministic reader that knows the gold answers: it answers with every gold label that
/// appears as an entity in the evidence, comma-separated, and "unknown" otherwise.
/// Only for tests and synthetic runs.
class MockOracleGenerator final : public Generator {
  public:
    explicit MockOracleGenerator(std::span<const Question> questions, PromptTemplate tpl = {});
    GenResponse generate(const GenRequest& request) override;
    [[nodiscard]] std::string name() const override { return "mock-oracle"; }

  private:
    std::unordered_map<std::string, AnswerSet> answers_by_text_;
    PromptTemplate tpl_;
};

struct RetryPolicy {
    int max_retries = 5;
    std::chrono::milliseconds base_delay{500};
    std::chrono::milliseconds max_delay{30'000};

    [[nodiscard]] std::chrono::milliseconds delay_for(int retry) const;
    [[nodiscard]] static bool is_transient(int status) noexcept;
};

/// Token bucket over requests per minute. Capacity equals one minute's budget.
class RateLimiter {
  public:
    explicit RateLimiter(double requests_per_minute);
    void acquire();

  private:
    std::mutex mu_;
    double capacity_;
    double tokens_;
    double per_second_;
    std::chrono::steady_clock::time_point last_;
};

struct HttpGeneratorConfig {
    std::string base_url;  // e.g. https://api.example.com/v1 ; "/chat/completions" is appended
    std::string model;
    std::string api_key;
    RetryPolicy retry;
    double requests_per_minute = 60.0;
    int max_in_flight = 4;
    std::chrono::seconds timeout{120};
    std::string transcript_path;  // JSON lines; empty disables

    /// Reads KGAB_LLM_BASE_URL, KGAB_LLM_MODEL, KGAB_LLM_API_KEY. Missing URL or model raises ConfigError.
    static HttpGeneratorConfig from_env();
};

/// Chat-completion client with retries, a rate limit and an in-flight cap.
class HttpGenerator final : public Generator {
  public:
    explicit HttpGenerator(HttpGeneratorConfig config);
    ~HttpGenerator() override;
    GenResponse generate(const GenRequest& request) override;
    [[nodiscard]] std::string name() const override { return "http:" + config_.model; }

  private:
    void log_transcript(const std::string& line);

    HttpGeneratorConfig config_;
    std::string origin_;
    std::string path_;
    RateLimiter limiter_;
    std::mutex slots_mu_;
    std::condition_variable slots_cv_;
    int in_flight_ = 0;
    std::mutex log_mu_;
    std::ofstream transcript_;
};

/// Answers from a transcript written by HttpGenerator, keyed by (system, user) text.
class TranscriptReplayGenerator final : public Generator {
  public:
    explicit TranscriptReplayGenerator(const std::string& transcript_path);
    GenResponse generate(const GenRequest& request) override;
    [[nodiscard]] std::string name() const override { return "replay"; }

  private:
    std::map<std::pair<std::string, std::string>, std::string> outputs_;
};

/// Planner that asks a generator for relation paths and keeps the first well-formed list.
class LlmPlanner final : public Planner {
  public:
    LlmPlanner(Generator& generator, std::vector<std::string> relation_vocabulary);
    [[nodiscard]] std::vector<RelationPlan> plan(const Question& q, std::size_t top_k) const override;

    std::string system_text =
        "You plan relation paths over a knowledge graph. Reply with a JSON array of relation paths, "
        "each a JSON array of relation names, best first.";

  private:
    Generator* generator_;
    std::vector<std::string> vocabulary_;
};

/// Scorer that asks a generator for a relevance number and keeps the first one found.
class LlmScorer final : public Scorer {
  public:
    explicit LlmScorer(Generator& generator) : generator_(&generator) {}
    [[nodiscard]] double score(const Question& q, std::string_view candidate) const override;

    std::string system_text =
        "Rate how useful the candidate knowledge-graph evidence is for answering the question. "
        "Reply with a single number between 0 and 1.";

  private:
    Generator* generator_;
};

/// Lenient parsers used by the adapters.
std::vector<RelationPlan> parse_relation_plans(std::string_view output);
std::optional<double> parse_score(std::string_view output);

}  // namespace kgab
