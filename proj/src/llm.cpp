#include "kgab/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "kgab/errors.hpp"
#include "kgab/text.hpp"

namespace kgab {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

GenRequest build_prompt(const Question& q, const RetrievalResult& retrieval, const PromptTemplate& tpl) {
    GenRequest req;
    req.system_text = tpl.system_text;
    const auto& evidence = retrieval.evidence_text.empty() ? tpl.no_evidence_marker : retrieval.evidence_text;
    req.user_text = evidence + "\n\n" + tpl.question_prefix + q.text;
    return req;
}

std::vector<std::string> evidence_entities(std::string_view user_text, const PromptTemplate& tpl) {
    const std::string separator = "\n\n" + tpl.question_prefix;
    const auto cut = user_text.rfind(separator);
    const auto evidence = cut == std::string_view::npos ? std::string_view{} : user_text.substr(0, cut);

    std::vector<std::string> entities;
    for (auto line : text::split(evidence, '\n')) {
        line = text::trim(line);
        if (line.empty() || line == tpl.no_evidence_marker) continue;
        const auto head_end = line.find(" --");
        const auto tail_begin = line.rfind("--> ");
        if (head_end != std::string_view::npos && tail_begin != std::string_view::npos && head_end < tail_begin) {
            entities.emplace_back(text::trim(line.substr(0, head_end)));
            entities.emplace_back(text::trim(line.substr(tail_begin + 4)));
        } else {
            entities.emplace_back(line);
        }
    }
    return entities;
}

// ---------------------------------------------------------------------------

MockOracleGenerator::MockOracleGenerator(std::span<const Question> questions, PromptTemplate tpl)
    : tpl_(std::move(tpl)) {
    for (const auto& q : questions) {
        auto& answers = answers_by_text_[q.text];
        answers.insert(answers.end(), q.answers.begin(), q.answers.end());
    }
}

GenResponse MockOracleGenerator::generate(const GenRequest& request) {
    GenResponse resp;
    resp.output_text = "unknown";
    const auto pos = request.user_text.rfind(tpl_.question_prefix);
    if (pos == std::string::npos) return resp;
    const auto it = answers_by_text_.find(request.user_text.substr(pos + tpl_.question_prefix.size()));
    if (it == answers_by_text_.end()) return resp;

    const auto found = evidence_entities(request.user_text, tpl_);
    const std::set<std::string> mentioned(found.begin(), found.end());
    std::vector<std::string> labels;
    for (const auto& answer : it->second) {
        if (mentioned.count(answer.label)) {
            labels.push_back(answer.label);
            continue;
        }
        for (const auto& alias : answer.aliases) {
            if (mentioned.count(alias)) {
                labels.push_back(alias);
                break;
            }
        }
    }
    if (labels.empty()) return resp;
    resp.output_text.clear();
    for (const auto& l : labels) resp.output_text += (resp.output_text.empty() ? "" : ", ") + l;
    return resp;
}

// ---------------------------------------------------------------------------

std::chrono::milliseconds RetryPolicy::delay_for(int retry) const {
    auto delay = base_delay;
    for (int i = 0; i < retry && delay < max_delay; ++i) delay *= 2;
    return std::min(delay, max_delay);
}

bool RetryPolicy::is_transient(int status) noexcept {
    return status == 0 || status == 408 || status == 429 || status >= 500;
}

RateLimiter::RateLimiter(double requests_per_minute)
    : capacity_(std::max(1.0, requests_per_minute)),
      tokens_(capacity_),
      per_second_(requests_per_minute / 60.0),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (per_second_ <= 0.0) return;
    for (;;) {
        std::chrono::duration<double> wait{};
        {
            std::lock_guard lock(mu_);
            const auto now = std::chrono::steady_clock::now();
            tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * per_second_);
            last_ = now;
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            wait = std::chrono::duration<double>((1.0 - tokens_) / per_second_);
        }
        std::this_thread::sleep_for(wait);
    }
}

HttpGeneratorConfig HttpGeneratorConfig::from_env() {
    auto env = [](const char* name) {
        const char* v = std::getenv(name);
        return v ? std::string(v) : std::string();
    };
    HttpGeneratorConfig c;
    c.base_url = env("KGAB_LLM_BASE_URL");
    c.model = env("KGAB_LLM_MODEL");
    c.api_key = env("KGAB_LLM_API_KEY");
    if (c.base_url.empty()) throw ConfigError("KGAB_LLM_BASE_URL is not set");
    if (c.model.empty()) throw ConfigError("KGAB_LLM_MODEL is not set");
    return c;
}

namespace {

/// Splits "https://host:port/v1" into ("https://host:port", "/v1").
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("base URL needs a scheme: " + url);
    const auto path_begin = url.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) return {url, ""};
    std::string path = url.substr(path_begin);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {url.substr(0, path_begin), path};
}

std::int64_t epoch_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

HttpGenerator::HttpGenerator(HttpGeneratorConfig config)
    : config_(std::move(config)), limiter_(config_.requests_per_minute) {
    std::tie(origin_, path_) = split_url(config_.base_url);
    path_ += "/chat/completions";
    if (config_.max_in_flight < 1) throw ConfigError("max_in_flight must be positive");
    if (!config_.transcript_path.empty()) {
        transcript_.open(config_.transcript_path, std::ios::app);
        if (!transcript_) throw InputError("cannot open transcript " + config_.transcript_path);
    }
}

HttpGenerator::~HttpGenerator() = default;

void HttpGenerator::log_transcript(const std::string& line) {
    if (!transcript_.is_open()) return;
    std::lock_guard lock(log_mu_);
    transcript_ << line << '\n';
    transcript_.flush();
}

GenResponse HttpGenerator::generate(const GenRequest& request) {
    if (request.system_text.empty() || request.user_text.empty()) {
        throw InputError("generation request texts must be non-empty");
    }
    {
        std::unique_lock lock(slots_mu_);
        slots_cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
        ++in_flight_;
    }
    struct SlotRelease {
        HttpGenerator* self;
        ~SlotRelease() {
            {
                std::lock_guard lock(self->slots_mu_);
                --self->in_flight_;
            }
            self->slots_cv_.notify_one();
        }
    } release{this};

    ojson body;
    body["model"] = config_.model;
    body["messages"] = ojson::array({{{"role", "system"}, {"content", request.system_text}},
                                     {{"role", "user"}, {"content", request.user_text}}});
    body["max_tokens"] = request.max_tokens;
    body["temperature"] = request.temperature;
    const auto payload = body.dump();

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const auto started = epoch_ms();
    const auto clock_start = std::chrono::steady_clock::now();
    int last_status = 0;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.retry.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(config_.retry.delay_for(attempt - 1));
        limiter_.acquire();

        httplib::Client client(origin_);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);
        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_status = 0;
            last_error = httplib::to_string(res.error());
            continue;
        }
        last_status = res->status;
        if (res->status == 200) {
            GenResponse out;
            try {
                const auto reply = json::parse(res->body);
                out.output_text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
                if (reply.contains("usage") && reply["usage"].is_object()) {
                    out.usage.prompt = reply["usage"].value("prompt_tokens", 0);
                    out.usage.completion = reply["usage"].value("completion_tokens", 0);
                }
            } catch (const json::exception& e) {
                throw ProtocolError(std::string("malformed chat-completion reply: ") + e.what());
            }
            out.latency_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - clock_start).count();
            ojson entry;
            entry["request"] = json::parse(payload);
            entry["response"] = {{"output_text", out.output_text},
                                 {"prompt_tokens", out.usage.prompt},
                                 {"completion_tokens", out.usage.completion}};
            entry["started_ms"] = started;
            entry["finished_ms"] = epoch_ms();
            log_transcript(entry.dump());
            return out;
        }
        last_error = "HTTP " + std::to_string(res->status);
        if (!RetryPolicy::is_transient(res->status)) break;
    }

    ojson entry;
    entry["request"] = json::parse(payload);
    entry["error"] = last_error;
    entry["status"] = last_status;
    entry["started_ms"] = started;
    entry["finished_ms"] = epoch_ms();
    log_transcript(entry.dump());
    throw TransportError("generation failed: " + last_error, last_status);
}

TranscriptReplayGenerator::TranscriptReplayGenerator(const std::string& transcript_path) {
    std::ifstream in(transcript_path);
    if (!in) throw InputError("cannot open transcript " + transcript_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            const auto entry = json::parse(line);
            if (!entry.contains("response")) continue;
            const auto& messages = entry.at("request").at("messages");
            outputs_[{messages.at(0).at("content").get<std::string>(), messages.at(1).at("content").get<std::string>()}] =
                entry["response"].at("output_text").get<std::string>();
        } catch (const json::exception& e) {
            throw InputError(std::string("malformed transcript entry: ") + e.what(), line_no);
        }
    }
}

GenResponse TranscriptReplayGenerator::generate(const GenRequest& request) {
    const auto it = outputs_.find({request.system_text, request.user_text});
    if (it == outputs_.end()) throw ProtocolError("request not found in transcript");
    GenResponse out;
    out.output_text = it->second;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

/// Balanced [...] starting at `open`, skipping brackets inside strings.
std::optional<std::string_view> bracket_span(std::string_view s, std::size_t open) {
    int level = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '[') ++level;
        else if (c == ']' && --level == 0) return s.substr(open, i - open + 1);
    }
    return std::nullopt;
}

std::optional<std::vector<RelationPlan>> plans_from_json(const json& j) {
    if (!j.is_array() || j.empty()) return std::nullopt;
    auto as_plan = [](const json& a) -> std::optional<RelationPlan> {
        if (!a.is_array() || a.empty()) return std::nullopt;
        RelationPlan p;
        for (const auto& r : a) {
            if (!r.is_string()) return std::nullopt;
            p.push_back(std::string(text::trim(r.get<std::string>())));
        }
        return p;
    };
    if (j.front().is_string()) {
        if (auto p = as_plan(j)) return std::vector<RelationPlan>{*p};
        return std::nullopt;
    }
    std::vector<RelationPlan> plans;
    for (const auto& a : j) {
        auto p = as_plan(a);
        if (!p) return std::nullopt;
        plans.push_back(std::move(*p));
    }
    return plans;
}

std::string strip_decoration(std::string_view s) {
    s = text::trim(s);
    // "1. ", "- ", "* " list markers
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) s.remove_prefix(i + 1);
    else if (!s.empty() && (s.front() == '-' || s.front() == '*') && s.substr(0, 2) != "->") s.remove_prefix(1);
    s = text::trim(s);
    while (!s.empty() && (s.front() == '"' || s.front() == '\'' || s.front() == '`')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '"' || s.back() == '\'' || s.back() == '`' || s.back() == ',')) s.remove_suffix(1);
    return std::string(text::trim(s));
}

}  // namespace

std::vector<RelationPlan> parse_relation_plans(std::string_view output) {
    for (auto pos = output.find('['); pos != std::string_view::npos; pos = output.find('[', pos + 1)) {
        const auto span = bracket_span(output, pos);
        if (!span) break;
        const auto j = json::parse(*span, nullptr, false);
        if (j.is_discarded()) continue;
        if (auto plans = plans_from_json(j)) return *plans;
    }
    std::vector<RelationPlan> plans;
    for (auto line : text::split(output, '\n')) {
        if (line.find("->") == std::string_view::npos) continue;
        RelationPlan plan;
        std::string_view rest = line;
        for (;;) {
            const auto arrow = rest.find("->");
            auto part = strip_decoration(rest.substr(0, arrow));
            if (!part.empty()) plan.push_back(std::move(part));
            if (arrow == std::string_view::npos) break;
            rest.remove_prefix(arrow + 2);
        }
        if (!plan.empty()) plans.push_back(std::move(plan));
    }
    return plans;
}

std::optional<double> parse_score(std::string_view output) {
    static const std::regex number(R"([-+]?(\d+(\.\d*)?|\.\d+))");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(output.begin(), output.end(), m, number)) return std::nullopt;
    return std::clamp(std::stod(m.str()), 0.0, 1.0);
}

LlmPlanner::LlmPlanner(Generator& generator, std::vector<std::string> relation_vocabulary)
    : generator_(&generator), vocabulary_(std::move(relation_vocabulary)) {}

std::vector<RelationPlan> LlmPlanner::plan(const Question& q, std::size_t top_k) const {
    GenRequest req;
    req.system_text = system_text;
    std::string vocab;
    for (const auto& r : vocabulary_) vocab += (vocab.empty() ? "" : ", ") + r;
    req.user_text = "Relations: " + vocab + "\nTopic entities: ";
    for (std::size_t i = 0; i < q.topic_entities.size(); ++i) req.user_text += (i ? ", " : "") + q.topic_entities[i];
    req.user_text += "\nQuestion: " + q.text + "\nReturn at most " + std::to_string(top_k) + " paths.";
    auto plans = parse_relation_plans(generator_->generate(req).output_text);
    if (plans.size() > top_k) plans.resize(top_k);
    return plans;
}

double LlmScorer::score(const Question& q, std::string_view candidate) const {
    GenRequest req;
    req.system_text = system_text;
    req.user_text = "Question: " + q.text + "\nCandidate: " + std::string(candidate) + "\nScore:";
    return parse_score(generator_->generate(req).output_text).value_or(0.0);
}

}  // namespace kgab
