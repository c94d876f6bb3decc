#include "kgab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "kgab/errors.hpp"
#include "kgab/metrics.hpp"
#include "kgab/text.hpp"

namespace kgab {

using ojson = nlohmann::ordered_json;

std::string to_string(Setting s) {
    switch (s) {
        case Setting::none: return "none";
        case Setting::random: return "random";
        case Setting::path_disruption: return "path_disruption";
        case Setting::no_retrieval: return "no_retrieval";
    }
    return "none";
}

Setting parse_setting(std::string_view s) {
    if (s == "none") return Setting::none;
    if (s == "random") return Setting::random;
    if (s == "path_disruption") return Setting::path_disruption;
    if (s == "no_retrieval") return Setting::no_retrieval;
    throw ConfigError("unknown strategy \"" + std::string(s) + "\"");
}

// ---------------------------------------------------------------------------
// Config

namespace {

template <class T>
T parse_int(std::string_view key, std::string_view v) {
    T out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw ConfigError(std::string(key) + ": expected an integer, got \"" + std::string(v) + "\"");
    }
    return out;
}

double parse_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError(std::string(key) + ": expected a number, got \"" + std::string(v) + "\"");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    const auto s = text::to_lower(v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(std::string(key) + ": expected a boolean, got \"" + std::string(v) + "\"");
}

bool is_unset(std::string_view v) { return v.empty() || v == "none" || v == "off"; }

DirectionMode parse_direction(std::string_view v) {
    if (v == "bidirectional") return DirectionMode::bidirectional;
    if (v == "forward_only" || v == "forward") return DirectionMode::forward_only;
    throw ConfigError("unknown direction \"" + std::string(v) + "\"");
}

std::string direction_name(DirectionMode d) {
    return d == DirectionMode::bidirectional ? "bidirectional" : "forward_only";
}

const std::vector<std::string> kKeys = {
    "name",       "kg",          "questions",  "strategy",       "rate",        "seed",
    "seeds",      "nested",      "isolated",   "replay_manifest", "retriever",  "generator",
    "max_hops",   "direction",   "k_plans",    "beam_width",     "depth",       "stop_threshold",
    "k_nodes",    "hop_radius",  "edge_cost",  "pcst_mode",      "use_aliases", "workers",
    "report",     "manifest",    "transcript", "trace",          "baseline_report",
};

}  // namespace

const std::vector<std::string>& config_keys() { return kKeys; }

void apply_setting(ExperimentConfig& c, std::string_view raw_key, std::string_view raw_value) {
    std::string key(text::trim(raw_key));
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string_view v = text::trim(raw_value);

    if (key == "name") c.name = v;
    else if (key == "kg") c.kg_path = v;
    else if (key == "questions") c.questions_path = v;
    else if (key == "strategy") c.strategy = parse_setting(v);
    else if (key == "rate") {
        if (is_unset(v)) {
            c.rate.reset();
        } else if (v.back() == '%') {
            c.rate = parse_double(key, v.substr(0, v.size() - 1)) / 100.0;
        } else {
            c.rate = parse_double(key, v);
        }
    } else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, v);
    else if (key == "seeds") {
        c.seeds.clear();
        for (auto part : text::split(v, ',')) {
            part = text::trim(part);
            if (!part.empty()) c.seeds.push_back(parse_int<std::uint64_t>(key, part));
        }
    } else if (key == "nested") c.nested = parse_bool(key, v);
    else if (key == "isolated") c.isolated = parse_bool(key, v);
    else if (key == "replay_manifest") c.replay_manifest = v;
    else if (key == "retriever") c.retriever = parse_retrieval_method(v);
    else if (key == "generator") c.generator = v;
    else if (key == "max_hops") c.max_hops = parse_int<int>(key, v);
    else if (key == "direction") c.direction = parse_direction(v);
    else if (key == "k_plans") c.k_plans = parse_int<std::size_t>(key, v);
    else if (key == "beam_width") c.beam_width = parse_int<std::size_t>(key, v);
    else if (key == "depth") c.depth = parse_int<int>(key, v);
    else if (key == "stop_threshold") {
        if (is_unset(v)) c.stop_threshold.reset();
        else c.stop_threshold = parse_double(key, v);
    } else if (key == "k_nodes") c.k_nodes = parse_int<std::size_t>(key, v);
    else if (key == "hop_radius") c.hop_radius = parse_int<int>(key, v);
    else if (key == "edge_cost") c.edge_cost = parse_double(key, v);
    else if (key == "pcst_mode") {
        if (v == "auto") c.pcst_mode.reset();
        else if (v == "exact") c.pcst_mode = PcstMode::exact;
        else if (v == "approx") c.pcst_mode = PcstMode::approx;
        else throw ConfigError("unknown pcst_mode \"" + std::string(v) + "\"");
    } else if (key == "use_aliases") c.use_aliases = parse_bool(key, v);
    else if (key == "workers") c.workers = parse_int<int>(key, v);
    else if (key == "report") c.report_path = v;
    else if (key == "manifest") c.manifest_path = v;
    else if (key == "transcript") c.transcript_path = v;
    else if (key == "trace") c.trace_path = v;
    else if (key == "baseline_report") c.baseline_report = v;
    else throw ConfigError("unknown config key \"" + key + "\"");
}

void read_config(std::istream& in, ExperimentConfig& config) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = text::trim(line);
        if (s.empty() || s.front() == '#' || s.front() == '[') continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = text::trim(s.substr(0, eq));
        std::string_view value = text::trim(s.substr(eq + 1));
        if (!value.empty() && (value.front() == '"' || value.front() == '\'')) {
            const auto close = value.find(value.front(), 1);
            if (close == std::string_view::npos) {
                throw ConfigError("config line " + std::to_string(line_no) + ": unterminated string");
            }
            value = value.substr(1, close - 1);
        } else if (const auto hash = value.find('#'); hash != std::string_view::npos) {
            value = text::trim(value.substr(0, hash));
        }
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        try {
            apply_setting(config, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void load_config(const std::string& path, ExperimentConfig& config) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    read_config(in, config);
}

void validate(const ExperimentConfig& c) {
    if (c.strategy == Setting::random) {
        if (!c.rate && c.replay_manifest.empty()) throw ConfigError("strategy random requires rate");
        if (c.rate && !(*c.rate >= 0.0 && *c.rate <= 1.0)) throw ConfigError("rate must lie in [0, 1]");
    } else if (c.rate) {
        throw ConfigError("rate is only valid with strategy random");
    }
    if (!c.replay_manifest.empty() && (c.strategy == Setting::none || c.strategy == Setting::no_retrieval)) {
        throw ConfigError("replay_manifest needs an ablation strategy");
    }
    if (c.generator != "mock" && c.generator != "http") {
        throw ConfigError("generator must be mock or http, got \"" + c.generator + "\"");
    }
    if (c.max_hops < 1) throw ConfigError("max_hops must be >= 1");
    if (c.k_plans < 1) throw ConfigError("k_plans must be >= 1");
    if (c.beam_width < 1) throw ConfigError("beam_width must be >= 1");
    if (c.depth < 1) throw ConfigError("depth must be >= 1");
    if (c.stop_threshold && !(*c.stop_threshold >= 0.0 && *c.stop_threshold <= 1.0)) {
        throw ConfigError("stop_threshold must lie in [0, 1]");
    }
    if (c.k_nodes < 1) throw ConfigError("k_nodes must be >= 1");
    if (c.hop_radius != 1 && c.hop_radius != 2) throw ConfigError("hop_radius must be 1 or 2");
    if (!(c.edge_cost > 0.0)) throw ConfigError("edge_cost must be positive");
    if (c.workers < 1 || c.workers > 256) throw ConfigError("workers must lie in [1, 256]");
    if (c.retriever == RetrievalMethod::none && c.strategy != Setting::no_retrieval) {
        throw ConfigError("retriever none is spelled strategy = no_retrieval");
    }
}

std::string setting_name(const ExperimentConfig& c) {
    if (!c.name.empty()) return c.name;
    switch (c.strategy) {
        case Setting::none: return "Intact";
        case Setting::no_retrieval: return "No retrieval";
        case Setting::path_disruption: return "Path disruption";
        case Setting::random: {
            if (!c.rate) return "Random";
            char buf[48];
            std::snprintf(buf, sizeof buf, "Random %g%%", *c.rate * 100.0);
            return buf;
        }
    }
    return "run";
}

namespace {

/// The parts of a config that determine results. Paths are left out so a replayed run
/// embeds the same text as the run it replays.
ojson config_provenance(const ExperimentConfig& c) {
    ojson j;
    j["strategy"] = to_string(c.strategy);
    j["rate"] = c.rate ? ojson(*c.rate) : ojson(nullptr);
    j["seed"] = c.seed;
    if (!c.seeds.empty()) j["seeds"] = c.seeds;
    j["nested"] = c.nested;
    j["isolated"] = c.isolated;
    j["retriever"] = to_string(c.retriever);
    j["generator"] = c.generator;
    j["max_hops"] = c.max_hops;
    j["direction"] = direction_name(c.direction);
    j["k_plans"] = c.k_plans;
    j["beam_width"] = c.beam_width;
    j["depth"] = c.depth;
    j["stop_threshold"] = c.stop_threshold ? ojson(*c.stop_threshold) : ojson(nullptr);
    j["k_nodes"] = c.k_nodes;
    j["hop_radius"] = c.hop_radius;
    j["edge_cost"] = c.edge_cost;
    j["pcst_mode"] = !c.pcst_mode ? "auto" : *c.pcst_mode == PcstMode::exact ? "exact" : "approx";
    j["use_aliases"] = c.use_aliases;
    return j;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::optional<double> opt_from(const ojson& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Reports

std::string report_to_json(const EvalReport& r) {
    ojson j;
    j["setting"] = r.setting;
    j["generator"] = r.generator;
    j["num_questions"] = r.num_questions;
    j["accuracy"] = r.accuracy;
    j["hits"] = r.hits;
    if (r.accuracy_std) j["accuracy_std"] = *r.accuracy_std;
    if (r.hits_std) j["hits_std"] = *r.hits_std;
    j["rel_drop_accuracy"] = opt_json(r.rel_drop_accuracy);
    j["rel_drop_hits"] = opt_json(r.rel_drop_hits);
    j["removed_triples"] = r.removed_triples;
    j["manifest_checksum"] = r.manifest_checksum;
    j["config"] = r.config_json.empty() ? ojson::object() : ojson::parse(r.config_json);
    auto per = ojson::array();
    for (const auto& q : r.per_question) {
        ojson e;
        e["id"] = q.id;
        e["accuracy"] = q.accuracy;
        e["hit"] = q.hit;
        e["output"] = q.output;
        if (!q.error.empty()) e["error"] = q.error;
        per.push_back(std::move(e));
    }
    j["per_question"] = std::move(per);
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    try {
        const auto j = ojson::parse(text);
        EvalReport r;
        r.setting = j.at("setting").get<std::string>();
        r.generator = j.value("generator", std::string());
        r.num_questions = j.value("num_questions", std::size_t{0});
        r.accuracy = j.at("accuracy").get<double>();
        r.hits = j.at("hits").get<double>();
        r.accuracy_std = opt_from(j, "accuracy_std");
        r.hits_std = opt_from(j, "hits_std");
        r.rel_drop_accuracy = opt_from(j, "rel_drop_accuracy");
        r.rel_drop_hits = opt_from(j, "rel_drop_hits");
        r.removed_triples = j.value("removed_triples", std::size_t{0});
        r.manifest_checksum = j.value("manifest_checksum", std::string());
        if (j.contains("config")) r.config_json = j["config"].dump();
        if (j.contains("per_question")) {
            for (const auto& e : j["per_question"]) {
                QuestionOutcome q;
                q.id = e.at("id").get<std::string>();
                q.accuracy = e.at("accuracy").get<double>();
                q.hit = e.at("hit").get<int>();
                q.output = e.value("output", std::string());
                q.error = e.value("error", std::string());
                r.per_question.push_back(std::move(q));
            }
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed report: ") + e.what());
    }
}

EvalReport load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open report " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return report_from_json(buf.str());
}

void save_report(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write report " + path);
    out << report_to_json(report);
}

void set_relative_drops(EvalReport& report, const EvalReport& baseline) {
    report.rel_drop_accuracy = relative_drop(baseline.accuracy, report.accuracy);
    report.rel_drop_hits = relative_drop(baseline.hits, report.hits);
}

namespace {

EvalReport fold(std::vector<QuestionOutcome> outcomes, std::span<const QuestionScore> scores) {
    EvalReport r;
    r.num_questions = outcomes.size();
    if (!scores.empty()) {
        const auto agg = aggregate(scores);
        r.accuracy = agg.accuracy_percent;
        r.hits = agg.hits_percent;
    }
    r.per_question = std::move(outcomes);
    return r;
}

}  // namespace

EvalReport evaluate_outputs(std::span<const Question> questions,
                            const std::function<std::optional<std::string>(const std::string&)>& output_for,
                            const MatchOptions& options) {
    std::vector<QuestionOutcome> outcomes;
    std::vector<QuestionScore> scores;
    for (const auto& q : questions) {
        QuestionOutcome o;
        o.id = q.id;
        if (auto out = output_for(q.id)) {
            o.output = *out;
            scores.push_back(score_question(o.output, q.answers, options));
        } else {
            o.error = "missing output";
            scores.push_back(QuestionScore{});
        }
        o.accuracy = scores.back().accuracy;
        o.hit = scores.back().hit;
        outcomes.push_back(std::move(o));
    }
    auto r = fold(std::move(outcomes), scores);
    r.setting = "evaluate";
    return r;
}

// ---------------------------------------------------------------------------
// Pipeline

AblationOutcome ablate(const Kg& kg, std::span<const Question> questions, const ExperimentConfig& c) {
    if (!c.replay_manifest.empty()) {
        auto m = load_manifest(c.replay_manifest);
        const auto expected =
            c.strategy == Setting::random ? Strategy::random : Strategy::path_disruption;
        if (m.strategy != expected) {
            throw ConfigError("replay manifest strategy " + to_string(m.strategy) + " does not match config");
        }
        auto view = replay_manifest(kg, m);
        return {std::move(view), std::move(m)};
    }
    switch (c.strategy) {
        case Setting::random: {
            auto m = random_deletion(kg, *c.rate, c.seed, {.nested = c.nested});
            auto view = apply_mask(kg, m.removed_ids());
            return {std::move(view), std::move(m)};
        }
        case Setting::path_disruption: {
            auto m = disrupt_paths(kg, questions, c.seed,
                                   {.max_hops = c.max_hops, .direction = c.direction, .isolated = c.isolated});
            auto view = apply_mask(kg, m.removed_ids());
            return {std::move(view), std::move(m)};
        }
        case Setting::none:
        case Setting::no_retrieval: break;
    }
    return {KgView(kg), std::nullopt};
}

namespace {

std::vector<std::string> relation_vocabulary(const Kg& kg) {
    std::vector<std::string> out;
    out.reserve(kg.relation_count());
    for (std::size_t i = 0; i < kg.relation_count(); ++i) {
        out.push_back(kg.relation_label(RelationId{static_cast<std::uint32_t>(i)}));
    }
    return out;
}

/// Runs `fn(i)` for i in [0, n) on `workers` threads; rethrows the first failure by index.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto width = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    if (width <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < width; ++t) pool.emplace_back(work);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

template <class F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
    const auto tag = [&](const std::exception& e) { return stage + ": " + e.what(); };
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(tag(e));
    } catch (const InputError& e) {
        throw InputError(tag(e));
    } catch (const LookupError& e) {
        throw LookupError(tag(e));
    } catch (const ConsistencyError& e) {
        throw ConsistencyError(tag(e));
    } catch (const TransportError& e) {
        throw TransportError(tag(e), e.last_status());
    } catch (const ProtocolError& e) {
        throw ProtocolError(tag(e));
    }
}

}  // namespace

RetrieverSet::RetrieverSet(const Kg& kg, const ExperimentConfig& config, Generator* llm)
    : config_(config), oracle_planner_(kg, config.max_hops, config.direction) {
    // LLM-backed planning and scoring only make sense with a real model behind them.
    if (llm && config.generator == "http") {
        llm_planner_ = std::make_unique<LlmPlanner>(*llm, relation_vocabulary(kg));
        llm_scorer_ = std::make_unique<LlmScorer>(*llm);
    }
}

RetrieverSet::~RetrieverSet() = default;

RetrievalResult RetrieverSet::run(const KgView& view, const Question& q) const {
    const auto& c = config_;
    const Planner& planner = llm_planner_ ? *llm_planner_ : static_cast<const Planner&>(oracle_planner_);
    const Scorer& scorer = llm_scorer_ ? *llm_scorer_ : static_cast<const Scorer&>(lexical_);
    switch (c.strategy == Setting::no_retrieval ? RetrievalMethod::none : c.retriever) {
        case RetrievalMethod::rog:
            return rog_retrieve(view, q, planner, {.top_k_plans = c.k_plans, .direction = c.direction});
        case RetrievalMethod::tog:
            return tog_retrieve(view, q, scorer,
                                {.beam_width = c.beam_width,
                                 .max_depth = c.depth,
                                 .direction = c.direction,
                                 .stop_threshold = c.stop_threshold});
        case RetrievalMethod::gretriever:
            return gretriever_retrieve(
                view, q, embedder_,
                {.k_nodes = c.k_nodes, .hop_radius = c.hop_radius, .edge_cost = c.edge_cost, .mode = c.pcst_mode});
        case RetrievalMethod::oracle: return oracle_retrieve(view, q, c.max_hops, c.direction);
        case RetrievalMethod::none: break;
    }
    return {};
}

RunArtifacts run_pipeline(const Kg& kg, std::span<const Question> questions, const ExperimentConfig& config,
                          Generator* generator) {
    validate(config);
    if (questions.empty()) throw InputError("no questions");

    auto ablated = staged("ablate", [&] { return ablate(kg, questions, config); });
    const KgView& view = ablated.view;

    std::unique_ptr<Generator> owned;
    if (!generator) {
        owned = staged("generator", [&]() -> std::unique_ptr<Generator> {
            if (config.generator == "mock") return std::make_unique<MockOracleGenerator>(questions);
            auto http = HttpGeneratorConfig::from_env();
            http.transcript_path = config.transcript_path;
            return std::make_unique<HttpGenerator>(std::move(http));
        });
        generator = owned.get();
    }

    const RetrieverSet retrievers(kg, config, generator);
    const MatchOptions match{.use_aliases = config.use_aliases};

    std::vector<QuestionOutcome> outcomes(questions.size());
    std::vector<QuestionScore> scores(questions.size());
    std::vector<std::string> traces(questions.size());

    staged("evaluate", [&] {
        parallel_for(questions.size(), config.workers, [&](std::size_t i) {
            const auto& q = questions[i];
            const auto retrieval = retrievers.run(view, q);

            auto& o = outcomes[i];
            o.id = q.id;
            try {
                o.output = generator->generate(build_prompt(q, retrieval)).output_text;
                scores[i] = score_question(o.output, q.answers, match);
            } catch (const TransportError& e) {
                o.error = e.what();
            } catch (const ProtocolError& e) {
                o.error = e.what();
            }
            o.accuracy = scores[i].accuracy;
            o.hit = scores[i].hit;

            ojson t;
            t["id"] = q.id;
            t["retrieval"] = ojson::parse(trace_to_json(kg, retrieval));
            if (!o.error.empty()) t["error"] = o.error;
            traces[i] = t.dump();
        });
    });

    RunArtifacts out;
    out.report = fold(std::move(outcomes), scores);
    // A replayed run reports the sampling parameters the manifest was drawn with.
    auto recorded = config;
    if (!config.replay_manifest.empty() && ablated.manifest) {
        recorded.rate = ablated.manifest->rate;
        recorded.seed = ablated.manifest->seed;
        recorded.nested = ablated.manifest->nested;
        recorded.isolated = ablated.manifest->isolated;
    }
    out.report.setting = setting_name(recorded);
    out.report.generator = generator->name();
    out.report.removed_triples = view.removed_count();
    out.report.manifest_checksum = hex64(view.checksum());
    out.report.config_json = config_provenance(recorded).dump();
    out.manifest = std::move(ablated.manifest);
    out.traces = std::move(traces);
    return out;
}

namespace {

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    for (const auto& l : lines) out << l << '\n';
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& config) {
    validate(config);
    if (config.kg_path.empty()) throw ConfigError("kg path is required");
    if (config.questions_path.empty()) throw ConfigError("questions path is required");
    const auto kg = staged("load kg", [&] { return load_kg(config.kg_path); });
    const auto questions = staged("load questions", [&] { return load_questions(config.questions_path); });

    RunArtifacts out;
    if (!config.seeds.empty()) {
        out.report = run_sweep(kg, questions, config, config.seeds);
    } else {
        out = run_pipeline(kg, questions, config);
    }
    staged("write", [&] {
        if (!config.baseline_report.empty()) set_relative_drops(out.report, load_report(config.baseline_report));
        if (!config.report_path.empty()) save_report(config.report_path, out.report);
        if (!config.manifest_path.empty() && out.manifest) save_manifest(config.manifest_path, *out.manifest);
        if (!config.trace_path.empty()) write_lines(config.trace_path, out.traces);
    });
    return out;
}

EvalReport run_sweep(const Kg& kg, std::span<const Question> questions, const ExperimentConfig& config,
                     std::span<const std::uint64_t> seeds, Generator* generator) {
    if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
    std::vector<double> acc;
    std::vector<double> hits;
    EvalReport first;
    for (auto s : seeds) {
        auto c = config;
        c.seed = s;
        c.seeds.clear();
        auto run = run_pipeline(kg, questions, c, generator).report;
        acc.push_back(run.accuracy);
        hits.push_back(run.hits);
        if (acc.size() == 1) first = std::move(run);
    }
    auto mean_std = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
        return std::pair{round2(mean), round2(sd)};
    };
    EvalReport r;
    r.setting = first.setting;
    r.generator = first.generator;
    r.num_questions = first.num_questions;
    std::tie(r.accuracy, r.accuracy_std) = mean_std(acc);
    std::tie(r.hits, r.hits_std) = mean_std(hits);
    r.removed_triples = first.removed_triples;
    auto cfg = config_provenance(config);
    cfg["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());
    r.config_json = cfg.dump();
    return r;
}

ReportTable emit_report(std::span<const EvalReport> runs, const std::string& baseline_name) {
    const auto base = std::find_if(runs.begin(), runs.end(),
                                   [&](const EvalReport& r) { return r.setting == baseline_name; });
    if (base == runs.end()) throw ConfigError("baseline \"" + baseline_name + "\" is not among the runs");

    auto cell = [](double value, const std::optional<double>& sd, std::optional<double> baseline) {
        auto s = format_cell(value, baseline);
        if (!sd) return s;
        char buf[32];
        std::snprintf(buf, sizeof buf, " ± %.2f", *sd);
        const auto space = s.find(' ');
        return space == std::string::npos ? s + buf : s.substr(0, space) + buf + s.substr(space);
    };

    std::string md = "| Setting | Accuracy | Hits |\n| --- | --- | --- |\n";
    auto rows = ojson::array();
    for (const auto& r : runs) {
        const bool is_base = &r == &*base;
        const auto ba = is_base ? std::nullopt : std::optional(base->accuracy);
        const auto bh = is_base ? std::nullopt : std::optional(base->hits);
        md += "| " + r.setting + " | " + cell(r.accuracy, r.accuracy_std, ba) + " | " +
              cell(r.hits, r.hits_std, bh) + " |\n";
        ojson row;
        row["setting"] = r.setting;
        row["accuracy"] = r.accuracy;
        row["hits"] = r.hits;
        if (r.accuracy_std) row["accuracy_std"] = *r.accuracy_std;
        if (r.hits_std) row["hits_std"] = *r.hits_std;
        row["rel_drop_accuracy"] = is_base ? ojson(nullptr) : opt_json(relative_drop(base->accuracy, r.accuracy));
        row["rel_drop_hits"] = is_base ? ojson(nullptr) : opt_json(relative_drop(base->hits, r.hits));
        row["baseline"] = is_base;
        rows.push_back(std::move(row));
    }
    ojson j;
    j["baseline"] = baseline_name;
    j["rows"] = std::move(rows);
    return {md, j.dump(2) + "\n"};
}

}  // namespace kgab
