#include "kgab/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kgab/errors.hpp"
#include "kgab/seeding.hpp"

namespace kgab {

using ojson = nlohmann::ordered_json;

std::string to_string(Strategy s) { return s == Strategy::random ? "random" : "path_disruption"; }

Strategy parse_strategy(std::string_view s) {
    if (s == "random") return Strategy::random;
    if (s == "path_disruption") return Strategy::path_disruption;
    throw ConfigError("unknown ablation strategy \"" + std::string(s) + "\"");
}

std::string to_string(SkipReason r) {
    switch (r) {
        case SkipReason::unreachable: return "unreachable";
        case SkipReason::entities_missing: return "entities_missing";
        case SkipReason::topic_is_answer: return "topic_is_answer";
    }
    return "unknown";
}

namespace {

SkipReason parse_skip_reason(std::string_view s) {
    if (s == "unreachable") return SkipReason::unreachable;
    if (s == "entities_missing") return SkipReason::entities_missing;
    if (s == "topic_is_answer") return SkipReason::topic_is_answer;
    throw InputError("unknown skip reason \"" + std::string(s) + "\"");
}

RemovedTriple describe(const Kg& kg, TripleId id) {
    const auto& t = kg.triple(id);
    return {id, kg.entity_label(t.head), kg.relation_label(t.relation), kg.entity_label(t.tail)};
}

std::string rate_key(double rate) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "rate:%.17g", rate);
    return buf;
}

}  // namespace

std::vector<TripleId> AblationManifest::removed_ids() const {
    std::vector<TripleId> ids;
    ids.reserve(removed.size());
    for (const auto& r : removed) ids.push_back(r.id);
    return ids;
}

std::size_t deletion_count(double rate, std::size_t n) {
    const long double exact = static_cast<long double>(rate) * static_cast<long double>(n);
    // Nudge by a relative epsilon so products that should land on .5 are not lost to rounding.
    const auto count = static_cast<std::size_t>(std::floor(exact + 0.5L + 1e-9L * (1.0L + exact)));
    return std::min(count, n);
}

AblationManifest random_deletion(const Kg& kg, double rate, std::uint64_t seed, const RandomDeletionOptions& options) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("deletion rate must lie in [0, 1]");

    AblationManifest m;
    m.strategy = Strategy::random;
    m.rate = rate;
    m.seed = seed;
    m.nested = options.nested;

    const std::size_t n = kg.triple_count();
    const std::size_t k = deletion_count(rate, n);
    Engine engine(options.nested ? splitmix64(seed) : derive_seed(seed, rate_key(rate)));

    // Partial Fisher-Yates: the first k slots are a uniform k-subset.
    std::vector<std::uint32_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0u);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(engine, n - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(k);
    std::sort(ids.begin(), ids.end());
    m.removed.reserve(k);
    for (auto id : ids) m.removed.push_back(describe(kg, TripleId{id}));
    return m;
}

AblationManifest disrupt_paths(const Kg& kg, std::span<const Question> questions, std::uint64_t seed,
                               const DisruptionOptions& options) {
    if (options.max_hops < 1) throw ConfigError("max_hops must be >= 1");

    AblationManifest m;
    m.strategy = Strategy::path_disruption;
    m.seed = seed;
    m.isolated = options.isolated;
    m.max_hops = options.max_hops;
    m.direction = options.direction;

    MaskBuilder mask(kg);
    const KgView intact(kg);

    for (const auto& q : questions) {
        QuestionDisruption record;
        record.question_id = q.id;

        const auto topics = resolve_topics(kg, q);
        const auto answers = resolve_answers(kg, q);
        if (topics.empty() || answers.empty()) {
            record.skipped = SkipReason::entities_missing;
            m.per_question.push_back(std::move(record));
            continue;
        }

        std::vector<ReasoningPath> candidates;
        {
            // Scoped so the snapshot is gone before mask.remove() (avoids a copy-on-write).
            const KgView view = options.isolated ? intact : mask.view();
            candidates = shortest_paths_from_any(view, topics, answers, options.max_hops, options.direction);
        }

        if (candidates.empty()) {
            record.skipped = SkipReason::unreachable;
        } else if (candidates.front().length() == 0) {
            record.skipped = SkipReason::topic_is_answer;
        } else {
            Engine engine(derive_seed(seed, q.id));
            const auto& path = candidates[uniform_below(engine, candidates.size())];
            const auto& step = path.steps[uniform_below(engine, path.length())];
            record.selected_path = format_path(kg, path);
            record.removed = describe(kg, step.triple);
            record.shared = !mask.remove(step.triple);
        }
        m.per_question.push_back(std::move(record));
    }

    for (auto id : mask.view().removed_ids()) m.removed.push_back(describe(kg, id));
    return m;
}

KgView replay_manifest(const Kg& kg, const AblationManifest& manifest) {
    MaskBuilder mask(kg);
    for (const auto& r : manifest.removed) {
        const auto id = kg.find_triple(r.head, r.relation, r.tail);
        if (!id) {
            throw ConsistencyError("manifest triple (" + r.head + ", " + r.relation + ", " + r.tail +
                                   ") is not in the KG");
        }
        mask.remove(*id);
    }
    return mask.view();
}

// ---------------------------------------------------------------------------

namespace {

ojson triple_json(const RemovedTriple& r, bool with_id) {
    ojson j;
    if (with_id) j["id"] = index(r.id);
    j["head"] = r.head;
    j["relation"] = r.relation;
    j["tail"] = r.tail;
    return j;
}

RemovedTriple triple_from_json(const ojson& j) {
    RemovedTriple r{TripleId{j.value("id", 0u)}, j.at("head").get<std::string>(),
                    j.at("relation").get<std::string>(), j.at("tail").get<std::string>()};
    return r;
}

}  // namespace

std::string manifest_to_json(const AblationManifest& m) {
    ojson j;
    j["strategy"] = to_string(m.strategy);
    if (m.rate) j["rate"] = *m.rate;
    j["seed"] = m.seed;
    if (m.strategy == Strategy::random) {
        j["nested"] = m.nested;
    } else {
        j["isolated"] = m.isolated;
        j["max_hops"] = m.max_hops;
        j["direction"] = m.direction == DirectionMode::bidirectional ? "bidirectional" : "forward_only";
    }
    auto removed = ojson::array();
    for (const auto& r : m.removed) removed.push_back(triple_json(r, true));
    j["removed"] = std::move(removed);
    if (m.strategy == Strategy::path_disruption) {
        auto per = ojson::object();
        for (const auto& q : m.per_question) {
            ojson entry;
            if (q.skipped) {
                entry["skipped"] = to_string(*q.skipped);
            } else {
                entry["selected_path"] = q.selected_path;
                entry["removed"] = triple_json(*q.removed, false);
                entry["shared"] = q.shared;
            }
            per[q.question_id] = std::move(entry);
        }
        j["per_question"] = std::move(per);
    }
    return j.dump(2) + "\n";
}

AblationManifest manifest_from_json(const std::string& text) {
    try {
        const auto j = ojson::parse(text);
        AblationManifest m;
        m.strategy = parse_strategy(j.at("strategy").get<std::string>());
        if (j.contains("rate") && !j["rate"].is_null()) m.rate = j["rate"].get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.nested = j.value("nested", false);
        m.isolated = j.value("isolated", false);
        m.max_hops = j.value("max_hops", kDefaultMaxHops);
        m.direction = j.value("direction", std::string("bidirectional")) == "forward_only"
                          ? DirectionMode::forward_only
                          : DirectionMode::bidirectional;
        for (const auto& r : j.at("removed")) m.removed.push_back(triple_from_json(r));
        if (j.contains("per_question")) {
            for (const auto& [qid, entry] : j["per_question"].items()) {
                QuestionDisruption q;
                q.question_id = qid;
                if (entry.contains("skipped")) {
                    q.skipped = parse_skip_reason(entry["skipped"].get<std::string>());
                } else {
                    q.selected_path = entry.at("selected_path").get<std::string>();
                    q.removed = triple_from_json(entry.at("removed"));
                    q.shared = entry.value("shared", false);
                }
                m.per_question.push_back(std::move(q));
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed manifest: ") + e.what());
    }
}

void save_manifest(const std::string& path, const AblationManifest& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write manifest " + path);
    out << manifest_to_json(m);
}

AblationManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open manifest " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return manifest_from_json(buf.str());
}

}  // namespace kgab
