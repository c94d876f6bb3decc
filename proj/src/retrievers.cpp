#include "kgab/retrievers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "kgab/errors.hpp"
#include "kgab/seeding.hpp"
#include "kgab/text.hpp"

namespace kgab {

std::string to_string(RetrievalMethod m) {
    switch (m) {
        case RetrievalMethod::rog: return "rog";
        case RetrievalMethod::tog: return "tog";
        case RetrievalMethod::gretriever: return "gretriever";
        case RetrievalMethod::oracle: return "oracle";
        case RetrievalMethod::none: return "none";
    }
    return "none";
}

RetrievalMethod parse_retrieval_method(std::string_view s) {
    if (s == "rog") return RetrievalMethod::rog;
    if (s == "tog") return RetrievalMethod::tog;
    if (s == "gretriever") return RetrievalMethod::gretriever;
    if (s == "oracle") return RetrievalMethod::oracle;
    if (s == "none") return RetrievalMethod::none;
    throw ConfigError("unknown retriever \"" + std::string(s) + "\"");
}

// ---------------------------------------------------------------------------
// Test-grade planner / scorer / embedder

OraclePlanner::OraclePlanner(const Kg& intact, int max_hops, DirectionMode direction)
    : kg_(&intact), max_hops_(max_hops), direction_(direction) {}

std::vector<RelationPlan> OraclePlanner::plan(const Question& q, std::size_t top_k) const {
    const auto topics = resolve_topics(*kg_, q);
    const auto answers = resolve_answers(*kg_, q);
    if (topics.empty() || answers.empty()) return {};
    std::vector<RelationPlan> plans;
    const KgView intact(*kg_);
    for (const auto& path : shortest_paths_from_any(intact, topics, answers, max_hops_, direction_)) {
        if (path.length() == 0) continue;
        RelationPlan plan;
        for (auto r : path.relations()) plan.push_back(kg_->relation_label(r));
        if (std::find(plans.begin(), plans.end(), plan) == plans.end()) plans.push_back(std::move(plan));
        if (plans.size() == top_k) break;
    }
    return plans;
}

std::vector<RelationPlan> FixedPlanner::plan(const Question&, std::size_t top_k) const {
    return {plans_.begin(), plans_.begin() + static_cast<std::ptrdiff_t>(std::min(top_k, plans_.size()))};
}

double LexicalScorer::score(const Question& q, std::string_view candidate) const {
    const auto question_tokens = text::word_tokens(q.text);
    const std::set<std::string> asked(question_tokens.begin(), question_tokens.end());
    if (asked.empty()) return 0.0;
    const auto candidate_tokens = text::word_tokens(candidate);
    const std::set<std::string> offered(candidate_tokens.begin(), candidate_tokens.end());
    std::size_t shared = 0;
    for (const auto& t : asked) shared += offered.count(t);
    return static_cast<double>(shared) / static_cast<double>(asked.size());
}

std::vector<double> HashingEmbedder::embed(std::string_view text) const {
    std::vector<double> v(dims_, 0.0);
    for (const auto& token : text::word_tokens(text)) {
        const auto h = fnv1a64(token);
        v[h % dims_] += (h >> 63) ? -1.0 : 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) noexcept {
    const auto n = std::min(a.size(), b.size());
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// Evidence templates

namespace {

std::string triple_line(const Kg& kg, TripleId id) {
    const auto& t = kg.triple(id);
    return kg.entity_label(t.head) + " --" + kg.relation_label(t.relation) + "--> " + kg.entity_label(t.tail);
}

void append_line(std::string& out, const std::string& line) {
    if (!out.empty()) out += '\n';
    out += line;
}

}  // namespace

std::string textualize_subgraph(const Kg& kg, std::span<const TripleId> triples) {
    std::vector<TripleId> sorted(triples.begin(), triples.end());
    std::sort(sorted.begin(), sorted.end(), [](TripleId a, TripleId b) { return index(a) < index(b); });
    std::string out;
    for (auto id : sorted) append_line(out, triple_line(kg, id));
    return out;
}

std::string textualize_paths(const Kg& kg, std::span<const ReasoningPath> paths) {
    std::string out;
    for (const auto& p : paths) {
        if (p.steps.empty()) {
            append_line(out, kg.entity_label(p.start));
            continue;
        }
        for (const auto& s : p.steps) append_line(out, triple_line(kg, s.triple));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Retrievers

namespace {

RetrievalResult empty_result(RetrievalMethod method, std::string note) {
    RetrievalResult r;
    r.method = method;
    r.trace.push_back(std::move(note));
    return r;
}

void dedupe_canonical(std::vector<ReasoningPath>& paths) {
    sort_canonical(paths);
    paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
}

std::string join_plan(const RelationPlan& plan) {
    std::string s;
    for (const auto& r : plan) s += (s.empty() ? "" : " -> ") + r;
    return s.empty() ? "<empty>" : s;
}

}  // namespace

RetrievalResult rog_retrieve(const KgView& view, const Question& q, const Planner& planner, const RogParams& params) {
    if (params.top_k_plans == 0) throw ConfigError("top_k_plans must be positive");
    const Kg& kg = view.kg();
    const auto topics = resolve_topics(kg, q);
    if (topics.empty()) return empty_result(RetrievalMethod::rog, "no topic entity resolvable in the KG");

    RetrievalResult result;
    result.method = RetrievalMethod::rog;
    auto plans = planner.plan(q, params.top_k_plans);
    if (plans.size() > params.top_k_plans) plans.resize(params.top_k_plans);
    if (plans.empty()) result.trace.push_back("planner returned no plans");

    for (const auto& plan : plans) {
        if (plan.empty()) {
            result.trace.push_back("plan <empty>: skipped");
            continue;
        }
        std::vector<RelationId> relations;
        for (const auto& label : plan) {
            if (auto id = kg.find_relation(label)) {
                relations.push_back(*id);
            } else {
                result.trace.push_back("plan " + join_plan(plan) + ": unknown relation \"" + label + "\"");
                relations.clear();
                break;
            }
        }
        if (relations.empty()) continue;
        std::size_t grounded = 0;
        for (auto topic : topics) {
            auto paths = ground_relation_path(view, topic, relations, params.direction);
            grounded += paths.size();
            result.paths.insert(result.paths.end(), paths.begin(), paths.end());
        }
        result.trace.push_back("plan " + join_plan(plan) + ": " + std::to_string(grounded) + " grounded paths");
    }
    dedupe_canonical(result.paths);
    result.evidence_text = textualize_paths(kg, result.paths);
    return result;
}

RetrievalResult tog_retrieve(const KgView& view, const Question& q, const Scorer& scorer, const TogParams& params) {
    if (params.beam_width == 0) throw ConfigError("beam_width must be positive");
    if (params.max_depth < 1) throw ConfigError("max_depth must be positive");
    const Kg& kg = view.kg();
    const auto topics = resolve_topics(kg, q);
    if (topics.empty()) return empty_result(RetrievalMethod::tog, "no topic entity resolvable in the KG");

    RetrievalResult result;
    result.method = RetrievalMethod::tog;
    const auto dir = to_direction(params.direction);

    std::vector<ReasoningPath> frontier;
    for (auto t : topics) frontier.push_back(ReasoningPath{t, {}});

    for (int depth = 1; depth <= params.max_depth; ++depth) {
        struct Scored {
            ReasoningPath path;
            double score;
        };
        std::vector<Scored> candidates;
        for (const auto& p : frontier) {
            for (const auto& n : view.neighbors(p.end(), dir)) {
                if (p.visits(n.neighbor)) continue;
                ReasoningPath ext = p;
                ext.steps.push_back({n.relation, n.dir, n.neighbor, n.triple});
                const double s = scorer.score(q, format_path(kg, ext));
                candidates.push_back({std::move(ext), s});
            }
        }
        if (candidates.empty()) {
            result.trace.push_back("depth " + std::to_string(depth) + ": no expansions");
            break;
        }
        std::stable_sort(candidates.begin(), candidates.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            return canonical_less(a.path, b.path);
        });
        const auto total = candidates.size();
        if (candidates.size() > params.beam_width) candidates.resize(params.beam_width);

        frontier.clear();
        for (auto& c : candidates) frontier.push_back(std::move(c.path));
        result.paths = frontier;
        result.trace.push_back("depth " + std::to_string(depth) + ": kept " + std::to_string(frontier.size()) +
                               " of " + std::to_string(total) + " candidates");

        if (params.stop_threshold) {
            const bool sufficient = std::any_of(frontier.begin(), frontier.end(), [&](const ReasoningPath& p) {
                return scorer.score(q, kg.entity_label(p.end())) >= *params.stop_threshold;
            });
            if (sufficient) {
                result.trace.push_back("depth " + std::to_string(depth) + ": evidence judged sufficient, stopping");
                break;
            }
        }
    }
    result.evidence_text = textualize_paths(kg, result.paths);
    return result;
}

RetrievalResult gretriever_retrieve(const KgView& view, const Question& q, const Embedder& embedder,
                                    const GRetrieverParams& params) {
    if (params.k_nodes == 0) throw ConfigError("k_nodes must be positive");
    if (params.hop_radius != 1 && params.hop_radius != 2) throw ConfigError("hop_radius must be 1 or 2");
    if (!(params.edge_cost > 0.0)) throw ConfigError("edge_cost must be positive");
    const Kg& kg = view.kg();
    const auto topics = resolve_topics(kg, q);
    if (topics.empty()) return empty_result(RetrievalMethod::gretriever, "no topic entity resolvable in the KG");

    RetrievalResult result;
    result.method = RetrievalMethod::gretriever;

    // (1) candidate pool: everything within hop_radius of a topic, either direction.
    std::unordered_map<std::uint32_t, int> depth;
    std::vector<EntityId> pool;
    std::deque<EntityId> queue;
    for (auto t : topics) {
        depth.emplace(index(t), 0);
        pool.push_back(t);
        queue.push_back(t);
    }
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        if (depth[index(u)] >= params.hop_radius) continue;
        for (const auto& n : view.neighbors(u, Direction::both)) {
            if (depth.emplace(index(n.neighbor), depth[index(u)] + 1).second) {
                pool.push_back(n.neighbor);
                queue.push_back(n.neighbor);
            }
        }
    }

    // (2) rank by similarity to the question; ties by entity id.
    const auto question_vec = embedder.embed(q.text);
    std::vector<std::pair<double, EntityId>> ranked;
    for (auto e : pool) ranked.emplace_back(cosine_similarity(question_vec, embedder.embed(kg.entity_label(e))), e);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return index(a.second) < index(b.second);
    });
    std::vector<EntityId> order;
    for (const auto& [_, e] : ranked) order.push_back(e);

    // (3) prizes over the top k_nodes.
    const auto prizes = assign_prizes(order, static_cast<int>(params.k_nodes));

    // (4) PCST on the candidate-induced subgraph. Node ids follow rank order, so exact-mode ties
    // prefer trees holding better-ranked candidates.
    PrizedGraph g;
    std::unordered_map<std::uint32_t, std::uint32_t> node_of;
    for (std::uint32_t i = 0; i < order.size(); ++i) {
        node_of.emplace(index(order[i]), i);
        g.prizes.push_back(prizes.at(order[i]));
    }
    for (auto e : order) {
        for (const auto& n : view.neighbors(e, Direction::forward)) {
            auto it = node_of.find(index(n.neighbor));
            if (it == node_of.end() || n.neighbor == e) continue;
            g.edges.push_back({node_of.at(index(e)), it->second, params.edge_cost, index(n.triple)});
        }
    }
    const auto mode = params.mode.value_or(g.node_count() <= kExactNodeGuard ? PcstMode::exact : PcstMode::approx);

    std::optional<PcstTree> best;
    for (auto t : topics) {
        auto tree = solve_pcst(g, PcstOptions{mode, node_of.at(index(t)), nullptr});
        const bool wins = !best || (tree.objective > best->objective + 1e-9) ||
                          (std::fabs(tree.objective - best->objective) <= 1e-9 &&
                           std::lexicographical_compare(tree.nodes.begin(), tree.nodes.end(), best->nodes.begin(),
                                                        best->nodes.end()));
        if (wins) best = std::move(tree);
    }

    for (const auto& [score, e] : ranked) {
        if (prizes.at(e) > 0.0) {
            result.trace.push_back("prize " + std::to_string(static_cast<int>(prizes.at(e))) + " -> " +
                                   kg.entity_label(e));
        }
    }
    result.trace.push_back("pcst " + std::string(mode == PcstMode::exact ? "exact" : "approx") + " over " +
                           std::to_string(g.node_count()) + " nodes / " + std::to_string(g.edges.size()) +
                           " edges, objective " + std::to_string(best->objective));

    // (5) the tree's triples, original orientation.
    for (auto ei : best->edges) result.subgraph.push_back(TripleId{g.edges[ei].tag});
    for (auto v : best->nodes) result.subgraph_nodes.push_back(order[v]);
    std::sort(result.subgraph.begin(), result.subgraph.end(),
              [](TripleId a, TripleId b) { return index(a) < index(b); });
    std::sort(result.subgraph_nodes.begin(), result.subgraph_nodes.end(),
              [](EntityId a, EntityId b) { return index(a) < index(b); });
    result.evidence_text = textualize_subgraph(kg, result.subgraph);
    return result;
}

RetrievalResult oracle_retrieve(const KgView& view, const Question& q, int max_hops, DirectionMode direction) {
    const Kg& kg = view.kg();
    const auto topics = resolve_topics(kg, q);
    const auto answers = resolve_answers(kg, q);
    if (topics.empty() || answers.empty()) {
        return empty_result(RetrievalMethod::oracle, "topic or answer entity not resolvable in the KG");
    }
    RetrievalResult result;
    result.method = RetrievalMethod::oracle;
    result.paths = shortest_paths_from_any(view, topics, answers, max_hops, direction);
    result.trace.push_back(std::to_string(result.paths.size()) + " shortest paths");
    result.evidence_text = textualize_paths(kg, result.paths);
    return result;
}

bool verify_in_view(const KgView& view, const RetrievalResult& result) {
    if (!std::all_of(result.paths.begin(), result.paths.end(),
                     [&](const ReasoningPath& p) { return is_valid_path(view, p); })) {
        return false;
    }
    if (!std::all_of(result.subgraph.begin(), result.subgraph.end(),
                     [&](TripleId id) { return view.contains(id); })) {
        return false;
    }
    // A subgraph must be a tree over its nodes.
    if (result.method == RetrievalMethod::gretriever && !result.subgraph_nodes.empty()) {
        if (result.subgraph.size() + 1 != result.subgraph_nodes.size()) return false;
        std::set<std::uint32_t> nodes;
        for (auto e : result.subgraph_nodes) nodes.insert(index(e));
        std::unordered_map<std::uint32_t, std::uint32_t> parent;
        for (auto n : nodes) parent[n] = n;
        auto find = [&](std::uint32_t x) {
            while (parent[x] != x) x = parent[x];
            return x;
        };
        for (auto id : result.subgraph) {
            const auto& t = view.kg().triple(id);
            if (!nodes.count(index(t.head)) || !nodes.count(index(t.tail))) return false;
            const auto a = find(index(t.head));
            const auto b = find(index(t.tail));
            if (a == b) return false;
            parent[a] = b;
        }
    }
    return true;
}

std::string trace_to_json(const Kg& kg, const RetrievalResult& result) {
    nlohmann::ordered_json j;
    j["method"] = to_string(result.method);
    auto paths = nlohmann::ordered_json::array();
    for (const auto& p : result.paths) paths.push_back(format_path(kg, p));
    j["paths"] = std::move(paths);
    auto triples = nlohmann::ordered_json::array();
    for (auto id : result.subgraph) triples.push_back(triple_line(kg, id));
    j["subgraph"] = std::move(triples);
    j["evidence"] = result.evidence_text;
    j["trace"] = result.trace;
    return j.dump();
}

}  // namespace kgab
