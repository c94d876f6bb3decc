#pragma once

// Fixtures and brute-force oracles shared by the unit and acceptance tests. The oracles work on
// raw triple lists and never call the library's search code.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kgab/datasets.hpp"
#include "kgab/kg.hpp"
#include "kgab/paths.hpp"
#include "kgab/pcst.hpp"
#include "kgab/seeding.hpp"

namespace kgab::testing {

using Spo = std::array<const char*, 3>;

inline Kg make_kg(std::initializer_list<Spo> rows) {
    std::vector<LabeledTriple> triples;
    for (const auto& r : rows) triples.push_back({r[0], r[1], r[2]});
    return Kg::build(triples);
}

inline Question make_question(std::string id, std::string text, std::vector<std::string> topics,
                              std::vector<std::string> answers) {
    Question q{std::move(id), std::move(text), std::move(topics), {}};
    for (auto& a : answers) q.answers.push_back({std::move(a), {}});
    return q;
}

inline EntityId entity(const Kg& kg, const char* label) { return kg.find_entity(label).value(); }
inline RelationId relation(const Kg& kg, const char* label) { return kg.find_relation(label).value(); }
inline TripleId triple(const Kg& kg, const char* h, const char* r, const char* t) {
    return kg.find_triple(h, r, t).value();
}

// Three-triple sibling example.
inline Kg sibling_kg() {
    return make_kg({{"JustinBieber", "has_brother", "JaxonBieber"},
                    {"JustinBieber", "has_parent", "JeremyBieber"},
                    {"JeremyBieber", "has_child", "JaxonBieber"}});
}
inline Question sibling_question() {
    return make_question("fig1", "Who is the brother of Justin Bieber?", {"JustinBieber"}, {"JaxonBieber"});
}

// Case-study fragments.
inline Kg nigeria_kg() {
    return make_kg({{"Nigeria", "time zones", "West Africa Time Zone"},
                    {"Nigeria", "administrative division", "Bauchi"},
                    {"Bauchi", "time zones", "West Africa Time Zone"}});
}
inline Question nigeria_question() {
    return make_question("WebQTest-436", "What is the Nigeria time?", {"Nigeria"}, {"West Africa Time Zone"});
}

inline Kg oregon_kg() {
    return make_kg({{"University of Oregon", "contained by", "Eugene"},
                    {"University of Oregon", "has campus", "Eugene Campus"},
                    {"Eugene Campus", "contained by", "Eugene"}});
}
inline Question oregon_question() {
    return make_question("WebQTest-1481", "What city is the University of Oregon state in?",
                         {"University of Oregon"}, {"Eugene"});
}

inline Kg bieber_kg() {
    return make_kg({{"Justin Bieber", "nationality", "Canada"},
                    {"Justin Bieber", "place of birth", "London"},
                    {"London", "contained by", "Canada"},
                    {"Justin Bieber", "place lived", "Stratford"},
                    {"Stratford", "contained by", "Canada"}});
}
inline Question bieber_question() {
    return make_question("WebQTest-116", "which country was Justin Bieber born in?", {"Justin Bieber"}, {"Canada"});
}

// ---------------------------------------------------------------------------
// Random instances

inline Kg random_kg(Engine& rng, std::size_t entities, std::size_t triples, std::size_t relations) {
    std::vector<LabeledTriple> rows;
    for (std::size_t i = 0; i < triples; ++i) {
        const auto h = uniform_below(rng, entities);
        const auto t = uniform_below(rng, entities);
        if (h == t) continue;
        rows.push_back({"e" + std::to_string(h), "r" + std::to_string(uniform_below(rng, relations)),
                        "e" + std::to_string(t)});
    }
    return Kg::build(rows);
}

inline PrizedGraph random_prized_graph(Engine& rng, std::size_t max_nodes) {
    PrizedGraph g;
    const auto n = 1 + uniform_below(rng, max_nodes);
    for (std::size_t i = 0; i < n; ++i) {
        // Quarter steps keep sums exact in binary floating point.
        g.prizes.push_back(uniform_below(rng, 3) == 0 ? 0.0 : static_cast<double>(uniform_below(rng, 17)) / 4.0);
    }
    const auto edges = n < 2 ? 0 : uniform_below(rng, std::min<std::uint64_t>(2 * n, 13) + 1);
    for (std::size_t i = 0; i < edges; ++i) {
        const auto u = static_cast<std::uint32_t>(uniform_below(rng, n));
        auto v = static_cast<std::uint32_t>(uniform_below(rng, n - 1));
        if (v >= u) ++v;
        g.edges.push_back({u, v, static_cast<double>(1 + uniform_below(rng, 12)) / 4.0, 0});
    }
    return g;
}

// ---------------------------------------------------------------------------
// Oracles

/// One walked triple: id and whether it was walked head -> tail.
struct RawStep {
    std::uint32_t triple;
    bool forward;
    std::uint32_t to;
    auto operator<=>(const RawStep&) const = default;
};

struct RawPath {
    std::uint32_t start;
    std::vector<RawStep> steps;
    [[nodiscard]] std::uint32_t end() const { return steps.empty() ? start : steps.back().to; }
    auto operator<=>(const RawPath&) const = default;
};

inline RawPath to_raw(const ReasoningPath& p) {
    RawPath r{index(p.start), {}};
    for (const auto& s : p.steps) r.steps.push_back({index(s.triple), s.dir == StepDir::fwd, index(s.entity)});
    return r;
}

inline std::set<RawPath> to_raw(const std::vector<ReasoningPath>& ps) {
    std::set<RawPath> out;
    for (const auto& p : ps) out.insert(to_raw(p));
    return out;
}

/// Every simple path of 1..max_hops steps from `source`, by exhaustive DFS over the triple list.
inline std::vector<RawPath> all_simple_paths(const KgView& view, std::uint32_t source, int max_hops, bool bidirectional) {
    const auto triples = view.kg().triples();
    std::vector<RawPath> out;
    RawPath cur{source, {}};
    std::vector<std::uint32_t> on_path{source};
    std::function<void(std::uint32_t)> dfs = [&](std::uint32_t at) {
        if (static_cast<int>(cur.steps.size()) == max_hops) return;
        for (const auto& t : triples) {
            if (!view.contains(t.id)) continue;
            for (int orientation = 0; orientation < (bidirectional ? 2 : 1); ++orientation) {
                const bool fwd = orientation == 0;
                const auto from = index(fwd ? t.head : t.tail);
                const auto to = index(fwd ? t.tail : t.head);
                if (from != at) continue;
                if (std::find(on_path.begin(), on_path.end(), to) != on_path.end()) continue;
                cur.steps.push_back({index(t.id), fwd, to});
                on_path.push_back(to);
                out.push_back(cur);
                dfs(to);
                on_path.pop_back();
                cur.steps.pop_back();
            }
        }
    };
    dfs(source);
    return out;
}

/// Hop distance by repeated relaxation over the edge list (no queue), or nullopt.
inline std::optional<int> hop_distance(const KgView& view, const std::vector<std::uint32_t>& sources,
                                       const std::vector<std::uint32_t>& targets, bool bidirectional) {
    const auto n = view.kg().entity_count();
    constexpr int inf = std::numeric_limits<int>::max();
    std::vector<int> d(n, inf);
    for (auto s : sources) d[s] = 0;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& t : view.kg().triples()) {
            if (!view.contains(t.id)) continue;
            auto relax = [&](std::uint32_t a, std::uint32_t b) {
                if (d[a] != inf && d[a] + 1 < d[b]) {
                    d[b] = d[a] + 1;
                    changed = true;
                }
            };
            relax(index(t.head), index(t.tail));
            if (bidirectional) relax(index(t.tail), index(t.head));
        }
    }
    int best = inf;
    for (auto t : targets) best = std::min(best, d[t]);
    if (best == inf) return std::nullopt;
    return best;
}

/// Best PCST objective by enumerating every edge subset that forms a tree, plus every single node.
inline double brute_force_pcst(const PrizedGraph& g, std::optional<std::uint32_t> root = std::nullopt) {
    const auto n = g.node_count();
    const auto m = g.edges.size();
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint32_t v = 0; v < n; ++v) {
        if (!root || *root == v) best = std::max(best, g.prizes[v]);
    }
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
        std::vector<std::uint32_t> parent(n);
        for (std::uint32_t i = 0; i < n; ++i) parent[i] = i;
        std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t x) {
            return parent[x] == x ? x : parent[x] = find(parent[x]);
        };
        std::set<std::uint32_t> nodes;
        double cost = 0.0;
        bool acyclic = true;
        for (std::size_t e = 0; e < m && acyclic; ++e) {
            if (!(mask >> e & 1)) continue;
            const auto a = find(g.edges[e].u), b = find(g.edges[e].v);
            if (a == b) acyclic = false;
            parent[a] = b;
            nodes.insert(g.edges[e].u);
            nodes.insert(g.edges[e].v);
            cost += g.edges[e].cost;
        }
        if (!acyclic) continue;
        std::set<std::uint32_t> roots;
        for (auto v : nodes) roots.insert(find(v));
        if (roots.size() != 1) continue;
        if (root && !nodes.count(*root)) continue;
        double prize = 0.0;
        for (auto v : nodes) prize += g.prizes[v];
        best = std::max(best, prize - cost);
    }
    return best;
}

/// True when the selection is a tree over exactly `nodes` (or a single node with no edges).
inline bool is_tree(const PrizedGraph& g, const PcstTree& t) {
    if (t.nodes.empty()) return false;
    if (t.edges.size() + 1 != t.nodes.size()) return false;
    std::map<std::uint32_t, std::uint32_t> parent;
    for (auto v : t.nodes) parent[v] = v;
    std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (auto e : t.edges) {
        const auto& edge = g.edges.at(e);
        if (!parent.count(edge.u) || !parent.count(edge.v)) return false;
        const auto a = find(edge.u), b = find(edge.v);
        if (a == b) return false;
        parent[a] = b;
    }
    std::set<std::uint32_t> roots;
    for (auto v : t.nodes) roots.insert(find(v));
    return roots.size() == 1;
}

}  // namespace kgab::testing
