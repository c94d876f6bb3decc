#include "kgab/pcst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "kgab/errors.hpp"

namespace kgab {

void PrizedGraph::validate() const {
    for (double p : prizes) {
        if (!(p >= 0.0)) throw ConfigError("PCST prizes must be non-negative");
    }
    for (const auto& e : edges) {
        if (!(e.cost > 0.0)) throw ConfigError("PCST edge costs must be positive");
        if (e.u == e.v) throw ConfigError("PCST graph has a self-loop");
        if (e.u >= prizes.size() || e.v >= prizes.size()) throw ConfigError("PCST edge endpoint out of range");
    }
}

double pcst_objective(const PrizedGraph& g, std::span<const std::uint32_t> nodes, std::span<const std::size_t> edges) {
    double value = 0.0;
    for (auto n : nodes) value += g.prizes.at(n);
    for (auto e : edges) value -= g.edges.at(e).cost;
    return value;
}

namespace {

constexpr double kEps = 1e-9;

bool nearly_equal(double a, double b) { return std::fabs(a - b) <= kEps * (1.0 + std::fabs(a) + std::fabs(b)); }

class Dsu {
  public:
    explicit Dsu(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// The smaller representative survives, which keeps tie-breaking tied to node ids.
    std::uint32_t unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a > b) std::swap(a, b);
        parent_[b] = a;
        return a;
    }

  private:
    std::vector<std::uint32_t> parent_;
};

std::vector<std::size_t> edges_by_cost(const PrizedGraph& g) {
    std::vector<std::size_t> order(g.edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return g.edges[a].cost < g.edges[b].cost; });
    return order;
}

/// Minimum spanning tree of the subgraph induced by `in_set`; nullopt when it is disconnected.
std::optional<std::vector<std::size_t>> induced_mst(const PrizedGraph& g, const std::vector<std::size_t>& by_cost,
                                                    const std::vector<bool>& in_set, std::size_t set_size) {
    Dsu dsu(g.node_count());
    std::vector<std::size_t> chosen;
    for (auto ei : by_cost) {
        if (chosen.size() + 1 == set_size) break;
        const auto& e = g.edges[ei];
        if (!in_set[e.u] || !in_set[e.v]) continue;
        if (dsu.find(e.u) == dsu.find(e.v)) continue;
        dsu.unite(e.u, e.v);
        chosen.push_back(ei);
    }
    if (chosen.size() + 1 != set_size) return std::nullopt;
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

/// True when `a` should replace `best`: higher objective, or equal objective and a
/// lexicographically smaller node list.
bool better(const PcstTree& a, const PcstTree& best) {
    if (!nearly_equal(a.objective, best.objective)) return a.objective > best.objective;
    return std::lexicographical_compare(a.nodes.begin(), a.nodes.end(), best.nodes.begin(), best.nodes.end());
}

PcstTree solve_exact(const PrizedGraph& g, std::optional<std::uint32_t> root) {
    const auto n = g.node_count();
    if (n > kExactNodeGuard) {
        throw ConfigError("exact PCST is limited to " + std::to_string(kExactNodeGuard) + " nodes, got " +
                          std::to_string(n));
    }
    const auto by_cost = edges_by_cost(g);
    std::optional<PcstTree> best;
    std::vector<bool> in_set(n);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        if (root && !(mask & (1u << *root))) continue;
        PcstTree cand;
        double prize = 0.0;
        for (std::uint32_t v = 0; v < n; ++v) {
            in_set[v] = (mask >> v) & 1u;
            if (in_set[v]) {
                cand.nodes.push_back(v);
                prize += g.prizes[v];
            }
        }
        auto mst = induced_mst(g, by_cost, in_set, cand.nodes.size());
        if (!mst) continue;
        cand.edges = std::move(*mst);
        cand.objective = prize;
        for (auto ei : cand.edges) cand.objective -= g.edges[ei].cost;
        if (!best || better(cand, *best)) best = std::move(cand);
    }
    return best.value_or(PcstTree{});
}

/// Goemans-Williamson cluster growth. Every active cluster raises its dual at rate 1 until its
/// prize budget is spent; an edge joins the forest once the duals on both sides pay its cost.
std::vector<std::size_t> grow_forest(const PrizedGraph& g, std::vector<PcstEvent>* events) {
    const auto n = g.node_count();
    Dsu dsu(n);
    std::vector<double> remaining(g.prizes);
    std::vector<bool> active(n);
    for (std::size_t v = 0; v < n; ++v) active[v] = remaining[v] > kEps;
    std::vector<double> load(g.edges.size(), 0.0);
    std::vector<std::size_t> forest;
    double now = 0.0;

    for (;;) {
        double best_edge_t = std::numeric_limits<double>::infinity();
        std::size_t best_edge = 0;
        for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
            const auto a = dsu.find(g.edges[ei].u);
            const auto b = dsu.find(g.edges[ei].v);
            if (a == b) continue;
            const int rate = int(active[a]) + int(active[b]);
            if (rate == 0) continue;
            const double t = std::max(0.0, (g.edges[ei].cost - load[ei]) / rate);
            if (t < best_edge_t) {
                best_edge_t = t;
                best_edge = ei;
            }
        }
        double best_cluster_t = std::numeric_limits<double>::infinity();
        std::uint32_t best_cluster = 0;
        for (std::uint32_t v = 0; v < n; ++v) {
            if (dsu.find(v) != v || !active[v]) continue;
            if (remaining[v] < best_cluster_t) {
                best_cluster_t = remaining[v];
                best_cluster = v;
            }
        }
        const double delta = std::min(best_edge_t, best_cluster_t);
        if (!std::isfinite(delta)) break;

        for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
            const auto a = dsu.find(g.edges[ei].u);
            const auto b = dsu.find(g.edges[ei].v);
            if (a != b) load[ei] += delta * (int(active[a]) + int(active[b]));
        }
        for (std::uint32_t v = 0; v < n; ++v) {
            if (dsu.find(v) == v && active[v]) remaining[v] -= delta;
        }
        now += delta;

        if (best_edge_t <= best_cluster_t) {
            const auto a = dsu.find(g.edges[best_edge].u);
            const auto b = dsu.find(g.edges[best_edge].v);
            const auto r = dsu.unite(a, b);
            remaining[r] = std::max(0.0, (active[a] ? remaining[a] : 0.0) + (active[b] ? remaining[b] : 0.0));
            active[r] = remaining[r] > kEps;
            forest.push_back(best_edge);
            if (events) events->push_back({PcstEvent::Kind::merge, now, std::min(a, b), std::max(a, b), best_edge});
        } else {
            active[best_cluster] = false;
            remaining[best_cluster] = 0.0;
            if (events) events->push_back({PcstEvent::Kind::deactivate, now, best_cluster});
        }
    }
    return forest;
}

/// Strong pruning on the grown forest: the best subtree hanging from each node keeps a child
/// subtree only if it pays for its connecting edge.
PcstTree prune_forest(const PrizedGraph& g, const std::vector<std::size_t>& forest, std::optional<std::uint32_t> root) {
    const auto n = g.node_count();
    std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> adj(n);
    for (auto ei : forest) {
        adj[g.edges[ei].u].push_back({g.edges[ei].v, ei});
        adj[g.edges[ei].v].push_back({g.edges[ei].u, ei});
    }

    std::vector<std::int64_t> parent(n, -1);
    std::vector<std::size_t> parent_edge(n, 0);
    std::vector<bool> seen(n, false);
    std::vector<double> value(n, 0.0);

    // Root each component at `root` if it contains it, otherwise at its smallest node.
    std::vector<std::uint32_t> starts;
    if (root) starts.push_back(*root);
    for (std::uint32_t v = 0; v < n; ++v) starts.push_back(v);
    for (auto s : starts) {
        if (seen[s]) continue;
        std::vector<std::uint32_t> order{s};
        seen[s] = true;
        for (std::size_t i = 0; i < order.size(); ++i) {
            for (auto [w, ei] : adj[order[i]]) {
                if (seen[w]) continue;
                seen[w] = true;
                parent[w] = order[i];
                parent_edge[w] = ei;
                order.push_back(w);
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            value[*it] += g.prizes[*it];
            if (parent[*it] >= 0) {
                const double gain = value[*it] - g.edges[parent_edge[*it]].cost;
                if (gain > kEps) value[static_cast<std::size_t>(parent[*it])] += gain;
            }
        }
    }

    std::uint32_t top = 0;
    if (root) {
        top = *root;
    } else {
        for (std::uint32_t v = 1; v < n; ++v) {
            if (value[v] > value[top] && !nearly_equal(value[v], value[top])) top = v;
        }
    }

    PcstTree tree;
    std::vector<std::uint32_t> stack{top};
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        tree.nodes.push_back(v);
        for (auto [w, ei] : adj[v]) {
            if (parent[w] != static_cast<std::int64_t>(v)) continue;
            if (value[w] - g.edges[ei].cost > kEps) {
                tree.edges.push_back(ei);
                stack.push_back(w);
            }
        }
    }
    std::sort(tree.nodes.begin(), tree.nodes.end());
    return tree;
}

PcstTree solve_approx(const PrizedGraph& g, std::optional<std::uint32_t> root, std::vector<PcstEvent>* events) {
    if (g.node_count() == 0) return {};
    const auto forest = grow_forest(g, events);
    auto tree = prune_forest(g, forest, root);

    // Reconnect the kept nodes by their cheapest spanning tree; never worse than the forest edges.
    std::vector<bool> in_set(g.node_count(), false);
    for (auto v : tree.nodes) in_set[v] = true;
    if (auto mst = induced_mst(g, edges_by_cost(g), in_set, tree.nodes.size())) tree.edges = std::move(*mst);
    std::sort(tree.edges.begin(), tree.edges.end());
    tree.objective = pcst_objective(g, tree.nodes, tree.edges);
    return tree;
}

}  // namespace

PcstTree solve_pcst(const PrizedGraph& g, const PcstOptions& options) {
    g.validate();
    if (options.root && *options.root >= g.node_count()) throw ConfigError("PCST root out of range");
    return options.mode == PcstMode::exact ? solve_exact(g, options.root)
                                           : solve_approx(g, options.root, options.events);
}

std::map<EntityId, double> assign_prizes(std::span<const EntityId> ranked_candidates, int k) {
    if (k <= 0) throw ConfigError("k must be positive");
    std::map<EntityId, double> prizes;
    for (std::size_t i = 0; i < ranked_candidates.size(); ++i) {
        const double prize = static_cast<std::int64_t>(i) < k ? static_cast<double>(k - static_cast<int>(i)) : 0.0;
        if (!prizes.emplace(ranked_candidates[i], prize).second) {
            throw InputError("ranked candidates must be distinct");
        }
    }
    return prizes;
}

std::string events_to_json(std::span<const PcstEvent> events) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : events) {
        nlohmann::ordered_json j;
        j["kind"] = e.kind == PcstEvent::Kind::merge ? "merge" : "deactivate";
        j["time"] = e.time;
        j["cluster"] = e.cluster;
        if (e.kind == PcstEvent::Kind::merge) {
            j["other"] = e.other;
            j["edge"] = e.edge;
        }
        arr.push_back(std::move(j));
    }
    return arr.dump();
}

}  // namespace kgab
