#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgab/kg.hpp"

namespace kgab {

struct PcstEdge {
    std::uint32_t u;
    std::uint32_t v;
    double cost;
    std::uint32_t tag = 0;  // caller payload, e.g. the KG triple id the edge was projected from
};

/// Undirected node-weighted graph over dense node ids 0..n-1.
struct PrizedGraph {
    std::vector<double> prizes;
    std::vector<PcstEdge> edges;

    [[nodiscard]] std::size_t node_count() const noexcept { return prizes.size(); }
    /// Throws ConfigError on negative prizes, non-positive costs, self-loops or dangling endpoints.
    void validate() const;
};

enum class PcstMode : std::uint8_t { exact, approx };

constexpr std::size_t kExactNodeGuard = 20;

struct PcstTree {
    std::vector<std::uint32_t> nodes;  // ascending
    std::vector<std::size_t> edges;    // indices into PrizedGraph::edges, ascending
    double objective = 0.0;
};

/// One step of cluster growth in the approximate solver.
struct PcstEvent {
    enum class Kind : std::uint8_t { merge, deactivate } kind;
    double time;
    std::uint32_t cluster;       // representative node of the (first) cluster involved
    std::uint32_t other = 0;     // merge only
    std::size_t edge = 0;        // merge only
};

struct PcstOptions {
    PcstMode mode = PcstMode::exact;
    /// When set the tree must contain this node.
    std::optional<std::uint32_t> root;
    /// Receives cluster-growth events from the approximate solver.
    std::vector<PcstEvent>* events = nullptr;
};

/// Connected acyclic subgraph maximizing sum(prizes of kept nodes) - sum(costs of kept edges).
///
/// Exact mode enumerates node subsets (at most kExactNodeGuard nodes) and connects each with its
/// minimum spanning tree; ties go to the lexicographically smallest node list. Approx mode grows
/// clusters Goemans-Williamson style, then strong-prunes the resulting forest. Both return a
/// non-empty tree for a non-empty graph, so the objective is never below the best single prize.
PcstTree solve_pcst(const PrizedGraph& g, const PcstOptions& options = {});

/// Objective of an arbitrary node/edge selection (no feasibility check).
double pcst_objective(const PrizedGraph& g, std::span<const std::uint32_t> nodes, std::span<const std::size_t> edges);

/// i-th ranked candidate (0-based, i < k) receives prize k - i; the rest of the ranking gets 0.
/// Throws ConfigError for k <= 0 and InputError for repeated candidates.
std::map<EntityId, double> assign_prizes(std::span<const EntityId> ranked_candidates, int k);

/// JSON array of cluster-growth events, for debugging.
std::string events_to_json(std::span<const PcstEvent> events);

}  // namespace kgab
