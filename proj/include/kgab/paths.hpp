#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kgab/kg.hpp"

namespace kgab {

/// Traversal convention for path search. Bidirectional also walks triples tail -> head.
enum class DirectionMode : std::uint8_t { forward_only, bidirectional };

constexpr Direction to_direction(DirectionMode mode) noexcept {
    return mode == DirectionMode::forward_only ? Direction::forward : Direction::both;
}

constexpr int kDefaultMaxHops = 4;
constexpr int kEnumerationHopGuard = 6;

struct PathStep {
    RelationId relation;
    StepDir dir;
    EntityId entity;  // entity reached by this step
    TripleId triple;

    bool operator==(const PathStep&) const = default;
};

/// e0 -r1-> e1 -r2-> ... -rl-> el, each step remembering the triple it walked and its orientation.
struct ReasoningPath {
    EntityId start{};
    std::vector<PathStep> steps;

    [[nodiscard]] std::size_t length() const noexcept { return steps.size(); }
    [[nodiscard]] EntityId end() const noexcept { return steps.empty() ? start : steps.back().entity; }
    [[nodiscard]] bool visits(EntityId e) const noexcept;
    [[nodiscard]] std::vector<TripleId> triple_ids() const;
    [[nodiscard]] std::vector<RelationId> relations() const;

    bool operator==(const ReasoningPath&) const = default;
};

/// Total order: length, then start, then per-step (triple id, direction). This is the order
/// search results come back in.
bool canonical_less(const ReasoningPath& a, const ReasoningPath& b) noexcept;
void sort_canonical(std::vector<ReasoningPath>& paths);

/// True when every step chains from the previous entity through a triple present in `view`
/// with matching orientation, and no entity repeats.
bool is_valid_path(const KgView& view, const ReasoningPath& path);

/// `e0 --[r1]--> e1 <--[r2]-- e2` (a backward step means the triple is e2 -r2-> e1).
std::string format_path(const Kg& kg, const ReasoningPath& path);

/// All simple paths of globally minimal length L* <= max_hops from `source` to any of `targets`.
/// Empty when nothing is reachable within max_hops; a single zero-length path when source is a target.
std::vector<ReasoningPath> shortest_paths(const KgView& view, EntityId source, std::span<const EntityId> targets,
                                          int max_hops = kDefaultMaxHops,
                                          DirectionMode mode = DirectionMode::bidirectional);

/// shortest_paths from each source, keeping only those of the globally minimal length across
/// sources; grouped by source order.
std::vector<ReasoningPath> shortest_paths_from_any(const KgView& view, std::span<const EntityId> sources,
                                                   std::span<const EntityId> targets,
                                                   int max_hops = kDefaultMaxHops,
                                                   DirectionMode mode = DirectionMode::bidirectional);

/// Visits every simple path of length 1..max_hops exactly once: all length-1 paths in canonical
/// order, then length 2, and so on. Returning false from `visit` stops the enumeration.
void enumerate_paths(const KgView& view, EntityId source, int max_hops, DirectionMode mode,
                     const std::function<bool(const ReasoningPath&)>& visit);
std::vector<ReasoningPath> enumerate_paths(const KgView& view, EntityId source, int max_hops, DirectionMode mode);

/// Every simple path from `source` whose relation sequence equals `relations`.
std::vector<ReasoningPath> ground_relation_path(const KgView& view, EntityId source,
                                                std::span<const RelationId> relations,
                                                DirectionMode mode = DirectionMode::forward_only);

}  // namespace kgab
