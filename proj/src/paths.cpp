#include "kgab/paths.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_set>

#include "kgab/errors.hpp"

namespace kgab {

bool ReasoningPath::visits(EntityId e) const noexcept {
    if (start == e) return true;
    return std::any_of(steps.begin(), steps.end(), [e](const PathStep& s) { return s.entity == e; });
}

std::vector<TripleId> ReasoningPath::triple_ids() const {
    std::vector<TripleId> ids;
    ids.reserve(steps.size());
    for (const auto& s : steps) ids.push_back(s.triple);
    return ids;
}

std::vector<RelationId> ReasoningPath::relations() const {
    std::vector<RelationId> rels;
    rels.reserve(steps.size());
    for (const auto& s : steps) rels.push_back(s.relation);
    return rels;
}

bool canonical_less(const ReasoningPath& a, const ReasoningPath& b) noexcept {
    if (a.length() != b.length()) return a.length() < b.length();
    if (a.start != b.start) return index(a.start) < index(b.start);
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const auto& x = a.steps[i];
        const auto& y = b.steps[i];
        if (x.triple != y.triple) return index(x.triple) < index(y.triple);
        if (x.dir != y.dir) return x.dir < y.dir;
    }
    return false;
}

void sort_canonical(std::vector<ReasoningPath>& paths) {
    std::sort(paths.begin(), paths.end(), canonical_less);
}

bool is_valid_path(const KgView& view, const ReasoningPath& path) {
    const Kg& kg = view.kg();
    if (!kg.has_entity(path.start)) return false;
    std::unordered_set<std::uint32_t> seen{index(path.start)};
    EntityId at = path.start;
    for (const auto& step : path.steps) {
        if (!view.contains(step.triple)) return false;
        const auto& t = kg.triple(step.triple);
        if (t.relation != step.relation) return false;
        const bool chains = step.dir == StepDir::fwd ? (t.head == at && t.tail == step.entity)
                                                     : (t.tail == at && t.head == step.entity);
        if (!chains) return false;
        if (!seen.insert(index(step.entity)).second) return false;
        at = step.entity;
    }
    return true;
}

std::string format_path(const Kg& kg, const ReasoningPath& path) {
    std::string out = kg.entity_label(path.start);
    for (const auto& s : path.steps) {
        const auto& rel = kg.relation_label(s.relation);
        out += s.dir == StepDir::fwd ? " --[" + rel + "]--> " : " <--[" + rel + "]-- ";
        out += kg.entity_label(s.entity);
    }
    return out;
}

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

void check_entity(const Kg& kg, EntityId e) {
    if (!kg.has_entity(e)) throw LookupError("unknown entity id " + std::to_string(index(e)));
}

void check_hops(int max_hops, int guard) {
    if (max_hops < 1) throw ConfigError("max_hops must be >= 1");
    if (max_hops > guard) {
        throw ConfigError("max_hops " + std::to_string(max_hops) + " exceeds guard " + std::to_string(guard));
    }
}

/// Multi-source BFS distances, capped at `limit` hops.
std::vector<int> bfs_distances(const KgView& view, std::span<const EntityId> sources, Direction dir, int limit) {
    std::vector<int> dist(view.kg().entity_count(), kUnreached);
    std::deque<EntityId> queue;
    for (auto s : sources) {
        if (dist[index(s)] != 0) {
            dist[index(s)] = 0;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        if (dist[index(u)] >= limit) continue;
        for (const auto& n : view.neighbors(u, dir)) {
            if (dist[index(n.neighbor)] == kUnreached) {
                dist[index(n.neighbor)] = dist[index(u)] + 1;
                queue.push_back(n.neighbor);
            }
        }
    }
    return dist;
}

Direction reversed(DirectionMode mode) {
    return mode == DirectionMode::forward_only ? Direction::backward : Direction::both;
}

}  // namespace

std::vector<ReasoningPath> shortest_paths(const KgView& view, EntityId source, std::span<const EntityId> targets,
                                          int max_hops, DirectionMode mode) {
    const Kg& kg = view.kg();
    check_entity(kg, source);
    for (auto t : targets) check_entity(kg, t);
    if (targets.empty()) throw ConfigError("shortest_paths needs at least one target");
    if (max_hops < 1) throw ConfigError("max_hops must be >= 1");

    if (std::find(targets.begin(), targets.end(), source) != targets.end()) {
        return {ReasoningPath{source, {}}};
    }

    const auto from_source = bfs_distances(view, std::span(&source, 1), to_direction(mode), max_hops);
    int best = kUnreached;
    for (auto t : targets) best = std::min(best, from_source[index(t)]);
    if (best == kUnreached || best > max_hops) return {};

    // A step u -> v lies on a shortest path iff d_src(v) = d_src(u) + 1 and d_tgt(v) = L* - d_src(v).
    const auto to_target = bfs_distances(view, targets, reversed(mode), best);

    std::vector<ReasoningPath> out;
    ReasoningPath current{source, {}};
    const auto dir = to_direction(mode);
    std::function<void(EntityId, int)> extend = [&](EntityId at, int depth) {
        if (depth == best) {
            out.push_back(current);
            return;
        }
        for (const auto& n : view.neighbors(at, dir)) {
            const auto v = index(n.neighbor);
            if (from_source[v] != depth + 1 || to_target[v] != best - depth - 1) continue;
            current.steps.push_back({n.relation, n.dir, n.neighbor, n.triple});
            extend(n.neighbor, depth + 1);
            current.steps.pop_back();
        }
    };
    extend(source, 0);
    return out;
}

std::vector<ReasoningPath> shortest_paths_from_any(const KgView& view, std::span<const EntityId> sources,
                                                   std::span<const EntityId> targets, int max_hops,
                                                   DirectionMode mode) {
    std::vector<ReasoningPath> best;
    for (auto source : sources) {
        auto paths = shortest_paths(view, source, targets, max_hops, mode);
        if (paths.empty()) continue;
        if (best.empty() || paths.front().length() < best.front().length()) {
            best = std::move(paths);
        } else if (paths.front().length() == best.front().length()) {
            best.insert(best.end(), paths.begin(), paths.end());
        }
    }
    return best;
}

void enumerate_paths(const KgView& view, EntityId source, int max_hops, DirectionMode mode,
                     const std::function<bool(const ReasoningPath&)>& visit) {
    check_entity(view.kg(), source);
    check_hops(max_hops, kEnumerationHopGuard);
    const auto dir = to_direction(mode);

    // Extending each layer in order keeps every layer canonically sorted.
    std::vector<ReasoningPath> layer{ReasoningPath{source, {}}};
    for (int depth = 1; depth <= max_hops && !layer.empty(); ++depth) {
        std::vector<ReasoningPath> next;
        for (const auto& p : layer) {
            for (const auto& n : view.neighbors(p.end(), dir)) {
                if (p.visits(n.neighbor)) continue;
                ReasoningPath q = p;
                q.steps.push_back({n.relation, n.dir, n.neighbor, n.triple});
                if (!visit(q)) return;
                next.push_back(std::move(q));
            }
        }
        layer = std::move(next);
    }
}

std::vector<ReasoningPath> enumerate_paths(const KgView& view, EntityId source, int max_hops, DirectionMode mode) {
    std::vector<ReasoningPath> out;
    enumerate_paths(view, source, max_hops, mode, [&](const ReasoningPath& p) {
        out.push_back(p);
        return true;
    });
    return out;
}

std::vector<ReasoningPath> ground_relation_path(const KgView& view, EntityId source,
                                                std::span<const RelationId> relations, DirectionMode mode) {
    const Kg& kg = view.kg();
    check_entity(kg, source);
    for (auto r : relations) {
        if (!kg.has_relation(r)) throw LookupError("unknown relation id " + std::to_string(index(r)));
    }

    std::vector<ReasoningPath> out;
    ReasoningPath current{source, {}};
    const auto dir = to_direction(mode);
    std::function<void(EntityId)> extend = [&](EntityId at) {
        const auto depth = current.steps.size();
        if (depth == relations.size()) {
            out.push_back(current);
            return;
        }
        for (const auto& n : view.neighbors(at, dir)) {
            if (n.relation != relations[depth] || current.visits(n.neighbor)) continue;
            current.steps.push_back({n.relation, n.dir, n.neighbor, n.triple});
            extend(n.neighbor);
            current.steps.pop_back();
        }
    };
    extend(source);
    return out;
}

}  // namespace kgab
