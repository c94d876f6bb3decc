#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgab {

enum class EntityId : std::uint32_t {};
enum class RelationId : std::uint32_t {};
enum class TripleId : std::uint32_t {};

constexpr std::uint32_t index(EntityId id) noexcept { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t index(RelationId id) noexcept { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t index(TripleId id) noexcept { return static_cast<std::uint32_t>(id); }

/// Orientation of one traversal step relative to the stored triple.
enum class StepDir : std::uint8_t { fwd, bwd };

/// Which incident triples `neighbors` reports.
enum class Direction : std::uint8_t { forward, backward, both };

struct Triple {
    EntityId head;
    RelationId relation;
    EntityId tail;
    TripleId id;
};

/// A textual triple as read from a file. `line` is the 1-based source line (0 = unknown).
struct LabeledTriple {
    std::string head;
    std::string relation;
    std::string tail;
    std::size_t line = 0;
};

/// Dense label <-> id table, ids handed out in first-occurrence order.
class Interner {
  public:
    std::uint32_t intern(std::string_view label);
    [[nodiscard]] std::optional<std::uint32_t> find(std::string_view label) const;
    [[nodiscard]] const std::string& label(std::uint32_t id) const { return labels_.at(id); }
    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }

  private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

struct Adjacent {
    RelationId relation;
    EntityId neighbor;
    TripleId triple;
};

/// Immutable interned triple store with forward and backward adjacency in CSR form.
class Kg {
  public:
    Kg() = default;

    /// Trims labels, rejects empty ones, deduplicates triples keeping first occurrence.
    static Kg build(std::span<const LabeledTriple> triples);

    [[nodiscard]] std::size_t entity_count() const noexcept { return entities_.size(); }
    [[nodiscard]] std::size_t relation_count() const noexcept { return relations_.size(); }
    [[nodiscard]] std::size_t triple_count() const noexcept { return triples_.size(); }

    [[nodiscard]] std::span<const Triple> triples() const noexcept { return triples_; }
    [[nodiscard]] const Triple& triple(TripleId id) const;

    [[nodiscard]] const std::string& entity_label(EntityId id) const;
    [[nodiscard]] const std::string& relation_label(RelationId id) const;
    [[nodiscard]] std::optional<EntityId> find_entity(std::string_view label) const;
    [[nodiscard]] std::optional<RelationId> find_relation(std::string_view label) const;
    [[nodiscard]] std::optional<TripleId> find_triple(std::string_view head, std::string_view relation,
                                                      std::string_view tail) const;

    [[nodiscard]] bool has_entity(EntityId id) const noexcept { return index(id) < entities_.size(); }
    [[nodiscard]] bool has_relation(RelationId id) const noexcept { return index(id) < relations_.size(); }
    [[nodiscard]] bool has_triple(TripleId id) const noexcept { return index(id) < triples_.size(); }

    /// Outgoing edges of `e` in triple-id order (includes removed triples; views filter).
    [[nodiscard]] std::span<const Adjacent> out_edges(EntityId e) const;
    /// Incoming edges of `e` in triple-id order.
    [[nodiscard]] std::span<const Adjacent> in_edges(EntityId e) const;

  private:
    struct TripleKey {
        std::uint32_t h, r, t;
        bool operator==(const TripleKey&) const = default;
    };
    struct TripleKeyHash {
        std::size_t operator()(const TripleKey& k) const noexcept;
    };

    Interner entities_;
    Interner relations_;
    std::vector<Triple> triples_;
    std::unordered_map<TripleKey, TripleId, TripleKeyHash> triple_index_;
    std::vector<std::uint32_t> fwd_offsets_, bwd_offsets_;
    std::vector<Adjacent> fwd_, bwd_;
};

struct Neighbor {
    RelationId relation;
    EntityId neighbor;
    StepDir dir;
    TripleId triple;

    bool operator==(const Neighbor&) const = default;
};

/// A Kg with a removed-triple mask overlaid. Copies share the mask.
class KgView {
  public:
    /// Identity view (nothing removed).
    explicit KgView(const Kg& kg);

    [[nodiscard]] const Kg& kg() const noexcept { return *kg_; }
    [[nodiscard]] std::size_t size() const noexcept { return kg_->triple_count() - removed_count_; }
    [[nodiscard]] std::size_t removed_count() const noexcept { return removed_count_; }
    [[nodiscard]] bool contains(TripleId id) const noexcept;
    [[nodiscard]] bool is_removed(TripleId id) const noexcept;

    /// Non-removed incident triples of `entity`, ordered by (triple id, fwd before bwd).
    [[nodiscard]] std::vector<Neighbor> neighbors(EntityId entity, Direction direction) const;

    /// Removed ids in ascending order.
    [[nodiscard]] std::vector<TripleId> removed_ids() const;

    /// FNV-1a over surviving triple ids; used to check that a replayed manifest gives the same view.
    [[nodiscard]] std::uint64_t checksum() const;

  private:
    friend class MaskBuilder;
    KgView(const Kg& kg, std::shared_ptr<const std::vector<bool>> mask, std::size_t removed_count);

    const Kg* kg_;
    std::shared_ptr<const std::vector<bool>> mask_;  // null means nothing removed
    std::size_t removed_count_ = 0;
};

/// Accumulates removals; `view()` snapshots are cheap and stay valid after further removals
/// (the mask is copied on write only while a snapshot is alive).
class MaskBuilder {
  public:
    explicit MaskBuilder(const Kg& kg);

    /// Returns false when the triple was already removed.
    bool remove(TripleId id);
    [[nodiscard]] bool is_removed(TripleId id) const;
    [[nodiscard]] KgView view() const;

  private:
    const Kg* kg_;
    std::shared_ptr<std::vector<bool>> mask_;
    std::size_t removed_count_ = 0;
};

/// View over `kg` with `removed` masked out. Duplicate ids collapse; ids outside `kg` raise
/// ConsistencyError.
KgView apply_mask(const Kg& kg, std::span<const TripleId> removed);

/// Parses the tab-separated triple format. `#` lines and blank lines are skipped.
std::vector<LabeledTriple> read_triples(std::istream& in);
Kg load_kg(const std::string& path);

/// Writes canonical order, one `head\trelation\ttail` line per triple.
void write_kg(std::ostream& out, const Kg& kg);
void save_kg(const std::string& path, const Kg& kg);

}  // namespace kgab
