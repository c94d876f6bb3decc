#include "kgab/kg.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "kgab/errors.hpp"
#include "kgab/seeding.hpp"
#include "kgab/text.hpp"

namespace kgab {

std::uint32_t Interner::intern(std::string_view label) {
    if (auto it = ids_.find(std::string(label)); it != ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(labels_.size());
    labels_.emplace_back(label);
    ids_.emplace(labels_.back(), id);
    return id;
}

std::optional<std::uint32_t> Interner::find(std::string_view label) const {
    if (auto it = ids_.find(std::string(label)); it != ids_.end()) return it->second;
    return std::nullopt;
}

std::size_t Kg::TripleKeyHash::operator()(const TripleKey& k) const noexcept {
    std::uint64_t h = splitmix64(k.h);
    h = splitmix64(h ^ k.r);
    return static_cast<std::size_t>(splitmix64(h ^ k.t));
}

namespace {

void build_csr(std::size_t entity_count, std::span<const Triple> triples, bool forward,
               std::vector<std::uint32_t>& offsets, std::vector<Adjacent>& entries) {
    offsets.assign(entity_count + 1, 0);
    for (const auto& t : triples) ++offsets[index(forward ? t.head : t.tail) + 1];
    for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
    entries.resize(triples.size());
    auto cursor = offsets;
    // Triples are visited in id order, so each bucket ends up sorted by triple id.
    for (const auto& t : triples) {
        const auto from = forward ? t.head : t.tail;
        const auto to = forward ? t.tail : t.head;
        entries[cursor[index(from)]++] = Adjacent{t.relation, to, t.id};
    }
}

}  // namespace

Kg Kg::build(std::span<const LabeledTriple> triples) {
    Kg kg;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const auto& in = triples[i];
        const std::size_t line = in.line == 0 ? i + 1 : in.line;
        const auto head = text::trim(in.head);
        const auto rel = text::trim(in.relation);
        const auto tail = text::trim(in.tail);
        if (head.empty() || rel.empty() || tail.empty()) {
            throw InputError("empty label in triple", line);
        }
        const TripleKey key{kg.entities_.intern(head), kg.relations_.intern(rel), kg.entities_.intern(tail)};
        const auto id = static_cast<TripleId>(kg.triples_.size());
        if (kg.triple_index_.emplace(key, id).second) {
            kg.triples_.push_back(Triple{EntityId{key.h}, RelationId{key.r}, EntityId{key.t}, id});
        }
    }
    build_csr(kg.entity_count(), kg.triples_, true, kg.fwd_offsets_, kg.fwd_);
    build_csr(kg.entity_count(), kg.triples_, false, kg.bwd_offsets_, kg.bwd_);
    return kg;
}

const Triple& Kg::triple(TripleId id) const {
    if (!has_triple(id)) throw LookupError("unknown triple id " + std::to_string(index(id)));
    return triples_[index(id)];
}

const std::string& Kg::entity_label(EntityId id) const {
    if (!has_entity(id)) throw LookupError("unknown entity id " + std::to_string(index(id)));
    return entities_.label(index(id));
}

const std::string& Kg::relation_label(RelationId id) const {
    if (!has_relation(id)) throw LookupError("unknown relation id " + std::to_string(index(id)));
    return relations_.label(index(id));
}

std::optional<EntityId> Kg::find_entity(std::string_view label) const {
    if (auto id = entities_.find(text::trim(label))) return EntityId{*id};
    return std::nullopt;
}

std::optional<RelationId> Kg::find_relation(std::string_view label) const {
    if (auto id = relations_.find(text::trim(label))) return RelationId{*id};
    return std::nullopt;
}

std::optional<TripleId> Kg::find_triple(std::string_view head, std::string_view relation,
                                        std::string_view tail) const {
    const auto h = entities_.find(text::trim(head));
    const auto r = relations_.find(text::trim(relation));
    const auto t = entities_.find(text::trim(tail));
    if (!h || !r || !t) return std::nullopt;
    if (auto it = triple_index_.find(TripleKey{*h, *r, *t}); it != triple_index_.end()) return it->second;
    return std::nullopt;
}

std::span<const Adjacent> Kg::out_edges(EntityId e) const {
    if (!has_entity(e)) throw LookupError("unknown entity id " + std::to_string(index(e)));
    return std::span<const Adjacent>(fwd_).subspan(fwd_offsets_[index(e)],
                                                   fwd_offsets_[index(e) + 1] - fwd_offsets_[index(e)]);
}

std::span<const Adjacent> Kg::in_edges(EntityId e) const {
    if (!has_entity(e)) throw LookupError("unknown entity id " + std::to_string(index(e)));
    return std::span<const Adjacent>(bwd_).subspan(bwd_offsets_[index(e)],
                                                   bwd_offsets_[index(e) + 1] - bwd_offsets_[index(e)]);
}

// ---------------------------------------------------------------------------

KgView::KgView(const Kg& kg) : kg_(&kg) {}

KgView::KgView(const Kg& kg, std::shared_ptr<const std::vector<bool>> mask, std::size_t removed_count)
    : kg_(&kg), mask_(std::move(mask)), removed_count_(removed_count) {}

bool KgView::is_removed(TripleId id) const noexcept {
    return mask_ && index(id) < mask_->size() && (*mask_)[index(id)];
}

bool KgView::contains(TripleId id) const noexcept { return kg_->has_triple(id) && !is_removed(id); }

std::vector<Neighbor> KgView::neighbors(EntityId entity, Direction direction) const {
    std::vector<Neighbor> out;
    if (!kg_->has_entity(entity)) throw LookupError("unknown entity id " + std::to_string(index(entity)));
    if (direction != Direction::backward) {
        for (const auto& a : kg_->out_edges(entity)) {
            if (!is_removed(a.triple)) out.push_back({a.relation, a.neighbor, StepDir::fwd, a.triple});
        }
    }
    if (direction != Direction::forward) {
        for (const auto& a : kg_->in_edges(entity)) {
            if (!is_removed(a.triple)) out.push_back({a.relation, a.neighbor, StepDir::bwd, a.triple});
        }
    }
    if (direction == Direction::both) {
        std::stable_sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
            return index(a.triple) < index(b.triple);
        });
    }
    return out;
}

std::vector<TripleId> KgView::removed_ids() const {
    std::vector<TripleId> ids;
    if (!mask_) return ids;
    ids.reserve(removed_count_);
    for (std::uint32_t i = 0; i < mask_->size(); ++i) {
        if ((*mask_)[i]) ids.push_back(TripleId{i});
    }
    return ids;
}

std::uint64_t KgView::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint32_t i = 0; i < kg_->triple_count(); ++i) {
        if (is_removed(TripleId{i})) continue;
        for (int b = 0; b < 4; ++b) {
            h ^= (i >> (8 * b)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

MaskBuilder::MaskBuilder(const Kg& kg)
    : kg_(&kg), mask_(std::make_shared<std::vector<bool>>(kg.triple_count(), false)) {}

bool MaskBuilder::remove(TripleId id) {
    if (!kg_->has_triple(id)) {
        throw ConsistencyError("triple id " + std::to_string(index(id)) + " does not belong to this KG");
    }
    if ((*mask_)[index(id)]) return false;
    if (mask_.use_count() > 1) mask_ = std::make_shared<std::vector<bool>>(*mask_);
    (*mask_)[index(id)] = true;
    ++removed_count_;
    return true;
}

bool MaskBuilder::is_removed(TripleId id) const { return kg_->has_triple(id) && (*mask_)[index(id)]; }

KgView MaskBuilder::view() const { return KgView(*kg_, mask_, removed_count_); }

KgView apply_mask(const Kg& kg, std::span<const TripleId> removed) {
    MaskBuilder builder(kg);
    for (auto id : removed) builder.remove(id);
    return builder.view();
}

// ---------------------------------------------------------------------------

std::vector<LabeledTriple> read_triples(std::istream& in) {
    std::vector<LabeledTriple> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto fields = text::split(line, '\t');
        if (fields.size() != 3) {
            throw InputError("expected 3 tab-separated fields, got " + std::to_string(fields.size()), line_no);
        }
        out.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2]), line_no});
    }
    return out;
}

Kg load_kg(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open KG file " + path);
    const auto triples = read_triples(in);
    return Kg::build(triples);
}

void write_kg(std::ostream& out, const Kg& kg) {
    for (const auto& t : kg.triples()) {
        out << kg.entity_label(t.head) << '\t' << kg.relation_label(t.relation) << '\t'
            << kg.entity_label(t.tail) << '\n';
    }
}

void save_kg(const std::string& path, const Kg& kg) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write KG file " + path);
    write_kg(out, kg);
}

}  // namespace kgab
