#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgab/datasets.hpp"
#include "kgab/kg.hpp"
#include "kgab/paths.hpp"
#include "kgab/pcst.hpp"

namespace kgab {

enum class RetrievalMethod : std::uint8_t { rog, tog, gretriever, oracle, none };

std::string to_string(RetrievalMethod m);
RetrievalMethod parse_retrieval_method(std::string_view s);

struct RetrievalResult {
    RetrievalMethod method = RetrievalMethod::none;
    std::vector<ReasoningPath> paths;      // rog / tog / oracle
    std::vector<TripleId> subgraph;        // gretriever, ascending
    std::vector<EntityId> subgraph_nodes;  // gretriever, ascending
    std::string evidence_text;
    std::vector<std::string> trace;
};

/// A relation plan is a sequence of relation labels, as a planner would emit it.
using RelationPlan = std::vector<std::string>;

class Planner {
  public:
    virtual ~Planner() = default;
    /// At most `top_k` plans, best first.
    [[nodiscard]] virtual std::vector<RelationPlan> plan(const Question& q, std::size_t top_k) const = 0;
};

class Scorer {
  public:
    virtual ~Scorer() = default;
    /// Relevance of `candidate` (a formatted path or an entity label) to the question, in [0, 1].
    [[nodiscard]] virtual double score(const Question& q, std::string_view candidate) const = 0;
};

class Embedder {
  public:
    virtual ~Embedder() = default;
    [[nodiscard]] virtual std::vector<double> embed(std::string_view text) const = 0;
};

/// Emits the relation sequences of the gold shortest paths on the intact KG. Models a planner
/// that learned the benchmark's patterns: after ablation its plans may no longer ground.
class OraclePlanner final : public Planner {
  public:
    OraclePlanner(const Kg& intact, int max_hops = kDefaultMaxHops,
                  DirectionMode direction = DirectionMode::bidirectional);
    [[nodiscard]] std::vector<RelationPlan> plan(const Question& q, std::size_t top_k) const override;

  private:
    const Kg* kg_;
    int max_hops_;
    DirectionMode direction_;
};

/// Returns fixed plans regardless of the question.
class FixedPlanner final : public Planner {
  public:
    explicit FixedPlanner(std::vector<RelationPlan> plans) : plans_(std::move(plans)) {}
    [[nodiscard]] std::vector<RelationPlan> plan(const Question& q, std::size_t top_k) const override;

  private:
    std::vector<RelationPlan> plans_;
};

/// |distinct question tokens shared with the candidate| / |distinct question tokens|.
class LexicalScorer final : public Scorer {
  public:
    [[nodiscard]] double score(const Question& q, std::string_view candidate) const override;
};

/// Feature-hashed bag of word tokens (FNV-1a bucket and sign), L2-normalized.
class HashingEmbedder final : public Embedder {
  public:
    explicit HashingEmbedder(std::size_t dims = 64) : dims_(dims) {}
    [[nodiscard]] std::vector<double> embed(std::string_view text) const override;

  private:
    std::size_t dims_;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b) noexcept;

/// One `head --relation--> tail` line per triple, ascending triple id, newline separated.
std::string textualize_subgraph(const Kg& kg, std::span<const TripleId> triples);

/// Each path's triples in walk order, rendered with the same template (original orientation).
/// A zero-length path renders as its entity label.
std::string textualize_paths(const Kg& kg, std::span<const ReasoningPath> paths);

struct RogParams {
    std::size_t top_k_plans = 3;
    DirectionMode direction = DirectionMode::bidirectional;
};

struct TogParams {
    std::size_t beam_width = 3;
    int max_depth = 3;
    DirectionMode direction = DirectionMode::bidirectional;
    /// Stop once a beam ends at an entity whose label scores at least this; disabled when unset.
    std::optional<double> stop_threshold = 0.9;
};

struct GRetrieverParams {
    std::size_t k_nodes = 5;
    int hop_radius = 2;
    double edge_cost = 0.5;
    /// Unset picks exact for pools within kExactNodeGuard, approx otherwise.
    std::optional<PcstMode> mode;
};

/// Plan, then ground each plan from every topic entity; the union of grounded paths is the evidence.
RetrievalResult rog_retrieve(const KgView& view, const Question& q, const Planner& planner, const RogParams& params = {});

/// Beam search from the topic entities, keeping the top beam_width scored paths per depth.
RetrievalResult tog_retrieve(const KgView& view, const Question& q, const Scorer& scorer, const TogParams& params = {});

/// PCST over the hop_radius neighborhood of the topic entities, prizes from embedding similarity.
RetrievalResult gretriever_retrieve(const KgView& view, const Question& q, const Embedder& embedder,
                                    const GRetrieverParams& params = {});

/// Gold shortest paths on the queried view. Succeeds exactly when an answer is reachable.
RetrievalResult oracle_retrieve(const KgView& view, const Question& q, int max_hops = kDefaultMaxHops,
                                DirectionMode direction = DirectionMode::bidirectional);

/// Re-grounds every returned path and triple against `view`.
bool verify_in_view(const KgView& view, const RetrievalResult& result);

std::string trace_to_json(const Kg& kg, const RetrievalResult& result);

}  // namespace kgab
