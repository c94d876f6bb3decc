#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgab/datasets.hpp"
#include "kgab/kg.hpp"
#include "kgab/paths.hpp"

namespace kgab {

enum class Strategy : std::uint8_t { random, path_disruption };

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

struct RemovedTriple {
    TripleId id;
    std::string head;
    std::string relation;
    std::string tail;
};

enum class SkipReason : std::uint8_t { unreachable, entities_missing, topic_is_answer };

std::string to_string(SkipReason r);

/// What path disruption did for one question.
struct QuestionDisruption {
    std::string question_id;
    std::optional<SkipReason> skipped;  // set when nothing was removed
    std::string selected_path;          // formatted path the triple was taken from
    std::optional<RemovedTriple> removed;
    bool shared = false;                // the triple had already been removed for an earlier question
};

/// Reproducible record of one ablation.
struct AblationManifest {
    Strategy strategy = Strategy::random;
    std::optional<double> rate;  // random only
    std::uint64_t seed = 0;
    std::vector<RemovedTriple> removed;  // ascending triple id, distinct
    std::vector<QuestionDisruption> per_question;  // dataset order, disruption only

    // Settings that shaped the result; recorded for replay.
    bool nested = false;
    bool isolated = false;
    int max_hops = kDefaultMaxHops;
    DirectionMode direction = DirectionMode::bidirectional;

    [[nodiscard]] std::vector<TripleId> removed_ids() const;
};

/// round_half_up(rate x n), robust to representation error such as 0.15 x 10 = 1.4999999.
std::size_t deletion_count(double rate, std::size_t n);

struct RandomDeletionOptions {
    /// With nested sampling every rate draws a prefix of the same seeded permutation, so lower-rate
    /// removals are subsets of higher-rate ones. Otherwise each rate gets its own stream.
    bool nested = false;
};

/// Uniform sample without replacement of deletion_count(rate, |kg|) triples.
AblationManifest random_deletion(const Kg& kg, double rate, std::uint64_t seed,
                                 const RandomDeletionOptions& options = {});

struct DisruptionOptions {
    int max_hops = kDefaultMaxHops;
    DirectionMode direction = DirectionMode::bidirectional;
    /// Per-question isolated mode: shortest paths are taken on the intact KG instead of the
    /// cumulative view, and removals are only unioned at the end.
    bool isolated = false;
};

/// For each question in order, removes one uniformly chosen triple from one uniformly chosen
/// shortest topic->answer path. Randomness per question depends only on (seed, question id).
AblationManifest disrupt_paths(const Kg& kg, std::span<const Question> questions, std::uint64_t seed,
                               const DisruptionOptions& options = {});

/// Rebuilds the view a manifest describes. Triples are matched by label, so the manifest can be
/// replayed against a freshly loaded copy of the same KG. Unknown triples raise ConsistencyError.
KgView replay_manifest(const Kg& kg, const AblationManifest& manifest);

std::string manifest_to_json(const AblationManifest& m);
AblationManifest manifest_from_json(const std::string& text);
void save_manifest(const std::string& path, const AblationManifest& m);
AblationManifest load_manifest(const std::string& path);

}  // namespace kgab
