#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgab/ablation.hpp"
#include "kgab/datasets.hpp"
#include "kgab/kg.hpp"
#include "kgab/llm.hpp"
#include "kgab/retrievers.hpp"

namespace kgab {

enum class Setting : std::uint8_t { none, random, path_disruption, no_retrieval };

std::string to_string(Setting s);
Setting parse_setting(std::string_view s);

struct ExperimentConfig {
    std::string name;  // row label; derived from the setting when empty

    std::string kg_path;
    std::string questions_path;

    Setting strategy = Setting::none;
    std::optional<double> rate;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;  // non-empty turns `run` into a sweep
    bool nested = false;
    bool isolated = false;
    std::string replay_manifest;  // replaces the strategy's own selection

    RetrievalMethod retriever = RetrievalMethod::oracle;
    std::string generator = "mock";  // mock | http
    int max_hops = kDefaultMaxHops;
    DirectionMode direction = DirectionMode::bidirectional;
    std::size_t k_plans = 3;
    std::size_t beam_width = 3;
    int depth = 3;
    std::optional<double> stop_threshold = 0.9;
    std::size_t k_nodes = 5;
    int hop_radius = 2;
    double edge_cost = 0.5;
    std::optional<PcstMode> pcst_mode;
    bool use_aliases = true;
    int workers = 1;

    std::string report_path;
    std::string manifest_path;
    std::string transcript_path;
    std::string trace_path;
    std::string baseline_report;
};

/// Sets one field from its key=value text form. Unknown keys and bad values raise ConfigError.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Every key apply_setting understands, in documentation order.
const std::vector<std::string>& config_keys();

/// TOML-like text: `key = value` lines, `#` comments, optional quotes, [section] headers ignored.
void read_config(std::istream& in, ExperimentConfig& config);
void load_config(const std::string& path, ExperimentConfig& config);

/// Cross-field checks (rate iff random, positive widths, known generator, ...).
void validate(const ExperimentConfig& config);

std::string setting_name(const ExperimentConfig& config);

struct QuestionOutcome {
    std::string id;
    std::string output;
    double accuracy = 0.0;
    int hit = 0;
    std::string error;  // generation failure, scored as a non-match
};

struct EvalReport {
    std::string setting;
    std::string generator;
    std::size_t num_questions = 0;
    double accuracy = 0.0;
    double hits = 0.0;
    std::optional<double> accuracy_std;  // sweeps only
    std::optional<double> hits_std;
    std::optional<double> rel_drop_accuracy;
    std::optional<double> rel_drop_hits;
    std::size_t removed_triples = 0;
    std::string manifest_checksum;
    std::string config_json;  // compact JSON of the provenance-relevant config
    std::vector<QuestionOutcome> per_question;
};

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
EvalReport load_report(const std::string& path);
void save_report(const std::string& path, const EvalReport& report);

/// Fills rel_drop_* against `baseline`.
void set_relative_drops(EvalReport& report, const EvalReport& baseline);

struct AblationOutcome {
    KgView view;
    std::optional<AblationManifest> manifest;  // unset for none / no_retrieval
};

/// Applies the configured strategy, or replays config.replay_manifest when set.
AblationOutcome ablate(const Kg& kg, std::span<const Question> questions, const ExperimentConfig& config);

/// The configured retriever with its planner, scorer and embedder. With generator = http the
/// planner and scorer ask `llm`; otherwise the oracle planner and lexical scorer are used.
class RetrieverSet {
  public:
    RetrieverSet(const Kg& kg, const ExperimentConfig& config, Generator* llm = nullptr);
    ~RetrieverSet();
    [[nodiscard]] RetrievalResult run(const KgView& view, const Question& q) const;

  private:
    ExperimentConfig config_;
    OraclePlanner oracle_planner_;
    LexicalScorer lexical_;
    HashingEmbedder embedder_;
    std::unique_ptr<Planner> llm_planner_;
    std::unique_ptr<Scorer> llm_scorer_;
};

struct RunArtifacts {
    EvalReport report;
    std::optional<AblationManifest> manifest;
    std::vector<std::string> traces;  // one JSON object per question, dataset order
};

/// Core pipeline over in-memory inputs. `generator` overrides the one named in the config.
RunArtifacts run_pipeline(const Kg& kg, std::span<const Question> questions, const ExperimentConfig& config,
                          Generator* generator = nullptr);

/// Loads inputs, runs, writes the configured artifacts. Stage failures carry a stage prefix.
RunArtifacts run_experiment(const ExperimentConfig& config);

/// One run per seed, folded into mean and sample standard deviation.
EvalReport run_sweep(const Kg& kg, std::span<const Question> questions, const ExperimentConfig& config,
                     std::span<const std::uint64_t> seeds, Generator* generator = nullptr);

/// Scores precomputed outputs (question id -> output text); missing outputs count as non-matches.
EvalReport evaluate_outputs(std::span<const Question> questions,
                            const std::function<std::optional<std::string>(const std::string&)>& output_for,
                            const MatchOptions& options = {});

struct ReportTable {
    std::string markdown;
    std::string json;
};

/// Table with one row per run; every non-baseline cell carries its relative drop.
ReportTable emit_report(std::span<const EvalReport> runs, const std::string& baseline_name);

}  // namespace kgab
