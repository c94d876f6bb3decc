// kgab: ablate KGs, run retrieval pipelines over them, and score the answers.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kgab/ablation.hpp"
#include "kgab/datasets.hpp"
#include "kgab/errors.hpp"
#include "kgab/kg.hpp"
#include "kgab/llm.hpp"
#include "kgab/retrievers.hpp"
#include "kgab/runner.hpp"

namespace {

using namespace kgab;

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kTransport = 4 };

/// One --flag per config key; filled values override the config file.
struct ConfigFlags {
    std::string file;
    std::map<std::string, std::string> values;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", file, "key = value config file");
        for (const auto& key : config_keys()) {
            std::string flag = key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            app->add_option("--" + flag, values[key]);
        }
    }

    [[nodiscard]] ExperimentConfig resolve(const CLI::App* app) const {
        ExperimentConfig config;
        if (!file.empty()) load_config(file, config);
        for (const auto& [key, value] : values) {
            std::string flag = key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            if (app->count("--" + flag) > 0) apply_setting(config, key, value);
        }
        return config;
    }
};

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

std::vector<Question> questions_or_empty(const ExperimentConfig& c) {
    return c.questions_path.empty() ? std::vector<Question>{} : load_questions(c.questions_path);
}

int cmd_ablate(const ExperimentConfig& c) {
    if (c.strategy != Setting::random && c.strategy != Setting::path_disruption) {
        throw ConfigError("ablate needs strategy random or path_disruption");
    }
    validate(c);
    if (c.kg_path.empty()) throw ConfigError("--kg is required");
    if (c.strategy == Setting::path_disruption && c.questions_path.empty()) {
        throw ConfigError("path_disruption needs --questions");
    }
    const auto kg = load_kg(c.kg_path);
    const auto questions = questions_or_empty(c);
    const auto outcome = ablate(kg, questions, c);
    write_or_print(c.manifest_path, manifest_to_json(*outcome.manifest));
    std::cerr << "removed " << outcome.view.removed_count() << " of " << kg.triple_count() << " triples\n";
    return kOk;
}

int cmd_retrieve(const ExperimentConfig& c, const std::string& question_id) {
    validate(c);
    if (c.kg_path.empty() || c.questions_path.empty()) throw ConfigError("--kg and --questions are required");
    const auto kg = load_kg(c.kg_path);
    const auto questions = load_questions(c.questions_path);
    const auto it = std::find_if(questions.begin(), questions.end(),
                                 [&](const Question& q) { return q.id == question_id; });
    if (it == questions.end()) throw LookupError("no question with id " + question_id);

    const auto outcome = ablate(kg, questions, c);
    std::unique_ptr<Generator> llm;
    if (c.generator == "http") llm = std::make_unique<HttpGenerator>(HttpGeneratorConfig::from_env());
    const RetrieverSet retrievers(kg, c, llm.get());
    const auto result = retrievers.run(outcome.view, *it);

    nlohmann::ordered_json j;
    j["id"] = it->id;
    j["retrieval"] = nlohmann::ordered_json::parse(trace_to_json(kg, result));
    j["prompt"] = build_prompt(*it, result).user_text;
    std::cout << j.dump(2) << "\n";
    return kOk;
}

int cmd_evaluate(const std::string& questions_path, const std::string& outputs_path, bool exact_labels,
                 const std::string& report_path) {
    const auto questions = load_questions(questions_path);
    std::ifstream in(outputs_path);
    if (!in) throw InputError("cannot open outputs " + outputs_path);
    std::map<std::string, std::string> outputs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            outputs[j.at("id").get<std::string>()] = j.at("output").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("malformed output record: ") + e.what(), line_no);
        }
    }
    auto report = evaluate_outputs(
        questions,
        [&](const std::string& id) -> std::optional<std::string> {
            const auto found = outputs.find(id);
            if (found == outputs.end()) return std::nullopt;
            return found->second;
        },
        {.use_aliases = !exact_labels});
    write_or_print(report_path, report_to_json(report));
    std::cerr << "accuracy " << report.accuracy << "  hits " << report.hits << "\n";
    return kOk;
}

int cmd_run(const ExperimentConfig& c) {
    const auto out = run_experiment(c);
    if (c.report_path.empty()) std::cout << report_to_json(out.report);
    std::cerr << out.report.setting << ": accuracy " << out.report.accuracy << "  hits " << out.report.hits;
    std::size_t failures = 0;
    for (const auto& q : out.report.per_question) failures += q.error.empty() ? 0 : 1;
    if (failures > 0) std::cerr << "  (" << failures << " generation failures)";
    std::cerr << "\n";
    return kOk;
}

int cmd_report(const std::vector<std::string>& paths, std::string baseline, const std::string& json_path) {
    std::vector<EvalReport> runs;
    for (const auto& p : paths) runs.push_back(load_report(p));
    if (baseline.empty()) baseline = runs.front().setting;
    const auto table = emit_report(runs, baseline);
    std::cout << table.markdown;
    if (!json_path.empty()) write_or_print(json_path, table.json);
    return kOk;
}

int cmd_synth(const SynthSpec& spec, const std::string& kg_out, const std::string& questions_out) {
    const auto data = synth_kg(spec);
    save_kg(kg_out, data.kg);
    save_questions(questions_out, data.questions);
    std::cerr << data.kg.triple_count() << " triples, " << data.questions.size() << " questions\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robustness harness for knowledge-graph retrieval-augmented generation"};
    app.require_subcommand(1);

    auto* ablate_cmd = app.add_subcommand("ablate", "apply a deletion strategy and write its manifest");
    ConfigFlags ablate_flags;
    ablate_flags.attach(ablate_cmd);

    auto* retrieve_cmd = app.add_subcommand("retrieve", "run the configured retriever for one question");
    ConfigFlags retrieve_flags;
    retrieve_flags.attach(retrieve_cmd);
    std::string question_id;
    retrieve_cmd->add_option("--question-id", question_id)->required();

    auto* evaluate_cmd = app.add_subcommand("evaluate", "score generated outputs against gold answers");
    std::string eval_questions, eval_outputs, eval_report;
    bool exact_labels = false;
    evaluate_cmd->add_option("--questions", eval_questions)->required();
    evaluate_cmd->add_option("--outputs", eval_outputs, "JSON lines {\"id\", \"output\"}")->required();
    evaluate_cmd->add_option("--report", eval_report);
    evaluate_cmd->add_flag("--exact-labels", exact_labels, "ignore answer aliases");

    auto* run_cmd = app.add_subcommand("run", "full pipeline: ablate, retrieve, generate, score");
    ConfigFlags run_flags;
    run_flags.attach(run_cmd);

    auto* report_cmd = app.add_subcommand("report", "merge run reports into a table");
    std::vector<std::string> report_paths;
    std::string baseline, report_json;
    report_cmd->add_option("reports", report_paths)->required();
    report_cmd->add_option("--baseline", baseline, "setting name of the baseline row (default: first report)");
    report_cmd->add_option("--json", report_json);

    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic KG and question set");
    SynthSpec spec;
    std::string synth_kg_out, synth_q_out;
    synth_cmd->add_option("--questions", spec.num_questions)->required();
    synth_cmd->add_option("--redundancy", spec.redundancy);
    synth_cmd->add_option("--distractors", spec.distractor_triples);
    synth_cmd->add_option("--seed", spec.seed);
    synth_cmd->add_option("--kg-out", synth_kg_out)->required();
    synth_cmd->add_option("--questions-out", synth_q_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*ablate_cmd) return cmd_ablate(ablate_flags.resolve(ablate_cmd));
        if (*retrieve_cmd) return cmd_retrieve(retrieve_flags.resolve(retrieve_cmd), question_id);
        if (*evaluate_cmd) return cmd_evaluate(eval_questions, eval_outputs, exact_labels, eval_report);
        if (*run_cmd) return cmd_run(run_flags.resolve(run_cmd));
        if (*report_cmd) return cmd_report(report_paths, baseline, report_json);
        if (*synth_cmd) return cmd_synth(spec, synth_kg_out, synth_q_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kData;
    } catch (const LookupError& e) {
        std::cerr << "lookup error: " << e.what() << "\n";
        return kData;
    } catch (const ConsistencyError& e) {
        std::cerr << "consistency error: " << e.what() << "\n";
        return kData;
    } catch (const TransportError& e) {
        std::cerr << "transport error (last status " << e.last_status() << "): " << e.what() << "\n";
        return kTransport;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return kTransport;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
