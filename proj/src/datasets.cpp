#include "kgab/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "kgab/errors.hpp"
#include "kgab/seeding.hpp"
#include "kgab/text.hpp"

namespace kgab {

using json = nlohmann::json;

namespace {

std::string require_string(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"", line);
    if (!j[key].is_string()) throw InputError(std::string("field \"") + key + "\" must be a string", line);
    return j[key].get<std::string>();
}

std::vector<std::string> string_array(const json& j, const char* key, std::size_t line) {
    if (!j.is_array()) throw InputError(std::string("field \"") + key + "\" must be an array", line);
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw InputError(std::string("field \"") + key + "\" must hold strings", line);
        out.push_back(v.get<std::string>());
    }
    return out;
}

Question parse_record(const json& j, std::size_t line) {
    if (!j.is_object()) throw InputError("record is not a JSON object", line);
    Question q;
    q.id = require_string(j, "id", line);
    q.text = require_string(j, "question", line);
    if (!j.contains("topic")) throw InputError("missing field \"topic\"", line);
    q.topic_entities = string_array(j["topic"], "topic", line);
    if (q.topic_entities.empty()) throw InputError("\"topic\" is empty", line);
    if (!j.contains("answers")) throw InputError("missing field \"answers\"", line);
    const auto& answers = j["answers"];
    if (!answers.is_array() || answers.empty()) throw InputError("\"answers\" must be a non-empty array", line);
    for (const auto& a : answers) {
        if (!a.is_object()) throw InputError("answer entries must be objects", line);
        AnswerEntity entity;
        entity.label = require_string(a, "label", line);
        if (a.contains("aliases")) entity.aliases = string_array(a["aliases"], "aliases", line);
        if (normalize_tokens(entity.label).empty()) throw InputError("answer label normalizes to nothing", line);
        for (const auto& alias : entity.aliases) {
            if (normalize_tokens(alias).empty()) throw InputError("alias normalizes to nothing", line);
        }
        q.answers.push_back(std::move(entity));
    }
    return q;
}

}  // namespace

std::vector<Question> read_questions(std::istream& in) {
    std::vector<Question> out;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw InputError(std::string("malformed JSON: ") + e.what(), line_no);
        }
        auto q = parse_record(record, line_no);
        if (!ids.insert(q.id).second) throw InputError("duplicate question id " + q.id, line_no);
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<Question> load_questions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open question file " + path);
    return read_questions(in);
}

void write_questions(std::ostream& out, const std::vector<Question>& questions) {
    for (const auto& q : questions) {
        nlohmann::ordered_json j;
        j["id"] = q.id;
        j["question"] = q.text;
        j["topic"] = q.topic_entities;
        auto answers = nlohmann::ordered_json::array();
        for (const auto& a : q.answers) answers.push_back({{"label", a.label}, {"aliases", a.aliases}});
        j["answers"] = std::move(answers);
        out << j.dump() << '\n';
    }
}

void save_questions(const std::string& path, const std::vector<Question>& questions) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write question file " + path);
    write_questions(out, questions);
}

std::vector<EntityId> resolve_topics(const Kg& kg, const Question& q) {
    std::vector<EntityId> out;
    for (const auto& label : q.topic_entities) {
        if (auto id = kg.find_entity(label); id && std::find(out.begin(), out.end(), *id) == out.end()) {
            out.push_back(*id);
        }
    }
    return out;
}

std::vector<EntityId> resolve_answers(const Kg& kg, const Question& q) {
    std::vector<EntityId> out;
    auto add = [&](EntityId id) {
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    };
    for (const auto& a : q.answers) {
        if (auto id = kg.find_entity(a.label)) {
            add(*id);
            continue;
        }
        for (const auto& alias : a.aliases) {
            if (auto id = kg.find_entity(alias)) {
                add(*id);
                break;
            }
        }
    }
    return out;
}

SynthDataset synth_kg(const SynthSpec& spec) {
    const std::size_t per_question = 1 + 2 * spec.redundancy;
    if (spec.num_questions != 0 && per_question > kSynthTripleGuard / spec.num_questions) {
        throw ConfigError("synthetic KG exceeds the triple guard");
    }
    const std::size_t total = spec.num_questions * per_question + spec.distractor_triples;
    if (total > kSynthTripleGuard) {
        throw ConfigError("synthetic KG would hold " + std::to_string(total) + " triples, guard is " +
                          std::to_string(kSynthTripleGuard));
    }

    SynthDataset ds;
    ds.triples.reserve(total);
    for (std::size_t i = 0; i < spec.num_questions; ++i) {
        const auto t = "T" + std::to_string(i);
        const auto a = "A" + std::to_string(i);
        ds.triples.push_back({t, "rel_direct", a});
        for (std::size_t j = 0; j < spec.redundancy; ++j) {
            const auto m = "M" + std::to_string(i) + "_" + std::to_string(j);
            ds.triples.push_back({t, "rel_p", m});
            ds.triples.push_back({m, "rel_c", a});
        }
        ds.questions.push_back(Question{"synth-" + std::to_string(i), "Which entity answers " + t + "?", {t},
                                        {AnswerEntity{a, {}}}});
    }

    // Pool of d+1 fresh entities has d(d+1) ordered pairs, enough for d distinct triples.
    const std::uint64_t pool = spec.distractor_triples + 1;
    Engine engine(splitmix64(spec.seed));
    std::set<std::pair<std::uint64_t, std::uint64_t>> used;
    while (used.size() < spec.distractor_triples) {
        const auto u = uniform_below(engine, pool);
        const auto v = uniform_below(engine, pool);
        if (u == v || !used.emplace(u, v).second) continue;
        ds.triples.push_back({"N" + std::to_string(u), "rel_noise", "N" + std::to_string(v)});
    }

    for (std::size_t k = 0; k < ds.triples.size(); ++k) ds.triples[k].line = k + 1;
    ds.kg = Kg::build(ds.triples);
    return ds;
}

}  // namespace kgab
