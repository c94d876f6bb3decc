#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kgab/kg.hpp"
#include "kgab/metrics.hpp"

namespace kgab {

struct Question {
    std::string id;
    std::string text;
    std::vector<std::string> topic_entities;  // KG labels
    AnswerSet answers;
};

/// JSON-lines QA format: {"id", "question", "topic": [..], "answers": [{"label", "aliases": [..]}]}.
/// Blank lines are skipped; anything malformed raises InputError naming the line.
std::vector<Question> read_questions(std::istream& in);
std::vector<Question> load_questions(const std::string& path);
void write_questions(std::ostream& out, const std::vector<Question>& questions);
void save_questions(const std::string& path, const std::vector<Question>& questions);

/// Resolves topic labels against `kg`, dropping unknown ones; order preserved.
std::vector<EntityId> resolve_topics(const Kg& kg, const Question& q);
/// Resolves answers: the canonical label if it names an entity, otherwise the first alias that does.
std::vector<EntityId> resolve_answers(const Kg& kg, const Question& q);

struct SynthSpec {
    std::size_t num_questions = 0;
    std::size_t redundancy = 0;          // disjoint 2-hop alternatives per question
    std::size_t distractor_triples = 0;
    std::uint64_t seed = 0;
};

constexpr std::size_t kSynthTripleGuard = 1'000'000;

struct SynthDataset {
    std::vector<LabeledTriple> triples;
    Kg kg;
    std::vector<Question> questions;
};

/// Question i gets topic T<i>, answer A<i>, a direct triple T<i> rel_direct A<i>, and for each
/// j < redundancy a path T<i> rel_p M<i>_<j> rel_c A<i>. Distractors (rel_noise) connect fresh
/// N<k> entities only, so they never create shortcuts.
SynthDataset synth_kg(const SynthSpec& spec);

}  // namespace kgab
