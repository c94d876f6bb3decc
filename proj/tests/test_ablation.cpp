#include <gtest/gtest.h>

#include "kgab/ablation.hpp"
#include "kgab/errors.hpp"
#include "support.hpp"

using namespace kgab;
using namespace kgab::testing;

namespace {

Kg chain_kg(std::size_t n) {
    std::vector<LabeledTriple> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back({"n" + std::to_string(i), "next", "n" + std::to_string(i + 1)});
    return Kg::build(rows);
}

}  // namespace

TEST(DeletionCount, RoundHalfUp) {
    EXPECT_EQ(deletion_count(0.05, 100), 5u);
    EXPECT_EQ(deletion_count(0.0, 100), 0u);
    EXPECT_EQ(deletion_count(1.0, 100), 100u);
    EXPECT_EQ(deletion_count(0.15, 10), 2u);  // 1.5 rounds up despite 0.15 * 10 < 1.5 in binary
    EXPECT_EQ(deletion_count(0.25, 10), 3u);
    EXPECT_EQ(deletion_count(0.24, 10), 2u);
    EXPECT_EQ(deletion_count(0.05, 10), 1u);
}

TEST(RandomDeletion, Counts) {
    const auto kg = chain_kg(100);
    EXPECT_EQ(random_deletion(kg, 0.05, 1).removed.size(), 5u);
    const auto none = random_deletion(kg, 0.0, 1);
    EXPECT_TRUE(none.removed.empty());
    EXPECT_EQ(apply_mask(kg, none.removed_ids()).checksum(), KgView(kg).checksum());
    EXPECT_EQ(random_deletion(kg, 1.0, 1).removed.size(), 100u);
}

TEST(RandomDeletion, RateOutOfRange) {
    const auto kg = chain_kg(10);
    EXPECT_THROW(random_deletion(kg, -0.01, 1), ConfigError);
    EXPECT_THROW(random_deletion(kg, 1.01, 1), ConfigError);
}

TEST(RandomDeletion, Deterministic) {
    const auto kg = chain_kg(200);
    EXPECT_EQ(manifest_to_json(random_deletion(kg, 0.1, 42)), manifest_to_json(random_deletion(kg, 0.1, 42)));
    EXPECT_NE(manifest_to_json(random_deletion(kg, 0.1, 42)), manifest_to_json(random_deletion(kg, 0.1, 43)));
}

TEST(RandomDeletion, RemovedAreDistinctAndSorted) {
    const auto kg = chain_kg(300);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto ids = random_deletion(kg, 0.2, seed).removed_ids();
        for (std::size_t i = 1; i < ids.size(); ++i) EXPECT_LT(index(ids[i - 1]), index(ids[i]));
    }
}

TEST(RandomDeletion, NestedModeGivesSubsets) {
    const auto kg = chain_kg(200);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto lo = random_deletion(kg, 0.05, seed, {.nested = true}).removed_ids();
        const auto hi = random_deletion(kg, 0.2, seed, {.nested = true}).removed_ids();
        EXPECT_TRUE(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end(),
                                  [](TripleId a, TripleId b) { return index(a) < index(b); }));
    }
}

TEST(RandomDeletion, MasksAreAdditive) {
    const auto kg = chain_kg(50);
    const auto a = random_deletion(kg, 0.1, 1).removed_ids();
    const auto b = random_deletion(kg, 0.2, 2).removed_ids();
    std::vector<TripleId> both = a;
    both.insert(both.end(), b.begin(), b.end());
    const auto ab = apply_mask(kg, both);
    for (const auto& t : kg.triples()) {
        const bool in_a = std::find(a.begin(), a.end(), t.id) != a.end();
        const bool in_b = std::find(b.begin(), b.end(), t.id) != b.end();
        EXPECT_EQ(ab.contains(t.id), !in_a && !in_b);
    }
}

TEST(DisruptPaths, SiblingForcedRemoval) {
    const auto kg = sibling_kg();
    const std::vector<Question> qs{sibling_question()};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = disrupt_paths(kg, qs, seed);
        ASSERT_EQ(m.removed.size(), 1u);
        EXPECT_EQ(m.removed[0].head, "JustinBieber");
        EXPECT_EQ(m.removed[0].relation, "has_brother");
        EXPECT_EQ(m.removed[0].tail, "JaxonBieber");
        ASSERT_EQ(m.per_question.size(), 1u);
        EXPECT_EQ(m.per_question[0].selected_path, "JustinBieber --[has_brother]--> JaxonBieber");
    }
}

TEST(DisruptPaths, NigeriaAlternativeSurvives) {
    const auto kg = nigeria_kg();
    const std::vector<Question> qs{nigeria_question()};
    const auto m = disrupt_paths(kg, qs, 7);
    ASSERT_EQ(m.removed.size(), 1u);
    EXPECT_EQ(m.removed[0].relation, "time zones");
    EXPECT_EQ(m.removed[0].head, "Nigeria");
    const auto view = apply_mask(kg, m.removed_ids());
    const std::vector<EntityId> targets{entity(kg, "West Africa Time Zone")};
    const auto paths = shortest_paths(view, entity(kg, "Nigeria"), targets, 4);
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_EQ(format_path(kg, paths[0]),
              "Nigeria --[administrative division]--> Bauchi --[time zones]--> West Africa Time Zone");
}

TEST(DisruptPaths, SkipReasons) {
    const auto kg = make_kg({{"a", "r", "b"}, {"c", "r", "d"}});
    const std::vector<Question> qs{make_question("missing", "?", {"a"}, {"zzz"}),
                                   make_question("far", "?", {"a"}, {"d"}),
                                   make_question("self", "?", {"a"}, {"a"})};
    const auto m = disrupt_paths(kg, qs, 1);
    EXPECT_TRUE(m.removed.empty());
    ASSERT_EQ(m.per_question.size(), 3u);
    EXPECT_EQ(m.per_question[0].skipped, SkipReason::entities_missing);
    EXPECT_EQ(m.per_question[1].skipped, SkipReason::unreachable);
    EXPECT_EQ(m.per_question[2].skipped, SkipReason::topic_is_answer);
}

TEST(DisruptPaths, CumulativeVersusIsolated) {
    // Two questions over the same direct edge: cumulatively the second sees the longer detour.
    const auto kg = make_kg({{"s", "r", "t"}, {"s", "p", "m"}, {"m", "c", "t"}});
    const std::vector<Question> qs{make_question("q1", "?", {"s"}, {"t"}), make_question("q2", "?", {"s"}, {"t"})};
    const auto cumulative = disrupt_paths(kg, qs, 3);
    EXPECT_EQ(cumulative.removed.size(), 2u);
    EXPECT_EQ(cumulative.per_question[1].selected_path.find("--[p]-->") != std::string::npos, true);

    const auto isolated = disrupt_paths(kg, qs, 3, {.isolated = true});
    ASSERT_EQ(isolated.removed.size(), 1u);
    EXPECT_TRUE(isolated.per_question[1].shared);
}

TEST(DisruptPaths, SelectedTripleIsGoneAndOnAShortestPath) {
    Engine rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const auto kg = random_kg(rng, 12, 30, 3);
        if (kg.entity_count() < 2) continue;
        std::vector<Question> qs;
        for (int i = 0; i < 5; ++i) {
            qs.push_back(make_question("q" + std::to_string(i), "?",
                                       {kg.entity_label(EntityId{static_cast<std::uint32_t>(uniform_below(rng, kg.entity_count()))})},
                                       {kg.entity_label(EntityId{static_cast<std::uint32_t>(uniform_below(rng, kg.entity_count()))})}));
        }
        const auto m = disrupt_paths(kg, qs, trial, {.isolated = true});
        const auto view = apply_mask(kg, m.removed_ids());
        for (std::size_t i = 0; i < qs.size(); ++i) {
            const auto& d = m.per_question[i];
            if (d.skipped) continue;
            const auto id = kg.find_triple(d.removed->head, d.removed->relation, d.removed->tail).value();
            EXPECT_FALSE(view.contains(id));
            // isolated mode: the path was a shortest path of the intact KG
            const auto paths = shortest_paths(KgView(kg), *kg.find_entity(qs[i].topic_entities[0]),
                                              std::vector<EntityId>{*kg.find_entity(qs[i].answers[0].label)});
            bool found = false;
            for (const auto& p : paths) {
                if (format_path(kg, p) == d.selected_path) {
                    const auto ids = p.triple_ids();
                    found = std::find(ids.begin(), ids.end(), id) != ids.end();
                    if (found) break;
                }
            }
            EXPECT_TRUE(found);
        }
    }
}

TEST(DisruptPaths, OrderIndependentPerQuestionDraws) {
    const auto kg = make_kg({{"a", "r1", "x"}, {"a", "r2", "x"}, {"b", "r1", "y"}, {"b", "r2", "y"}});
    const auto q1 = make_question("q1", "?", {"a"}, {"x"});
    const auto q2 = make_question("q2", "?", {"b"}, {"y"});
    const std::vector<Question> fwd{q1, q2};
    const std::vector<Question> rev{q2, q1};
    const auto m1 = disrupt_paths(kg, fwd, 5);
    const auto m2 = disrupt_paths(kg, rev, 5);
    EXPECT_EQ(m1.removed_ids(), m2.removed_ids());
}

TEST(Manifest, JsonRoundTripAndReplay) {
    const auto kg = sibling_kg();
    const std::vector<Question> qs{sibling_question(), make_question("x", "?", {"Nobody"}, {"JaxonBieber"})};
    const auto m = disrupt_paths(kg, qs, 9);
    const auto text = manifest_to_json(m);
    const auto back = manifest_from_json(text);
    EXPECT_EQ(manifest_to_json(back), text);
    EXPECT_EQ(replay_manifest(kg, back).checksum(), apply_mask(kg, m.removed_ids()).checksum());

    const auto r = random_deletion(kg, 0.5, 4);
    EXPECT_EQ(manifest_to_json(manifest_from_json(manifest_to_json(r))), manifest_to_json(r));
}

TEST(Manifest, ReplayAgainstOtherKgFails) {
    const auto m = random_deletion(sibling_kg(), 1.0, 1);
    EXPECT_THROW(replay_manifest(nigeria_kg(), m), ConsistencyError);
    EXPECT_THROW(manifest_from_json("{\"strategy\": \"random\"}"), InputError);
    EXPECT_THROW(manifest_from_json("not json"), InputError);
}
