#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "kgab/errors.hpp"
#include "kgab/retrievers.hpp"
#include "support.hpp"

using namespace kgab;
using namespace kgab::testing;

namespace {

/// Puts every label in `favored` on one axis and everything else on another.
class AxisEmbedder final : public Embedder {
  public:
    AxisEmbedder(std::string question, std::vector<std::string> favored)
        : question_(std::move(question)), favored_(std::move(favored)) {}
    [[nodiscard]] std::vector<double> embed(std::string_view text) const override {
        if (text == question_) return {1.0, 0.0};
        for (const auto& f : favored_) {
            if (text == f) return {1.0, 0.0};
        }
        return {0.0, 1.0};
    }

  private:
    std::string question_;
    std::vector<std::string> favored_;
};

class ConstantScorer final : public Scorer {
  public:
    [[nodiscard]] double score(const Question&, std::string_view) const override { return 0.5; }
};

std::vector<TripleId> without(const Kg& kg, const char* h, const char* r, const char* t) {
    return {triple(kg, h, r, t)};
}

}  // namespace

TEST(Textualize, Templates) {
    const auto kg = sibling_kg();
    const std::vector<TripleId> one{TripleId{1}};
    EXPECT_EQ(textualize_subgraph(kg, one), "JustinBieber --has_parent--> JeremyBieber");
    EXPECT_EQ(textualize_subgraph(kg, {}), "");
    const std::vector<TripleId> two{TripleId{2}, TripleId{0}};
    EXPECT_EQ(textualize_subgraph(kg, two),
              "JustinBieber --has_brother--> JaxonBieber\nJeremyBieber --has_child--> JaxonBieber");
}

TEST(Rog, SiblingBothPlans) {
    const auto kg = sibling_kg();
    const FixedPlanner planner({{"has_brother"}, {"has_parent", "has_child"}});
    const auto r = rog_retrieve(KgView(kg), sibling_question(), planner, {.top_k_plans = 2});
    ASSERT_EQ(r.paths.size(), 2u);
    EXPECT_EQ(r.paths[0].length(), 1u);
    EXPECT_EQ(r.paths[1].length(), 2u);
    EXPECT_EQ(r.evidence_text,
              "JustinBieber --has_brother--> JaxonBieber\nJustinBieber --has_parent--> JeremyBieber\n"
              "JeremyBieber --has_child--> JaxonBieber");
}

TEST(Rog, SiblingAfterRemoval) {
    const auto kg = sibling_kg();
    const FixedPlanner planner({{"has_brother"}, {"has_parent", "has_child"}});
    const auto view = apply_mask(kg, without(kg, "JustinBieber", "has_brother", "JaxonBieber"));
    const auto r = rog_retrieve(view, sibling_question(), planner, {.top_k_plans = 2});
    ASSERT_EQ(r.paths.size(), 1u);
    EXPECT_EQ(r.paths[0].length(), 2u);
    EXPECT_TRUE(verify_in_view(view, r));
}

TEST(Rog, UngroundablePlan) {
    const auto kg = sibling_kg();
    const auto r = rog_retrieve(KgView(kg), sibling_question(), FixedPlanner({{"has_child"}}),
                                {.direction = DirectionMode::forward_only});
    EXPECT_TRUE(r.paths.empty());
    EXPECT_EQ(r.evidence_text, "");
}

TEST(Rog, UnknownRelationsAndTopics) {
    const auto kg = sibling_kg();
    const auto r = rog_retrieve(KgView(kg), sibling_question(), FixedPlanner({{"no_such_relation"}, {}}));
    EXPECT_TRUE(r.paths.empty());
    EXPECT_EQ(r.trace.size(), 2u);
    const auto q = make_question("x", "?", {"Nobody"}, {"JaxonBieber"});
    const auto missing = rog_retrieve(KgView(kg), q, FixedPlanner({{"has_brother"}}));
    EXPECT_TRUE(missing.paths.empty());
    EXPECT_FALSE(missing.trace.empty());
}

TEST(Rog, OraclePlannerUsesIntactPatterns) {
    const auto kg = sibling_kg();
    const OraclePlanner planner(kg);
    EXPECT_EQ(planner.plan(sibling_question(), 3), (std::vector<RelationPlan>{{"has_brother"}}));
    const auto view = apply_mask(kg, without(kg, "JustinBieber", "has_brother", "JaxonBieber"));
    EXPECT_TRUE(rog_retrieve(view, sibling_question(), planner).paths.empty());
}

TEST(Rog, MonotoneUnderDeletion) {
    Engine rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const auto kg = random_kg(rng, 8, 20, 3);
        if (kg.entity_count() == 0) continue;
        const FixedPlanner planner({{"r0"}, {"r1", "r2"}, {"r0", "r0"}});
        const auto q = make_question("q", "?", {kg.entity_label(EntityId{0})}, {"x"});
        const auto before = to_raw(rog_retrieve(KgView(kg), q, planner).paths);
        std::vector<TripleId> gone;
        for (const auto& t : kg.triples()) {
            if (uniform_below(rng, 3) == 0) gone.push_back(t.id);
        }
        const auto view = apply_mask(kg, gone);
        const auto after_r = rog_retrieve(view, q, planner);
        EXPECT_TRUE(verify_in_view(view, after_r));
        const auto after = to_raw(after_r.paths);
        EXPECT_TRUE(std::includes(before.begin(), before.end(), after.begin(), after.end()));
    }
}

TEST(Tog, LexicalBeamKeepsBrother) {
    const auto kg = sibling_kg();
    const auto r = tog_retrieve(KgView(kg), sibling_question(), LexicalScorer{},
                                {.beam_width = 1, .max_depth = 1, .direction = DirectionMode::forward_only});
    ASSERT_EQ(r.paths.size(), 1u);
    EXPECT_EQ(format_path(kg, r.paths[0]), "JustinBieber --[has_brother]--> JaxonBieber");
}

TEST(Tog, WideBeamKeepsEverything) {
    const auto kg = sibling_kg();
    const auto r = tog_retrieve(KgView(kg), sibling_question(), LexicalScorer{},
                                {.beam_width = 10, .max_depth = 1, .direction = DirectionMode::forward_only});
    EXPECT_EQ(r.paths.size(), 2u);
}

TEST(Tog, IsolatedTopic) {
    const auto kg = sibling_kg();
    const std::vector<TripleId> all{TripleId{0}, TripleId{1}, TripleId{2}};
    const auto r = tog_retrieve(apply_mask(kg, all), sibling_question(), LexicalScorer{});
    EXPECT_TRUE(r.paths.empty());
    EXPECT_EQ(r.evidence_text, "");
}

TEST(Tog, StopPredicateFires) {
    const auto kg = sibling_kg();
    // "jaxonbieber" is a single token, so name the end entity in the question to trip the threshold.
    const auto q = make_question("q", "JaxonBieber", {"JustinBieber"}, {"JaxonBieber"});
    const auto r = tog_retrieve(KgView(kg), q, LexicalScorer{}, {.beam_width = 3, .max_depth = 3});
    EXPECT_NE(r.trace.back().find("sufficient"), std::string::npos);
}

TEST(Tog, UnboundedBeamEqualsEnumeration) {
    Engine rng(4);
    for (int trial = 0; trial < 60; ++trial) {
        const auto kg = random_kg(rng, 7, 14, 2);
        if (kg.entity_count() == 0) continue;
        const KgView view(kg);
        const auto q = make_question("q", "?", {kg.entity_label(EntityId{0})}, {"x"});
        for (int depth = 1; depth <= 3; ++depth) {
            const auto r = tog_retrieve(view, q, ConstantScorer{},
                                        {.beam_width = 1'000'000, .max_depth = depth, .stop_threshold = std::nullopt});
            const auto all = all_simple_paths(view, 0, depth, true);
            std::size_t longest = 0;
            for (const auto& p : all) longest = std::max(longest, p.steps.size());
            std::set<RawPath> expected;
            for (const auto& p : all) {
                if (p.steps.size() == longest) expected.insert(p);
            }
            EXPECT_EQ(to_raw(r.paths), expected);
        }
    }
}

TEST(GRetriever, NigeriaRecoversAlternative) {
    const auto kg = nigeria_kg();
    const auto q = nigeria_question();
    const auto view = apply_mask(kg, without(kg, "Nigeria", "time zones", "West Africa Time Zone"));
    const AxisEmbedder embedder(q.text, {"West Africa Time Zone"});
    const auto r = gretriever_retrieve(view, q, embedder, {.k_nodes = 1, .hop_radius = 2, .edge_cost = 0.5});
    EXPECT_EQ(r.evidence_text,
              "Nigeria --administrative division--> Bauchi\nBauchi --time zones--> West Africa Time Zone");
    EXPECT_TRUE(verify_in_view(view, r));
}

TEST(GRetriever, TopicAloneWhenEdgesTooExpensive) {
    const auto kg = nigeria_kg();
    const auto q = nigeria_question();
    const AxisEmbedder embedder(q.text, {"Nigeria"});
    const auto r = gretriever_retrieve(KgView(kg), q, embedder, {.k_nodes = 1, .hop_radius = 2, .edge_cost = 10.0});
    EXPECT_EQ(r.subgraph_nodes, (std::vector<EntityId>{entity(kg, "Nigeria")}));
    EXPECT_TRUE(r.subgraph.empty());
    EXPECT_EQ(r.evidence_text, "");
}

TEST(GRetriever, LoneTopic) {
    const auto kg = make_kg({{"a", "r", "b"}, {"c", "r", "d"}});
    const std::vector<TripleId> gone{TripleId{0}};
    const auto q = make_question("q", "what about a?", {"a"}, {"b"});
    const auto r = gretriever_retrieve(apply_mask(kg, gone), q, HashingEmbedder{}, {});
    EXPECT_EQ(r.subgraph_nodes, (std::vector<EntityId>{entity(kg, "a")}));
    EXPECT_EQ(r.evidence_text, "");
}

TEST(GRetriever, OutputIsATreeInView) {
    Engine rng(12);
    for (int trial = 0; trial < 60; ++trial) {
        const auto kg = random_kg(rng, 10, 25, 3);
        if (kg.entity_count() == 0) continue;
        std::vector<TripleId> gone;
        for (const auto& t : kg.triples()) {
            if (uniform_below(rng, 4) == 0) gone.push_back(t.id);
        }
        const auto view = apply_mask(kg, gone);
        const auto q = make_question("q", "e1 e2 r0", {kg.entity_label(EntityId{0})}, {"x"});
        const auto r = gretriever_retrieve(view, q, HashingEmbedder{},
                                           {.k_nodes = 3, .hop_radius = 2, .edge_cost = 0.5,
                                            .mode = trial % 2 ? PcstMode::approx : PcstMode::exact});
        EXPECT_TRUE(verify_in_view(view, r));
        EXPECT_EQ(r.subgraph.size() + 1, r.subgraph_nodes.size());
        EXPECT_NE(std::find(r.subgraph_nodes.begin(), r.subgraph_nodes.end(), EntityId{0}), r.subgraph_nodes.end());
    }
}

TEST(GRetriever, ParameterChecks) {
    const auto kg = sibling_kg();
    EXPECT_THROW(gretriever_retrieve(KgView(kg), sibling_question(), HashingEmbedder{}, {.k_nodes = 0}), ConfigError);
    EXPECT_THROW(gretriever_retrieve(KgView(kg), sibling_question(), HashingEmbedder{}, {.hop_radius = 3}),
                 ConfigError);
}

TEST(Oracle, FindsCaseStudyAlternatives) {
    struct Case {
        Kg kg;
        Question q;
        std::array<const char*, 3> gold;
        std::size_t alternatives;
    };
    const std::vector<Case> cases{
        {nigeria_kg(), nigeria_question(), {"Nigeria", "time zones", "West Africa Time Zone"}, 1},
        {oregon_kg(), oregon_question(), {"University of Oregon", "contained by", "Eugene"}, 1},
        {bieber_kg(), bieber_question(), {"Justin Bieber", "nationality", "Canada"}, 2},
    };
    for (const auto& c : cases) {
        const auto intact = oracle_retrieve(KgView(c.kg), c.q);
        ASSERT_EQ(intact.paths.size(), 1u);
        const auto view = apply_mask(c.kg, without(c.kg, c.gold[0], c.gold[1], c.gold[2]));
        const auto r = oracle_retrieve(view, c.q);
        EXPECT_EQ(r.paths.size(), c.alternatives);
        for (const auto& p : r.paths) EXPECT_EQ(p.length(), 2u);
        EXPECT_TRUE(verify_in_view(view, r));
    }
}

TEST(Embedding, HashingIsNormalizedAndDeterministic) {
    const HashingEmbedder e;
    const auto a = e.embed("West Africa Time Zone");
    double norm = 0.0;
    for (double x : a) norm += x * x;
    EXPECT_NEAR(norm, 1.0, 1e-12);
    EXPECT_EQ(a, e.embed("west africa time zone"));
    EXPECT_TRUE(std::all_of(e.embed("").begin(), e.embed("").end(), [](double x) { return x == 0.0; }));
    EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-12);
}

TEST(Trace, IsJson) {
    const auto kg = sibling_kg();
    const auto r = oracle_retrieve(KgView(kg), sibling_question());
    const auto j = nlohmann::json::parse(trace_to_json(kg, r));
    EXPECT_EQ(j["method"], "oracle");
    EXPECT_EQ(j["paths"][0], "JustinBieber --[has_brother]--> JaxonBieber");
}
