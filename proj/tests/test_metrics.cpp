#include <gtest/gtest.h>

#include "kgab/errors.hpp"
#include "kgab/metrics.hpp"

using namespace kgab;

TEST(Normalize, Tokens) {
    EXPECT_EQ(normalize_tokens("  Justin Bieber, was born in \"Canada\"! "),
              (std::vector<std::string>{"justin", "bieber", "was", "born", "in", "canada"}));
    EXPECT_EQ(normalize_tokens("-- ... !!"), std::vector<std::string>{});
    EXPECT_EQ(normalize_tokens("U.S.A."), (std::vector<std::string>{"u.s.a"}));
}

TEST(MatchAnswer, Examples) {
    EXPECT_TRUE(match_answer("Justin Bieber was born in Canada", {"Canada", {}}));
    EXPECT_FALSE(match_answer("West Africa Time", {"West Africa Time Zone", {}}));
    EXPECT_TRUE(match_answer("the West Africa Time Zone applies", {"West Africa Time Zone", {}}));
}

TEST(MatchAnswer, ContiguityAndOrder) {
    EXPECT_FALSE(match_answer("Time Zone of West Africa", {"West Africa Time Zone", {}}));
    EXPECT_FALSE(match_answer("West Africa standard Time Zone", {"West Africa Time Zone", {}}));
    EXPECT_FALSE(match_answer("Canadas", {"Canada", {}}));
}

TEST(MatchAnswer, Aliases) {
    const AnswerEntity wat{"West Africa Time Zone", {"WAT"}};
    EXPECT_TRUE(match_answer("It is WAT.", wat));
    EXPECT_FALSE(match_answer("It is WAT.", wat, {.use_aliases = false}));
}

TEST(MatchAnswer, TruncationGuard) {
    std::string long_output;
    for (int i = 0; i < 600; ++i) long_output += "x ";
    long_output += "Canada";
    EXPECT_FALSE(match_answer(long_output, {"Canada", {}}));
    EXPECT_TRUE(match_answer(long_output, {"Canada", {}}, {.max_output_tokens = 1000}));
}

TEST(ScoreQuestion, Examples) {
    const AnswerSet brothers{{"Jaxon Bieber", {}}, {"Jazmyn Bieber", {}}};
    const auto half = score_question("His brother is Jaxon Bieber.", brothers);
    EXPECT_DOUBLE_EQ(half.accuracy, 0.5);
    EXPECT_EQ(half.hit, 1);
    EXPECT_EQ(half.matched, (std::vector<std::size_t>{0}));

    const auto none = score_question("unknown", brothers);
    EXPECT_DOUBLE_EQ(none.accuracy, 0.0);
    EXPECT_EQ(none.hit, 0);

    const auto both = score_question("Jazmyn Bieber and Jaxon Bieber", brothers);
    EXPECT_DOUBLE_EQ(both.accuracy, 1.0);
    EXPECT_EQ(both.hit, 1);

    EXPECT_THROW(score_question("x", {}), InputError);
}

TEST(Aggregate, Examples) {
    const std::vector<QuestionScore> s{{1.0, 1, {}}, {0.5, 1, {}}, {0.0, 0, {}}};
    const auto a = aggregate(s);
    EXPECT_DOUBLE_EQ(a.accuracy_percent, 50.00);
    EXPECT_DOUBLE_EQ(a.hits_percent, 66.67);

    const std::vector<QuestionScore> perfect{{1.0, 1, {}}, {1.0, 1, {}}};
    EXPECT_DOUBLE_EQ(aggregate(perfect).accuracy_percent, 100.0);
    EXPECT_DOUBLE_EQ(aggregate(perfect).hits_percent, 100.0);

    const std::vector<QuestionScore> zero{{0.0, 0, {}}};
    EXPECT_DOUBLE_EQ(aggregate(zero).accuracy_percent, 0.0);
    EXPECT_THROW(aggregate({}), InputError);
}

TEST(RelativeDrop, Examples) {
    EXPECT_DOUBLE_EQ(*relative_drop(76.75, 75.55), 1.56);
    EXPECT_DOUBLE_EQ(*relative_drop(76.75, 50.46), 34.25);
    EXPECT_DOUBLE_EQ(*relative_drop(76.75, 76.75), 0.0);
    EXPECT_DOUBLE_EQ(*relative_drop(50.0, 60.0), -20.0);
    EXPECT_FALSE(relative_drop(0.0, 10.0));
}

TEST(FormatCell, Shapes) {
    EXPECT_EQ(format_cell(75.55, 76.75), "75.55 (-1.56%)");
    EXPECT_EQ(format_cell(76.75, 76.75), "76.75 (-0.00%)");
    EXPECT_EQ(format_cell(76.75, std::nullopt), "76.75");
    EXPECT_EQ(format_cell(60.0, 50.0), "60.00 (+20.00%)");
    EXPECT_EQ(format_cell(10.0, 0.0), "10.00 (n/a)");
}
