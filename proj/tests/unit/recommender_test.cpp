#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "embedding_builders.hpp"
#include "kgwe/error.hpp"
#include "kgwe/evaluator.hpp"
#include "kgwe/rng.hpp"

using namespace kgwe;
using kgwe::test::embeddings_of;

namespace {

// Unit vector whose cosine with (1, 0) is c.
std::vector<double> at_cosine(double c, double sign = 1.0) { return {c, sign * std::sqrt(1 - c * c)}; }

}  // namespace

TEST(PredictRating, SingleNeighborReturnsItsRating) {
    const auto emb = embeddings_of({"i", "j"}, {{1, 0}, at_cosine(0.8)});
    RatingsDataset r;
    r.add("u", "j", 4);
    const auto p = predict_rating("u", "i", r, emb, 5);
    ASSERT_TRUE(p);
    EXPECT_NEAR(p->value, 4.0, 1e-12);
    EXPECT_FALSE(p->mean_fallback);
    EXPECT_EQ(p->neighbors, 1u);
}

TEST(PredictRating, TwoNeighborsWeightedBySimilarity) {
    const auto emb = embeddings_of({"i", "j1", "j2"}, {{1, 0}, at_cosine(0.5), at_cosine(0.25, -1)});
    RatingsDataset r;
    r.add("u", "j1", 4);
    r.add("u", "j2", 2);
    EXPECT_NEAR(predict_rating("u", "i", r, emb, 5)->value, 10.0 / 3.0, 1e-12);
}

TEST(PredictRating, NeighborhoodKeepsMostSimilar) {
    const auto emb = embeddings_of({"i", "a", "b", "c"},
                                   {{1, 0}, at_cosine(0.9), at_cosine(0.6), at_cosine(0.1)});
    RatingsDataset r;
    r.add("u", "c", 1);
    r.add("u", "a", 5);
    r.add("u", "b", 3);
    const auto p = predict_rating("u", "i", r, emb, 2);
    EXPECT_EQ(p->neighbors, 2u);
    EXPECT_NEAR(p->value, (0.9 * 5 + 0.6 * 3) / 1.5, 1e-12);
}

TEST(PredictRating, ZeroSimilaritiesFallBackToMean) {
    const auto emb = embeddings_of({"i", "a", "b"}, {{1, 0}, {0, 1}, {0, -2}});
    RatingsDataset r;
    r.add("u", "a", 5);
    r.add("u", "b", 2);
    r.add("u", "i", 1);  // the target's own rating is neither a neighbor nor in the mean
    const auto p = predict_rating("u", "i", r, emb, 5);
    ASSERT_TRUE(p);
    EXPECT_TRUE(p->mean_fallback);
    EXPECT_DOUBLE_EQ(p->value, 3.5);
}

TEST(PredictRating, NegativeSimilarityCanLeaveRatingRange) {
    // Kept exactly as the formula is printed, not clipped.
    const auto emb = embeddings_of({"i", "a", "b"}, {{1, 0}, at_cosine(-0.8), at_cosine(0.2)});
    RatingsDataset r;
    r.add("u", "a", 5);
    r.add("u", "b", 1);
    const auto p = predict_rating("u", "i", r, emb, 5);
    EXPECT_NEAR(p->value, (-0.8 * 5 + 0.2 * 1) / 1.0, 1e-12);
    EXPECT_LT(p->value, 1.0);
}

TEST(PredictRating, ColdUserAndMissingItem) {
    const auto emb = embeddings_of({"i", "a"}, {{1, 0}, {0.5, 0.5}});
    RatingsDataset r;
    r.add("u", "ghost", 4);
    EXPECT_FALSE(predict_rating("u", "i", r, emb, 5));
    EXPECT_FALSE(predict_rating("nobody", "i", r, emb, 5));
    r.add("v", "a", 4);
    EXPECT_FALSE(predict_rating("v", "not-embedded", r, emb, 5));
    EXPECT_TRUE(predict_rating("v", "i", r, emb, 5));
}

TEST(PredictRating, ConstantRatingsAndNonnegativeSimilarity) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 1 + static_cast<int>(uniform_below(rng, 8));
        std::vector<std::string> tokens{"i"};
        std::vector<std::vector<double>> rows{{1, 0, 0}};
        RatingsDataset r;
        const double value = 1 + static_cast<double>(uniform_below(rng, 5));
        for (int j = 0; j < m; ++j) {
            tokens.push_back("j" + std::to_string(j));
            rows.push_back({uniform01(rng), uniform01(rng), uniform01(rng)});
            r.add("u", tokens.back(), value);
        }
        const auto p = predict_rating("u", "i", r, embeddings_of(tokens, rows), 5);
        ASSERT_TRUE(p);
        EXPECT_NEAR(p->value, value, 1e-12);
    }
}

TEST(Ratings, DatasetValidation) {
    RatingsDataset r(1, 5);
    r.add("u", "a", 3);
    EXPECT_THROW(r.add("u", "a", 4), Error);
    EXPECT_THROW(r.add("u", "b", 6), Error);
    EXPECT_THROW(r.add("u", "b", 0.5), Error);
    std::istringstream in("u1\ta\t4\nu1\tb\tfive\n");
    try {
        read_ratings(in);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Holdout, HidesRoundedFractionAndKeepsOneVisible) {
    RatingsDataset r;
    for (int i = 0; i < 10; ++i) r.add("many", "i" + std::to_string(i), 3);
    r.add("single", "i0", 4);
    for (int i = 0; i < 3; ++i) r.add("three", "i" + std::to_string(i), 5);
    const auto split = split_holdout(r, 0.2, 9);
    EXPECT_EQ(split.hidden.rated_by("many").size(), 2u);
    EXPECT_EQ(split.visible.rated_by("many").size(), 8u);
    EXPECT_EQ(split.hidden.rated_by("single").size(), 0u);
    EXPECT_EQ(split.hidden.rated_by("three").size(), 1u);  // round(0.6)
    EXPECT_EQ(split.visible.size() + split.hidden.size(), r.size());
    const auto again = split_holdout(r, 0.2, 9);
    for (std::size_t k = 0; k < split.hidden.size(); ++k)
        EXPECT_EQ(split.hidden.ratings()[k].item, again.hidden.ratings()[k].item);
}

namespace {

// Five items on the unit circle and five users with fixed visible/hidden
// ratings. Worked by hand with top_n 2, threshold 4:
//   u1 scores C 4, D -2.14, E -4.63 -> {C, D}; relevant {C}: P .5 R 1
//   u2 scores E 5, B 4.26, A -5     -> {E, B}; relevant {E}: P .5 R 1
//   u3 scores B 2, C 2 (mean), ...  -> {B, C}; relevant {B}: P .5 R 1
//   u4 has no relevant hidden item  -> excluded
//   u5 scores C 4, B -2.14, A -4.63 -> {C, B}; relevant {A, B}: P .5 R .5
// Macro averages: P .5, R .875, F1 (2/3 + 2/3 + 2/3 + .5) / 4 = .625.
struct HandCase {
    EmbeddingMatrix emb = embeddings_of({"A", "B", "C", "D", "E"},
                                        {{1, 0}, {0.6, 0.8}, {0, 1}, {-0.6, 0.8}, {-1, 0}});
    HoldoutSplit split{RatingsDataset(), RatingsDataset()};

    HandCase() {
        auto& v = split.visible;
        auto& h = split.hidden;
        v.add("u1", "A", 5), v.add("u1", "B", 4), h.add("u1", "C", 5), h.add("u1", "E", 2);
        v.add("u2", "C", 4), v.add("u2", "D", 5), h.add("u2", "E", 4), h.add("u2", "A", 1);
        v.add("u3", "A", 2), h.add("u3", "B", 5);
        v.add("u4", "B", 3), v.add("u4", "C", 3), h.add("u4", "D", 3);
        v.add("u5", "E", 5), v.add("u5", "D", 4), h.add("u5", "A", 4), h.add("u5", "B", 5);
    }
};

}  // namespace

TEST(Recommender, FiveUserHandComputedCase) {
    HandCase c;
    RecommenderOptions opts;
    opts.top_n = 2;
    const auto r = evaluate_split(c.split, c.emb, opts);
    EXPECT_NEAR(*r.aggregate("precision"), 0.5, 1e-12);
    EXPECT_NEAR(*r.aggregate("recall"), 0.875, 1e-12);
    EXPECT_NEAR(*r.aggregate("f1"), 0.625, 1e-12);
    EXPECT_EQ(r.excluded, 1u);
}

TEST(Recommender, PerfectList) {
    const auto emb = embeddings_of({"a", "b", "c", "d"}, {{1, 0}, {0.9, 0.1}, {0.95, 0.05}, {-1, 0}});
    HoldoutSplit split{RatingsDataset(), RatingsDataset()};
    split.visible.add("u", "a", 5);
    split.hidden.add("u", "b", 5);
    split.hidden.add("u", "c", 4);
    split.hidden.add("u", "d", 1);
    RecommenderOptions opts;
    opts.top_n = 2;
    const auto r = evaluate_split(split, emb, opts);
    EXPECT_EQ(*r.aggregate("precision"), 1.0);
    EXPECT_EQ(*r.aggregate("recall"), 1.0);
    EXPECT_EQ(*r.aggregate("f1"), 1.0);
}

TEST(Recommender, NoRelevantRecommendedGivesZeroF1) {
    const auto emb = embeddings_of({"a", "b", "c"}, {{1, 0}, {-1, 0.01}, {0.9, 0.1}});
    HoldoutSplit split{RatingsDataset(), RatingsDataset()};
    split.visible.add("u", "a", 5);
    split.hidden.add("u", "b", 5);  // opposite to a: scored -5
    split.visible.add("w", "c", 1);
    RecommenderOptions opts;
    opts.top_n = 1;
    // u's list is {c}, scored 5, while the relevant item b is scored -5.
    const auto r = evaluate_split(split, emb, opts);
    EXPECT_EQ(*r.aggregate("precision"), 0.0);
    EXPECT_EQ(*r.aggregate("recall"), 0.0);
    EXPECT_EQ(*r.aggregate("f1"), 0.0);
}

TEST(Recommender, MissingItemsCounted) {
    HandCase c;
    c.split.hidden.add("u3", "not-embedded", 5);
    RecommenderOptions opts;
    opts.top_n = 2;
    const auto r = evaluate_split(c.split, c.emb, opts);
    EXPECT_EQ(r.missing_entities, 1u);
    EXPECT_NEAR(*r.aggregate("recall"), 0.875, 1e-12);
}

TEST(Recommender, DeterministicGivenSeed) {
    Rng rng(3);
    std::vector<std::string> items;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 12; ++i) {
        items.push_back("i" + std::to_string(i));
        rows.push_back({uniform01(rng) - 0.5, uniform01(rng) - 0.5, uniform01(rng) - 0.5});
    }
    const auto emb = embeddings_of(items, rows);
    RatingsDataset r;
    for (int u = 0; u < 6; ++u)
        for (int i = 0; i < 12; ++i)
            if (uniform01(rng) < 0.6) r.add("u" + std::to_string(u), items[i], 1 + static_cast<double>(uniform_below(rng, 5)));
    const auto a = evaluate_recommender(r, emb, {});
    const auto b = evaluate_recommender(r, emb, {});
    ASSERT_EQ(a.metrics.size(), b.metrics.size());
    for (std::size_t k = 0; k < a.metrics.size(); ++k) EXPECT_EQ(a.metrics[k].value, b.metrics[k].value);
}
