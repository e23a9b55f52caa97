#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "kgwe/error.hpp"
#include "kgwe/weighting.hpp"
#include "oracles.hpp"

using namespace kgwe;
using kgwe::test::graph_of;

namespace {

std::vector<std::pair<int, int>> links_of(const KnowledgeGraph& g) {
    std::vector<std::pair<int, int>> links;
    for (EntityId v = 0; v < g.entity_count(); ++v)
        for (const auto& e : g.out_edges(v)) links.emplace_back(v, e.target);
    return links;
}

// The six-vertex graph used for the PageRank checks: one dangling vertex,
// one parallel pair, one self loop.
KnowledgeGraph six_vertex_graph() {
    return graph_of({{"a", "p", "b"}, {"a", "p", "c"}, {"b", "p", "c"}, {"c", "p", "a"},
                     {"d", "p", "c"}, {"d", "q", "c"}, {"e", "p", "d"}, {"e", "p", "f"},
                     {"f", "p", "f"}, {"a", "p", "e"}});
}

}  // namespace

TEST(Weighting, StrategyNamesRoundTrip) {
    for (auto s : {WeightStrategy::uniform, WeightStrategy::predicate_frequency, WeightStrategy::pagerank,
                   WeightStrategy::inverse_pagerank, WeightStrategy::clickstream})
        EXPECT_EQ(parse_strategy(to_string(s)), s);
    EXPECT_FALSE(parse_strategy("bogus"));
}

TEST(Weighting, TransitionProbabilitiesNormalizeWeights) {
    const auto g = graph_of({{"a", "p", "b"}, {"a", "p", "c"}});
    const EdgeWeightTable w(g, {1.0, 3.0}, WeightStrategy::clickstream);
    const auto probs = transition_probabilities(w, *g.resolve("a"));
    ASSERT_EQ(probs.size(), 2u);
    EXPECT_DOUBLE_EQ(probs[0], 0.25);
    EXPECT_DOUBLE_EQ(probs[1], 0.75);
    EXPECT_TRUE(transition_probabilities(w, *g.resolve("b")).empty());
}

TEST(Weighting, ScalingWeightsLeavesProbabilitiesUnchanged) {
    const auto g = graph_of({{"a", "p", "b"}, {"a", "p", "c"}, {"a", "q", "d"}});
    const EdgeWeightTable w(g, {2.0, 5.0, 7.0}, WeightStrategy::clickstream);
    const EdgeWeightTable w10(g, {20.0, 50.0, 70.0}, WeightStrategy::clickstream);
    const auto p = transition_probabilities(w, 0), q = transition_probabilities(w10, 0);
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p[k], q[k], 1e-15);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
}

TEST(Weighting, AllZeroRowHasZeroProbabilities) {
    const auto g = graph_of({{"a", "p", "b"}, {"a", "p", "c"}});
    const EdgeWeightTable w(g, {0.0, 0.0}, WeightStrategy::clickstream);
    for (double p : transition_probabilities(w, 0)) EXPECT_EQ(p, 0.0);
}

TEST(Weighting, TableRejectsBadWeights) {
    const auto g = graph_of({{"a", "p", "b"}, {"a", "p", "c"}});
    EXPECT_THROW(EdgeWeightTable(g, {1.0}, WeightStrategy::uniform), ContractViolation);
    EXPECT_THROW(EdgeWeightTable(g, {1.0, -1.0}, WeightStrategy::uniform), ContractViolation);
    EXPECT_THROW(EdgeWeightTable(g, {1.0, NAN}, WeightStrategy::uniform), ContractViolation);
    EXPECT_THROW(EdgeWeightTable(g, {1.0, INFINITY}, WeightStrategy::uniform), ContractViolation);
}

TEST(Weighting, UniformWeightsAreOne) {
    const auto g = six_vertex_graph();
    const auto w = uniform_weights(g);
    EXPECT_TRUE(w.matches(g));
    for (double x : w.all()) EXPECT_EQ(x, 1.0);
}

TEST(Weighting, PredicateFrequencyCountsEdges) {
    const auto g = graph_of({{"a", "p", "b"}, {"b", "p", "c"}, {"c", "q", "a"}});
    const auto w = predicate_frequency_weights(g);
    // p occurs twice, q once.
    EXPECT_EQ(w.out_weights(*g.resolve("a"))[0], 2.0);
    EXPECT_EQ(w.out_weights(*g.resolve("c"))[0], 1.0);
}

TEST(PageRank, MatchesDensePowerIteration) {
    const auto g = six_vertex_graph();
    const auto pr = pagerank(g);
    const auto oracle = kgwe::test::dense_pagerank(g.entity_count(), links_of(g), 0.85, 1e-8, 100);
    ASSERT_TRUE(pr.converged);
    for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(pr.scores[i], oracle[i], 1e-8);
}

TEST(PageRank, ConvergesToLinearSystemSolution) {
    const auto g = six_vertex_graph();
    const auto pr = pagerank(g, {0.85, 1e-14, 1000});
    const auto exact = kgwe::test::exact_pagerank(g.entity_count(), links_of(g), 0.85);
    for (std::size_t i = 0; i < exact.size(); ++i) EXPECT_NEAR(pr.scores[i], exact[i], 1e-12);
}

TEST(PageRank, CycleIsUniform) {
    const auto g = kgwe::test::cycle_graph(5);
    const auto pr = pagerank(g);
    for (double s : pr.scores) EXPECT_EQ(s, pr.scores[0]);
    EXPECT_NEAR(pr.scores[0], 0.2, 1e-15);
}

TEST(PageRank, SumsToOneAndIsPositive) {
    const auto g = six_vertex_graph();
    const auto pr = pagerank(g);
    EXPECT_NEAR(std::accumulate(pr.scores.begin(), pr.scores.end(), 0.0), 1.0, 1e-9);
    for (double s : pr.scores) EXPECT_GT(s, 0.0);
}

TEST(PageRank, NonConvergenceIsReported) {
    const auto g = six_vertex_graph();
    const auto pr = pagerank(g, {0.85, 1e-30, 3});
    EXPECT_FALSE(pr.converged);
    EXPECT_EQ(pr.iterations, 3);
    EXPECT_NEAR(std::accumulate(pr.scores.begin(), pr.scores.end(), 0.0), 1.0, 1e-12);
}

TEST(PageRank, RejectsBadInput) {
    EXPECT_THROW(pagerank(KnowledgeGraph{}), ContractViolation);
    EXPECT_THROW(pagerank(six_vertex_graph(), {1.0, 1e-8, 100}), ContractViolation);
}

TEST(PageRank, EdgeWeightsUseTargetScore) {
    const auto g = six_vertex_graph();
    const auto pr = pagerank(g);
    const auto w = pagerank_weights(g, pr);
    const auto inv = inverse_pagerank_weights(g, pr);
    for (EntityId v = 0; v < g.entity_count(); ++v) {
        const auto out = g.out_edges(v);
        for (std::size_t k = 0; k < out.size(); ++k) {
            EXPECT_EQ(w.out_weights(v)[k], pr.scores[out[k].target]);
            EXPECT_DOUBLE_EQ(inv.out_weights(v)[k] * pr.scores[out[k].target], 1.0);
        }
    }
}

TEST(Clickstream, ParseKeepsLinkRowsAndSums) {
    std::istringstream in(
        "Pretty_Hate_Machine\tNine_Inch_Nails\tlink\t2400\n"
        "other-search\tNine_Inch_Nails\texternal\t9000\n"
        "Pretty_Hate_Machine\tNine_Inch_Nails\tlink\t100\n"
        "broken line\n"
        "A\tB\tlink\tnotanumber\n");
    const auto [table, report] = parse_clickstream(in);
    EXPECT_EQ(table.count("Pretty_Hate_Machine", "Nine_Inch_Nails"), 2500u);
    EXPECT_FALSE(table.count("other-search", "Nine_Inch_Nails"));
    EXPECT_EQ(report.skipped_non_link, 1u);
    EXPECT_EQ(report.malformed.size(), 2u);
    EXPECT_EQ(report.malformed[0].line, 4u);
}

TEST(Clickstream, WeightsUseCountsOrSmoothing) {
    const std::string r = "http://dbpedia.org/resource/";
    const auto g = graph_of({{r + "Pretty_Hate_Machine", "artist", r + "Nine_Inch_Nails"},
                             {r + "Pretty_Hate_Machine", "genre", r + "Industrial_rock"},
                             {r + "Pretty_Hate_Machine", "label", "urn:other:tvt"}});
    ClickstreamTable t;
    t.add("Pretty_Hate_Machine", "Nine_Inch_Nails", 2400);
    ClickstreamCoverage cov;
    ClickstreamOptions opts;
    opts.smoothing = 0.5;
    const auto w = clickstream_weights(g, t, opts, &cov);
    const auto row = w.out_weights(0);
    EXPECT_EQ(row[0], 2400.0);
    EXPECT_EQ(row[1], 0.5);
    EXPECT_EQ(row[2], 0.5);
    EXPECT_EQ(cov.edges_observed, 1u);
    EXPECT_EQ(cov.edges_smoothed, 2u);
    EXPECT_EQ(cov.untitled_entities, 1u);
    EXPECT_EQ(w.strategy(), WeightStrategy::clickstream);
}

TEST(Clickstream, ZeroSmoothingMakesUnobservedEdgesUnreachable) {
    const std::string r = "http://dbpedia.org/resource/";
    const auto g = graph_of({{r + "A", "p", r + "B"}, {r + "A", "p", r + "C"}});
    ClickstreamTable t;
    t.add("A", "C", 10);
    ClickstreamOptions opts;
    opts.smoothing = 0.0;
    const auto probs = transition_probabilities(clickstream_weights(g, t, opts), 0);
    EXPECT_EQ(probs[0], 0.0);
    EXPECT_EQ(probs[1], 1.0);
}

TEST(Clickstream, PageTitleStripsPrefixAndDecodes) {
    ClickstreamOptions opts;
    EXPECT_EQ(page_title("http://dbpedia.org/resource/Nine_Inch_Nails", opts), "Nine_Inch_Nails");
    EXPECT_FALSE(page_title("http://example.org/x", opts));
    opts.url_decode = true;
    EXPECT_EQ(page_title("http://dbpedia.org/resource/AC%2FDC", opts), "AC/DC");
}

TEST(Weighting, WeightFileRoundTripIsExact) {
    const auto g = six_vertex_graph();
    const auto w = inverse_pagerank_weights(g, pagerank(g));
    std::stringstream s;
    write_weights(g, w, s);
    const auto back = read_weights(g, s, WeightStrategy::inverse_pagerank);
    ASSERT_EQ(back.size(), w.size());
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(back.all()[i], w.all()[i]);
}

TEST(Weighting, WeightFileMustCoverGraph) {
    const auto g = graph_of({{"a", "p", "b"}, {"a", "p", "c"}});
    std::istringstream partial("a\t0\t1\n");
    EXPECT_THROW(read_weights(g, partial, WeightStrategy::uniform), Error);
    std::istringstream bad_index("a\t5\t1\n");
    EXPECT_THROW(read_weights(g, bad_index, WeightStrategy::uniform), FormatError);
}
