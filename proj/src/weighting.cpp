#include "kgwe/weighting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "kgwe/error.hpp"
#include "kgwe/io.hpp"
#include "kgwe/log.hpp"

namespace kgwe {

namespace {

constexpr std::pair<WeightStrategy, std::string_view> kStrategyNames[] = {
    {WeightStrategy::uniform, "uniform"},
    {WeightStrategy::predicate_frequency, "pred-freq"},
    {WeightStrategy::pagerank, "pagerank"},
    {WeightStrategy::inverse_pagerank, "inv-pagerank"},
    {WeightStrategy::clickstream, "clickstream"},
};

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string_view to_string(WeightStrategy strategy) {
    for (auto [s, name] : kStrategyNames)
        if (s == strategy) return name;
    return "unknown";
}

std::optional<WeightStrategy> parse_strategy(std::string_view name) {
    for (auto [s, n] : kStrategyNames)
        if (n == name) return s;
    return std::nullopt;
}

EdgeWeightTable::EdgeWeightTable(const KnowledgeGraph& graph, std::vector<double> weights,
                                 WeightStrategy strategy)
    : offsets_(graph.offsets().begin(), graph.offsets().end()),
      weights_(std::move(weights)),
      strategy_(strategy) {
    if (weights_.size() != graph.edge_count())
        throw ContractViolation("weight table has " + std::to_string(weights_.size()) +
                                " entries for " + std::to_string(graph.edge_count()) + " edges");
    for (double w : weights_)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ContractViolation("edge weights must be finite and nonnegative");
}

std::span<const double> EdgeWeightTable::out_weights(EntityId v) const {
    if (v >= vertex_count())
        throw ContractViolation("entity id " + std::to_string(v) + " out of range");
    return std::span<const double>(weights_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
}

bool EdgeWeightTable::matches(const KnowledgeGraph& graph) const {
    return std::ranges::equal(offsets_, graph.offsets());
}

EdgeWeightTable uniform_weights(const KnowledgeGraph& graph) {
    return {graph, std::vector<double>(graph.edge_count(), 1.0), WeightStrategy::uniform};
}

EdgeWeightTable predicate_frequency_weights(const KnowledgeGraph& graph) {
    std::vector<std::size_t> frequency(graph.predicate_count(), 0);
    for (const Edge& e : graph.edges()) ++frequency[e.predicate];

    std::vector<double> weights;
    weights.reserve(graph.edge_count());
    for (const Edge& e : graph.edges()) weights.push_back(static_cast<double>(frequency[e.predicate]));
    return {graph, std::move(weights), WeightStrategy::predicate_frequency};
}

PageRankScores pagerank(const KnowledgeGraph& graph, const PageRankOptions& options) {
    const std::size_t n = graph.entity_count();
    if (n == 0) throw ContractViolation("pagerank requires a nonempty graph");
    if (!(options.damping > 0.0 && options.damping < 1.0))
        throw ContractViolation("damping must lie in (0, 1)");

    // Collapse parallel edges: one link per distinct (source, target).
    std::vector<std::size_t> link_offsets{0};
    std::vector<EntityId> links;
    links.reserve(graph.edge_count());
    std::vector<EntityId> targets;
    for (EntityId v = 0; v < n; ++v) {
        targets.clear();
        for (const Edge& e : graph.out_edges(v)) targets.push_back(e.target);
        std::ranges::sort(targets);
        const auto [first, last] = std::ranges::unique(targets);
        targets.erase(first, last);
        links.insert(links.end(), targets.begin(), targets.end());
        link_offsets.push_back(links.size());
    }

    const double d = options.damping;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> current(n, inv_n), next(n);
    PageRankScores result;
    result.damping = d;

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        double dangling = 0.0;
        for (EntityId v = 0; v < n; ++v)
            if (link_offsets[v] == link_offsets[v + 1]) dangling += current[v];

        std::ranges::fill(next, (1.0 - d) * inv_n + d * dangling * inv_n);
        for (EntityId v = 0; v < n; ++v) {
            const auto degree = link_offsets[v + 1] - link_offsets[v];
            if (degree == 0) continue;
            const double share = d * current[v] / static_cast<double>(degree);
            for (auto k = link_offsets[v]; k < link_offsets[v + 1]; ++k) next[links[k]] += share;
        }

        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - current[i]);
        current.swap(next);
        result.iterations = iter;
        result.residual = change;
        if (change < options.tolerance) {
            result.converged = true;
            break;
        }
    }

    double total = 0.0;
    for (double s : current) total += s;
    for (double& s : current) s /= total;
    result.scores = std::move(current);

    if (!result.converged)
        spdlog::warn("pagerank did not converge in {} iterations (residual {:.3g})",
                     result.iterations, result.residual);
    return result;
}

EdgeWeightTable pagerank_weights(const KnowledgeGraph& graph, const PageRankScores& scores) {
    if (scores.scores.size() != graph.entity_count())
        throw ContractViolation("pagerank scores do not match the graph");
    std::vector<double> weights;
    weights.reserve(graph.edge_count());
    for (const Edge& e : graph.edges()) weights.push_back(scores.scores[e.target]);
    return {graph, std::move(weights), WeightStrategy::pagerank};
}

EdgeWeightTable inverse_pagerank_weights(const KnowledgeGraph& graph,
                                         const PageRankScores& scores) {
    if (scores.scores.size() != graph.entity_count())
        throw ContractViolation("pagerank scores do not match the graph");
    std::vector<double> weights;
    weights.reserve(graph.edge_count());
    for (const Edge& e : graph.edges()) weights.push_back(1.0 / scores.scores[e.target]);
    return {graph, std::move(weights), WeightStrategy::inverse_pagerank};
}

std::vector<double> transition_probabilities(const EdgeWeightTable& weights, EntityId v) {
    const auto row = weights.out_weights(v);
    double total = 0.0;
    for (double w : row) total += w;
    std::vector<double> probs(row.size(), 0.0);
    if (total > 0.0)
        for (std::size_t k = 0; k < row.size(); ++k) probs[k] = row[k] / total;
    return probs;
}

void write_weights(const KnowledgeGraph& graph, const EdgeWeightTable& weights, std::ostream& out) {
    if (!weights.matches(graph)) throw ContractViolation("weight table does not match the graph");
    for (EntityId v = 0; v < graph.entity_count(); ++v) {
        const auto row = weights.out_weights(v);
        for (std::size_t k = 0; k < row.size(); ++k)
            out << graph.iri(v) << '\t' << k << '\t' << format_double(row[k]) << '\n';
    }
}

EdgeWeightTable read_weights(const KnowledgeGraph& graph, std::istream& in,
                             WeightStrategy strategy) {
    std::vector<double> weights(graph.edge_count(), 0.0);
    std::vector<bool> filled(graph.edge_count(), false);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = chomp(raw);
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        split_fields(line, '\t', [&](std::string_view f) { fields.push_back(f); });
        if (fields.size() != 3) throw FormatError(line_no, "expected 3 tab-separated columns");
        const auto v = graph.resolve(fields[0]);
        if (!v) throw FormatError(line_no, "unknown entity " + std::string(fields[0]));
        std::size_t index = 0;
        double weight = 0.0;
        if (std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), index).ec !=
                std::errc{} ||
            std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), weight).ec !=
                std::errc{})
            throw FormatError(line_no, "invalid number");
        const auto degree = graph.out_edges(*v).size();
        if (index >= degree) throw FormatError(line_no, "adjacency index out of range");
        if (!(weight >= 0.0) || !std::isfinite(weight))
            throw FormatError(line_no, "weight must be finite and nonnegative");
        const auto slot = graph.edge_offset(*v) + index;
        weights[slot] = weight;
        filled[slot] = true;
    }
    if (std::ranges::find(filled, false) != filled.end())
        throw Error("weight file does not cover every edge of the graph");
    return {graph, std::move(weights), strategy};
}

}  // namespace kgwe
