#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgwe/graph_store.hpp"

namespace kgwe {

enum class WeightStrategy { uniform, predicate_frequency, pagerank, inverse_pagerank, clickstream };

// "uniform", "pred-freq", "pagerank", "inv-pagerank", "clickstream".
std::string_view to_string(WeightStrategy strategy);
std::optional<WeightStrategy> parse_strategy(std::string_view name);

// One nonnegative weight per edge occurrence, laid out exactly like the graph's
// CSR adjacency.
class EdgeWeightTable {
public:
    EdgeWeightTable() : offsets_{0} {}
    EdgeWeightTable(const KnowledgeGraph& graph, std::vector<double> weights,
                    WeightStrategy strategy);

    WeightStrategy strategy() const noexcept { return strategy_; }
    std::size_t vertex_count() const noexcept { return offsets_.size() - 1; }
    std::size_t size() const noexcept { return weights_.size(); }

    std::span<const double> out_weights(EntityId v) const;
    std::span<const double> all() const noexcept { return weights_; }

    // Same per-vertex list lengths as the graph's adjacency.
    bool matches(const KnowledgeGraph& graph) const;

private:
    std::vector<std::size_t> offsets_;
    std::vector<double> weights_;
    WeightStrategy strategy_ = WeightStrategy::uniform;
};

EdgeWeightTable uniform_weights(const KnowledgeGraph& graph);
EdgeWeightTable predicate_frequency_weights(const KnowledgeGraph& graph);

struct PageRankOptions {
    double damping = 0.85;
    double tolerance = 1e-8;
    int max_iterations = 100;
};

struct PageRankScores {
    std::vector<double> scores;
    double damping = 0.0;
    int iterations = 0;
    double residual = 0.0;  // L1 change of the last iteration
    bool converged = false;
};

// Power iteration over distinct (source, target) links. Dangling mass is
// spread uniformly. Non-convergence is logged and reported via `converged`.
PageRankScores pagerank(const KnowledgeGraph& graph, const PageRankOptions& options = {});

EdgeWeightTable pagerank_weights(const KnowledgeGraph& graph, const PageRankScores& scores);
EdgeWeightTable inverse_pagerank_weights(const KnowledgeGraph& graph, const PageRankScores& scores);

// Page-to-page `link` transition counts from a Wikipedia clickstream dump.
class ClickstreamTable {
public:
    void add(std::string_view source, std::string_view target, std::uint64_t count);
    std::optional<std::uint64_t> count(std::string_view source, std::string_view target) const;
    std::size_t size() const noexcept { return counts_.size(); }
    bool empty() const noexcept { return counts_.empty(); }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    // key: source '\t' target
    std::unordered_map<std::string, std::uint64_t, Hash, std::equal_to<>> counts_;
};

struct ClickstreamReport {
    std::size_t rows = 0;
    std::size_t skipped_non_link = 0;
    std::vector<ParseIssue> malformed;
};

struct ParsedClickstream {
    ClickstreamTable table;
    ClickstreamReport report;
};

// Reads `prev<tab>curr<tab>type<tab>n` rows; keeps `link` rows and sums
// duplicate pairs.
ParsedClickstream parse_clickstream(std::istream& in);
ParsedClickstream load_clickstream(const std::filesystem::path& path);

struct ClickstreamOptions {
    std::string entity_prefix = "http://dbpedia.org/resource/";
    double smoothing = 1.0;   // weight of graph edges without clickstream counts
    bool url_decode = false;  // percent-decode titles after stripping the prefix
};

struct ClickstreamCoverage {
    std::size_t edges_observed = 0;  // received a clickstream count
    std::size_t edges_smoothed = 0;
    std::size_t untitled_entities = 0;  // IRI lacks entity_prefix
};

// Raw count for (title(i), title(j)) per edge, or `smoothing` when absent.
// Parallel edges between one pair share the pair's count.
EdgeWeightTable clickstream_weights(const KnowledgeGraph& graph, const ClickstreamTable& table,
                                    const ClickstreamOptions& options = {},
                                    ClickstreamCoverage* coverage = nullptr);

// Page title of an entity IRI, or nullopt when it lacks the prefix.
std::optional<std::string> page_title(std::string_view iri, const ClickstreamOptions& options);

// Transition probabilities of v's out-edges, w / sum of v's out-weights; all
// zeros when the weights sum to 0.
std::vector<double> transition_probabilities(const EdgeWeightTable& weights, EntityId v);

// `source_iri<tab>adjacency_index<tab>weight` rows.
void write_weights(const KnowledgeGraph& graph, const EdgeWeightTable& weights, std::ostream& out);
EdgeWeightTable read_weights(const KnowledgeGraph& graph, std::istream& in,
                             WeightStrategy strategy);

}  // namespace kgwe
