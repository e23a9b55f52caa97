#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "kgwe/graph_store.hpp"
#include "kgwe/weighting.hpp"

namespace kgwe {

struct WalkConfig {
    int depth = 4;              // token budget after the start vertex
    int walks_per_vertex = 200;
    std::uint64_t seed = 1;
    int workers = 1;
};

// Walks stored back to back. Even positions of a walk are entity ids, odd
// positions predicate ids.
class WalkCorpus {
public:
    std::size_t size() const noexcept { return offsets_.size() - 1; }
    bool empty() const noexcept { return size() == 0; }
    std::size_t token_count() const noexcept { return tokens_.size(); }

    std::span<const std::uint32_t> walk(std::size_t i) const {
        return std::span<const std::uint32_t>(tokens_).subspan(offsets_[i],
                                                               offsets_[i + 1] - offsets_[i]);
    }

    void append(std::span<const std::uint32_t> walk);

    friend bool operator==(const WalkCorpus&, const WalkCorpus&) = default;

private:
    friend WalkCorpus generate_walks(const KnowledgeGraph&, const EdgeWeightTable&,
                                     const WalkConfig&);
    std::vector<std::uint32_t> tokens_;
    std::vector<std::size_t> offsets_{0};
};

// Per-vertex prefix sums over out-edge weights. select() draws adjacency index
// k with probability weight_k / sum of the vertex's weights.
class CumulativeSampler {
public:
    CumulativeSampler(const KnowledgeGraph& graph, const EdgeWeightTable& weights);

    // `draw` in [0, 1). nullopt for sinks and all-zero rows.
    std::optional<std::size_t> select(EntityId v, double draw) const;

    double total(EntityId v) const { return totals_.at(v); }
    std::span<const double> prefix(EntityId v) const;

private:
    std::vector<std::size_t> offsets_;
    std::vector<double> prefix_;
    std::vector<double> totals_;
    // Rows whose positive weights are all equal take an O(1) path that gives the
    // same index for a draw regardless of the common weight value.
    std::vector<std::uint8_t> uniform_;
};

// n walks from every vertex; see WalkConfig. Emission order is vertex-major,
// walk-minor, and each start vertex has its own RNG stream, so the corpus does
// not depend on the worker count.
WalkCorpus generate_walks(const KnowledgeGraph& graph, const EdgeWeightTable& weights,
                          const WalkConfig& config);

// Probability that a walk starting at walk[0] produces exactly `walk`.
double walk_probability(const KnowledgeGraph& graph, const EdgeWeightTable& weights,
                        std::span<const std::uint32_t> walk);

// One walk per line, IRIs separated by single spaces.
void write_corpus(const WalkCorpus& corpus, const KnowledgeGraph& graph, std::ostream& out);
WalkCorpus read_corpus(std::istream& in, const KnowledgeGraph& graph);

}  // namespace kgwe
