#include "kgwe/walker.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <thread>

#include "kgwe/error.hpp"
#include "kgwe/io.hpp"
#include "kgwe/rng.hpp"

namespace kgwe {

void WalkCorpus::append(std::span<const std::uint32_t> walk) {
    tokens_.insert(tokens_.end(), walk.begin(), walk.end());
    offsets_.push_back(tokens_.size());
}

CumulativeSampler::CumulativeSampler(const KnowledgeGraph& graph, const EdgeWeightTable& weights)
    : offsets_(graph.offsets().begin(), graph.offsets().end()) {
    if (!weights.matches(graph)) throw ContractViolation("weight table does not match the graph");
    const auto n = graph.entity_count();
    prefix_.reserve(graph.edge_count());
    totals_.resize(n, 0.0);
    uniform_.resize(n, 1);
    for (EntityId v = 0; v < n; ++v) {
        double sum = 0.0;
        double common = -1.0;
        for (double w : weights.out_weights(v)) {
            sum += w;
            prefix_.push_back(sum);
            if (common < 0.0) common = w;
            else if (w != common) uniform_[v] = 0;
        }
        totals_[v] = sum;
        if (common == 0.0) uniform_[v] = 0;
    }
}

std::span<const double> CumulativeSampler::prefix(EntityId v) const {
    return std::span<const double>(prefix_).subspan(offsets_.at(v), offsets_[v + 1] - offsets_[v]);
}

std::optional<std::size_t> CumulativeSampler::select(EntityId v, double draw) const {
    const auto row = prefix(v);
    if (row.empty() || !(totals_[v] > 0.0)) return std::nullopt;
    if (uniform_[v]) {
        const auto k = static_cast<std::size_t>(draw * static_cast<double>(row.size()));
        return std::min(k, row.size() - 1);
    }
    // First index whose prefix exceeds draw * total; zero-weight edges never win.
    const double target = draw * totals_[v];
    auto it = std::upper_bound(row.begin(), row.end(), target);
    if (it == row.end()) {
        // Rounding pushed the target to the total: take the last positive edge.
        it = std::lower_bound(row.begin(), row.end(), totals_[v]);
    }
    return static_cast<std::size_t>(it - row.begin());
}

namespace {

void walk_from(const KnowledgeGraph& graph, const CumulativeSampler& sampler, EntityId start,
               const WalkConfig& config, std::vector<std::uint32_t>& tokens,
               std::vector<std::size_t>& lengths) {
    Rng rng(derive_seed(config.seed, start));
    for (int w = 0; w < config.walks_per_vertex; ++w) {
        const auto before = tokens.size();
        tokens.push_back(start);
        EntityId current = start;
        int budget = config.depth;
        while (budget > 0) {
            const auto pick = sampler.select(current, uniform01(rng));
            if (!pick) break;  // dead end: emit the truncated walk
            const Edge& edge = graph.out_edges(current)[*pick];
            --budget;
            tokens.push_back(edge.predicate);
            if (budget > 0) {
                tokens.push_back(edge.target);
                current = edge.target;
                --budget;
            }
        }
        lengths.push_back(tokens.size() - before);
    }
}

}  // namespace

WalkCorpus generate_walks(const KnowledgeGraph& graph, const EdgeWeightTable& weights,
                          const WalkConfig& config) {
    if (config.depth < 1) throw ContractViolation("walk depth must be >= 1");
    if (config.walks_per_vertex < 1) throw ContractViolation("walks_per_vertex must be >= 1");
    if (config.workers < 1) throw ContractViolation("worker count must be >= 1");
    const CumulativeSampler sampler(graph, weights);

    const auto n = static_cast<EntityId>(graph.entity_count());
    const auto workers = static_cast<EntityId>(
        std::max<std::size_t>(1, std::min<std::size_t>(config.workers, n)));

    // Worker i owns a contiguous vertex block, so concatenating the buffers in
    // worker order yields vertex-major order.
    struct Buffer {
        std::vector<std::uint32_t> tokens;
        std::vector<std::size_t> lengths;
    };
    std::vector<Buffer> buffers(workers);
    auto run = [&](EntityId worker) {
        const EntityId begin = static_cast<EntityId>(std::uint64_t{n} * worker / workers);
        const EntityId end = static_cast<EntityId>(std::uint64_t{n} * (worker + 1) / workers);
        for (EntityId v = begin; v < end; ++v)
            walk_from(graph, sampler, v, config, buffers[worker].tokens, buffers[worker].lengths);
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::jthread> threads;
        for (EntityId w = 0; w < workers; ++w) threads.emplace_back(run, w);
    }

    WalkCorpus corpus;
    std::size_t total_tokens = 0, total_walks = 0;
    for (const auto& b : buffers) {
        total_tokens += b.tokens.size();
        total_walks += b.lengths.size();
    }
    corpus.tokens_.reserve(total_tokens);
    corpus.offsets_.reserve(total_walks + 1);
    for (auto& b : buffers) {
        corpus.tokens_.insert(corpus.tokens_.end(), b.tokens.begin(), b.tokens.end());
        std::size_t offset = corpus.offsets_.back();
        for (auto len : b.lengths) corpus.offsets_.push_back(offset += len);
    }
    return corpus;
}

double walk_probability(const KnowledgeGraph& graph, const EdgeWeightTable& weights,
                        std::span<const std::uint32_t> walk) {
    if (walk.empty()) throw ContractViolation("empty walk");
    double p = 1.0;
    EntityId current = walk[0];
    for (std::size_t i = 1; i < walk.size(); i += 2) {
        const auto edges = graph.out_edges(current);
        const auto probs = transition_probabilities(weights, current);
        const bool has_target = i + 1 < walk.size();
        double step = 0.0;
        // Parallel entries with the same (predicate, target) are separate edges.
        for (std::size_t k = 0; k < edges.size(); ++k)
            if (edges[k].predicate == walk[i] && (!has_target || edges[k].target == walk[i + 1]))
                step += probs[k];
        p *= step;
        if (has_target) current = walk[i + 1];
    }
    return p;
}

void write_corpus(const WalkCorpus& corpus, const KnowledgeGraph& graph, std::ostream& out) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto walk = corpus.walk(i);
        for (std::size_t t = 0; t < walk.size(); ++t) {
            if (t > 0) out << ' ';
            out << (t % 2 == 0 ? graph.iri(walk[t]) : graph.predicate_iri(walk[t]));
        }
        out << '\n';
    }
}

WalkCorpus read_corpus(std::istream& in, const KnowledgeGraph& graph) {
    WalkCorpus corpus;
    std::string raw;
    std::vector<std::uint32_t> walk;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = chomp(raw);
        walk.clear();
        split_fields(line, ' ', [&](std::string_view token) {
            if (token.empty()) return;
            const auto id = walk.size() % 2 == 0 ? graph.resolve(token)
                                                 : graph.resolve_predicate(token);
            if (!id)
                throw FormatError(line_no, "unknown " +
                                               std::string(walk.size() % 2 == 0 ? "entity"
                                                                                : "predicate") +
                                               " token " + std::string(token));
            walk.push_back(*id);
        });
        if (walk.empty()) throw FormatError(line_no, "empty walk");
        corpus.append(walk);
    }
    return corpus;
}

}  // namespace kgwe
