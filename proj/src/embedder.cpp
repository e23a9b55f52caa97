#include "kgwe/embedder.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <thread>

#include "kgwe/error.hpp"
#include "kgwe/io.hpp"
#include "kgwe/log.hpp"
#include "kgwe/rng.hpp"

namespace kgwe {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> frequencies,
                       int min_count)
    : tokens_(std::move(tokens)), frequencies_(std::move(frequencies)), min_count_(min_count) {
    if (tokens_.size() != frequencies_.size())
        throw ContractViolation("vocabulary tokens and frequencies differ in length");
    index_.reserve(tokens_.size());
    for (std::uint32_t i = 0; i < tokens_.size(); ++i)
        if (!index_.emplace(tokens_[i], i).second)
            throw ContractViolation("duplicate vocabulary token " + tokens_[i]);
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
    if (auto it = index_.find(token); it != index_.end()) return it->second;
    return std::nullopt;
}

Vocabulary build_vocab(const WalkCorpus& corpus, const KnowledgeGraph& graph, int min_count) {
    std::vector<std::uint64_t> entity_counts(graph.entity_count(), 0);
    std::vector<std::uint64_t> predicate_counts(graph.predicate_count(), 0);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto walk = corpus.walk(i);
        for (std::size_t t = 0; t < walk.size(); ++t)
            ++(t % 2 == 0 ? entity_counts : predicate_counts)[walk[t]];
    }

    // An IRI used both as entity and predicate is one token.
    std::unordered_map<std::string_view, std::uint64_t> counts;
    for (EntityId v = 0; v < entity_counts.size(); ++v)
        if (entity_counts[v] > 0) counts[graph.iri(v)] += entity_counts[v];
    for (PredicateId p = 0; p < predicate_counts.size(); ++p)
        if (predicate_counts[p] > 0) counts[graph.predicate_iri(p)] += predicate_counts[p];

    std::vector<std::pair<std::string_view, std::uint64_t>> kept;
    for (const auto& [token, count] : counts)
        if (count >= static_cast<std::uint64_t>(std::max(min_count, 0))) kept.emplace_back(token, count);
    std::ranges::sort(kept, [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    std::vector<std::string> tokens;
    std::vector<std::uint64_t> frequencies;
    for (const auto& [token, count] : kept) {
        tokens.emplace_back(token);
        frequencies.push_back(count);
    }
    return {std::move(tokens), std::move(frequencies), min_count};
}

void EncodedCorpus::append(std::span<const std::uint32_t> sentence) {
    tokens.insert(tokens.end(), sentence.begin(), sentence.end());
    offsets.push_back(tokens.size());
}

EncodedCorpus encode_corpus(const WalkCorpus& corpus, const KnowledgeGraph& graph,
                            const Vocabulary& vocab) {
    constexpr auto kMissing = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> entity_index(graph.entity_count(), kMissing);
    std::vector<std::uint32_t> predicate_index(graph.predicate_count(), kMissing);
    for (EntityId v = 0; v < graph.entity_count(); ++v)
        entity_index[v] = vocab.find(graph.iri(v)).value_or(kMissing);
    for (PredicateId p = 0; p < graph.predicate_count(); ++p)
        predicate_index[p] = vocab.find(graph.predicate_iri(p)).value_or(kMissing);

    EncodedCorpus encoded;
    encoded.tokens.reserve(corpus.token_count());
    encoded.offsets.reserve(corpus.size() + 1);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto walk = corpus.walk(i);
        for (std::size_t t = 0; t < walk.size(); ++t) {
            const auto idx = (t % 2 == 0 ? entity_index : predicate_index)[walk[t]];
            if (idx != kMissing) encoded.tokens.push_back(idx);
        }
        encoded.offsets.push_back(encoded.tokens.size());
    }
    return encoded;
}

EmbeddingMatrix::EmbeddingMatrix(Vocabulary vocab, Matrix input, Matrix output)
    : vocab_(std::move(vocab)), input_(std::move(input)), output_(std::move(output)) {
    if (input_.rows() != vocab_.size())
        throw ContractViolation("embedding rows do not match the vocabulary size");
    if (output_.rows() != 0 && (output_.rows() != input_.rows() || output_.cols() != input_.cols()))
        throw ContractViolation("output matrix shape differs from the input matrix");
}

std::optional<std::span<const double>> EmbeddingMatrix::vector(std::string_view token) const {
    if (auto idx = vocab_.find(token)) return input_.row(*idx);
    return std::nullopt;
}

namespace sgns {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_targets(const Matrix& output, std::span<const Target> targets) {
    for (const auto& t : targets)
        if (t.row >= output.rows()) throw ContractViolation("target row out of range");
}

}  // namespace

double pair_loss(std::span<const double> hidden, const Matrix& output,
                 std::span<const Target> targets) {
    check_targets(output, targets);
    double loss = 0.0;
    for (const auto& t : targets) {
        const double f = dot(hidden, output.row(t.row));
        loss += t.label > 0.5 ? softplus(-f) : softplus(f);
    }
    return loss;
}

void pair_gradient(std::span<const double> hidden, const Matrix& output,
                   std::span<const Target> targets, std::span<double> grad_hidden,
                   Matrix& grad_output) {
    check_targets(output, targets);
    std::ranges::fill(grad_hidden, 0.0);
    for (const auto& t : targets) {
        const auto u = output.row(t.row);
        const double g = sigmoid(dot(hidden, u)) - t.label;
        auto gu = grad_output.row(t.row);
        for (std::size_t i = 0; i < hidden.size(); ++i) {
            grad_hidden[i] += g * u[i];
            gu[i] += g * hidden[i];
        }
    }
}

namespace {

std::vector<double> context_mean(const Matrix& input, std::span<const std::uint32_t> context) {
    if (context.empty()) throw ContractViolation("CBOW context must not be empty");
    std::vector<double> hidden(input.cols(), 0.0);
    for (auto c : context) {
        const auto r = input.row(c);
        for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] += r[i];
    }
    for (double& h : hidden) h /= static_cast<double>(context.size());
    return hidden;
}

}  // namespace

double cbow_loss(const Matrix& input, std::span<const std::uint32_t> context,
                 const Matrix& output, std::span<const Target> targets) {
    return pair_loss(context_mean(input, context), output, targets);
}

void cbow_gradient(const Matrix& input, std::span<const std::uint32_t> context,
                   const Matrix& output, std::span<const Target> targets, Matrix& grad_input,
                   Matrix& grad_output) {
    const auto hidden = context_mean(input, context);
    std::vector<double> grad_hidden(hidden.size());
    pair_gradient(hidden, output, targets, grad_hidden, grad_output);
    const double share = 1.0 / static_cast<double>(context.size());
    for (auto c : context) {
        auto g = grad_input.row(c);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += share * grad_hidden[i];
    }
}

}  // namespace sgns

namespace {

// Matrix element access. Shared mode goes through relaxed atomics so that
// concurrent workers race without undefined behavior.
template <bool Shared>
struct Cell {
    static double load(double& x) {
        if constexpr (Shared) return std::atomic_ref<double>(x).load(std::memory_order_relaxed);
        else return x;
    }
    static void add(double& x, double delta) {
        if constexpr (Shared) {
            std::atomic_ref<double> ref(x);
            ref.store(ref.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
        } else {
            x += delta;
        }
    }
};

// Updates output rows in place and returns the loss; `hidden_step` receives
// -lr * dL/dhidden computed from the pre-update output rows.
template <bool Shared>
double sgd_targets(std::span<const double> hidden, Matrix& output,
                   std::span<const sgns::Target> targets, double lr,
                   std::span<double> hidden_step) {
    using C = Cell<Shared>;
    const std::size_t dim = hidden.size();
    std::ranges::fill(hidden_step, 0.0);
    double loss = 0.0;
    for (const auto& t : targets) {
        auto u = output.row(t.row);
        double f = 0.0;
        for (std::size_t i = 0; i < dim; ++i) f += hidden[i] * C::load(u[i]);
        loss += t.label > 0.5 ? sgns::softplus(-f) : sgns::softplus(f);
        const double g = lr * (t.label - sgns::sigmoid(f));
        for (std::size_t i = 0; i < dim; ++i) {
            hidden_step[i] += g * C::load(u[i]);
            C::add(u[i], g * hidden[i]);
        }
    }
    return loss;
}

template <bool Shared>
double skipgram_step_impl(Matrix& input, Matrix& output, std::uint32_t center,
                          std::span<const sgns::Target> targets, double lr,
                          std::span<double> hidden, std::span<double> step) {
    using C = Cell<Shared>;
    auto row = input.row(center);
    for (std::size_t i = 0; i < row.size(); ++i) hidden[i] = C::load(row[i]);
    const double loss = sgd_targets<Shared>(hidden, output, targets, lr, step);
    for (std::size_t i = 0; i < row.size(); ++i) C::add(row[i], step[i]);
    return loss;
}

template <bool Shared>
double cbow_step_impl(Matrix& input, Matrix& output, std::span<const std::uint32_t> context,
                      std::span<const sgns::Target> targets, double lr, std::span<double> hidden,
                      std::span<double> step) {
    using C = Cell<Shared>;
    std::ranges::fill(hidden, 0.0);
    for (auto c : context) {
        auto r = input.row(c);
        for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] += C::load(r[i]);
    }
    const double inv = 1.0 / static_cast<double>(context.size());
    for (double& h : hidden) h *= inv;
    const double loss = sgd_targets<Shared>(hidden, output, targets, lr, step);
    for (auto c : context) {
        auto r = input.row(c);
        for (std::size_t i = 0; i < r.size(); ++i) C::add(r[i], step[i] * inv);
    }
    return loss;
}

}  // namespace

namespace sgns {

double skipgram_step(Matrix& input, Matrix& output, std::uint32_t center,
                     std::span<const Target> targets, double learning_rate) {
    if (center >= input.rows()) throw ContractViolation("center row out of range");
    check_targets(output, targets);
    std::vector<double> hidden(input.cols()), step(input.cols());
    return skipgram_step_impl<false>(input, output, center, targets, learning_rate, hidden, step);
}

double cbow_step(Matrix& input, Matrix& output, std::span<const std::uint32_t> context,
                 std::span<const Target> targets, double learning_rate) {
    if (context.empty()) throw ContractViolation("CBOW context must not be empty");
    for (auto c : context)
        if (c >= input.rows()) throw ContractViolation("context row out of range");
    check_targets(output, targets);
    std::vector<double> hidden(input.cols()), step(input.cols());
    return cbow_step_impl<false>(input, output, context, targets, learning_rate, hidden, step);
}

}  // namespace sgns

namespace {

// Unigram^0.75 table, filled as in the reference word2vec implementation.
class NegativeTable {
public:
    NegativeTable(const Vocabulary& vocab, std::size_t size) : table_(size) {
        if (size == 0) throw ContractViolation("negative sampling table must not be empty");
        double total = 0.0;
        for (auto f : vocab.frequencies()) total += std::pow(static_cast<double>(f), 0.75);
        if (!(total > 0.0)) {
            for (std::size_t a = 0; a < size; ++a) table_[a] = static_cast<std::uint32_t>(a % vocab.size());
            return;
        }
        std::uint32_t i = 0;
        double cumulative = std::pow(static_cast<double>(vocab.frequency(0)), 0.75) / total;
        for (std::size_t a = 0; a < size; ++a) {
            table_[a] = i;
            if (static_cast<double>(a) / static_cast<double>(size) > cumulative &&
                i + 1 < vocab.size()) {
                ++i;
                cumulative += std::pow(static_cast<double>(vocab.frequency(i)), 0.75) / total;
            }
        }
    }

    std::uint32_t draw(Rng& rng) const { return table_[uniform_below(rng, table_.size())]; }

private:
    std::vector<std::uint32_t> table_;
};

void validate(const EncodedCorpus& corpus, const Vocabulary& vocab, const TrainConfig& config) {
    if (config.dimension < 1) throw ContractViolation("dimension must be >= 1");
    if (config.window < 1) throw ContractViolation("window must be >= 1");
    if (config.negatives < 1) throw ContractViolation("negatives must be >= 1");
    if (config.epochs < 1) throw ContractViolation("epochs must be >= 1");
    if (config.workers < 1) throw ContractViolation("workers must be >= 1");
    if (!(config.initial_learning_rate() > 0.0))
        throw ContractViolation("learning rate must be > 0");
    if (vocab.empty()) throw ContractViolation("vocabulary is empty");
    for (auto t : corpus.tokens)
        if (t >= vocab.size()) throw ContractViolation("corpus token outside the vocabulary");
}

struct EpochTotals {
    double loss = 0.0;
    std::uint64_t steps = 0;
};

class Trainer {
public:
    Trainer(const EncodedCorpus& corpus, const Vocabulary& vocab, const TrainConfig& config)
        : corpus_(corpus),
          vocab_(vocab),
          config_(config),
          dim_(static_cast<std::size_t>(config.dimension)),
          input_(vocab.size(), dim_),
          output_(vocab.size(), dim_, 0.0),
          table_(vocab, config.negative_table_size),
          total_steps_(static_cast<std::uint64_t>(config.epochs) * corpus.tokens.size()) {
        Rng init(derive_seed(config.seed, "init"));
        for (double& x : input_.data()) x = (uniform01(init) - 0.5) / static_cast<double>(dim_);

        if (config.subsample > 0.0) {
            std::uint64_t words = 0;
            for (auto f : vocab.frequencies()) words += f;
            const double threshold = config.subsample * static_cast<double>(words);
            keep_.resize(vocab.size());
            for (std::size_t i = 0; i < vocab.size(); ++i) {
                const double f = static_cast<double>(std::max<std::uint64_t>(vocab.frequency(i), 1));
                keep_[i] = (std::sqrt(f / threshold) + 1.0) * threshold / f;
            }
        }
    }

    TrainResult run() {
        TrainResult result;
        const auto workers = static_cast<std::size_t>(
            std::clamp<std::size_t>(corpus_.size(), 1, static_cast<std::size_t>(config_.workers)));
        for (int epoch = 0; epoch < config_.epochs; ++epoch) {
            std::vector<EpochTotals> totals(workers);
            const auto epoch_seed = derive_seed(config_.seed, static_cast<std::uint64_t>(epoch));
            if (workers == 1) {
                work<false>(0, corpus_.size(), Rng(derive_seed(epoch_seed, 0)), totals[0]);
            } else {
                std::vector<std::jthread> threads;
                for (std::size_t w = 0; w < workers; ++w) {
                    const auto begin = corpus_.size() * w / workers;
                    const auto end = corpus_.size() * (w + 1) / workers;
                    threads.emplace_back([this, begin, end, w, epoch_seed, &totals] {
                        work<true>(begin, end, Rng(derive_seed(epoch_seed, w)), totals[w]);
                    });
                }
            }
            EpochTotals sum;
            for (const auto& t : totals) {
                sum.loss += t.loss;
                sum.steps += t.steps;
            }
            const double mean = sum.steps > 0 ? sum.loss / static_cast<double>(sum.steps) : 0.0;
            result.epoch_loss.push_back(mean);
            spdlog::debug("epoch {} mean loss {:.6f} over {} steps", epoch + 1, mean, sum.steps);
        }
        result.embeddings = EmbeddingMatrix(vocab_, std::move(input_), std::move(output_));
        return result;
    }

private:
    double learning_rate(std::uint64_t processed) const {
        const double progress =
            static_cast<double>(processed) / static_cast<double>(total_steps_ + 1);
        return config_.initial_learning_rate() * std::max(1e-4, 1.0 - progress);
    }

    template <bool Shared>
    void work(std::size_t begin, std::size_t end, Rng rng, EpochTotals& totals) {
        std::vector<double> hidden(dim_), step(dim_);
        std::vector<sgns::Target> targets;
        std::vector<std::uint32_t> sentence, context;
        targets.reserve(static_cast<std::size_t>(config_.negatives) + 1);

        for (std::size_t s = begin; s < end; ++s) {
            const auto raw = corpus_.sentence(s);
            const auto processed = processed_.fetch_add(raw.size(), std::memory_order_relaxed);
            sentence.clear();
            for (auto tok : raw)
                if (keep_.empty() || keep_[tok] >= uniform01(rng)) sentence.push_back(tok);

            for (std::size_t t = 0; t < sentence.size(); ++t) {
                const double lr = learning_rate(processed + t);
                const auto reach = 1 + static_cast<std::size_t>(
                                           uniform_below(rng, static_cast<std::uint64_t>(config_.window)));
                const auto lo = t >= reach ? t - reach : 0;
                const auto hi = std::min(sentence.size() - 1, t + reach);

                if (config_.mode == TrainMode::skipgram) {
                    for (auto c = lo; c <= hi; ++c) {
                        if (c == t) continue;
                        fill_targets(sentence[c], rng, targets);
                        totals.loss += skipgram_step_impl<Shared>(input_, output_, sentence[t],
                                                                  targets, lr, hidden, step);
                        ++totals.steps;
                    }
                } else {
                    context.clear();
                    for (auto c = lo; c <= hi; ++c)
                        if (c != t) context.push_back(sentence[c]);
                    if (context.empty()) continue;
                    fill_targets(sentence[t], rng, targets);
                    totals.loss +=
                        cbow_step_impl<Shared>(input_, output_, context, targets, lr, hidden, step);
                    ++totals.steps;
                }
            }
        }
    }

    // The observed token first, then negatives; draws equal to it are skipped.
    void fill_targets(std::uint32_t positive, Rng& rng, std::vector<sgns::Target>& targets) const {
        targets.clear();
        targets.push_back({positive, 1.0});
        for (int k = 0; k < config_.negatives; ++k) {
            const auto neg = table_.draw(rng);
            if (neg != positive) targets.push_back({neg, 0.0});
        }
    }

    const EncodedCorpus& corpus_;
    const Vocabulary& vocab_;
    const TrainConfig& config_;
    std::size_t dim_;
    Matrix input_;
    Matrix output_;
    NegativeTable table_;
    std::vector<double> keep_;
    std::uint64_t total_steps_;
    std::atomic<std::uint64_t> processed_{0};
};

}  // namespace

TrainResult train_skipgram(const EncodedCorpus& corpus, const Vocabulary& vocab,
                           const TrainConfig& config) {
    validate(corpus, vocab, config);
    TrainConfig cfg = config;
    cfg.mode = TrainMode::skipgram;
    return Trainer(corpus, vocab, cfg).run();
}

TrainResult train_cbow(const EncodedCorpus& corpus, const Vocabulary& vocab,
                       const TrainConfig& config) {
    validate(corpus, vocab, config);
    TrainConfig cfg = config;
    cfg.mode = TrainMode::cbow;
    return Trainer(corpus, vocab, cfg).run();
}

TrainResult train(const EncodedCorpus& corpus, const Vocabulary& vocab, const TrainConfig& config) {
    return config.mode == TrainMode::skipgram ? train_skipgram(corpus, vocab, config)
                                              : train_cbow(corpus, vocab, config);
}

void save_embeddings(const EmbeddingMatrix& embeddings, std::ostream& out) {
    const auto& vocab = embeddings.vocabulary();
    out << vocab.size() << ' ' << embeddings.dimension() << '\n';
    char buf[32];
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        out << vocab.token(i);
        for (double x : embeddings.input().row(i)) {
            const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
            out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
}

EmbeddingMatrix load_embeddings(std::istream& in) {
    std::string raw;
    if (!std::getline(in, raw)) throw FormatError(1, "missing header");
    std::vector<std::string_view> fields;
    auto split = [&](std::string_view line) {
        fields.clear();
        split_fields(chomp(line), ' ', [&](std::string_view f) {
            if (!f.empty()) fields.push_back(f);
        });
    };
    auto parse_size = [](std::string_view s, std::size_t& out) {
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && ptr == s.data() + s.size();
    };

    split(raw);
    std::size_t rows = 0, dim = 0;
    if (fields.size() != 2 || !parse_size(fields[0], rows) || !parse_size(fields[1], dim) || dim == 0)
        throw FormatError(1, "header must be `<vocab_size> <dimension>`");

    std::vector<std::string> tokens;
    tokens.reserve(rows);
    Matrix input(rows, dim);
    std::size_t line_no = 1;
    while (std::getline(in, raw)) {
        ++line_no;
        split(raw);
        if (fields.empty()) continue;
        if (tokens.size() == rows)
            throw FormatError(line_no, "more rows than the header's " + std::to_string(rows));
        if (fields.size() != dim + 1)
            throw FormatError(line_no, "row `" + std::string(fields[0]) + "` has " +
                                           std::to_string(fields.size() - 1) +
                                           " values, header says " + std::to_string(dim));
        auto row = input.row(tokens.size());
        for (std::size_t i = 0; i < dim; ++i) {
            const auto f = fields[i + 1];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[i]);
            if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(row[i]))
                throw FormatError(line_no, "row `" + std::string(fields[0]) +
                                               "` has an invalid value `" + std::string(f) + "`");
        }
        tokens.emplace_back(fields[0]);
    }
    if (tokens.size() != rows)
        throw FormatError(line_no, "expected " + std::to_string(rows) + " rows, found " +
                                       std::to_string(tokens.size()));

    std::vector<std::uint64_t> freq(rows, 0);
    try {
        return EmbeddingMatrix(Vocabulary(std::move(tokens), std::move(freq), 0), std::move(input),
                               Matrix(0, dim));
    } catch (const ContractViolation& e) {
        throw FormatError(line_no, e.what());
    }
}

}  // namespace kgwe
