#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgwe/graph_store.hpp"
#include "kgwe/walker.hpp"

namespace kgwe {

// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

class Vocabulary {
public:
    Vocabulary() = default;
    // Tokens must be unique; indices follow the given order.
    Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> frequencies,
               int min_count);

    std::size_t size() const noexcept { return tokens_.size(); }
    bool empty() const noexcept { return tokens_.empty(); }
    const std::string& token(std::size_t i) const { return tokens_.at(i); }
    std::uint64_t frequency(std::size_t i) const { return frequencies_.at(i); }
    std::span<const std::string> tokens() const noexcept { return tokens_; }
    std::span<const std::uint64_t> frequencies() const noexcept { return frequencies_; }
    int min_count() const noexcept { return min_count_; }
    std::optional<std::uint32_t> find(std::string_view token) const;

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> frequencies_;
    std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
    int min_count_ = 1;
};

// Counts IRI tokens of the corpus; keeps those seen at least `min_count`
// times, ordered by descending frequency then token string.
Vocabulary build_vocab(const WalkCorpus& corpus, const KnowledgeGraph& graph, int min_count);

// Walks rewritten as vocabulary indices, out-of-vocabulary tokens dropped.
struct EncodedCorpus {
    std::vector<std::uint32_t> tokens;
    std::vector<std::size_t> offsets{0};

    std::size_t size() const noexcept { return offsets.size() - 1; }
    std::span<const std::uint32_t> sentence(std::size_t i) const {
        return std::span<const std::uint32_t>(tokens).subspan(offsets[i],
                                                              offsets[i + 1] - offsets[i]);
    }
    void append(std::span<const std::uint32_t> sentence);
};

EncodedCorpus encode_corpus(const WalkCorpus& corpus, const KnowledgeGraph& graph,
                            const Vocabulary& vocab);

enum class TrainMode { skipgram, cbow };

struct TrainConfig {
    int dimension = 200;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    std::optional<double> learning_rate;  // default: 0.025 skipgram, 0.05 cbow
    int min_count = 1;
    TrainMode mode = TrainMode::skipgram;
    std::uint64_t seed = 1;
    int workers = 1;
    double subsample = 0.0;  // word2vec `sample` threshold; 0 disables
    std::size_t negative_table_size = 10'000'000;

    double initial_learning_rate() const {
        return learning_rate.value_or(mode == TrainMode::skipgram ? 0.025 : 0.05);
    }
};

// Input (published) and output (context) matrices with their vocabulary.
// Loaded embeddings carry an empty output matrix.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(Vocabulary vocab, Matrix input, Matrix output);

    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    std::size_t size() const noexcept { return vocab_.size(); }
    std::size_t dimension() const noexcept { return input_.cols(); }
    const Matrix& input() const noexcept { return input_; }
    const Matrix& output() const noexcept { return output_; }
    Matrix& input() noexcept { return input_; }

    std::optional<std::span<const double>> vector(std::string_view token) const;

private:
    Vocabulary vocab_;
    Matrix input_;
    Matrix output_;
};

struct TrainResult {
    EmbeddingMatrix embeddings;
    std::vector<double> epoch_loss;  // mean logistic loss per (input, target) pair
};

TrainResult train_skipgram(const EncodedCorpus& corpus, const Vocabulary& vocab,
                           const TrainConfig& config);
TrainResult train_cbow(const EncodedCorpus& corpus, const Vocabulary& vocab,
                       const TrainConfig& config);
// Dispatches on config.mode.
TrainResult train(const EncodedCorpus& corpus, const Vocabulary& vocab, const TrainConfig& config);

// Header `<vocab_size> <dimension>`, then `token v1 ... vd` per row with 17
// significant digits, so load(save(x)) is exact.
void save_embeddings(const EmbeddingMatrix& embeddings, std::ostream& out);
EmbeddingMatrix load_embeddings(std::istream& in);

// Negative-sampling objective and its updates. The trainers are built from
// these, so checking them checks training.
namespace sgns {

struct Target {
    std::uint32_t row;  // output matrix row
    double label;       // 1 for the observed token, 0 for a negative sample
};

// sum_t -log sigmoid(s_t * h.u_t), s_t = +1 for label 1 and -1 for label 0.
double pair_loss(std::span<const double> hidden, const Matrix& output,
                 std::span<const Target> targets);

// Writes dL/dhidden into grad_hidden and adds dL/du_t into grad_output rows.
void pair_gradient(std::span<const double> hidden, const Matrix& output,
                   std::span<const Target> targets, std::span<double> grad_hidden,
                   Matrix& grad_output);

// CBOW objective: hidden = mean of the context rows of `input`.
double cbow_loss(const Matrix& input, std::span<const std::uint32_t> context,
                 const Matrix& output, std::span<const Target> targets);
void cbow_gradient(const Matrix& input, std::span<const std::uint32_t> context,
                   const Matrix& output, std::span<const Target> targets, Matrix& grad_input,
                   Matrix& grad_output);

// One SGD step on the SkipGram pair loss with input row `center`. Returns the
// loss before the step.
double skipgram_step(Matrix& input, Matrix& output, std::uint32_t center,
                     std::span<const Target> targets, double learning_rate);

// One SGD step on the CBOW loss; each context row receives 1/|context| of the
// hidden-layer gradient.
double cbow_step(Matrix& input, Matrix& output, std::span<const std::uint32_t> context,
                 std::span<const Target> targets, double learning_rate);

}  // namespace sgns

}  // namespace kgwe
