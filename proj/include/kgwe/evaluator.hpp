#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgwe/embedder.hpp"

namespace kgwe {

// dot(a, b) / (|a| |b|); nullopt when either vector is zero.
std::optional<double> cosine_similarity(std::span<const double> a, std::span<const double> b);

struct LabeledEntity {
    std::string iri;
    std::string label;
};

// Rows of `entity_iri<tab>label`. Regression tasks parse the label as a number.
struct LabeledEntitySet {
    std::string task;
    std::vector<LabeledEntity> items;
};

LabeledEntitySet read_labels(std::istream& in, std::string task);
LabeledEntitySet load_labels(const std::filesystem::path& path, std::string task);

struct Metric {
    std::string name;
    int fold;  // -1 for the aggregate over folds
    double value;
};

struct ItemPrediction {
    std::size_t item;  // index into the evaluated set
    int fold;
    std::string label;  // classification
    double value = 0.0;  // regression
};

struct EvalReport {
    std::string task;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<Metric> metrics;
    std::vector<ItemPrediction> predictions;
    std::size_t missing_entities = 0;  // rows without an embedding, excluded
    std::size_t excluded = 0;          // e.g. users without relevant held-out items
    std::size_t undefined_similarities = 0;  // cosine with a zero vector, scored as 0

    // Aggregate (fold -1) value of `name`, if present.
    std::optional<double> aggregate(std::string_view name) const;
};

// Human-readable summary.
void write_report_table(const EvalReport& report, std::ostream& out);
// `metric<tab>fold<tab>value` per metric; the aggregate row uses fold `mean`.
void write_report_tsv(const EvalReport& report, std::ostream& out);

struct CrossValidation {
    int folds = 10;
    std::uint64_t seed = 1;
};

// Fold index per item. Stratified by label when `labels` is given, otherwise
// a seeded shuffle cut into near-equal parts.
std::vector<int> assign_folds(std::size_t n, const CrossValidation& cv,
                              const std::vector<std::string>* labels = nullptr);

// Majority label among the k most cosine-similar training items. Vote ties go
// to the larger summed similarity, then to the smaller label.
EvalReport knn_classify(const EmbeddingMatrix& embeddings, const LabeledEntitySet& labels, int k,
                        const CrossValidation& cv);

// Mean target of the k most similar training items; metric RMSE.
EvalReport knn_regress(const EmbeddingMatrix& embeddings, const LabeledEntitySet& labels, int k,
                       const CrossValidation& cv);

struct LinearModel {
    std::vector<double> coefficients;
    double intercept = 0.0;

    double predict(std::span<const double> x) const;
};

// Least squares with an unpenalized intercept and ridge term `l2` on the
// coefficients, via Cholesky on the centered normal equations. Rows of
// `features` are samples.
LinearModel fit_linear(const Matrix& features, std::span<const double> targets, double l2);

EvalReport linear_regression(const EmbeddingMatrix& embeddings, const LabeledEntitySet& labels,
                             const CrossValidation& cv, double l2);

struct Rating {
    std::string user;
    std::string item;
    double value;
};

class RatingsDataset {
public:
    RatingsDataset(double min_rating = 1.0, double max_rating = 5.0)
        : min_(min_rating), max_(max_rating) {}

    // Throws Error for out-of-scale ratings or a repeated (user, item) pair.
    void add(std::string user, std::string item, double rating);

    std::span<const Rating> ratings() const noexcept { return ratings_; }
    std::span<const std::string> users() const noexcept { return users_; }
    // Indices into ratings() for one user, in insertion order.
    std::span<const std::size_t> rated_by(std::string_view user) const;
    double min_rating() const noexcept { return min_; }
    double max_rating() const noexcept { return max_; }
    std::size_t size() const noexcept { return ratings_.size(); }

private:
    double min_, max_;
    std::vector<Rating> ratings_;
    std::vector<std::string> users_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_user_;
};

RatingsDataset read_ratings(std::istream& in, double min_rating = 1.0, double max_rating = 5.0);
RatingsDataset load_ratings(const std::filesystem::path& path, double min_rating = 1.0,
                            double max_rating = 5.0);

struct RatingPrediction {
    double value;
    bool mean_fallback;  // all neighbor similarities were zero
    std::size_t neighbors;
};

// Item-KNN prediction: the `neighborhood` rated items most similar to `item`,
// sum(cos(j,i) r_uj) / sum(|cos(j,i)|). nullopt for a cold user (no rated item
// with an embedding) or an item without an embedding.
std::optional<RatingPrediction> predict_rating(std::string_view user, std::string_view item,
                                               const RatingsDataset& ratings,
                                               const EmbeddingMatrix& embeddings,
                                               int neighborhood);

struct RecommenderOptions {
    int neighborhood = 5;
    int top_n = 10;
    double relevance_threshold = 4.0;
    double holdout_fraction = 0.2;
    std::uint64_t seed = 1;
};

struct HoldoutSplit {
    RatingsDataset visible;
    RatingsDataset hidden;
};

// Per user, round(fraction * n) of the rated items are hidden (at most n - 1).
HoldoutSplit split_holdout(const RatingsDataset& ratings, double fraction, std::uint64_t seed);

// Scores every catalog item the user has not visibly rated, recommends the
// top_n, and measures precision/recall/F1 against hidden relevant items.
// Ratings of items without embeddings are dropped and counted.
EvalReport evaluate_split(const HoldoutSplit& split, const EmbeddingMatrix& embeddings,
                          const RecommenderOptions& options);

EvalReport evaluate_recommender(const RatingsDataset& ratings, const EmbeddingMatrix& embeddings,
                                const RecommenderOptions& options);

}  // namespace kgwe
