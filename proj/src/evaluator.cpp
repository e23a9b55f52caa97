#include "kgwe/evaluator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "kgwe/error.hpp"
#include "kgwe/io.hpp"
#include "kgwe/rng.hpp"

namespace kgwe {

std::optional<double> cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ContractViolation("cosine of vectors with different sizes");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return std::nullopt;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

LabeledEntitySet read_labels(std::istream& in, std::string task) {
    LabeledEntitySet set{std::move(task), {}};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = chomp(raw);
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        split_fields(line, '\t', [&](std::string_view f) { fields.push_back(f); });
        if (fields.size() != 2 || fields[0].empty())
            throw FormatError(line_no, "expected `entity_iri<tab>label`");
        set.items.push_back({std::string(fields[0]), std::string(fields[1])});
    }
    return set;
}

LabeledEntitySet load_labels(const std::filesystem::path& path, std::string task) {
    InputFile file(path);
    return read_labels(file.stream(), std::move(task));
}

std::optional<double> EvalReport::aggregate(std::string_view name) const {
    for (const auto& m : metrics)
        if (m.fold < 0 && m.name == name) return m.value;
    return std::nullopt;
}

void write_report_table(const EvalReport& report, std::ostream& out) {
    out << "task: " << report.task << '\n';
    for (const auto& [key, value] : report.config) out << "  " << key << " = " << value << '\n';
    out << "missing entities: " << report.missing_entities << '\n';
    if (report.excluded > 0) out << "excluded: " << report.excluded << '\n';
    if (report.undefined_similarities > 0)
        out << "undefined similarities: " << report.undefined_similarities << '\n';
    out << std::left << std::setw(12) << "metric" << std::setw(8) << "fold" << "value\n";
    for (const auto& m : report.metrics) {
        out << std::setw(12) << m.name << std::setw(8)
            << (m.fold < 0 ? std::string("mean") : std::to_string(m.fold)) << std::setprecision(6)
            << m.value << '\n';
    }
}

void write_report_tsv(const EvalReport& report, std::ostream& out) {
    const auto old = out.precision(17);
    for (const auto& m : report.metrics)
        out << m.name << '\t' << (m.fold < 0 ? std::string("mean") : std::to_string(m.fold)) << '\t'
            << m.value << '\n';
    out.precision(old);
}

std::vector<int> assign_folds(std::size_t n, const CrossValidation& cv,
                              const std::vector<std::string>* labels) {
    if (cv.folds < 2) throw ContractViolation("cross-validation needs at least 2 folds");
    if (n < static_cast<std::size_t>(cv.folds))
        throw ContractViolation("fewer items than folds");
    Rng rng(derive_seed(cv.seed, "folds"));
    std::vector<int> fold(n, 0);

    if (labels != nullptr) {
        std::map<std::string, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < n; ++i) groups[(*labels)[i]].push_back(i);
        std::size_t next = 0;
        for (auto& [label, members] : groups) {
            shuffle(members.begin(), members.end(), rng);
            for (auto i : members) fold[i] = static_cast<int>(next++ % static_cast<std::size_t>(cv.folds));
        }
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        shuffle(order.begin(), order.end(), rng);
        for (std::size_t pos = 0; pos < n; ++pos)
            fold[order[pos]] = static_cast<int>(pos * static_cast<std::size_t>(cv.folds) / n);
    }
    return fold;
}

namespace {

struct Usable {
    std::vector<std::size_t> items;  // indices into the labeled set
    std::vector<std::span<const double>> vectors;
    std::size_t missing = 0;
};

Usable usable_items(const EmbeddingMatrix& embeddings, const LabeledEntitySet& labels) {
    Usable u;
    for (std::size_t i = 0; i < labels.items.size(); ++i) {
        if (auto v = embeddings.vector(labels.items[i].iri)) {
            u.items.push_back(i);
            u.vectors.push_back(*v);
        } else {
            ++u.missing;
        }
    }
    return u;
}

std::vector<double> numeric_targets(const LabeledEntitySet& labels, const Usable& usable) {
    std::vector<double> targets;
    for (auto i : usable.items) {
        const auto& s = labels.items[i].label;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
            throw Error("label `" + s + "` of " + labels.items[i].iri + " is not a number");
        targets.push_back(v);
    }
    return targets;
}

// Positions (into `train`) of the k nearest training items to `query`, most
// similar first; equal similarities keep training order.
struct Neighbor {
    std::size_t position;
    double similarity;
};

std::vector<Neighbor> nearest(std::span<const double> query, const Usable& usable,
                              std::span<const std::size_t> train, int k, std::size_t& undefined) {
    std::vector<Neighbor> all;
    all.reserve(train.size());
    for (std::size_t p = 0; p < train.size(); ++p) {
        auto sim = cosine_similarity(query, usable.vectors[train[p]]);
        if (!sim) ++undefined;
        all.push_back({p, sim.value_or(0.0)});
    }
    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                      [](const Neighbor& a, const Neighbor& b) {
                          return a.similarity != b.similarity ? a.similarity > b.similarity
                                                              : a.position < b.position;
                      });
    all.resize(keep);
    return all;
}

double rmse(double sum_sq, std::size_t n) { return n == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(n)); }

void add_fold_metrics(EvalReport& report, const std::string& name, const std::vector<double>& per_fold) {
    double sum = 0.0;
    for (std::size_t f = 0; f < per_fold.size(); ++f) {
        report.metrics.push_back({name, static_cast<int>(f), per_fold[f]});
        sum += per_fold[f];
    }
    report.metrics.push_back({name, -1, sum / static_cast<double>(per_fold.size())});
}

struct FoldSplit {
    std::vector<std::size_t> train, test;  // positions into usable.items
};

FoldSplit fold_split(const std::vector<int>& folds, int f) {
    FoldSplit s;
    for (std::size_t p = 0; p < folds.size(); ++p) (folds[p] == f ? s.test : s.train).push_back(p);
    return s;
}

EvalReport knn_common(const EmbeddingMatrix& embeddings, const LabeledEntitySet& labels, int k,
                      const CrossValidation& cv, bool classify) {
    if (k < 1) throw ContractViolation("k must be >= 1");
    const Usable usable = usable_items(embeddings, labels);

    EvalReport report;
    report.task = labels.task.empty() ? (classify ? "classify" : "regress") : labels.task;
    report.config = {{"learner", classify ? "knn-classifier" : "knn-regressor"},
                     {"k", std::to_string(k)},
                     {"folds", std::to_string(cv.folds)},
                     {"seed", std::to_string(cv.seed)}};
    report.missing_entities = usable.missing;

    std::vector<std::string> class_of;
    std::vector<double> target_of;
    if (classify) {
        for (auto i : usable.items) class_of.push_back(labels.items[i].label);
        std::vector<std::string> distinct = class_of;
        std::ranges::sort(distinct);
        if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 2)
            throw ContractViolation("classification needs at least 2 classes");
    } else {
        target_of = numeric_targets(labels, usable);
    }

    const auto folds = assign_folds(usable.items.size(), cv, classify ? &class_of : nullptr);
    std::vector<double> per_fold;
    for (int f = 0; f < cv.folds; ++f) {
        const auto split = fold_split(folds, f);
        std::size_t correct = 0;
        double sum_sq = 0.0;
        for (auto p : split.test) {
            const auto neighbors =
                nearest(usable.vectors[p], usable, split.train, k, report.undefined_similarities);
            ItemPrediction pred{usable.items[p], f, {}, 0.0};
            if (classify) {
                std::map<std::string, std::pair<std::size_t, double>> votes;
                for (const auto& n : neighbors) {
                    auto& v = votes[class_of[split.train[n.position]]];
                    ++v.first;
                    v.second += n.similarity;
                }
                // std::map iterates labels in ascending order, so strict
                // comparisons keep the smallest label on a full tie.
                const std::pair<std::size_t, double>* best = nullptr;
                for (const auto& [label, v] : votes) {
                    if (best == nullptr || v.first > best->first ||
                        (v.first == best->first && v.second > best->second)) {
                        best = &v;
                        pred.label = label;
                    }
                }
                if (pred.label == class_of[p]) ++correct;
            } else {
                double sum = 0.0;
                for (const auto& n : neighbors) sum += target_of[split.train[n.position]];
                pred.value = sum / static_cast<double>(neighbors.size());
                const double err = pred.value - target_of[p];
                sum_sq += err * err;
            }
            report.predictions.push_back(std::move(pred));
        }
        per_fold.push_back(classify ? static_cast<double>(correct) / static_cast<double>(split.test.size())
                                    : rmse(sum_sq, split.test.size()));
    }
    add_fold_metrics(report, classify ? "accuracy" : "rmse", per_fold);
    return report;
}

}  // namespace

EvalReport knn_classify(const EmbeddingMatrix& embeddings, const LabeledEntitySet& labels, int k,
                        const CrossValidation& cv) {
    return knn_common(embeddings, labels, k, cv, true);
}

EvalReport knn_regress(const EmbeddingMatrix& embeddings, const LabeledEntitySet& labels, int k,
                       const CrossValidation& cv) {
    return knn_common(embeddings, labels, k, cv, false);
}

double LinearModel::predict(std::span<const double> x) const {
    if (x.size() != coefficients.size()) throw ContractViolation("feature count mismatch");
    double y = intercept;
    for (std::size_t i = 0; i < x.size(); ++i) y += coefficients[i] * x[i];
    return y;
}

LinearModel fit_linear(const Matrix& features, std::span<const double> targets, double l2) {
    const std::size_t n = features.rows(), d = features.cols();
    if (n == 0 || targets.size() != n) throw ContractViolation("linear regression needs matching rows");
    if (!(l2 >= 0.0)) throw ContractViolation("l2 must be >= 0");

    std::vector<double> mean_x(d, 0.0);
    double mean_y = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) mean_x[c] += features(r, c);
        mean_y += targets[r];
    }
    for (double& m : mean_x) m /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    // Normal equations on centered data: (Xc'Xc + l2 I) w = Xc'yc.
    Matrix a(d, d, 0.0);
    std::vector<double> b(d, 0.0);
    std::vector<double> xc(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) xc[c] = features(r, c) - mean_x[c];
        const double yc = targets[r] - mean_y;
        for (std::size_t i = 0; i < d; ++i) {
            b[i] += xc[i] * yc;
            for (std::size_t j = 0; j <= i; ++j) a(i, j) += xc[i] * xc[j];
        }
    }
    double max_diag = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        a(i, i) += l2;
        max_diag = std::max(max_diag, a(i, i));
    }

    // In-place Cholesky, lower triangle.
    for (std::size_t j = 0; j < d; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
        if (!(diag > 1e-12 * max_diag))
            throw Error("normal equations are singular; use a positive l2 (ridge) term");
        const double l = std::sqrt(diag);
        a(j, j) = l;
        for (std::size_t i = j + 1; i < d; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / l;
        }
    }
    std::vector<double> w(b);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < i; ++k) w[i] -= a(i, k) * w[k];
        w[i] /= a(i, i);
    }
    for (std::size_t i = d; i-- > 0;) {
        for (std::size_t k = i + 1; k < d; ++k) w[i] -= a(k, i) * w[k];
        w[i] /= a(i, i);
    }

    LinearModel model{std::move(w), mean_y};
    for (std::size_t c = 0; c < d; ++c) model.intercept -= model.coefficients[c] * mean_x[c];
    return model;
}

EvalReport linear_regression(const EmbeddingMatrix& embeddings, const LabeledEntitySet& labels,
                             const CrossValidation& cv, double l2) {
    const Usable usable = usable_items(embeddings, labels);
    const auto targets = numeric_targets(labels, usable);

    EvalReport report;
    report.task = labels.task.empty() ? "regress" : labels.task;
    report.config = {{"learner", "linear-regression"},
                     {"l2", std::to_string(l2)},
                     {"folds", std::to_string(cv.folds)},
                     {"seed", std::to_string(cv.seed)}};
    report.missing_entities = usable.missing;

    const auto folds = assign_folds(usable.items.size(), cv);
    const auto dim = embeddings.dimension();
    std::vector<double> per_fold;
    for (int f = 0; f < cv.folds; ++f) {
        const auto split = fold_split(folds, f);
        Matrix x(split.train.size(), dim);
        std::vector<double> y;
        for (std::size_t r = 0; r < split.train.size(); ++r) {
            std::ranges::copy(usable.vectors[split.train[r]], x.row(r).begin());
            y.push_back(targets[split.train[r]]);
        }
        const auto model = fit_linear(x, y, l2);
        double sum_sq = 0.0;
        for (auto p : split.test) {
            ItemPrediction pred{usable.items[p], f, {}, model.predict(usable.vectors[p])};
            const double err = pred.value - targets[p];
            sum_sq += err * err;
            report.predictions.push_back(std::move(pred));
        }
        per_fold.push_back(rmse(sum_sq, split.test.size()));
    }
    add_fold_metrics(report, "rmse", per_fold);
    return report;
}

}  // namespace kgwe
