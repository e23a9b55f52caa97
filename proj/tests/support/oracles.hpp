#pragma once

// Reference implementations used only by tests. They recompute results the
// slow, obvious way (dense matrices, all-pairs scans, finite differences) and
// share no code with the library beyond its public types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

namespace kgwe::test {

// Power iteration on the dense Google matrix. `links` are (source, target)
// pairs; duplicates count once. Same stopping rule as the library: L1 change
// below `tolerance`.
inline std::vector<double> dense_pagerank(std::size_t n,
                                          const std::vector<std::pair<int, int>>& links,
                                          double damping, double tolerance, int max_iterations) {
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (auto [s, t] : links) adj(t, s) = 1.0;
    Eigen::MatrixXd g(adj.rows(), adj.cols());
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index c = 0; c < adj.cols(); ++c) {
        const double deg = adj.col(c).sum();
        if (deg > 0) g.col(c) = adj.col(c) / deg;
        else g.col(c).setConstant(inv_n);  // dangling column spreads uniformly
    }
    Eigen::VectorXd x = Eigen::VectorXd::Constant(adj.rows(), inv_n);
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd next = damping * g * x + Eigen::VectorXd::Constant(x.size(), (1 - damping) * inv_n);
        const double change = (next - x).lpNorm<1>();
        x = next;
        if (change < tolerance) break;
    }
    x /= x.sum();
    return {x.data(), x.data() + x.size()};
}

// Stationary vector from the linear system (I - d G) x = (1 - d)/n.
inline std::vector<double> exact_pagerank(std::size_t n, const std::vector<std::pair<int, int>>& links,
                                          double damping) {
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(N, N);
    for (auto [s, t] : links) adj(t, s) = 1.0;
    Eigen::MatrixXd g(N, N);
    for (Eigen::Index c = 0; c < N; ++c) {
        const double deg = adj.col(c).sum();
        if (deg > 0) g.col(c) = adj.col(c) / deg;
        else g.col(c).setConstant(1.0 / static_cast<double>(n));
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(N, N) - damping * g;
    Eigen::VectorXd b = Eigen::VectorXd::Constant(N, (1 - damping) / static_cast<double>(n));
    Eigen::VectorXd x = a.fullPivLu().solve(b);
    x /= x.sum();
    return {x.data(), x.data() + x.size()};
}

struct LeastSquares {
    std::vector<double> coefficients;
    double intercept;
};

// Minimum-norm least squares with an intercept column, through an explicit
// SVD pseudoinverse.
inline LeastSquares pinv_least_squares(const std::vector<std::vector<double>>& x,
                                       const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto d = static_cast<Eigen::Index>(x.front().size());
    Eigen::MatrixXd a(n, d + 1);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) a(r, c) = x[r][c];
        a(r, d) = 1.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues();
    Eigen::VectorXd s_inv(s.size());
    const double cutoff = 1e-12 * s(0);
    for (Eigen::Index i = 0; i < s.size(); ++i) s_inv(i) = s(i) > cutoff ? 1.0 / s(i) : 0.0;
    Eigen::MatrixXd pinv = svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
    Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    Eigen::VectorXd w = pinv * yv;
    return {std::vector<double>(w.data(), w.data() + d), w(d)};
}

inline double brute_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// For every item, the k training items (other folds) with the highest
// cosine, most similar first, ties by lower index. Computed from a full
// similarity matrix.
inline std::vector<std::vector<std::size_t>> brute_neighbors(
    const std::vector<std::vector<double>>& vectors, const std::vector<int>& folds, int k) {
    const auto n = vectors.size();
    std::vector<std::vector<double>> sim(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sim[i][j] = brute_cosine(vectors[i], vectors[j]);
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> cand;
        for (std::size_t j = 0; j < n; ++j)
            if (folds[j] != folds[i]) cand.push_back(j);
        std::ranges::sort(cand, [&](std::size_t a, std::size_t b) {
            return sim[i][a] != sim[i][b] ? sim[i][a] > sim[i][b] : a < b;
        });
        cand.resize(std::min<std::size_t>(cand.size(), static_cast<std::size_t>(k)));
        out[i] = cand;
    }
    return out;
}

inline std::vector<std::string> brute_knn_classify(const std::vector<std::vector<double>>& vectors,
                                                   const std::vector<std::string>& labels,
                                                   const std::vector<int>& folds, int k) {
    const auto nbrs = brute_neighbors(vectors, folds, k);
    std::vector<std::string> pred;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        std::map<std::string, std::pair<int, double>> votes;
        for (auto j : nbrs[i]) {
            votes[labels[j]].first += 1;
            votes[labels[j]].second += brute_cosine(vectors[i], vectors[j]);
        }
        std::string best;
        std::pair<int, double> top{-1, 0.0};
        for (const auto& [label, v] : votes)
            if (v.first > top.first || (v.first == top.first && v.second > top.second)) {
                top = v;
                best = label;
            }
        pred.push_back(best);
    }
    return pred;
}

inline std::vector<double> brute_knn_regress(const std::vector<std::vector<double>>& vectors,
                                             const std::vector<double>& targets,
                                             const std::vector<int>& folds, int k) {
    const auto nbrs = brute_neighbors(vectors, folds, k);
    std::vector<double> pred;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        double sum = 0;
        for (auto j : nbrs[i]) sum += targets[j];
        pred.push_back(sum / static_cast<double>(nbrs[i].size()));
    }
    return pred;
}

// Central difference of f with respect to the scalar x, restoring x.
inline double central_difference(const std::function<double()>& f, double& x, double h) {
    const double saved = x;
    x = saved + h;
    const double up = f();
    x = saved - h;
    const double down = f();
    x = saved;
    return (up - down) / (2 * h);
}

// |a - b| / (|a| + |b|) over whole gradient vectors; 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double denom = std::sqrt(na) + std::sqrt(nb);
    return denom == 0 ? 0.0 : std::sqrt(diff) / denom;
}

struct ChiSquare {
    double statistic;
    int dof;
    double p_value;
};

inline ChiSquare chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
    double stat = 0;
    int cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0) continue;
        stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
        ++cells;
    }
    const int dof = std::max(cells - 1, 1);
    boost::math::chi_squared dist(dof);
    return {stat, dof, boost::math::cdf(boost::math::complement(dist, stat))};
}

}  // namespace kgwe::test
