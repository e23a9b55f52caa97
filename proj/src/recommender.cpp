#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <unordered_set>

#include "kgwe/error.hpp"
#include "kgwe/evaluator.hpp"
#include "kgwe/io.hpp"
#include "kgwe/rng.hpp"

namespace kgwe {

void RatingsDataset::add(std::string user, std::string item, double rating) {
    if (!(rating >= min_ && rating <= max_))
        throw Error("rating " + std::to_string(rating) + " outside the scale [" +
                    std::to_string(min_) + ", " + std::to_string(max_) + "]");
    auto [it, inserted] = by_user_.try_emplace(user);
    if (inserted) users_.push_back(user);
    for (auto idx : it->second)
        if (ratings_[idx].item == item) throw Error("duplicate rating of " + item + " by " + user);
    it->second.push_back(ratings_.size());
    ratings_.push_back({std::move(user), std::move(item), rating});
}

std::span<const std::size_t> RatingsDataset::rated_by(std::string_view user) const {
    if (auto it = by_user_.find(std::string(user)); it != by_user_.end()) return it->second;
    return {};
}

RatingsDataset read_ratings(std::istream& in, double min_rating, double max_rating) {
    RatingsDataset data(min_rating, max_rating);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = chomp(raw);
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        split_fields(line, '\t', [&](std::string_view f) { fields.push_back(f); });
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty())
            throw FormatError(line_no, "expected `user_id<tab>item_iri<tab>rating`");
        double value = 0.0;
        const auto [ptr, ec] =
            std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), value);
        if (ec != std::errc{} || ptr != fields[2].data() + fields[2].size())
            throw FormatError(line_no, "rating is not a number");
        try {
            data.add(std::string(fields[0]), std::string(fields[1]), value);
        } catch (const Error& e) {
            throw FormatError(line_no, e.what());
        }
    }
    return data;
}

RatingsDataset load_ratings(const std::filesystem::path& path, double min_rating,
                            double max_rating) {
    InputFile file(path);
    return read_ratings(file.stream(), min_rating, max_rating);
}

std::optional<RatingPrediction> predict_rating(std::string_view user, std::string_view item,
                                               const RatingsDataset& ratings,
                                               const EmbeddingMatrix& embeddings,
                                               int neighborhood) {
    if (neighborhood < 1) throw ContractViolation("neighborhood must be >= 1");
    const auto target = embeddings.vector(item);
    if (!target) return std::nullopt;

    struct Neighbor {
        double similarity;
        double rating;
    };
    std::vector<Neighbor> neighbors;
    double rating_sum = 0.0;
    std::size_t rating_count = 0;
    for (auto idx : ratings.rated_by(user)) {
        const auto& r = ratings.ratings()[idx];
        if (r.item == item) continue;  // never its own neighbor, nor part of the mean
        rating_sum += r.value;
        ++rating_count;
        if (auto v = embeddings.vector(r.item))
            neighbors.push_back({cosine_similarity(*target, *v).value_or(0.0), r.value});
    }
    if (neighbors.empty()) return std::nullopt;

    // Restrict to the most similar items before anything else.
    std::ranges::stable_sort(neighbors, [](const Neighbor& a, const Neighbor& b) {
        return a.similarity > b.similarity;
    });
    if (neighbors.size() > static_cast<std::size_t>(neighborhood))
        neighbors.resize(static_cast<std::size_t>(neighborhood));

    double num = 0.0, den = 0.0;
    for (const auto& n : neighbors) {
        num += n.similarity * n.rating;
        den += std::abs(n.similarity);
    }
    if (den == 0.0)
        return RatingPrediction{rating_sum / static_cast<double>(rating_count), true, neighbors.size()};
    return RatingPrediction{num / den, false, neighbors.size()};
}

HoldoutSplit split_holdout(const RatingsDataset& ratings, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw ContractViolation("holdout fraction must lie in [0, 1)");
    HoldoutSplit split{RatingsDataset(ratings.min_rating(), ratings.max_rating()),
                       RatingsDataset(ratings.min_rating(), ratings.max_rating())};
    const auto users = ratings.users();
    for (std::size_t u = 0; u < users.size(); ++u) {
        const auto rated = ratings.rated_by(users[u]);
        std::vector<std::size_t> order(rated.begin(), rated.end());
        Rng rng(derive_seed(derive_seed(seed, "holdout"), u));
        shuffle(order.begin(), order.end(), rng);
        auto hide = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(order.size()) + 0.5));
        hide = std::min(hide, order.size() - 1);
        std::unordered_set<std::size_t> hidden_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(hide));
        // Keep the original per-user order in both halves.
        for (auto idx : rated) {
            const auto& r = ratings.ratings()[idx];
            (hidden_idx.contains(idx) ? split.hidden : split.visible).add(r.user, r.item, r.value);
        }
    }
    return split;
}

EvalReport evaluate_split(const HoldoutSplit& split, const EmbeddingMatrix& embeddings,
                          const RecommenderOptions& options) {
    if (options.top_n < 1) throw ContractViolation("top_n must be >= 1");
    EvalReport report;
    report.task = "recommend";
    report.config = {{"neighborhood", std::to_string(options.neighborhood)},
                     {"top_n", std::to_string(options.top_n)},
                     {"relevance_threshold", std::to_string(options.relevance_threshold)},
                     {"holdout_fraction", std::to_string(options.holdout_fraction)},
                     {"seed", std::to_string(options.seed)}};

    // Catalog: every rated item with an embedding, first-seen order.
    std::vector<std::string> catalog;
    std::unordered_set<std::string> in_catalog;
    for (const auto* part : {&split.visible, &split.hidden}) {
        for (const auto& r : part->ratings()) {
            if (!embeddings.vector(r.item)) {
                ++report.missing_entities;
                continue;
            }
            if (in_catalog.insert(r.item).second) catalog.push_back(r.item);
        }
    }

    double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
    std::size_t evaluated = 0;
    std::vector<std::string> users(split.visible.users().begin(), split.visible.users().end());
    for (const auto& u : split.hidden.users())
        if (split.visible.rated_by(u).empty()) users.push_back(u);

    for (const auto& user : users) {
        std::unordered_set<std::string> relevant;
        for (auto idx : split.hidden.rated_by(user)) {
            const auto& r = split.hidden.ratings()[idx];
            if (r.value >= options.relevance_threshold && in_catalog.contains(r.item))
                relevant.insert(r.item);
        }
        std::unordered_set<std::string> seen;
        for (auto idx : split.visible.rated_by(user)) seen.insert(split.visible.ratings()[idx].item);

        struct Scored {
            std::size_t position;
            double score;
        };
        std::vector<Scored> scored;
        for (std::size_t c = 0; c < catalog.size(); ++c) {
            if (seen.contains(catalog[c])) continue;
            const auto pred = predict_rating(user, catalog[c], split.visible, embeddings,
                                             options.neighborhood);
            if (!pred) break;  // cold user: nothing to rank with
            scored.push_back({c, pred->value});
        }
        if (relevant.empty() || scored.empty()) {
            ++report.excluded;
            continue;
        }
        std::ranges::stable_sort(scored, [](const Scored& a, const Scored& b) { return a.score > b.score; });
        const auto n = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(options.top_n));
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += relevant.contains(catalog[scored[i].position]);

        const double precision = static_cast<double>(hits) / static_cast<double>(n);
        const double recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
        const double f1 = hits == 0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
        sum_p += precision;
        sum_r += recall;
        sum_f += f1;
        ++evaluated;
    }

    const double denom = evaluated > 0 ? static_cast<double>(evaluated) : 1.0;
    for (auto [name, sum] : {std::pair{"precision", sum_p}, {"recall", sum_r}, {"f1", sum_f}}) {
        report.metrics.push_back({name, 0, sum / denom});
        report.metrics.push_back({name, -1, sum / denom});
    }
    report.config.emplace_back("evaluated_users", std::to_string(evaluated));
    return report;
}

EvalReport evaluate_recommender(const RatingsDataset& ratings, const EmbeddingMatrix& embeddings,
                                const RecommenderOptions& options) {
    return evaluate_split(split_holdout(ratings, options.holdout_fraction, options.seed),
                          embeddings, options);
}

}  // namespace kgwe
