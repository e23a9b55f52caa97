#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "kgwe/embedder.hpp"
#include "kgwe/evaluator.hpp"
#include "kgwe/walker.hpp"
#include "kgwe/weighting.hpp"

namespace kgwe::cli {

// Fully resolved settings of one run. Precedence: command-line flags, then the
// JSON file given by --config, then these defaults.
struct PipelineConfig {
    // inputs and outputs
    std::string graph;
    std::string clickstream;
    std::string weights;     // precomputed weight table for `walk`
    std::string corpus;      // input of `train`
    std::string embeddings;  // input of `eval-ml` / `eval-rec`
    std::string labels;
    std::string ratings;
    std::string out = "out";
    bool strict = false;

    // weighting
    std::string strategy = "uniform";
    double damping = 0.85;
    double pagerank_tolerance = 1e-8;
    int pagerank_max_iterations = 100;
    double smoothing = 1.0;
    std::string entity_prefix = "http://dbpedia.org/resource/";
    bool url_decode = false;

    // walks
    int depth = 4;
    int walks_per_vertex = 200;

    // training
    int dim = 200;
    std::string mode = "sg";
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double learning_rate = 0.0;  // 0 resolves to the mode's default
    int min_count = 1;
    double subsample = 0.0;

    // machine-learning evaluation
    std::string task = "classify";
    int k = 5;
    int folds = 10;
    double l2 = 1e-3;

    // recommender evaluation
    int neighborhood = 5;
    int top_n = 10;
    double relevance_threshold = 4.0;
    double holdout = 0.2;
    double rating_min = 1.0;
    double rating_max = 5.0;

    std::uint64_t seed = 1;
    int workers = 1;

    // e.g. clickstream_sg_500w_200v_4d
    std::string stem() const;

    WalkConfig walk_config() const;
    TrainConfig train_config() const;
    CrossValidation cross_validation() const;
    RecommenderOptions recommender_options() const;
    ClickstreamOptions clickstream_options() const;
    PageRankOptions pagerank_options() const;
};

// Command-line entry point; returns the process exit status: 0 on success,
// 2 for usage errors, 1 when a stage fails.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace kgwe::cli
