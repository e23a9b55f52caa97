#include "kgwe/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgwe/error.hpp"
#include "kgwe/io.hpp"
#include "kgwe/log.hpp"
#include "kgwe/rng.hpp"

namespace kgwe::cli {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    PipelineConfig, graph, clickstream, weights, corpus, embeddings, labels, ratings, out, strict,
    strategy, damping, pagerank_tolerance, pagerank_max_iterations, smoothing, entity_prefix,
    url_decode, depth, walks_per_vertex, dim, mode, window, negatives, epochs, learning_rate,
    min_count, subsample, task, k, folds, l2, neighborhood, top_n, relevance_threshold, holdout,
    rating_min, rating_max, seed, workers)

std::string PipelineConfig::stem() const {
    return strategy + "_" + mode + "_" + std::to_string(walks_per_vertex) + "w_" +
           std::to_string(dim) + "v_" + std::to_string(depth) + "d";
}

WalkConfig PipelineConfig::walk_config() const {
    return {depth, walks_per_vertex, derive_seed(seed, "walk"), workers};
}

TrainConfig PipelineConfig::train_config() const {
    TrainConfig c;
    c.dimension = dim;
    c.window = window;
    c.negatives = negatives;
    c.epochs = epochs;
    c.mode = mode == "cbow" ? TrainMode::cbow : TrainMode::skipgram;
    if (learning_rate > 0.0) c.learning_rate = learning_rate;
    c.min_count = min_count;
    c.seed = derive_seed(seed, "train");
    c.workers = workers;
    c.subsample = subsample;
    return c;
}

CrossValidation PipelineConfig::cross_validation() const {
    return {folds, derive_seed(seed, "eval")};
}

RecommenderOptions PipelineConfig::recommender_options() const {
    return {neighborhood, top_n, relevance_threshold, holdout, derive_seed(seed, "eval")};
}

ClickstreamOptions PipelineConfig::clickstream_options() const {
    return {entity_prefix, smoothing, url_decode};
}

PageRankOptions PipelineConfig::pagerank_options() const {
    return {damping, pagerank_tolerance, pagerank_max_iterations};
}

namespace {

// Bad invocation: exit status 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A pipeline stage threw: exit status 1.
class StageFailure : public std::runtime_error {
public:
    StageFailure(const std::string& stage, const std::string& cause)
        : std::runtime_error("stage " + stage + " failed: " + cause) {}
};

// Options bound to a staging copy of the config; apply() copies only the
// values the user actually passed.
class FlagBinder {
public:
    explicit FlagBinder(CLI::App& app) : app_(app) {}

    template <class T>
    void add(const std::string& flag, T PipelineConfig::*field, const std::string& help) {
        auto* opt = app_.add_option(flag, staged_.*field, help)->capture_default_str();
        appliers_.push_back([this, opt, field](PipelineConfig& c) {
            if (opt->count() > 0) c.*field = staged_.*field;
        });
    }

    void add_switch(const std::string& flag, bool PipelineConfig::*field, const std::string& help) {
        auto* opt = app_.add_flag(flag, staged_.*field, help);
        appliers_.push_back([this, opt, field](PipelineConfig& c) {
            if (opt->count() > 0) c.*field = staged_.*field;
        });
    }

    void apply(PipelineConfig& c) const {
        for (const auto& f : appliers_) f(c);
    }

    std::string config_path;

private:
    CLI::App& app_;
    PipelineConfig staged_;
    std::vector<std::function<void(PipelineConfig&)>> appliers_;
};

using Registrar = std::function<void(FlagBinder&)>;

const std::map<std::string, Registrar>& flag_table() {
    using P = PipelineConfig;
    static const std::map<std::string, Registrar> table = {
        {"--out", [](FlagBinder& b) { b.add("--out", &P::out, "Output directory"); }},
        {"--seed", [](FlagBinder& b) { b.add("--seed", &P::seed, "Global seed; stage seeds derive from it"); }},
        {"--workers", [](FlagBinder& b) { b.add("--workers", &P::workers, "Worker threads (training is deterministic only with 1)"); }},
        {"--graph", [](FlagBinder& b) { b.add("--graph", &P::graph, "N-Triples graph (.nt or .nt.gz)"); }},
        {"--strict", [](FlagBinder& b) { b.add_switch("--strict", &P::strict, "Abort on the first malformed triple"); }},
        {"--strategy", [](FlagBinder& b) { b.add("--strategy", &P::strategy, "uniform | pred-freq | pagerank | inv-pagerank | clickstream"); }},
        {"--clickstream", [](FlagBinder& b) { b.add("--clickstream", &P::clickstream, "Clickstream TSV (.tsv or .tsv.gz)"); }},
        {"--damping", [](FlagBinder& b) { b.add("--damping", &P::damping, "PageRank damping factor"); }},
        {"--pagerank-tolerance", [](FlagBinder& b) { b.add("--pagerank-tolerance", &P::pagerank_tolerance, "PageRank L1 tolerance"); }},
        {"--pagerank-max-iterations", [](FlagBinder& b) { b.add("--pagerank-max-iterations", &P::pagerank_max_iterations, "PageRank iteration cap"); }},
        {"--smoothing", [](FlagBinder& b) { b.add("--smoothing", &P::smoothing, "Weight of edges missing from the clickstream"); }},
        {"--entity-prefix", [](FlagBinder& b) { b.add("--entity-prefix", &P::entity_prefix, "IRI prefix stripped to get page titles"); }},
        {"--url-decode", [](FlagBinder& b) { b.add_switch("--url-decode", &P::url_decode, "Percent-decode page titles"); }},
        {"--weights", [](FlagBinder& b) { b.add("--weights", &P::weights, "Precomputed weight table TSV"); }},
        {"--depth", [](FlagBinder& b) { b.add("--depth", &P::depth, "Walk depth (token budget)"); }},
        {"--walks-per-vertex", [](FlagBinder& b) { b.add("--walks-per-vertex", &P::walks_per_vertex, "Walks started at every vertex"); }},
        {"--corpus", [](FlagBinder& b) { b.add("--corpus", &P::corpus, "Walk corpus file"); }},
        {"--dim", [](FlagBinder& b) { b.add("--dim", &P::dim, "Embedding dimension"); }},
        {"--mode", [](FlagBinder& b) { b.add("--mode", &P::mode, "sg | cbow"); }},
        {"--window", [](FlagBinder& b) { b.add("--window", &P::window, "Maximum context window"); }},
        {"--negatives", [](FlagBinder& b) { b.add("--negatives", &P::negatives, "Negative samples per positive pair"); }},
        {"--epochs", [](FlagBinder& b) { b.add("--epochs", &P::epochs, "Training epochs"); }},
        {"--lr", [](FlagBinder& b) { b.add("--lr", &P::learning_rate, "Initial learning rate (0: 0.025 sg, 0.05 cbow)"); }},
        {"--min-count", [](FlagBinder& b) { b.add("--min-count", &P::min_count, "Drop tokens rarer than this"); }},
        {"--subsample", [](FlagBinder& b) { b.add("--subsample", &P::subsample, "Frequent-token subsampling threshold (0: off)"); }},
        {"--embeddings", [](FlagBinder& b) { b.add("--embeddings", &P::embeddings, "Embedding text file"); }},
        {"--labels", [](FlagBinder& b) { b.add("--labels", &P::labels, "Labeled entities TSV"); }},
        {"--task", [](FlagBinder& b) { b.add("--task", &P::task, "classify | regress"); }},
        {"--k", [](FlagBinder& b) { b.add("--k", &P::k, "Neighbors for kNN learners"); }},
        {"--folds", [](FlagBinder& b) { b.add("--folds", &P::folds, "Cross-validation folds"); }},
        {"--l2", [](FlagBinder& b) { b.add("--l2", &P::l2, "Ridge term of linear regression"); }},
        {"--ratings", [](FlagBinder& b) { b.add("--ratings", &P::ratings, "Ratings TSV"); }},
        {"--neighborhood", [](FlagBinder& b) { b.add("--neighborhood", &P::neighborhood, "Rated items used per prediction"); }},
        {"--top-n", [](FlagBinder& b) { b.add("--top-n", &P::top_n, "Recommendation list length"); }},
        {"--relevance-threshold", [](FlagBinder& b) { b.add("--relevance-threshold", &P::relevance_threshold, "Minimum rating of a relevant item"); }},
        {"--holdout", [](FlagBinder& b) { b.add("--holdout", &P::holdout, "Fraction of each user's ratings hidden"); }},
        {"--rating-min", [](FlagBinder& b) { b.add("--rating-min", &P::rating_min, "Lowest valid rating"); }},
        {"--rating-max", [](FlagBinder& b) { b.add("--rating-max", &P::rating_max, "Highest valid rating"); }},
    };
    return table;
}

using Group = std::vector<std::string>;
const Group kCommon = {"--out", "--seed", "--workers"};
const Group kGraph = {"--graph", "--strict"};
const Group kWeighting = {"--strategy", "--clickstream", "--damping", "--pagerank-tolerance",
                          "--pagerank-max-iterations", "--smoothing", "--entity-prefix",
                          "--url-decode"};
const Group kWalking = {"--depth", "--walks-per-vertex"};
const Group kTraining = {"--dim", "--mode", "--window", "--negatives", "--epochs", "--lr",
                         "--min-count", "--subsample"};
const Group kMl = {"--labels", "--task", "--k", "--folds", "--l2"};
const Group kRec = {"--ratings", "--neighborhood", "--top-n", "--relevance-threshold",
                    "--holdout", "--rating-min", "--rating-max"};
// Flags that only feed output names.
const Group kNaming = {"--strategy", "--depth", "--walks-per-vertex", "--dim", "--mode"};

struct Subcommand {
    std::string name;
    std::string description;
    std::vector<Group> groups;
};

const std::vector<Subcommand>& subcommands() {
    static const std::vector<Subcommand> list = {
        {"parse-graph", "Parse an N-Triples graph and report malformed lines", {kCommon, kGraph}},
        {"weights", "Compute an edge weight table", {kCommon, kGraph, kWeighting}},
        {"walk", "Generate the weighted walk corpus", {kCommon, kGraph, kWeighting, kWalking, {"--weights"}}},
        {"train", "Train embeddings on a walk corpus", {kCommon, kGraph, {"--corpus"}, kTraining, kNaming}},
        {"eval-ml", "Cross-validated kNN / linear regression on embeddings", {kCommon, {"--embeddings"}, kMl, kNaming}},
        {"eval-rec", "Item-KNN recommendation on embeddings", {kCommon, {"--embeddings"}, kRec, kNaming}},
        {"pipeline", "Run parse, weights, walk, train and evaluation end to end",
         {kCommon, kGraph, kWeighting, kWalking, kTraining, kMl, kRec}},
    };
    return list;
}

void apply_json(const std::string& path, PipelineConfig& config) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw UsageError("config file " + path + " must hold a JSON object");
    const nlohmann::json known = config;
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw UsageError("config file " + path + ": unknown key `" + key + "`");
    try {
        nlohmann::json merged = config;
        merged.update(j);
        config = merged.get<PipelineConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
}

void require(bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
}

void validate(const std::string& command, const PipelineConfig& c) {
    const bool needs_graph = command != "eval-ml" && command != "eval-rec";
    require(!needs_graph || !c.graph.empty(), "--graph is required");
    require(command != "train" || !c.corpus.empty(), "--corpus is required");
    if (command == "eval-ml" || command == "eval-rec")
        require(!c.embeddings.empty(), "--embeddings is required");
    require(command != "eval-ml" || !c.labels.empty(), "--labels is required");
    require(command != "eval-rec" || !c.ratings.empty(), "--ratings is required");

    require(parse_strategy(c.strategy).has_value(), "unknown --strategy `" + c.strategy + "`");
    const bool weighs = command == "weights" || command == "pipeline" ||
                        (command == "walk" && c.weights.empty());
    require(!weighs || c.strategy != "clickstream" || !c.clickstream.empty(),
            "--strategy clickstream requires --clickstream");
    require(c.mode == "sg" || c.mode == "cbow", "--mode must be sg or cbow");
    require(c.task == "classify" || c.task == "regress", "--task must be classify or regress");

    require(c.depth >= 1, "--depth must be >= 1");
    require(c.walks_per_vertex >= 1, "--walks-per-vertex must be >= 1");
    require(c.dim >= 1, "--dim must be >= 1");
    require(c.window >= 1, "--window must be >= 1");
    require(c.negatives >= 1, "--negatives must be >= 1");
    require(c.epochs >= 1, "--epochs must be >= 1");
    require(c.learning_rate > 0.0, "--lr must be > 0");
    require(c.min_count >= 1, "--min-count must be >= 1");
    require(c.subsample >= 0.0, "--subsample must be >= 0");
    require(c.workers >= 1, "--workers must be >= 1");
    require(c.damping > 0.0 && c.damping < 1.0, "--damping must lie in (0, 1)");
    require(c.pagerank_tolerance > 0.0, "--pagerank-tolerance must be > 0");
    require(c.pagerank_max_iterations >= 1, "--pagerank-max-iterations must be >= 1");
    require(c.smoothing >= 0.0, "--smoothing must be >= 0");
    require(c.k >= 1, "--k must be >= 1");
    require(c.folds >= 2, "--folds must be >= 2");
    require(c.l2 >= 0.0, "--l2 must be >= 0");
    require(c.neighborhood >= 1, "--neighborhood must be >= 1");
    require(c.top_n >= 1, "--top-n must be >= 1");
    require(c.holdout >= 0.0 && c.holdout < 1.0, "--holdout must lie in [0, 1)");
    require(c.rating_min < c.rating_max, "--rating-min must be below --rating-max");
}

class Run {
public:
    Run(std::string command, PipelineConfig config, std::ostream& out)
        : command_(std::move(command)), config_(std::move(config)), out_(out), dir_(config_.out) {}

    int execute() {
        std::filesystem::create_directories(dir_);
        const nlohmann::json resolved = config_;
        spdlog::info("{} configuration: {}", command_, resolved.dump());
        write_text(command_ == "pipeline" ? "config.json" : command_ + ".config.json",
                   resolved.dump(2) + "\n", false);

        if (command_ == "parse-graph") {
            parse();
        } else if (command_ == "weights") {
            parse();
            compute_weights();
            stage("write-weights", [&] {
                const auto name = config_.strategy + ".weights.tsv";
                auto os = open_output(dir_ / name);
                write_weights(graph_, weights_, *os);
                artifact(name, os);
            });
        } else if (command_ == "walk") {
            parse();
            if (config_.weights.empty()) {
                compute_weights();
            } else {
                stage("read-weights", [&] {
                    InputFile file(config_.weights);
                    weights_ = read_weights(graph_, file.stream(), *parse_strategy(config_.strategy));
                });
            }
            walk();
        } else if (command_ == "train") {
            parse();
            stage("read-corpus", [&] {
                InputFile file(config_.corpus);
                corpus_ = read_corpus(file.stream(), graph_);
            });
            train();
        } else if (command_ == "eval-ml" || command_ == "eval-rec") {
            stage("read-embeddings", [&] {
                InputFile file(config_.embeddings);
                embeddings_ = load_embeddings(file.stream());
            });
            if (command_ == "eval-ml") evaluate_ml();
            else evaluate_rec();
        } else {
            parse();
            compute_weights();
            walk();
            train();
            if (!config_.labels.empty()) evaluate_ml();
            if (!config_.ratings.empty()) evaluate_rec();
            write_manifest();
        }
        return 0;
    }

private:
    template <class Fn>
    void stage(const std::string& name, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        try {
            fn();
        } catch (const std::exception& e) {
            throw StageFailure(name, e.what());
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        timings_.push_back({{"name", name}, {"seconds", elapsed.count()}});
        spdlog::info("stage {} done in {:.3f}s", name, elapsed.count());
    }

    void artifact(const std::string& name, std::unique_ptr<std::ostream>& os) {
        os->flush();
        if (!*os) throw Error("write failed: " + name);
        os.reset();
        artifacts_[name] = sha256_file(dir_ / name);
    }

    void write_text(const std::string& name, const std::string& text, bool record = true) {
        auto os = open_output(dir_ / name);
        *os << text;
        if (record) artifact(name, os);
    }

    void parse() {
        stage("parse-graph", [&] {
            auto parsed = load_ntriples(config_.graph, ParseOptions{config_.strict});
            graph_ = std::move(parsed.graph);
            const auto& r = parsed.report;
            std::ostringstream issues;
            write_parse_report(r, issues);
            write_text("parse_report.tsv", issues.str());
            graph_stats_ = {{"entities", graph_.entity_count()},
                            {"predicates", graph_.predicate_count()},
                            {"edges", graph_.edge_count()},
                            {"literal_triples", r.literal_triples},
                            {"duplicate_triples", r.duplicate_triples},
                            {"parse_issues", r.issues.size()}};
            if (command_ == "parse-graph") write_text("graph_stats.json", graph_stats_.dump(2) + "\n");
            out_ << "graph: " << graph_.entity_count() << " entities, " << graph_.predicate_count()
                 << " predicates, " << graph_.edge_count() << " edges, " << r.issues.size()
                 << " malformed lines\n";
            if (!r.issues.empty()) spdlog::warn("{} malformed N-Triples lines skipped", r.issues.size());
        });
    }

    void compute_weights() {
        stage("weights", [&] {
            const auto strategy = *parse_strategy(config_.strategy);
            switch (strategy) {
                case WeightStrategy::uniform:
                    weights_ = uniform_weights(graph_);
                    break;
                case WeightStrategy::predicate_frequency:
                    weights_ = predicate_frequency_weights(graph_);
                    break;
                case WeightStrategy::pagerank:
                case WeightStrategy::inverse_pagerank: {
                    const auto scores = pagerank(graph_, config_.pagerank_options());
                    weights_ = strategy == WeightStrategy::pagerank
                                   ? pagerank_weights(graph_, scores)
                                   : inverse_pagerank_weights(graph_, scores);
                    break;
                }
                case WeightStrategy::clickstream: {
                    const auto parsed = load_clickstream(config_.clickstream);
                    if (!parsed.report.malformed.empty())
                        spdlog::warn("{} malformed clickstream rows skipped",
                                     parsed.report.malformed.size());
                    ClickstreamCoverage coverage;
                    weights_ = clickstream_weights(graph_, parsed.table,
                                                   config_.clickstream_options(), &coverage);
                    spdlog::info("clickstream: {} edges observed, {} smoothed, {} untitled entities",
                                 coverage.edges_observed, coverage.edges_smoothed,
                                 coverage.untitled_entities);
                    break;
                }
            }
        });
    }

    void walk() {
        stage("walk", [&] {
            corpus_ = generate_walks(graph_, weights_, config_.walk_config());
            const auto name = config_.stem() + ".walks.txt";
            auto os = open_output(dir_ / name);
            write_corpus(corpus_, graph_, *os);
            artifact(name, os);
            out_ << "corpus: " << corpus_.size() << " walks, " << corpus_.token_count()
                 << " tokens -> " << (dir_ / name).string() << '\n';
        });
    }

    void train() {
        stage("train", [&] {
            const auto cfg = config_.train_config();
            const auto vocab = build_vocab(corpus_, graph_, cfg.min_count);
            const auto encoded = encode_corpus(corpus_, graph_, vocab);
            auto result = kgwe::train(encoded, vocab, cfg);
            embeddings_ = std::move(result.embeddings);
            epoch_loss_ = std::move(result.epoch_loss);
            const auto name = config_.stem() + ".embeddings.txt";
            auto os = open_output(dir_ / name);
            save_embeddings(embeddings_, *os);
            artifact(name, os);
            out_ << "embeddings: " << embeddings_.size() << " x " << embeddings_.dimension()
                 << " -> " << (dir_ / name).string() << '\n';
        });
    }

    void report(const EvalReport& r, const std::string& suffix) {
        std::ostringstream tsv, table;
        write_report_tsv(r, tsv);
        write_report_table(r, table);
        write_text(config_.stem() + "." + suffix + ".report.tsv", tsv.str());
        write_text(config_.stem() + "." + suffix + ".report.txt", table.str());
        out_ << table.str();
    }

    void evaluate_ml() {
        stage("eval-ml", [&] {
            const auto labels = load_labels(config_.labels, config_.task);
            const auto cv = config_.cross_validation();
            if (config_.task == "classify") {
                report(knn_classify(embeddings_, labels, config_.k, cv), "classify-knn");
            } else {
                report(knn_regress(embeddings_, labels, config_.k, cv), "regress-knn");
                report(linear_regression(embeddings_, labels, cv, config_.l2), "regress-lr");
            }
        });
    }

    void evaluate_rec() {
        stage("eval-rec", [&] {
            const auto ratings = load_ratings(config_.ratings, config_.rating_min, config_.rating_max);
            report(evaluate_recommender(ratings, embeddings_, config_.recommender_options()),
                   "recommend");
        });
    }

    void write_manifest() {
        nlohmann::json manifest;
        manifest["command"] = command_;
        manifest["stem"] = config_.stem();
        manifest["config"] = config_;
        manifest["derived_seeds"] = {{"walk", derive_seed(config_.seed, "walk")},
                                     {"train", derive_seed(config_.seed, "train")},
                                     {"eval", derive_seed(config_.seed, "eval")}};
        manifest["stages"] = timings_;
        manifest["graph"] = graph_stats_;
        manifest["corpus"] = {{"walks", corpus_.size()}, {"tokens", corpus_.token_count()}};
        manifest["vocabulary_size"] = embeddings_.size();
        manifest["epoch_loss"] = epoch_loss_;
        nlohmann::json artifacts = nlohmann::json::object();
        for (const auto& [name, sum] : artifacts_) artifacts[name] = {{"sha256", sum}};
        manifest["artifacts"] = artifacts;
        write_text("manifest.json", manifest.dump(2) + "\n", false);
        out_ << "manifest -> " << (dir_ / "manifest.json").string() << '\n';
    }

    std::string command_;
    PipelineConfig config_;
    std::ostream& out_;
    std::filesystem::path dir_;

    KnowledgeGraph graph_;
    EdgeWeightTable weights_;
    WalkCorpus corpus_;
    EmbeddingMatrix embeddings_;
    std::vector<double> epoch_loss_;
    nlohmann::json graph_stats_ = nlohmann::json::object();
    nlohmann::json timings_ = nlohmann::json::array();
    std::map<std::string, std::string> artifacts_;
};

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Knowledge graph embeddings from weighted random walks", "kgwe"};
    app.require_subcommand(1);

    std::vector<std::unique_ptr<FlagBinder>> binders;
    std::map<CLI::App*, FlagBinder*> binder_of;
    for (const auto& sub : subcommands()) {
        auto* cmd = app.add_subcommand(sub.name, sub.description);
        auto& binder = *binders.emplace_back(std::make_unique<FlagBinder>(*cmd));
        binder_of[cmd] = &binder;
        cmd->add_option("--config", binder.config_path, "JSON config file (flags take precedence)");
        std::set<std::string> seen;
        for (const auto& group : sub.groups)
            for (const auto& flag : group)
                if (seen.insert(flag).second) flag_table().at(flag)(binder);
    }

    std::vector<std::string> argv_storage(args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    auto* cmd = app.get_subcommands().front();
    const auto& binder = *binder_of.at(cmd);
    try {
        PipelineConfig config;
        if (!binder.config_path.empty()) apply_json(binder.config_path, config);
        binder.apply(config);
        if (!(config.learning_rate > 0.0)) config.learning_rate = config.mode == "cbow" ? 0.05 : 0.025;
        validate(cmd->get_name(), config);
        return Run(cmd->get_name(), std::move(config), out).execute();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n" << cmd->help();
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, char** argv) {
    configure_logging();
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace kgwe::cli
