#include "cli_commands.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "facetlm/clustering.hpp"
#include "facetlm/corpus.hpp"
#include "facetlm/error.hpp"
#include "facetlm/eval.hpp"
#include "facetlm/retrieval.hpp"

namespace facetlm::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string corpus;
    std::string index;
    std::string queries;
    std::string qrels;
    std::string clusters;
    std::string out = ".";

    std::string stem = "none";
    std::string stopwords;
    int min_token_len = 1;

    std::string smoothing = "dirichlet";
    double mu = 2000.0;
    double jm_lambda = 0.7;
    double ad_delta = 0.7;

    std::string algo = "lm";
    std::string rep = "lm";
    std::optional<std::size_t> m;
    std::size_t n = 1000;
    double lambda = 0.6;
    std::string rerank = "default";
    std::size_t k = 40;
    std::string runtag;

    std::string run;
    std::string baseline;

    std::string param = "lambda";
    std::vector<double> grid;
    bool rerank_study = false;

    std::vector<CLI::Option*> tokenization_flags;
};

TokenizationConfig tokenization_config(Options const& o)
{
    TokenizationConfig config;
    config.stem = parse_stemmer(o.stem);
    config.min_token_len = o.min_token_len;
    if (!o.stopwords.empty()) {
        config.stopwords = load_stopwords(o.stopwords);
    }
    config.validate();
    return config;
}

SmoothingSpec smoothing_spec(Options const& o)
{
    SmoothingSpec spec;
    spec.method = parse_smoothing_method(o.smoothing);
    spec.mu = o.mu;
    spec.lambda_jm = o.jm_lambda;
    spec.delta_ad = o.ad_delta;
    spec.validate();
    return spec;
}

AlgorithmSpec algorithm_spec(Options const& o)
{
    AlgorithmSpec spec;
    spec.name = parse_algorithm(o.algo);
    spec.representation = parse_representation(o.rep);
    spec.m = o.m;
    spec.n = o.n;
    spec.lambda = o.lambda;
    if (o.rerank == "on") {
        spec.rerank = true;
    } else if (o.rerank == "off") {
        spec.rerank = false;
    } else if (o.rerank != "default") {
        throw ConfigError("--rerank must be on, off or default");
    }
    spec.validate();
    return spec;
}

CorpusIndex open_index(Options const& o)
{
    if (!o.index.empty()) {
        for (auto const* flag : o.tokenization_flags) {
            if (flag->count() > 0) {
                throw ConfigError(flag->get_name() + " applies only with --corpus; the index stores its own tokenization");
            }
        }
        return load_index(o.index);
    }
    if (!o.corpus.empty()) {
        return ingest_corpus(o.corpus, tokenization_config(o));
    }
    throw ConfigError("one of --index or --corpus is required");
}

fs::path output_dir(Options const& o)
{
    fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    return dir;
}

std::ofstream open_output(fs::path const& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

std::optional<ClusterSet> clusters_for(Options const& o, AlgorithmSpec const& algo, CorpusIndex const& index)
{
    if (!o.clusters.empty()) {
        return load_clusters(o.clusters, index);
    }
    if (algo.uses_clusters()) {
        throw ConfigError("--algo " + std::string(to_string(algo.name)) + " needs --clusters");
    }
    return std::nullopt;
}

void note_empty_queries(BatchResult const& result, std::ostream& err)
{
    if (result.empty_queries.empty()) {
        return;
    }
    std::string ids;
    for (auto const& q : result.empty_queries) {
        ids += (ids.empty() ? "" : ", ") + q;
    }
    err << "note: " << result.empty_queries.size() << " queries have no indexed terms and return nothing: " << ids
        << '\n';
}

int cmd_index(Options const& o, std::ostream& out)
{
    if (o.corpus.empty()) {
        throw ConfigError("index needs --corpus");
    }
    auto index = ingest_corpus(o.corpus, tokenization_config(o));
    auto dir = output_dir(o);
    save_index(index, dir / "index.fidx");
    out << "docs=" << index.num_docs() << " tokens=" << index.stats().total_tokens
        << " vocab=" << index.stats().vocabulary_size() << " skipped=" << index.skipped_empty()
        << " fingerprint=" << index.fingerprint_hex() << '\n';
    return 0;
}

int cmd_cluster(Options const& o, std::ostream& out)
{
    if (o.k < 1) {
        throw ConfigError("--k must be >= 1");
    }
    auto index = open_index(o);
    auto spec = smoothing_spec(o);
    auto clusters = build_clusters(index, o.k, spec);
    auto path = output_dir(o) / "clusters.tsv";
    save_clusters(clusters, index, path);
    out << "clusters=" << clusters.size() << " k=" << o.k << " file=" << path.string() << '\n';
    return 0;
}

std::string runtag_for(Options const& o, AlgorithmSpec const& algo)
{
    std::string tag = o.runtag.empty() ? std::string(to_string(algo.name)) : o.runtag;
    if (tag.find_first_of(" \t\n/") != std::string::npos) {
        throw ConfigError("--runtag may not contain whitespace or '/'");
    }
    return tag;
}

int cmd_search(Options const& o, std::ostream& out, std::ostream& err)
{
    if (o.queries.empty()) {
        throw ConfigError("search needs --queries");
    }
    auto algo = algorithm_spec(o);
    auto spec = smoothing_spec(o);
    auto index = open_index(o);
    auto clusters = clusters_for(o, algo, index);
    auto queries = ingest_queries(o.queries, index.config());
    auto tag = runtag_for(o, algo);

    Retriever retriever(index, spec, clusters ? &*clusters : nullptr);
    auto result = batch_search(algo, queries, retriever);
    note_empty_queries(result, err);
    auto path = output_dir(o) / (tag + ".run");
    save_run(path, result.lists, tag);
    out << "queries=" << queries.size() << " dropped_tokens=" << result.dropped_tokens << " run=" << path.string()
        << '\n';
    return 0;
}

void write_curve_file(fs::path const& dir, std::string const& run_path, EvalReport const& report)
{
    auto stream = open_output(dir / (fs::path(run_path).stem().string() + ".curve.tsv"));
    write_curve(stream, report);
}

void note_excluded(EvalReport const& report, std::ostream& err)
{
    if (!report.excluded.empty()) {
        err << "note: " << report.excluded.size() << " queries without relevant documents are excluded\n";
    }
}

int cmd_eval(Options const& o, std::ostream& out, std::ostream& err)
{
    if (o.run.empty() || o.qrels.empty()) {
        throw ConfigError("eval needs --run and --qrels");
    }
    auto run = load_run(o.run);
    auto qrels = load_qrels(o.qrels);
    std::ostringstream table;
    std::optional<RunComparison> comparison;
    EvalReport report;
    if (!o.baseline.empty()) {
        comparison = compare_runs(run, load_run(o.baseline), qrels);
        report = comparison->run;
        write_comparison_table(table, *comparison);
    } else {
        report = evaluate_run(run, qrels);
        write_report_table(table, report);
    }
    note_excluded(report, err);
    out << table.str();

    auto dir = output_dir(o);
    open_output(dir / "report.tsv") << table.str();
    write_curve_file(dir, o.run, report);
    if (comparison) {
        write_curve_file(dir, o.baseline, comparison->baseline);
    }
    return 0;
}

std::size_t integral(double value, std::string const& name)
{
    if (value < 0 || value != static_cast<double>(static_cast<std::size_t>(value))) {
        throw ConfigError(name + " grid values must be non-negative integers");
    }
    return static_cast<std::size_t>(value);
}

int cmd_sweep(Options const& o, std::ostream& out, std::ostream& err)
{
    if (o.queries.empty() || o.qrels.empty()) {
        throw ConfigError("sweep needs --queries and --qrels");
    }
    if (o.param != "lambda" && o.param != "k" && o.param != "m" && o.param != "mu") {
        throw ConfigError("--param must be lambda, k, m or mu");
    }
    auto grid = o.grid;
    if (grid.empty() && o.param == "lambda") {
        grid = default_lambda_grid();
    }
    if (grid.empty()) {
        throw ConfigError("--grid is empty");
    }
    if (o.rerank_study && o.param != "lambda") {
        throw ConfigError("--rerank-study needs --param lambda");
    }

    auto base_algo = algorithm_spec(o);
    auto base_smoothing = smoothing_spec(o);
    auto index = open_index(o);
    auto queries = ingest_queries(o.queries, index.config());
    auto qrels = load_qrels(o.qrels);
    std::optional<ClusterSet> loaded;
    if (!o.clusters.empty()) {
        if (o.param == "k") {
            throw ConfigError("--param k rebuilds clusters; do not pass --clusters");
        }
        loaded = load_clusters(o.clusters, index);
    }

    auto evaluate = [&](AlgorithmSpec const& algo, SmoothingSpec const& smoothing, std::size_t k) {
        std::optional<ClusterSet> built;
        ClusterSet const* clusters = loaded ? &*loaded : nullptr;
        if (!clusters && algo.uses_clusters()) {
            built = build_clusters(index, k, smoothing);
            clusters = &*built;
        }
        Retriever retriever(index, smoothing, clusters);
        auto result = batch_search(algo, queries, retriever);
        // Same query set eval sees: empty lists leave no lines in a run file.
        Run run{std::string(to_string(algo.name)), {}};
        for (auto& list : result.lists) {
            if (!list.entries.empty()) {
                run.lists.push_back(std::move(list));
            }
        }
        return evaluate_run(run, qrels);
    };

    auto dir = output_dir(o);
    auto rows = open_output(dir / ("sweep_" + o.param + ".tsv"));
    std::optional<std::ofstream> study;
    if (o.rerank_study) {
        study = open_output(dir / "rerank_study.tsv");
        *study << "lambda\tap_without_rerank\tap_with_rerank\tdelta\n";
    }
    bool noted = false;
    for (double value : grid) {
        auto algo = base_algo;
        auto smoothing = base_smoothing;
        std::size_t k = o.k;
        if (o.param == "lambda") {
            algo.lambda = value;
        } else if (o.param == "k") {
            k = integral(value, "k");
            if (k < 1) {
                throw ConfigError("k grid values must be >= 1");
            }
        } else if (o.param == "m") {
            algo.m = integral(value, "m");
        } else {
            smoothing.mu = value;
        }
        algo.validate();
        smoothing.validate();
        auto report = evaluate(algo, smoothing, k);
        if (!noted) {
            note_excluded(report, err);
            noted = true;
        }
        rows << fmt::format("{}\t{:.6f}\t{:.6f}\n", value, report.mean_recall, report.mean_average_precision);
        out << fmt::format("{}={} recall={:.4f} avg_prec={:.4f}\n", o.param, value, report.mean_recall,
                           report.mean_average_precision);
        if (study) {
            auto without = algo;
            without.rerank = false;
            auto with = algo;
            with.rerank = true;
            double ap_without = evaluate(without, smoothing, k).mean_average_precision;
            double ap_with = evaluate(with, smoothing, k).mean_average_precision;
            *study << fmt::format("{}\t{:.6f}\t{:.6f}\t{:.6f}\n", value, ap_without, ap_with, ap_without - ap_with);
        }
    }
    return 0;
}

void add_tokenization(CLI::App* cmd, Options& o)
{
    o.tokenization_flags.push_back(
        cmd->add_option("--stem", o.stem, "Stemmer: none or porter")->check(CLI::IsMember({"none", "porter"})));
    o.tokenization_flags.push_back(cmd->add_option("--stopwords", o.stopwords, "Stopword file, one term per line"));
    o.tokenization_flags.push_back(cmd->add_option("--min-token-len", o.min_token_len, "Drop shorter tokens"));
}

void add_input_index(CLI::App* cmd, Options& o)
{
    cmd->add_option("--index", o.index, "Index file written by 'index'");
    cmd->add_option("--corpus", o.corpus, "JSON-lines corpus, indexed on the fly");
    add_tokenization(cmd, o);
}

void add_smoothing(CLI::App* cmd, Options& o)
{
    cmd->add_option("--smoothing", o.smoothing, "dirichlet, jm or ad")
        ->check(CLI::IsMember({"dirichlet", "jm", "ad", "jelinek_mercer", "absolute_discounting"}));
    cmd->add_option("--mu", o.mu, "Dirichlet prior")->capture_default_str();
    cmd->add_option("--jm-lambda", o.jm_lambda, "Jelinek-Mercer weight on the item model")->capture_default_str();
    cmd->add_option("--ad-delta", o.ad_delta, "Absolute discount")->capture_default_str();
}

void add_algorithm(CLI::App* cmd, Options& o)
{
    cmd->add_option("--algo", o.algo,
                    "lm, basis_select, set_select, bag_select, uniform_aspect_x, aspect_x, interpolation")
        ->capture_default_str();
    cmd->add_option("--rep", o.rep, "lm or tfidf")->check(CLI::IsMember({"lm", "tfidf"}))->capture_default_str();
    cmd->add_option("--clusters", o.clusters, "Cluster file written by 'cluster'");
    cmd->add_option("--m", o.m, "Clusters retrieved (default depends on --algo)");
    cmd->add_option("--n", o.n, "Documents returned per query")->capture_default_str();
    cmd->add_option("--lambda", o.lambda, "Interpolation weight on the document model")->capture_default_str();
    cmd->add_option("--rerank", o.rerank, "on, off or default")
        ->check(CLI::IsMember({"on", "off", "default"}))
        ->capture_default_str();
}

int dispatch(CLI::App const& app, Options const& o, std::ostream& out, std::ostream& err)
{
    if (app.got_subcommand("index")) {
        return cmd_index(o, out);
    }
    if (app.got_subcommand("cluster")) {
        return cmd_cluster(o, out);
    }
    if (app.got_subcommand("search")) {
        return cmd_search(o, out, err);
    }
    if (app.got_subcommand("eval")) {
        return cmd_eval(o, out, err);
    }
    return cmd_sweep(o, out, err);
}

}  // namespace

std::vector<double> default_lambda_grid()
{
    return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.925, 0.95, 0.975, 0.98, 0.99};
}

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Cluster-based language-model retrieval", "facetlm"};
    app.require_subcommand(1);
    Options o;

    auto* index = app.add_subcommand("index", "Tokenize a corpus and write <out>/index.fidx");
    index->add_option("--corpus", o.corpus, "JSON-lines corpus")->required();
    index->add_option("--out", o.out, "Output directory")->capture_default_str();
    add_tokenization(index, o);

    auto* cluster = app.add_subcommand("cluster", "Build nearest-neighbour clusters into <out>/clusters.tsv");
    add_input_index(cluster, o);
    add_smoothing(cluster, o);
    cluster->add_option("--k", o.k, "Cluster size")->capture_default_str();
    cluster->add_option("--out", o.out, "Output directory")->capture_default_str();

    auto* search = app.add_subcommand("search", "Rank documents for each query into <out>/<runtag>.run");
    add_input_index(search, o);
    add_smoothing(search, o);
    add_algorithm(search, o);
    search->add_option("--queries", o.queries, "Query file: <qid><TAB><text> per line")->required();
    search->add_option("--runtag", o.runtag, "Run tag and file stem (default: algorithm name)");
    search->add_option("--out", o.out, "Output directory")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "Score a run against qrels into <out>/report.tsv");
    eval->add_option("--run", o.run, "Run file")->required();
    eval->add_option("--qrels", o.qrels, "TREC qrels file")->required();
    eval->add_option("--baseline", o.baseline, "Second run for paired Wilcoxon tests");
    eval->add_option("--out", o.out, "Output directory")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Evaluate over a parameter grid into <out>/sweep_<param>.tsv");
    add_input_index(sweep, o);
    add_smoothing(sweep, o);
    add_algorithm(sweep, o);
    sweep->add_option("--queries", o.queries, "Query file")->required();
    sweep->add_option("--qrels", o.qrels, "TREC qrels file")->required();
    sweep->add_option("--k", o.k, "Cluster size when clusters are built in memory")->capture_default_str();
    sweep->add_option("--param", o.param, "lambda, k, m or mu")->capture_default_str();
    sweep->add_option("--grid", o.grid, "Comma-separated values (lambda has a default grid)")->delimiter(',');
    sweep->add_flag("--rerank-study", o.rerank_study, "Also write <out>/rerank_study.tsv");
    sweep->add_option("--out", o.out, "Output directory")->capture_default_str();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (CLI::ParseError const& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        return dispatch(app, o, out, err);
    } catch (IoError const& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (FormatError const& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (Error const& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace facetlm::cli
