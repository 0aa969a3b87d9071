// Command-line front end: select / evaluate / grid.
//
// Exit codes: 0 success, 1 runtime or numeric failure, 2 usage or validation
// error. Failures print a single machine-parseable line to stderr:
//   gafs-error: <category>: <message>

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "gafs/data.hpp"
#include "gafs/eval.hpp"
#include "gafs/graph.hpp"
#include "gafs/model.hpp"
#include "gafs/optim.hpp"
#include "gafs/select.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gafs;

namespace {

// ---------------------------------------------------------------------------
// Manifest helpers

std::string fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for digest: " + path);
    std::uint64_t hash = 1469598103934665603ULL;
    char buffer[4096];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 1099511628211ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

json file_entry(const std::string& path) {
    return {{"path", path}, {"fnv1a64", fnv1a64_file(path)}};
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open manifest for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing manifest: " + path);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

// ---------------------------------------------------------------------------
// Shared option plumbing

struct DataArgs {
    std::string data_path;
    std::string layout = "columns";
    double delta = 1e-3;
};

void add_data_args(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.data_path, "input data file (csv or whitespace)")->required();
    cmd->add_option("--layout", args.layout, "sample layout in the file")
        ->check(CLI::IsMember({"rows", "columns"}))
        ->capture_default_str();
    cmd->add_option("--delta", args.delta, "feature scaling margin in (0, 0.5)")
        ->capture_default_str();
}

DataMatrix load_scaled(const DataArgs& args) {
    const Layout layout =
        args.layout == "rows" ? Layout::kSamplesAsRows : Layout::kSamplesAsColumns;
    return scale_features(load_matrix(args.data_path, layout), args.delta);
}

struct FitArgs {
    SelectOptions options;
    std::string config_path;
};

void add_fit_args(CLI::App* cmd, FitArgs& args) {
    auto& cfg = args.options.config;
    cmd->add_option("--config", args.config_path, "key-value config file (flags win)");
    cmd->add_option("--m,--hidden-size", cfg.hidden_size, "hidden layer size")
        ->capture_default_str();
    cmd->add_option("--k,--neighbors", cfg.neighbors, "kNN graph neighbor count")
        ->capture_default_str();
    cmd->add_option("--lambda", cfg.lambda, "column sparsity weight")->capture_default_str();
    cmd->add_option("--gamma", cfg.gamma, "graph locality weight")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--max-iters", cfg.optimizer.max_iterations, "optimizer iteration budget")
        ->capture_default_str();
    cmd->add_option("--memory", cfg.optimizer.memory, "L-BFGS stored updates")
        ->capture_default_str();
    cmd->add_option("--rel-tol", cfg.optimizer.relative_tolerance,
                    "relative objective-change stop")
        ->capture_default_str();
    cmd->add_option("--grad-tol", cfg.optimizer.gradient_tolerance, "gradient norm stop")
        ->capture_default_str();
}

// Config file fills in everything the user did not pass explicitly.
void merge_config_file(const CLI::App* cmd, FitArgs& args) {
    if (args.config_path.empty()) return;
    SelectOptions from_file = args.options;
    apply_config_file(from_file, args.config_path);
    auto keep_if_passed = [&](const char* name, auto member_ptr) {
        if (cmd->count(name) > 0) from_file.config.*member_ptr = args.options.config.*member_ptr;
    };
    keep_if_passed("--m", &GafsConfig::hidden_size);
    keep_if_passed("--k", &GafsConfig::neighbors);
    keep_if_passed("--lambda", &GafsConfig::lambda);
    keep_if_passed("--gamma", &GafsConfig::gamma);
    keep_if_passed("--seed", &GafsConfig::seed);
    auto keep_opt_if_passed = [&](const char* name, auto member_ptr) {
        if (cmd->count(name) > 0)
            from_file.config.optimizer.*member_ptr = args.options.config.optimizer.*member_ptr;
    };
    keep_opt_if_passed("--max-iters", &LbfgsConfig::max_iterations);
    keep_opt_if_passed("--memory", &LbfgsConfig::memory);
    keep_opt_if_passed("--rel-tol", &LbfgsConfig::relative_tolerance);
    keep_opt_if_passed("--grad-tol", &LbfgsConfig::gradient_tolerance);
    args.options.config = from_file.config;
    if (!args.options.n_features) args.options.n_features = from_file.n_features;
    if (!args.options.percent) args.options.percent = from_file.percent;
}

json config_json(const GafsConfig& cfg) {
    return {{"hidden_size", cfg.hidden_size},
            {"neighbors", cfg.neighbors},
            {"lambda", cfg.lambda},
            {"gamma", cfg.gamma},
            {"seed", cfg.seed},
            {"max_iterations", cfg.optimizer.max_iterations},
            {"memory", cfg.optimizer.memory},
            {"relative_tolerance", cfg.optimizer.relative_tolerance},
            {"gradient_tolerance", cfg.optimizer.gradient_tolerance}};
}

// Deterministic split: seeded shuffle, first ceil(fraction * n) go to train.
std::pair<std::vector<int>, std::vector<int>> split_samples(Index n, double fraction,
                                                            std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("train fraction must lie in (0, 1), got " + std::to_string(fraction));
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(seed));
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng() % i]);
    }
    auto train_count =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    train_count = std::min(train_count, static_cast<std::size_t>(n) - 1);
    std::vector<int> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
    std::vector<int> test(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
    return {train, test};
}

int class_count(const LabelVector& labels) {
    int k = 0;
    for (int v : labels) k = std::max(k, v);
    std::vector<char> present(static_cast<std::size_t>(k), 0);
    for (int v : labels) present[static_cast<std::size_t>(v - 1)] = 1;
    for (int c = 0; c < k; ++c) {
        if (!present[static_cast<std::size_t>(c)]) {
            throw ConfigError("ground-truth class " + std::to_string(c + 1) +
                              " has no samples (classes must cover 1..K)");
        }
    }
    if (k < 2) throw ConfigError("evaluation requires at least two classes");
    return k;
}

void check_label_count(const DataMatrix& x, const LabelVector& labels) {
    if (static_cast<Index>(labels.size()) != x.samples()) {
        throw ConfigError("data has " + std::to_string(x.samples()) +
                          " samples but label file has " + std::to_string(labels.size()));
    }
}

// ---------------------------------------------------------------------------
// select

int cmd_select(const DataArgs& data_args, FitArgs& fit_args, const CLI::App* cmd,
               const std::string& out_dir, bool dump_graph) {
    merge_config_file(cmd, fit_args);
    fs::create_directories(out_dir);

    const auto t_load = std::chrono::steady_clock::now();
    const DataMatrix scaled = load_scaled(data_args);
    const double load_ms = elapsed_ms(t_load);

    const FitResult result = fit(scaled, fit_args.options.config);

    const std::string ranking_path = out_dir + "/ranking.txt";
    const std::string params_path = out_dir + "/params.txt";
    const std::string trace_path = out_dir + "/trace.txt";
    write_ranking(result.ranking, ranking_path);
    save_params(result.params, params_path);
    write_trace(result.trace, trace_path);

    json outputs = {{"ranking", file_entry(ranking_path)},
                    {"params", file_entry(params_path)},
                    {"trace", file_entry(trace_path)}};

    if (fit_args.options.n_features || fit_args.options.percent) {
        const int count = resolve_top_count(scaled.features(), fit_args.options.n_features,
                                            fit_args.options.percent);
        const auto selected = top_features(result.ranking, count);
        const std::string selected_path = out_dir + "/selected.txt";
        std::ofstream out(selected_path);
        for (int f : selected) out << (f + 1) << "\n";
        if (!out) throw IoError("failed writing " + selected_path);
        out.close();
        outputs["selected"] = file_entry(selected_path);
    }

    if (dump_graph) {
        NeighborGraph graph = result.graph;
        if (graph.empty()) graph = build_graph(scaled, fit_args.options.config.neighbors);
        const std::string graph_path = out_dir + "/graph.txt";
        write_graph_dump(graph, graph_path);
        outputs["graph"] = file_entry(graph_path);
    }

    json manifest = {
        {"command", "select"},
        {"config", config_json(fit_args.options.config)},
        {"inputs", {{"data", file_entry(data_args.data_path)}}},
        {"outputs", outputs},
        {"timings_ms",
         {{"load", load_ms},
          {"graph", result.graph_seconds * 1e3},
          {"optimize", result.optimize_seconds * 1e3},
          {"score", result.score_seconds * 1e3}}},
        {"stop_reason", to_string(result.trace.reason)},
        {"iterations", result.trace.iterations()},
        {"complete", true}};
    if (!fit_args.config_path.empty())
        manifest["inputs"]["config"] = file_entry(fit_args.config_path);
    write_json(manifest, out_dir + "/manifest.json");
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

int cmd_evaluate(const DataArgs& data_args, const std::string& labels_path,
                 const std::string& ranking_path, const std::vector<double>& percents,
                 const std::vector<int>& tops, int repetitions, std::uint64_t seed,
                 double train_fraction, const std::string& out_dir) {
    if (percents.empty() && tops.empty()) {
        throw ConfigError("at least one --percent or --top value is required");
    }
    fs::create_directories(out_dir);

    const auto t0 = std::chrono::steady_clock::now();
    const DataMatrix scaled = load_scaled(data_args);
    const LabelVector labels = load_labels(labels_path);
    check_label_count(scaled, labels);
    const int k = class_count(labels);
    const FeatureRanking ranking = read_ranking(ranking_path);
    if (static_cast<Index>(ranking.order.size()) != scaled.features()) {
        throw ConfigError("ranking covers " + std::to_string(ranking.order.size()) +
                          " features but data has " + std::to_string(scaled.features()));
    }
    const auto [train, test] = split_samples(scaled.samples(), train_fraction, seed);

    json outputs = json::object();
    auto evaluate_one = [&](int count, const std::string& tag) {
        const auto features = top_features(ranking, count);
        const SelectionMetrics metrics =
            evaluate_selection(scaled, labels, features, k, train, test, repetitions, seed);
        const std::string path = out_dir + "/metrics_" + tag + ".txt";
        write_metrics(metrics, path);
        outputs["metrics_" + tag] = file_entry(path);
    };
    for (double p : percents) {
        const int count = resolve_top_count(scaled.features(), std::nullopt, p);
        std::ostringstream tag;
        tag << "p" << p;
        evaluate_one(count, tag.str());
    }
    for (int t : tops) {
        evaluate_one(resolve_top_count(scaled.features(), t, std::nullopt),
                     "top" + std::to_string(t));
    }

    json manifest = {{"command", "evaluate"},
                     {"inputs",
                      {{"data", file_entry(data_args.data_path)},
                       {"labels", file_entry(labels_path)},
                       {"ranking", file_entry(ranking_path)}}},
                     {"outputs", outputs},
                     {"settings",
                      {{"repetitions", repetitions},
                       {"seed", seed},
                       {"train_fraction", train_fraction},
                       {"classes", k}}},
                     {"timings_ms", {{"evaluate", elapsed_ms(t0)}}},
                     {"complete", true}};
    write_json(manifest, out_dir + "/manifest.json");
    return 0;
}

// ---------------------------------------------------------------------------
// grid

struct GridCell {
    std::size_t index;
    double percent;
    int hidden;
    double lambda;
    double gamma;
};

std::string cell_dir_name(const GridCell& cell) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "cell_%04zu", cell.index);
    return buf;
}

int cmd_grid(const DataArgs& data_args, FitArgs& fit_args, const CLI::App* cmd,
             const std::string& labels_path, const std::string& out_dir, long budget,
             const std::vector<double>& percents, const std::vector<int>& hidden_sizes,
             const std::vector<double>& lambdas, const std::vector<double>& gammas,
             int repetitions, double train_fraction, int workers) {
    merge_config_file(cmd, fit_args);
    if (percents.empty() || hidden_sizes.empty() || lambdas.empty() || gammas.empty()) {
        throw ConfigError("grid is empty: every axis needs at least one value");
    }
    if (budget < 1) throw ConfigError("--budget must be >= 1");
    if (workers < 1) throw ConfigError("worker count must be >= 1");
    fs::create_directories(out_dir);

    const DataMatrix scaled = load_scaled(data_args);
    const LabelVector labels = load_labels(labels_path);
    check_label_count(scaled, labels);
    const int k_classes = class_count(labels);

    json grid_spec = {{"percents", percents},
                      {"hidden_sizes", hidden_sizes},
                      {"lambdas", lambdas},
                      {"gammas", gammas},
                      {"neighbors", fit_args.options.config.neighbors},
                      {"repetitions", repetitions},
                      {"seed", fit_args.options.config.seed},
                      {"train_fraction", train_fraction}};

    // Resuming against a different grid would silently mis-index cells.
    const std::string manifest_path = out_dir + "/manifest.json";
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        json previous;
        in >> previous;
        if (previous.contains("grid") && previous["grid"] != grid_spec) {
            throw ConfigError("existing grid manifest at " + manifest_path +
                              " was produced by a different grid specification");
        }
    }

    std::vector<GridCell> cells;
    std::size_t index = 0;
    for (double p : percents)
        for (int m : hidden_sizes)
            for (double lambda : lambdas)
                for (double gamma : gammas) cells.push_back({index++, p, m, lambda, gamma});

    // Pending = cells without a completed per-cell manifest.
    std::vector<std::size_t> pending;
    for (const auto& cell : cells) {
        const fs::path cell_manifest = fs::path(out_dir) / cell_dir_name(cell) / "manifest.json";
        bool done = false;
        if (fs::exists(cell_manifest)) {
            std::ifstream in(cell_manifest);
            json j;
            in >> j;
            done = j.value("complete", false);
        }
        if (!done) pending.push_back(cell.index);
    }
    if (pending.size() > static_cast<std::size_t>(budget)) {
        pending.resize(static_cast<std::size_t>(budget));
    }

    const auto run_cell = [&](const GridCell& cell) {
        const std::string dir = out_dir + "/" + cell_dir_name(cell);
        fs::create_directories(dir);

        GafsConfig cfg = fit_args.options.config;
        cfg.hidden_size = cell.hidden;
        cfg.lambda = cell.lambda;
        cfg.gamma = cell.gamma;
        cfg.seed = fit_args.options.config.seed ^ static_cast<std::uint64_t>(cell.index);

        const FitResult result = fit(scaled, cfg);
        write_ranking(result.ranking, dir + "/ranking.txt");

        const int count = resolve_top_count(scaled.features(), std::nullopt, cell.percent);
        const auto features = top_features(result.ranking, count);
        const auto [train, test] = split_samples(scaled.samples(), train_fraction, cfg.seed);
        const SelectionMetrics metrics = evaluate_selection(scaled, labels, features, k_classes,
                                                            train, test, repetitions, cfg.seed);
        write_metrics(metrics, dir + "/metrics.txt");

        json manifest = {{"command", "grid-cell"},
                         {"cell",
                          {{"index", cell.index},
                           {"percent", cell.percent},
                           {"hidden_size", cell.hidden},
                           {"lambda", cell.lambda},
                           {"gamma", cell.gamma},
                           {"seed", cfg.seed}}},
                         {"config", config_json(cfg)},
                         {"outputs",
                          {{"ranking", file_entry(dir + "/ranking.txt")},
                           {"metrics", file_entry(dir + "/metrics.txt")}}},
                         {"complete", true}};
        write_json(manifest, dir + "/manifest.json");
    };

    if (workers == 1) {
        for (std::size_t idx : pending) run_cell(cells[idx]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::mutex error_lock;
        std::exception_ptr first_error;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t slot = next.fetch_add(1);
                    if (slot >= pending.size()) return;
                    try {
                        run_cell(cells[pending[slot]]);
                    } catch (...) {
                        std::lock_guard<std::mutex> guard(error_lock);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    // Aggregate every finished cell into results.txt plus a best-cell summary.
    struct Row {
        GridCell cell;
        SelectionMetrics metrics;
    };
    std::vector<Row> rows;
    for (const auto& cell : cells) {
        const fs::path dir = fs::path(out_dir) / cell_dir_name(cell);
        if (!fs::exists(dir / "manifest.json")) continue;
        std::ifstream in(dir / "manifest.json");
        json j;
        in >> j;
        if (!j.value("complete", false)) continue;

        std::ifstream metrics_in(dir / "metrics.txt");
        SelectionMetrics metrics;
        std::string key;
        while (metrics_in >> key) {
            if (key == "acc_mean:") metrics_in >> metrics.acc_mean;
            else if (key == "nmi_mean:") metrics_in >> metrics.nmi_mean;
            else if (key == "classification_accuracy:")
                metrics_in >> metrics.classification_accuracy;
            else if (key == "n_features:") metrics_in >> metrics.n_features;
            else if (key == "seed_count:") metrics_in >> metrics.seed_count;
        }
        rows.push_back({cell, metrics});
    }

    {
        std::ofstream out(out_dir + "/results.txt");
        out << "cell percent hidden lambda gamma acc_mean nmi_mean classification_accuracy\n";
        char buf[160];
        for (const auto& row : rows) {
            std::snprintf(buf, sizeof(buf), "%zu %.17g %d %.17g %.17g %.17g %.17g %.17g\n",
                          row.cell.index, row.cell.percent, row.cell.hidden, row.cell.lambda,
                          row.cell.gamma, row.metrics.acc_mean, row.metrics.nmi_mean,
                          row.metrics.classification_accuracy);
            out << buf;
        }
        if (!out) throw IoError("failed writing grid results");
    }
    if (!rows.empty()) {
        std::ofstream out(out_dir + "/summary.txt");
        auto best_by = [&](auto metric_of, const char* name) {
            const Row* best = &rows.front();
            for (const auto& row : rows) {
                if (metric_of(row.metrics) > metric_of(best->metrics)) best = &row;
            }
            char buf[200];
            std::snprintf(buf, sizeof(buf),
                          "%s: cell=%zu percent=%g hidden=%d lambda=%g gamma=%g value=%.17g\n",
                          name, best->cell.index, best->cell.percent, best->cell.hidden,
                          best->cell.lambda, best->cell.gamma, metric_of(best->metrics));
            out << buf;
        };
        best_by([](const SelectionMetrics& m) { return m.acc_mean; }, "best_acc_mean");
        best_by([](const SelectionMetrics& m) { return m.nmi_mean; }, "best_nmi_mean");
        best_by([](const SelectionMetrics& m) { return m.classification_accuracy; },
                "best_classification_accuracy");
        if (!out) throw IoError("failed writing grid summary");
    }

    json manifest = {{"command", "grid"},
                     {"grid", grid_spec},
                     {"inputs",
                      {{"data", file_entry(data_args.data_path)},
                       {"labels", file_entry(labels_path)}}},
                     {"cells_total", cells.size()},
                     {"cells_finished", rows.size()},
                     {"cells_run_now", pending.size()},
                     {"complete", rows.size() == cells.size()}};
    write_json(manifest, manifest_path);

    std::cout << "grid: " << rows.size() << "/" << cells.size() << " cells finished\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-regularized autoencoder feature selection"};
    app.require_subcommand(1);

    // --- select ---
    DataArgs select_data;
    FitArgs select_fit;
    std::string select_out;
    bool select_dump_graph = false;
    int select_top = 0;
    double select_percent = 0.0;
    CLI::App* select_cmd = app.add_subcommand("select", "train the model and rank features");
    add_data_args(select_cmd, select_data);
    add_fit_args(select_cmd, select_fit);
    select_cmd->add_option("--out", select_out, "output directory")->required();
    CLI::Option* top_opt = select_cmd->add_option("--top", select_top, "feature count to keep");
    CLI::Option* pct_opt =
        select_cmd->add_option("--percent", select_percent, "feature percentage to keep");
    top_opt->excludes(pct_opt);
    select_cmd->add_flag("--dump-graph", select_dump_graph, "write the kNN graph edges");

    // --- evaluate ---
    DataArgs eval_data;
    std::string eval_labels, eval_ranking, eval_out;
    std::vector<double> eval_percents;
    std::vector<int> eval_tops;
    int eval_reps = 20;
    std::uint64_t eval_seed = 0;
    double eval_train_fraction = 0.7;
    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "cluster and classify on selected features");
    add_data_args(eval_cmd, eval_data);
    eval_cmd->add_option("--labels", eval_labels, "one-column class id file")->required();
    eval_cmd->add_option("--ranking", eval_ranking, "ranking file from select")->required();
    eval_cmd->add_option("--percent", eval_percents, "feature percentages to evaluate")
        ->delimiter(',');
    eval_cmd->add_option("--top", eval_tops, "feature counts to evaluate")->delimiter(',');
    eval_cmd->add_option("--reps", eval_reps, "k-means repetitions")->capture_default_str();
    eval_cmd->add_option("--seed", eval_seed, "evaluation seed")->capture_default_str();
    eval_cmd->add_option("--train-fraction", eval_train_fraction, "softmax train split")
        ->capture_default_str();
    eval_cmd->add_option("--out", eval_out, "output directory")->required();

    // --- grid ---
    DataArgs grid_data;
    FitArgs grid_fit;
    std::string grid_labels, grid_out;
    long grid_budget = 0;
    std::vector<double> grid_percents{2, 4, 6, 8, 10, 20, 30, 40, 50, 60, 70, 80};
    std::vector<int> grid_ms{10, 20, 30, 40};
    std::vector<double> grid_lambdas{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    std::vector<double> grid_gammas{0.0, 1e-4, 5e-4, 1e-3, 5e-3};
    int grid_reps = 20;
    double grid_train_fraction = 0.7;
    int grid_workers = 0;
    CLI::App* grid_cmd = app.add_subcommand("grid", "run a select+evaluate parameter grid");
    add_data_args(grid_cmd, grid_data);
    add_fit_args(grid_cmd, grid_fit);
    grid_cmd->add_option("--labels", grid_labels, "one-column class id file")->required();
    grid_cmd->add_option("--out", grid_out, "output directory")->required();
    grid_cmd->add_option("--budget", grid_budget, "max cells to execute this run")->required();
    grid_cmd->add_option("--percents", grid_percents, "feature percentages")->delimiter(',');
    grid_cmd->add_option("--ms", grid_ms, "hidden sizes")->delimiter(',');
    grid_cmd->add_option("--lambdas", grid_lambdas, "sparsity weights")->delimiter(',');
    grid_cmd->add_option("--gammas", grid_gammas, "locality weights")->delimiter(',');
    grid_cmd->add_option("--reps", grid_reps, "k-means repetitions")->capture_default_str();
    grid_cmd->add_option("--train-fraction", grid_train_fraction, "softmax train split")
        ->capture_default_str();
    grid_cmd->add_option("--workers", grid_workers,
                         "parallel cell workers (default: GAFS_WORKERS or 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "gafs-error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        if (select_cmd->parsed()) {
            if (top_opt->count() > 0) select_fit.options.n_features = select_top;
            if (pct_opt->count() > 0) select_fit.options.percent = select_percent;
            return cmd_select(select_data, select_fit, select_cmd, select_out, select_dump_graph);
        }
        if (eval_cmd->parsed()) {
            return cmd_evaluate(eval_data, eval_labels, eval_ranking, eval_percents, eval_tops,
                                eval_reps, eval_seed, eval_train_fraction, eval_out);
        }
        if (grid_cmd->parsed()) {
            int workers = grid_workers;
            if (workers == 0) {
                if (const char* env = std::getenv("GAFS_WORKERS")) workers = std::atoi(env);
                if (workers <= 0) workers = 1;
            }
            return cmd_grid(grid_data, grid_fit, grid_cmd, grid_labels, grid_out, grid_budget,
                            grid_percents, grid_ms, grid_lambdas, grid_gammas, grid_reps,
                            grid_train_fraction, workers);
        }
    } catch (const ConfigError& e) {
        std::cerr << "gafs-error: validation: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "gafs-error: " << e.category() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "gafs-error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
