#include "gafs/select.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace gafs {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Uniform double in [0, 1) from the top 53 bits; keeps the stream independent
// of the standard library's distribution implementation.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void validate_config(const DataMatrix& x, const GafsConfig& cfg) {
    if (cfg.hidden_size < 1) throw ConfigError("hidden size must be >= 1");
    if (cfg.lambda < 0.0) throw ConfigError("lambda must be nonnegative");
    if (cfg.gamma < 0.0) throw ConfigError("gamma must be nonnegative");
    const auto n = x.samples();
    if (cfg.neighbors < 1 || cfg.neighbors > n - 1) {
        throw ConfigError("neighbor count must satisfy 1 <= k <= n-1, got k=" +
                          std::to_string(cfg.neighbors) + " with n=" + std::to_string(n));
    }
    const double lo = x.values.minCoeff();
    const double hi = x.values.maxCoeff();
    if (lo < 0.0 || hi > 1.0) {
        throw ConfigError("data must be scaled into [0, 1] before fitting (run scale_features)");
    }
}

// Check the three objective terms one by one so the error can name the
// offending term.
void check_finite_at_init(const ModelParams& params, const ObjectiveContext& ctx) {
    const Matrix y = encode(params, ctx.x);
    const Matrix xbar = decode(params, y);
    const double recon = 0.5 / static_cast<double>(ctx.x.cols()) * (ctx.x - xbar).squaredNorm();
    if (!std::isfinite(recon)) throw NumericError("reconstruction loss is not finite at initialization");
    if (ctx.lambda != 0.0 && !std::isfinite(ctx.lambda * l21_columns(params.w1))) {
        throw NumericError("sparsity penalty is not finite at initialization");
    }
    if (ctx.gamma != 0.0 && !std::isfinite(ctx.gamma * graph_penalty(y, ctx.laplacian))) {
        throw NumericError("graph penalty is not finite at initialization");
    }
}

}  // namespace

ModelParams init_params(Index d, Index m, std::uint64_t seed) {
    if (d < 1 || m < 1) throw ConfigError("init_params requires d >= 1 and m >= 1");
    const double r = std::sqrt(6.0 / static_cast<double>(d + m));
    std::mt19937_64 rng(seed);

    ModelParams params = ModelParams::zeros(d, m);
    // Fill order is fixed (W1 then W2, row-major) so a seed pins the model.
    for (Index row = 0; row < m; ++row)
        for (Index col = 0; col < d; ++col) params.w1(row, col) = (2.0 * next_uniform(rng) - 1.0) * r;
    for (Index row = 0; row < d; ++row)
        for (Index col = 0; col < m; ++col) params.w2(row, col) = (2.0 * next_uniform(rng) - 1.0) * r;
    return params;
}

FitResult fit(const DataMatrix& x, const GafsConfig& cfg) {
    validate_config(x, cfg);
    const auto d = x.features();
    const auto m = static_cast<Index>(cfg.hidden_size);

    FitResult result;
    ObjectiveContext ctx;
    ctx.x = x.values;
    ctx.lambda = cfg.lambda;
    ctx.gamma = cfg.gamma;

    if (cfg.gamma != 0.0) {
        const auto t0 = std::chrono::steady_clock::now();
        result.graph = build_graph(x, cfg.neighbors);
        ctx.laplacian = result.graph.laplacian;
        result.graph_seconds = seconds_since(t0);
    }

    const ModelParams start = init_params(d, m, cfg.seed);
    check_finite_at_init(start, ctx);

    const auto t1 = std::chrono::steady_clock::now();
    GradientBundle workspace;
    auto fn = [&](const Vector& v, Vector& grad_out) {
        const ModelParams p = unflatten_params(v, d, m);
        const double value = value_and_gradient(p, ctx, workspace);
        grad_out = flatten_blocks(workspace.w1, workspace.w2, workspace.b1, workspace.b2);
        return value;
    };
    MinimizeResult opt = minimize(fn, flatten_params(start), cfg.optimizer);
    result.optimize_seconds = seconds_since(t1);

    const auto t2 = std::chrono::steady_clock::now();
    result.params = unflatten_params(opt.point, d, m);
    result.ranking = rank_features(feature_scores(result.params.w1));
    result.score_seconds = seconds_since(t2);
    result.trace = std::move(opt.trace);
    return result;
}

Vector feature_scores(const Matrix& w1) {
    Vector scores(w1.cols());
    for (Index q = 0; q < w1.cols(); ++q) scores(q) = w1.col(q).norm();
    return scores;
}

FeatureRanking rank_features(const Vector& scores) {
    FeatureRanking ranking;
    ranking.scores = scores;
    ranking.order.resize(static_cast<std::size_t>(scores.size()));
    std::iota(ranking.order.begin(), ranking.order.end(), 0);
    std::sort(ranking.order.begin(), ranking.order.end(), [&](int a, int b) {
        return scores(a) > scores(b) || (scores(a) == scores(b) && a < b);
    });
    return ranking;
}

std::vector<int> top_features(const FeatureRanking& ranking, int count) {
    const auto d = static_cast<int>(ranking.order.size());
    if (count < 1 || count > d) {
        throw ConfigError("requested " + std::to_string(count) + " features but only " +
                          std::to_string(d) + " exist");
    }
    return {ranking.order.begin(), ranking.order.begin() + count};
}

int resolve_top_count(Index d, std::optional<int> count, std::optional<double> percent) {
    if (count.has_value() == percent.has_value()) {
        throw ConfigError("exactly one of feature count or percentage must be given");
    }
    if (count) {
        if (*count < 1 || *count > d) {
            throw ConfigError("feature count must lie in [1, " + std::to_string(d) + "], got " +
                              std::to_string(*count));
        }
        return *count;
    }
    if (!(*percent > 0.0 && *percent <= 100.0)) {
        throw ConfigError("percentage must lie in (0, 100], got " + std::to_string(*percent));
    }
    const int resolved = static_cast<int>(std::ceil(*percent * static_cast<double>(d) / 100.0));
    return std::clamp(resolved, 1, static_cast<int>(d));
}

void write_ranking(const FeatureRanking& ranking, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open ranking file for writing: " + path);
    char buf[64];
    for (std::size_t rank = 0; rank < ranking.order.size(); ++rank) {
        const int feature = ranking.order[rank];
        std::snprintf(buf, sizeof(buf), "%zu %d %.17g\n", rank + 1, feature + 1,
                      ranking.scores(feature));
        out << buf;
    }
    if (!out) throw IoError("failed writing ranking file: " + path);
}

FeatureRanking read_ranking(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ranking file: " + path);

    std::vector<std::pair<int, double>> entries;  // (feature index 0-based, score)
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::istringstream stream(line);
        long rank, feature;
        double score;
        if (!(stream >> rank >> feature >> score)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw ParseError(line_number, 0, "bad ranking line " + std::to_string(line_number));
        }
        if (rank != static_cast<long>(entries.size()) + 1) {
            throw ParseError(line_number, 1, "ranking ranks must be consecutive from 1");
        }
        if (feature < 1) throw ParseError(line_number, 2, "feature indices are 1-based");
        entries.emplace_back(static_cast<int>(feature - 1), score);
    }
    if (entries.empty()) throw ParseError("ranking file contains no entries: " + path);

    const auto d = static_cast<Index>(entries.size());
    FeatureRanking ranking;
    ranking.scores = Vector::Zero(d);
    ranking.order.reserve(entries.size());
    std::vector<char> seen(entries.size(), 0);
    for (const auto& [feature, score] : entries) {
        if (feature >= d || seen[static_cast<std::size_t>(feature)]) {
            throw ParseError("ranking file is not a permutation of 1.." + std::to_string(d));
        }
        seen[static_cast<std::size_t>(feature)] = 1;
        ranking.order.push_back(feature);
        ranking.scores(feature) = score;
    }
    return ranking;
}

void apply_config_file(SelectOptions& options, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);

    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        std::replace(line.begin(), line.end(), '=', ' ');
        std::replace(line.begin(), line.end(), ':', ' ');
        std::istringstream stream(line);
        std::string key;
        if (!(stream >> key)) continue;

        std::string value;
        if (!(stream >> value)) {
            throw ParseError(line_number, 0, "missing value for config key '" + key + "'");
        }
        try {
            if (key == "hidden_size") options.config.hidden_size = std::stoi(value);
            else if (key == "neighbors") options.config.neighbors = std::stoi(value);
            else if (key == "lambda") options.config.lambda = std::stod(value);
            else if (key == "gamma") options.config.gamma = std::stod(value);
            else if (key == "seed") options.config.seed = std::stoull(value);
            else if (key == "n_features") options.n_features = std::stoi(value);
            else if (key == "percent") options.percent = std::stod(value);
            else if (key == "max_iterations") options.config.optimizer.max_iterations = std::stoi(value);
            else if (key == "memory") options.config.optimizer.memory = std::stoi(value);
            else if (key == "relative_tolerance")
                options.config.optimizer.relative_tolerance = std::stod(value);
            else if (key == "gradient_tolerance")
                options.config.optimizer.gradient_tolerance = std::stod(value);
            else
                throw ConfigError("unknown config key '" + key + "' at line " +
                                  std::to_string(line_number));
        } catch (const std::invalid_argument&) {
            throw ParseError(line_number, 0,
                             "bad value '" + value + "' for config key '" + key + "'");
        } catch (const std::out_of_range&) {
            throw ParseError(line_number, 0,
                             "value '" + value + "' out of range for config key '" + key + "'");
        }
    }
}

}  // namespace gafs
