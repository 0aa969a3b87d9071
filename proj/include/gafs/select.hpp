#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gafs/data.hpp"
#include "gafs/graph.hpp"
#include "gafs/model.hpp"
#include "gafs/optim.hpp"
#include "gafs/types.hpp"

namespace gafs {

struct GafsConfig {
    int hidden_size = 10;  // m
    int neighbors = 5;     // k
    double lambda = 1e-2;
    double gamma = 1e-3;
    LbfgsConfig optimizer;
    std::uint64_t seed = 0;
};

/// Per-feature scores (encoder column norms) and the feature order sorted by
/// descending score; ties keep ascending feature index. Indices are 0-based
/// in memory and 1-based in the text format.
struct FeatureRanking {
    Vector scores;
    std::vector<int> order;
};

struct FitResult {
    ModelParams params;
    FeatureRanking ranking;
    OptimTrace trace;
    NeighborGraph graph;  // empty when gamma == 0

    double graph_seconds = 0.0;
    double optimize_seconds = 0.0;
    double score_seconds = 0.0;
};

/// Glorot-style uniform initialization: weights in [-r, r] with
/// r = sqrt(6 / (d + m)), biases zero; deterministic in the seed.
ModelParams init_params(Index d, Index m, std::uint64_t seed);

/// Full pipeline: builds the kNN graph (skipped when gamma == 0), minimizes
/// the objective from init_params, scores encoder columns and ranks features.
/// Requires x entries in [0, 1] (run scale_features first).
FitResult fit(const DataMatrix& x, const GafsConfig& cfg);

/// Euclidean norm of each encoder weight column.
Vector feature_scores(const Matrix& w1);

FeatureRanking rank_features(const Vector& scores);

/// First `count` entries of the ranking order.
std::vector<int> top_features(const FeatureRanking& ranking, int count);

/// Resolves an explicit count or a percentage (ceil(p * d / 100)) to a
/// feature count in [1, d]. Exactly one of the two must be provided.
int resolve_top_count(Index d, std::optional<int> count, std::optional<double> percent);

/// Ranking text format: one "rank index score" line per feature, 1-based.
void write_ranking(const FeatureRanking& ranking, const std::string& path);
FeatureRanking read_ranking(const std::string& path);

/// CLI-facing option bundle; n_features/percent select how many features the
/// callers keep downstream.
struct SelectOptions {
    GafsConfig config;
    std::optional<int> n_features;
    std::optional<double> percent;
};

/// Applies "key value" / "key = value" pairs from a config file onto the
/// options. Unknown keys are rejected.
void apply_config_file(SelectOptions& options, const std::string& path);

}  // namespace gafs
