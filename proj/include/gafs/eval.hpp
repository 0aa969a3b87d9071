#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gafs/data.hpp"
#include "gafs/optim.hpp"
#include "gafs/types.hpp"

namespace gafs {

/// Class/cluster ids, 1-based.
using LabelVector = std::vector<int>;

struct ClusterRun {
    LabelVector labels;  // cluster ids in 1..K
    double inertia = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;
    std::vector<double> inertia_history;  // one entry per assignment pass
};

/// Lloyd's algorithm with Forgy initialization (K distinct random samples).
/// Empty clusters are reseeded to the point farthest from its center. Stops
/// on an assignment fixpoint or after max_iter passes. Columns are samples.
ClusterRun kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter = 300);

/// One-to-one cluster-to-class mapping maximizing the matched-sample count,
/// solved as an assignment problem on the K x K contingency table (K is the
/// larger label range; missing rows/columns pad with zeros). Entry c of the
/// result is the class id assigned to cluster id c+1.
std::vector<int> hungarian_map(const LabelVector& pred, const LabelVector& truth);

/// Matched fraction under the optimal cluster-to-class mapping.
double acc(const LabelVector& pred, const LabelVector& truth);

/// Mutual information normalized by the larger marginal entropy (natural
/// log). Returns 1 when both labelings are single-cluster.
double nmi(const LabelVector& a, const LabelVector& b);

/// Multinomial logistic regression: weights K x d plus unregularized bias.
struct SoftmaxModel {
    Matrix weights;
    Vector bias;
};

/// Trains by minimizing mean cross-entropy + 0.5 * reg * ||W||_F^2 with
/// L-BFGS from zero weights. Requires K >= 2 and every class 1..K present.
SoftmaxModel softmax_train(const Matrix& x, const LabelVector& y, int k, double reg = 1e-4);

/// Argmax class per sample; ties resolve to the smaller class id.
LabelVector softmax_predict(const SoftmaxModel& model, const Matrix& x);

struct SelectionMetrics {
    double acc_mean = 0.0;
    double nmi_mean = 0.0;
    double classification_accuracy = 0.0;
    int n_features = 0;
    int seed_count = 0;
};

/// Restricts the data to the given features (0-based), averages ACC/NMI over
/// `repetitions` seeded k-means runs against the ground truth, and trains and
/// tests a softmax classifier on the caller-provided sample split.
SelectionMetrics evaluate_selection(const DataMatrix& x, const LabelVector& labels,
                                    const std::vector<int>& feature_indices, int k,
                                    const std::vector<int>& train_samples,
                                    const std::vector<int>& test_samples, int repetitions = 20,
                                    std::uint64_t seed = 0);

/// Flat "key: value" metrics text.
void write_metrics(const SelectionMetrics& metrics, const std::string& path);

/// splitmix64 of the input; used to derive independent per-repetition seeds.
std::uint64_t mix_seed(std::uint64_t state);

}  // namespace gafs
