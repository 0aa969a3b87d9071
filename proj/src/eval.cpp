#include "gafs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

namespace gafs {
namespace {

int max_label(const LabelVector& labels) {
    int top = 0;
    for (int v : labels) {
        if (v < 1) throw ConfigError("labels must be >= 1, got " + std::to_string(v));
        top = std::max(top, v);
    }
    return top;
}

void check_same_length(const LabelVector& a, const LabelVector& b) {
    if (a.size() != b.size()) {
        throw ShapeError("label vectors differ in length: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    }
    if (a.empty()) throw ConfigError("label vectors must be nonempty");
}

// Min-cost assignment on a square matrix via the Hungarian algorithm with
// row/column potentials, O(n^3). Returns row -> column.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

std::vector<std::vector<long>> contingency(const LabelVector& pred, const LabelVector& truth,
                                           int k) {
    std::vector<std::vector<long>> table(static_cast<std::size_t>(k),
                                         std::vector<long>(static_cast<std::size_t>(k), 0));
    for (std::size_t i = 0; i < pred.size(); ++i) {
        table[static_cast<std::size_t>(pred[i] - 1)][static_cast<std::size_t>(truth[i] - 1)] += 1;
    }
    return table;
}

double entropy_from_counts(const std::vector<long>& counts, double n) {
    double h = 0.0;
    for (long c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t state) {
    std::uint64_t z = state + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

ClusterRun kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter) {
    const auto n = points.cols();
    if (k < 1 || k > n) {
        throw ConfigError("cluster count must satisfy 1 <= K <= n, got K=" + std::to_string(k) +
                          " with n=" + std::to_string(n));
    }
    if (!points.allFinite()) throw NumericError("k-means input contains non-finite values");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");

    // Forgy initialization: k distinct sample indices.
    std::mt19937_64 rng(seed);
    std::vector<Index> pool(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    Matrix centers(points.rows(), k);
    for (int c = 0; c < k; ++c) {
        const auto pick = static_cast<std::size_t>(rng() % (static_cast<std::uint64_t>(n) - c));
        centers.col(c) = points.col(pool[pick]);
        std::swap(pool[pick], pool[static_cast<std::size_t>(n) - 1 - c]);
    }

    ClusterRun run;
    run.seed = seed;
    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    std::vector<double> dist_to_center(static_cast<std::size_t>(n), 0.0);

    for (int iter = 1; iter <= max_iter; ++iter) {
        // Assignment pass; ties go to the smaller center index.
        bool changed = false;
        double inertia = 0.0;
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            double best_dist = (points.col(i) - centers.col(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double dist = (points.col(i) - centers.col(c)).squaredNorm();
                if (dist < best_dist) {
                    best_dist = dist;
                    best = c;
                }
            }
            if (assign[static_cast<std::size_t>(i)] != best) {
                assign[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
            dist_to_center[static_cast<std::size_t>(i)] = best_dist;
            inertia += best_dist;
        }
        run.inertia = inertia;
        run.inertia_history.push_back(inertia);
        run.iterations = iter;
        if (!changed) break;

        // Update pass.
        Matrix sums = Matrix::Zero(points.rows(), k);
        std::vector<long> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            sums.col(assign[static_cast<std::size_t>(i)]) += points.col(i);
            counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] += 1;
        }
        std::vector<char> taken(static_cast<std::size_t>(n), 0);
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            } else {
                // Reseed an empty cluster to the farthest untaken point.
                Index far = -1;
                double far_dist = -1.0;
                for (Index i = 0; i < n; ++i) {
                    if (taken[static_cast<std::size_t>(i)]) continue;
                    if (dist_to_center[static_cast<std::size_t>(i)] > far_dist) {
                        far_dist = dist_to_center[static_cast<std::size_t>(i)];
                        far = i;
                    }
                }
                centers.col(c) = points.col(far);
                taken[static_cast<std::size_t>(far)] = 1;
            }
        }
    }

    run.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) run.labels[static_cast<std::size_t>(i)] = assign[static_cast<std::size_t>(i)] + 1;
    return run;
}

std::vector<int> hungarian_map(const LabelVector& pred, const LabelVector& truth) {
    check_same_length(pred, truth);
    const int k = std::max(max_label(pred), max_label(truth));
    const auto table = contingency(pred, truth, k);

    // Maximize matches == minimize negated counts.
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(k),
                                          std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                -static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);

    const auto row_to_col = min_cost_assignment(cost);
    std::vector<int> mapping(static_cast<std::size_t>(k), 0);
    for (int c = 0; c < k; ++c) mapping[static_cast<std::size_t>(c)] = row_to_col[static_cast<std::size_t>(c)] + 1;
    return mapping;
}

double acc(const LabelVector& pred, const LabelVector& truth) {
    check_same_length(pred, truth);
    const auto mapping = hungarian_map(pred, truth);
    long matched = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (mapping[static_cast<std::size_t>(pred[i] - 1)] == truth[i]) ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(pred.size());
}

double nmi(const LabelVector& a, const LabelVector& b) {
    check_same_length(a, b);
    const int ka = max_label(a);
    const int kb = max_label(b);
    const int k = std::max(ka, kb);
    const auto table = contingency(a, b, k);
    const double n = static_cast<double>(a.size());

    std::vector<long> row_counts(static_cast<std::size_t>(k), 0);
    std::vector<long> col_counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            row_counts[static_cast<std::size_t>(i)] += table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            col_counts[static_cast<std::size_t>(j)] += table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }

    const double ha = entropy_from_counts(row_counts, n);
    const double hb = entropy_from_counts(col_counts, n);
    if (ha == 0.0 && hb == 0.0) return 1.0;  // single cluster on both sides

    double mi = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const long c = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (c == 0) continue;
            const double pij = static_cast<double>(c) / n;
            const double pi = static_cast<double>(row_counts[static_cast<std::size_t>(i)]) / n;
            const double qj = static_cast<double>(col_counts[static_cast<std::size_t>(j)]) / n;
            mi += pij * (std::log(pij) - std::log(pi) - std::log(qj));
        }
    }
    mi = std::max(mi, 0.0);
    return std::min(mi / std::max(ha, hb), 1.0);
}

SoftmaxModel softmax_train(const Matrix& x, const LabelVector& y, int k, double reg) {
    const auto n = x.cols();
    const auto d = x.rows();
    if (static_cast<Index>(y.size()) != n) {
        throw ShapeError("label count " + std::to_string(y.size()) + " does not match sample count " +
                         std::to_string(n));
    }
    if (k < 2) throw ConfigError("softmax training requires at least two classes");
    std::vector<long> seen(static_cast<std::size_t>(k), 0);
    for (int v : y) {
        if (v < 1 || v > k) throw ConfigError("label " + std::to_string(v) + " outside 1.." + std::to_string(k));
        seen[static_cast<std::size_t>(v - 1)] += 1;
    }
    for (int c = 0; c < k; ++c) {
        if (seen[static_cast<std::size_t>(c)] == 0) {
            throw ConfigError("class " + std::to_string(c + 1) + " absent from training labels");
        }
    }
    if (!x.allFinite()) throw NumericError("softmax training data contains non-finite values");

    // Parameter vector: W (k x d, row-major) then bias (k).
    const Index dim = static_cast<Index>(k) * d + k;
    auto unpack = [&](const Vector& v, Matrix& w, Vector& b) {
        w.resize(k, d);
        b.resize(k);
        Index idx = 0;
        for (int r = 0; r < k; ++r)
            for (Index c = 0; c < d; ++c) w(r, c) = v(idx++);
        for (int r = 0; r < k; ++r) b(r) = v(idx++);
    };

    auto fn = [&](const Vector& v, Vector& grad_out) {
        Matrix w;
        Vector b;
        unpack(v, w, b);

        Matrix logits = (w * x).colwise() + b;  // k x n
        // Column-stabilized softmax.
        Vector col_max = logits.colwise().maxCoeff();
        logits.rowwise() -= col_max.transpose();
        Matrix probs = logits.array().exp().matrix();
        Vector col_sum = probs.colwise().sum();
        for (Index j = 0; j < n; ++j) probs.col(j) /= col_sum(j);

        double loss = 0.0;
        Matrix residual = probs;  // becomes P - onehot(y)
        for (Index j = 0; j < n; ++j) {
            const int cls = y[static_cast<std::size_t>(j)] - 1;
            loss -= std::log(std::max(probs(cls, j), 1e-300));
            residual(cls, j) -= 1.0;
        }
        loss /= static_cast<double>(n);
        loss += 0.5 * reg * w.squaredNorm();

        Matrix gw = (1.0 / static_cast<double>(n)) * residual * x.transpose() + reg * w;
        Vector gb = (1.0 / static_cast<double>(n)) * residual.rowwise().sum();
        grad_out = Vector(dim);
        Index idx = 0;
        for (int r = 0; r < k; ++r)
            for (Index c = 0; c < d; ++c) grad_out(idx++) = gw(r, c);
        for (int r = 0; r < k; ++r) grad_out(idx++) = gb(r);
        return loss;
    };

    LbfgsConfig cfg;
    cfg.relative_tolerance = 1e-9;
    cfg.gradient_tolerance = 1e-8;
    const MinimizeResult res = minimize(fn, Vector::Zero(dim), cfg);

    SoftmaxModel model;
    unpack(res.point, model.weights, model.bias);
    return model;
}

LabelVector softmax_predict(const SoftmaxModel& model, const Matrix& x) {
    if (x.rows() != model.weights.cols()) {
        throw ShapeError("prediction data has " + std::to_string(x.rows()) +
                         " features but classifier expects " + std::to_string(model.weights.cols()));
    }
    const Matrix logits = (model.weights * x).colwise() + model.bias;
    LabelVector labels(static_cast<std::size_t>(x.cols()));
    for (Index j = 0; j < x.cols(); ++j) {
        int best = 0;
        for (Index r = 1; r < logits.rows(); ++r) {
            if (logits(r, j) > logits(best, j)) best = static_cast<int>(r);
        }
        labels[static_cast<std::size_t>(j)] = best + 1;
    }
    return labels;
}

SelectionMetrics evaluate_selection(const DataMatrix& x, const LabelVector& labels,
                                    const std::vector<int>& feature_indices, int k,
                                    const std::vector<int>& train_samples,
                                    const std::vector<int>& test_samples, int repetitions,
                                    std::uint64_t seed) {
    const auto n = x.samples();
    if (static_cast<Index>(labels.size()) != n) {
        throw ConfigError("data has " + std::to_string(n) + " samples but " +
                          std::to_string(labels.size()) + " labels");
    }
    if (feature_indices.empty()) throw ConfigError("feature selection is empty");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    for (int f : feature_indices) {
        if (f < 0 || f >= x.features()) {
            throw ConfigError("feature index " + std::to_string(f + 1) + " outside 1.." +
                              std::to_string(x.features()));
        }
    }
    auto check_samples = [&](const std::vector<int>& idx, const char* what) {
        if (idx.empty()) throw ConfigError(std::string(what) + " split is empty");
        for (int i : idx) {
            if (i < 0 || i >= n) {
                throw ConfigError(std::string(what) + " index " + std::to_string(i) + " out of range");
            }
        }
    };
    check_samples(train_samples, "train");
    check_samples(test_samples, "test");

    Matrix selected(static_cast<Index>(feature_indices.size()), n);
    for (std::size_t r = 0; r < feature_indices.size(); ++r) {
        selected.row(static_cast<Index>(r)) = x.values.row(feature_indices[r]);
    }

    // Aggregation runs in fixed seed order so results do not depend on any
    // parallel schedule.
    double acc_sum = 0.0;
    double nmi_sum = 0.0;
    for (int rep = 0; rep < repetitions; ++rep) {
        const ClusterRun run = kmeans(selected, k, mix_seed(seed + static_cast<std::uint64_t>(rep)));
        acc_sum += acc(run.labels, labels);
        nmi_sum += nmi(run.labels, labels);
    }

    Matrix train_x(selected.rows(), static_cast<Index>(train_samples.size()));
    Matrix test_x(selected.rows(), static_cast<Index>(test_samples.size()));
    LabelVector train_y(train_samples.size()), test_y(test_samples.size());
    for (std::size_t i = 0; i < train_samples.size(); ++i) {
        train_x.col(static_cast<Index>(i)) = selected.col(train_samples[i]);
        train_y[i] = labels[static_cast<std::size_t>(train_samples[i])];
    }
    for (std::size_t i = 0; i < test_samples.size(); ++i) {
        test_x.col(static_cast<Index>(i)) = selected.col(test_samples[i]);
        test_y[i] = labels[static_cast<std::size_t>(test_samples[i])];
    }

    const SoftmaxModel model = softmax_train(train_x, train_y, k);
    const LabelVector predicted = softmax_predict(model, test_x);
    long correct = 0;
    for (std::size_t i = 0; i < test_y.size(); ++i)
        if (predicted[i] == test_y[i]) ++correct;

    SelectionMetrics metrics;
    metrics.acc_mean = acc_sum / repetitions;
    metrics.nmi_mean = nmi_sum / repetitions;
    metrics.classification_accuracy = static_cast<double>(correct) / static_cast<double>(test_y.size());
    metrics.n_features = static_cast<int>(feature_indices.size());
    metrics.seed_count = repetitions;
    return metrics;
}

void write_metrics(const SelectionMetrics& metrics, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open metrics file for writing: " + path);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "acc_mean: %.17g\n", metrics.acc_mean);
    out << buf;
    std::snprintf(buf, sizeof(buf), "nmi_mean: %.17g\n", metrics.nmi_mean);
    out << buf;
    std::snprintf(buf, sizeof(buf), "classification_accuracy: %.17g\n",
                  metrics.classification_accuracy);
    out << buf;
    out << "n_features: " << metrics.n_features << "\n";
    out << "seed_count: " << metrics.seed_count << "\n";
    if (!out) throw IoError("failed writing metrics file: " + path);
}

}  // namespace gafs
