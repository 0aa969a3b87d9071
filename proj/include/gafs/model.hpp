#pragma once

#include <string>

#include "gafs/error.hpp"
#include "gafs/types.hpp"

namespace gafs {

/// Parameters of the single-layer autoencoder for input dimension d and
/// hidden dimension m.
struct ModelParams {
    Matrix w1;  // m x d encoder weights
    Matrix w2;  // d x m decoder weights
    Vector b1;  // length m encoder bias
    Vector b2;  // length d decoder bias

    Index input_dim() const { return w1.cols(); }
    Index hidden_dim() const { return w1.rows(); }

    static ModelParams zeros(Index d, Index m);
};

/// Gradient blocks mirroring ModelParams, plus the hidden- and output-layer
/// error terms produced by backpropagation (kept for inspection and tests).
struct GradientBundle {
    Matrix w1;      // m x d
    Matrix w2;      // d x m
    Vector b1;      // m
    Vector b2;      // d
    Matrix delta2;  // m x n hidden-layer error term
    Matrix delta3;  // d x n output-layer error term
};

/// Immutable inputs of the objective: scaled data, graph Laplacian and the
/// balance parameters. The Laplacian may be empty when gamma == 0 (the graph
/// term is skipped entirely in that case).
struct ObjectiveContext {
    Matrix x;          // d x n, entries expected in (0, 1)
    Matrix laplacian;  // n x n
    double lambda = 0.0;
    double gamma = 0.0;
    double epsilon = 1e-8;  // guard added to column norms in the l2,1 gradient
};

/// Column Euclidean norms below this are treated as exactly zero in the l2,1
/// subgradient rule (the penalty contributes no gradient for such columns).
inline constexpr double kZeroColumnNorm = 1e-12;

/// Numerically stable logistic function, exact to saturation for |z| > 709.
double sigmoid(double z);

/// Elementwise sigmoid.
Matrix sigmoid(const Matrix& z);

/// Hidden representation Y = sigmoid(W1 X + b1 1^T), shape m x n.
Matrix encode(const ModelParams& params, const Matrix& x);

/// Reconstruction Xbar = sigmoid(W2 Y + b2 1^T), shape d x n.
Matrix decode(const ModelParams& params, const Matrix& y);

/// (1/2n) ||X - decode(encode(X))||_F^2.
double reconstruction_loss(const ModelParams& params, const Matrix& x);

/// Sum of the Euclidean norms of the matrix columns.
double l21_columns(const Matrix& w);

/// Tr(Y L Y^T).
double graph_penalty(const Matrix& y, const Matrix& laplacian);

/// reconstruction_loss + lambda * l21_columns(W1) + gamma * graph_penalty.
double objective(const ModelParams& params, const ObjectiveContext& ctx);

/// Analytic gradient of the objective (single forward pass internally).
GradientBundle gradient(const ModelParams& params, const ObjectiveContext& ctx);

/// Fused objective value and gradient sharing one forward pass; this is the
/// entry point the optimizer drives.
double value_and_gradient(const ModelParams& params, const ObjectiveContext& ctx,
                          GradientBundle& grad);

/// Text checkpoint: header "GAFS-PARAMS d m", then W1 rows, W2 rows, b1, b2
/// with 17 significant digits (bit-exact round trip for doubles).
void save_params(const ModelParams& params, const std::string& path);
ModelParams load_params(const std::string& path);

}  // namespace gafs
