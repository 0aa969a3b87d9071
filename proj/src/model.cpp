#include "gafs/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gafs {
namespace {

void check_consistent(const ModelParams& p) {
    const auto d = p.w1.cols();
    const auto m = p.w1.rows();
    if (p.w2.rows() != d || p.w2.cols() != m || p.b1.size() != m || p.b2.size() != d) {
        throw ShapeError("inconsistent parameter shapes for d=" + std::to_string(d) +
                         ", m=" + std::to_string(m));
    }
}

void check_data(const ModelParams& p, const Matrix& x) {
    if (x.rows() != p.input_dim()) {
        throw ShapeError("data has " + std::to_string(x.rows()) + " features but encoder expects " +
                         std::to_string(p.input_dim()));
    }
}

// Scales column q of the gradient by lambda / (||w1 col q|| + eps), skipping
// columns whose norm is below the zero threshold (subgradient 0 at zero).
void add_l21_gradient(const Matrix& w1, double lambda, double epsilon, Matrix& grad) {
    for (Index q = 0; q < w1.cols(); ++q) {
        const double norm = w1.col(q).norm();
        if (norm >= kZeroColumnNorm) grad.col(q) += (lambda / (norm + epsilon)) * w1.col(q);
    }
}

}  // namespace

ModelParams ModelParams::zeros(Index d, Index m) {
    return {Matrix::Zero(m, d), Matrix::Zero(d, m), Vector::Zero(m), Vector::Zero(d)};
}

double sigmoid(double z) {
    // Sign-split form: the exponential argument is always <= 0.
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& z) {
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

Matrix encode(const ModelParams& params, const Matrix& x) {
    check_consistent(params);
    check_data(params, x);
    return sigmoid((params.w1 * x).colwise() + params.b1);
}

Matrix decode(const ModelParams& params, const Matrix& y) {
    check_consistent(params);
    if (y.rows() != params.hidden_dim()) {
        throw ShapeError("code has " + std::to_string(y.rows()) + " rows but decoder expects " +
                         std::to_string(params.hidden_dim()));
    }
    return sigmoid((params.w2 * y).colwise() + params.b2);
}

double reconstruction_loss(const ModelParams& params, const Matrix& x) {
    const Matrix xbar = decode(params, encode(params, x));
    const double n = static_cast<double>(x.cols());
    return 0.5 / n * (x - xbar).squaredNorm();
}

double l21_columns(const Matrix& w) {
    double total = 0.0;
    for (Index q = 0; q < w.cols(); ++q) total += w.col(q).norm();
    return total;
}

double graph_penalty(const Matrix& y, const Matrix& laplacian) {
    if (laplacian.rows() != laplacian.cols() || laplacian.rows() != y.cols()) {
        throw ShapeError("Laplacian must be n x n with n = " + std::to_string(y.cols()) + ", got " +
                         std::to_string(laplacian.rows()) + " x " + std::to_string(laplacian.cols()));
    }
    // Tr(Y L Y^T) without forming the full product.
    return ((y * laplacian).cwiseProduct(y)).sum();
}

double objective(const ModelParams& params, const ObjectiveContext& ctx) {
    const Matrix y = encode(params, ctx.x);
    const Matrix xbar = decode(params, y);
    const double n = static_cast<double>(ctx.x.cols());
    double value = 0.5 / n * (ctx.x - xbar).squaredNorm();
    if (ctx.lambda != 0.0) value += ctx.lambda * l21_columns(params.w1);
    if (ctx.gamma != 0.0) value += ctx.gamma * graph_penalty(y, ctx.laplacian);
    return value;
}

double value_and_gradient(const ModelParams& params, const ObjectiveContext& ctx,
                          GradientBundle& grad) {
    const Matrix y = encode(params, ctx.x);
    const Matrix xbar = decode(params, y);
    const double n = static_cast<double>(ctx.x.cols());

    const Matrix diff = xbar - ctx.x;
    double value = 0.5 / n * diff.squaredNorm();

    grad.delta3 = diff.cwiseProduct(xbar).cwiseProduct(Matrix::Ones(xbar.rows(), xbar.cols()) - xbar);
    grad.delta2 = (params.w2.transpose() * grad.delta3)
                      .cwiseProduct(y)
                      .cwiseProduct(Matrix::Ones(y.rows(), y.cols()) - y);

    grad.w1 = (1.0 / n) * grad.delta2 * ctx.x.transpose();
    grad.w2 = (1.0 / n) * grad.delta3 * y.transpose();
    grad.b1 = (1.0 / n) * grad.delta2.rowwise().sum();
    grad.b2 = (1.0 / n) * grad.delta3.rowwise().sum();

    if (ctx.lambda != 0.0) {
        value += ctx.lambda * l21_columns(params.w1);
        add_l21_gradient(params.w1, ctx.lambda, ctx.epsilon, grad.w1);
    }

    if (ctx.gamma != 0.0) {
        const Matrix yl = y * ctx.laplacian;
        value += ctx.gamma * (yl.cwiseProduct(y)).sum();
        const Matrix chain =
            yl.cwiseProduct(y).cwiseProduct(Matrix::Ones(y.rows(), y.cols()) - y);
        grad.w1 += 2.0 * ctx.gamma * chain * ctx.x.transpose();
        grad.b1 += 2.0 * ctx.gamma * chain.rowwise().sum();
    }

    return value;
}

GradientBundle gradient(const ModelParams& params, const ObjectiveContext& ctx) {
    GradientBundle grad;
    value_and_gradient(params, ctx, grad);
    return grad;
}

void save_params(const ModelParams& params, const std::string& path) {
    check_consistent(params);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);

    const auto d = params.input_dim();
    const auto m = params.hidden_dim();
    out << "GAFS-PARAMS " << d << " " << m << "\n";

    char buf[32];
    auto write_row = [&](auto&& row) {
        for (Index j = 0; j < row.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", row(j));
            out << (j ? " " : "") << buf;
        }
        out << "\n";
    };
    for (Index r = 0; r < m; ++r) write_row(params.w1.row(r));
    for (Index r = 0; r < d; ++r) write_row(params.w2.row(r));
    write_row(params.b1.transpose());
    write_row(params.b2.transpose());
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

ModelParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);

    std::string magic;
    Index d = 0, m = 0;
    if (!(in >> magic >> d >> m) || magic != "GAFS-PARAMS" || d < 1 || m < 1) {
        throw ParseError("bad checkpoint header in " + path);
    }

    ModelParams params = ModelParams::zeros(d, m);
    auto read_values = [&](auto&& target, Index count, const char* what) {
        for (Index j = 0; j < count; ++j) {
            if (!(in >> target(j))) {
                throw ParseError(std::string("truncated checkpoint while reading ") + what + " in " +
                                 path);
            }
        }
    };
    for (Index r = 0; r < m; ++r) read_values(params.w1.row(r), d, "W1");
    for (Index r = 0; r < d; ++r) read_values(params.w2.row(r), m, "W2");
    read_values(params.b1, m, "b1");
    read_values(params.b2, d, "b2");
    return params;
}

}  // namespace gafs
