#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gafs/model.hpp"
#include "gafs/types.hpp"

namespace gafs {

struct LbfgsConfig {
    int max_iterations = 400;          // t
    int memory = 100;                  // l, number of stored curvature pairs
    double relative_tolerance = 1e-5;  // |f_k - f_{k-1}| / max(|f_{k-1}|, 1)
    double gradient_tolerance = 1e-6;  // infinity norm of the gradient
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    int max_line_search_steps = 25;
};

enum class StopReason { kRelativeChange, kGradientNorm, kMaxIterations, kLineSearchFailure };

const char* to_string(StopReason reason);

/// Objective values and gradient infinity norms at the initial point and
/// every accepted iterate, plus why the run stopped.
struct OptimTrace {
    std::vector<double> objective;
    std::vector<double> gradient_norm;
    StopReason reason = StopReason::kMaxIterations;

    int iterations() const { return static_cast<int>(objective.size()) - 1; }
};

/// Callable contract: fills the gradient and returns the objective value.
using ValueGradFn = std::function<double(const Vector&, Vector&)>;

struct MinimizeResult {
    Vector point;
    double value = 0.0;
    OptimTrace trace;
};

/// Limited-memory BFGS with a strong Wolfe line search (two-loop recursion,
/// cubic-interpolation bracketing). On Wolfe failure the iteration retries
/// once with backtracked steepest descent before giving up. Throws
/// NumericError when the objective or gradient is not finite at x0.
MinimizeResult minimize(const ValueGradFn& fn, const Vector& x0, const LbfgsConfig& cfg = {});

/// Flattened layout: W1 row-major, W2 row-major, b1, b2 (length 2md + d + m).
Vector flatten_params(const ModelParams& params);
ModelParams unflatten_params(const Vector& v, Index d, Index m);

/// Same layout applied to gradient blocks.
Vector flatten_blocks(const Matrix& w1, const Matrix& w2, const Vector& b1, const Vector& b2);

/// Two-column text export (iteration, objective) for convergence plots.
void write_trace(const OptimTrace& trace, const std::string& path);

}  // namespace gafs
