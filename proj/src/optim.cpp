#include "gafs/optim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>

namespace gafs {
namespace {

struct CurvaturePair {
    Vector s;
    Vector y;
    double rho;
};

// Two-loop recursion; the initial inverse-Hessian scale comes from the most
// recent stored pair.
Vector search_direction(const Vector& g, const std::deque<CurvaturePair>& pairs) {
    if (pairs.empty()) return -g;

    std::vector<double> alpha(pairs.size());
    Vector q = g;
    for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
        alpha[static_cast<std::size_t>(i)] = pairs[static_cast<std::size_t>(i)].rho *
                                             pairs[static_cast<std::size_t>(i)].s.dot(q);
        q -= alpha[static_cast<std::size_t>(i)] * pairs[static_cast<std::size_t>(i)].y;
    }
    const auto& last = pairs.back();
    const double scale = last.s.dot(last.y) / last.y.squaredNorm();
    Vector r = scale * q;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double beta = pairs[i].rho * pairs[i].y.dot(r);
        r += (alpha[i] - beta) * pairs[i].s;
    }
    return -r;
}

// Minimizer of the cubic Hermite interpolant through (a, fa, ga), (b, fb, gb).
double cubic_minimizer(double a, double fa, double ga, double b, double fb, double gb) {
    const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - ga * gb;
    if (!(disc >= 0.0)) return 0.5 * (a + b);
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = gb - ga + 2.0 * d2;
    if (denom == 0.0) return 0.5 * (a + b);
    return b - (b - a) * ((gb + d2 - d1) / denom);
}

struct LineSearchOutcome {
    bool success = false;
    double step = 0.0;
    double value = 0.0;
    Vector point;
    Vector grad;
};

class LineSearch {
public:
    LineSearch(const ValueGradFn& fn, const Vector& x, double f0, const Vector& dir, double dphi0,
               const LbfgsConfig& cfg)
        : fn_(fn), x_(x), f0_(f0), dir_(dir), dphi0_(dphi0), cfg_(cfg) {}

    // Strong Wolfe conditions via bracketing + zoom.
    LineSearchOutcome wolfe(double initial_step) {
        double alpha_prev = 0.0, phi_prev = f0_, dphi_prev = dphi0_;
        double alpha = initial_step;
        bool first = true;

        while (evals_ < cfg_.max_line_search_steps) {
            double phi, dphi;
            Vector grad;
            if (!probe(alpha, phi, dphi, grad)) {
                // Non-finite trial: pull back toward the last good point.
                alpha = alpha_prev + 0.5 * (alpha - alpha_prev);
                if (alpha - alpha_prev < 1e-16 * std::max(1.0, alpha_prev)) break;
                continue;
            }
            if (phi > f0_ + cfg_.wolfe_c1 * alpha * dphi0_ || (!first && phi >= phi_prev)) {
                return zoom(alpha_prev, phi_prev, dphi_prev, alpha, phi, dphi);
            }
            if (std::abs(dphi) <= -cfg_.wolfe_c2 * dphi0_) return accept(alpha, phi, grad);
            if (dphi >= 0.0) {
                return zoom(alpha, phi, dphi, alpha_prev, phi_prev, dphi_prev);
            }
            alpha_prev = alpha;
            phi_prev = phi;
            dphi_prev = dphi;
            alpha = std::min(2.0 * alpha, 1e10);
            first = false;
        }
        return {};
    }

    // Armijo-only backtracking, used as the steepest-descent fallback.
    LineSearchOutcome backtracking(double initial_step) {
        double alpha = initial_step;
        while (evals_ < cfg_.max_line_search_steps) {
            double phi, dphi;
            Vector grad;
            if (probe(alpha, phi, dphi, grad) && phi <= f0_ + cfg_.wolfe_c1 * alpha * dphi0_) {
                return accept(alpha, phi, grad);
            }
            alpha *= 0.5;
            if (alpha < 1e-20) break;
        }
        return {};
    }

private:
    bool probe(double alpha, double& phi, double& dphi, Vector& grad) {
        ++evals_;
        trial_ = x_ + alpha * dir_;
        grad.resize(x_.size());
        phi = fn_(trial_, grad);
        if (!std::isfinite(phi) || !grad.allFinite()) return false;
        dphi = grad.dot(dir_);
        return true;
    }

    LineSearchOutcome accept(double alpha, double phi, Vector& grad) {
        LineSearchOutcome out;
        out.success = true;
        out.step = alpha;
        out.value = phi;
        out.point = std::move(trial_);
        out.grad = std::move(grad);
        return out;
    }

    LineSearchOutcome zoom(double alpha_lo, double phi_lo, double dphi_lo, double alpha_hi,
                           double phi_hi, double dphi_hi) {
        while (evals_ < cfg_.max_line_search_steps) {
            const double lo_b = std::min(alpha_lo, alpha_hi);
            const double hi_b = std::max(alpha_lo, alpha_hi);
            const double width = hi_b - lo_b;
            if (width < 1e-16 * std::max(1.0, lo_b)) break;

            double alpha = cubic_minimizer(alpha_lo, phi_lo, dphi_lo, alpha_hi, phi_hi, dphi_hi);
            if (!std::isfinite(alpha) || alpha <= lo_b + 0.05 * width || alpha >= hi_b - 0.05 * width) {
                alpha = 0.5 * (alpha_lo + alpha_hi);
            }

            double phi, dphi;
            Vector grad;
            if (!probe(alpha, phi, dphi, grad)) {
                alpha_hi = alpha;
                phi_hi = std::numeric_limits<double>::max() / 4;
                dphi_hi = 0.0;
                continue;
            }
            if (phi > f0_ + cfg_.wolfe_c1 * alpha * dphi0_ || phi >= phi_lo) {
                alpha_hi = alpha;
                phi_hi = phi;
                dphi_hi = dphi;
            } else {
                if (std::abs(dphi) <= -cfg_.wolfe_c2 * dphi0_) return accept(alpha, phi, grad);
                if (dphi * (alpha_hi - alpha_lo) >= 0.0) {
                    alpha_hi = alpha_lo;
                    phi_hi = phi_lo;
                    dphi_hi = dphi_lo;
                }
                alpha_lo = alpha;
                phi_lo = phi;
                dphi_lo = dphi;
            }
        }
        return {};
    }

    const ValueGradFn& fn_;
    const Vector& x_;
    double f0_;
    const Vector& dir_;
    double dphi0_;
    const LbfgsConfig& cfg_;
    Vector trial_;
    int evals_ = 0;
};

void validate(const LbfgsConfig& cfg) {
    if (cfg.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (cfg.memory < 1) throw ConfigError("memory must be >= 1");
    if (!(cfg.relative_tolerance > 0.0)) throw ConfigError("relative_tolerance must be positive");
    if (!(cfg.gradient_tolerance > 0.0)) throw ConfigError("gradient_tolerance must be positive");
    if (!(0.0 < cfg.wolfe_c1 && cfg.wolfe_c1 < cfg.wolfe_c2 && cfg.wolfe_c2 < 1.0)) {
        throw ConfigError("Wolfe constants must satisfy 0 < c1 < c2 < 1");
    }
    if (cfg.max_line_search_steps < 1) throw ConfigError("max_line_search_steps must be >= 1");
}

}  // namespace

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::kRelativeChange: return "relative-change";
        case StopReason::kGradientNorm: return "gradient-norm";
        case StopReason::kMaxIterations: return "max-iterations";
        case StopReason::kLineSearchFailure: return "line-search-failure";
    }
    return "unknown";
}

MinimizeResult minimize(const ValueGradFn& fn, const Vector& x0, const LbfgsConfig& cfg) {
    validate(cfg);

    Vector x = x0;
    Vector g(x.size());
    double f = fn(x, g);
    if (!std::isfinite(f) || !g.allFinite()) {
        throw NumericError("objective or gradient is not finite at the initial point");
    }

    OptimTrace trace;
    trace.objective.push_back(f);
    trace.gradient_norm.push_back(g.lpNorm<Eigen::Infinity>());
    trace.reason = StopReason::kMaxIterations;

    if (trace.gradient_norm.back() < cfg.gradient_tolerance) {
        trace.reason = StopReason::kGradientNorm;
        return {std::move(x), f, std::move(trace)};
    }

    std::deque<CurvaturePair> pairs;

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        Vector dir = search_direction(g, pairs);
        double dphi0 = g.dot(dir);
        if (!(dphi0 < 0.0)) {
            // Stale curvature produced a non-descent direction; restart.
            pairs.clear();
            dir = -g;
            dphi0 = g.dot(dir);
            if (!(dphi0 < 0.0)) {
                trace.reason = StopReason::kLineSearchFailure;
                break;
            }
        }

        const double initial_step =
            pairs.empty() ? std::min(1.0, 1.0 / g.template lpNorm<1>()) : 1.0;
        LineSearch search(fn, x, f, dir, dphi0, cfg);
        LineSearchOutcome step = search.wolfe(initial_step);
        if (!step.success) {
            // The l2,1 kink can defeat Wolfe near zero columns; retry once
            // along -g with plain backtracking.
            dir = -g;
            dphi0 = g.dot(dir);
            LineSearch fallback(fn, x, f, dir, dphi0, cfg);
            step = fallback.backtracking(std::min(1.0, 1.0 / g.template lpNorm<1>()));
            if (!step.success) {
                trace.reason = StopReason::kLineSearchFailure;
                break;
            }
        }

        Vector s = step.point - x;
        Vector yv = step.grad - g;
        const double sy = s.dot(yv);
        if (sy > 1e-10 * s.norm() * yv.norm()) {
            pairs.push_back({std::move(s), std::move(yv), 1.0 / sy});
            if (static_cast<int>(pairs.size()) > cfg.memory) pairs.pop_front();
        }

        const double f_prev = f;
        x = std::move(step.point);
        f = step.value;
        g = std::move(step.grad);

        trace.objective.push_back(f);
        trace.gradient_norm.push_back(g.lpNorm<Eigen::Infinity>());

        if (std::abs(f - f_prev) / std::max(std::abs(f_prev), 1.0) < cfg.relative_tolerance) {
            trace.reason = StopReason::kRelativeChange;
            break;
        }
        if (trace.gradient_norm.back() < cfg.gradient_tolerance) {
            trace.reason = StopReason::kGradientNorm;
            break;
        }
    }

    return {std::move(x), f, std::move(trace)};
}

Vector flatten_blocks(const Matrix& w1, const Matrix& w2, const Vector& b1, const Vector& b2) {
    const auto m = w1.rows();
    const auto d = w1.cols();
    Vector v(2 * m * d + d + m);
    Index idx = 0;
    for (Index r = 0; r < m; ++r)
        for (Index c = 0; c < d; ++c) v(idx++) = w1(r, c);
    for (Index r = 0; r < d; ++r)
        for (Index c = 0; c < m; ++c) v(idx++) = w2(r, c);
    for (Index r = 0; r < m; ++r) v(idx++) = b1(r);
    for (Index r = 0; r < d; ++r) v(idx++) = b2(r);
    return v;
}

Vector flatten_params(const ModelParams& params) {
    return flatten_blocks(params.w1, params.w2, params.b1, params.b2);
}

ModelParams unflatten_params(const Vector& v, Index d, Index m) {
    const Index expected = 2 * m * d + d + m;
    if (v.size() != expected) {
        throw ShapeError("parameter vector has length " + std::to_string(v.size()) + ", expected " +
                         std::to_string(expected) + " for d=" + std::to_string(d) +
                         ", m=" + std::to_string(m));
    }
    ModelParams params = ModelParams::zeros(d, m);
    Index idx = 0;
    for (Index r = 0; r < m; ++r)
        for (Index c = 0; c < d; ++c) params.w1(r, c) = v(idx++);
    for (Index r = 0; r < d; ++r)
        for (Index c = 0; c < m; ++c) params.w2(r, c) = v(idx++);
    for (Index r = 0; r < m; ++r) params.b1(r) = v(idx++);
    for (Index r = 0; r < d; ++r) params.b2(r) = v(idx++);
    return params;
}

void write_trace(const OptimTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open trace file for writing: " + path);
    char buf[48];
    for (std::size_t i = 0; i < trace.objective.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu %.17g\n", i, trace.objective[i]);
        out << buf;
    }
    if (!out) throw IoError("failed writing trace file: " + path);
}

}  // namespace gafs
