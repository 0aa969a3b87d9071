#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "gafs/data.hpp"
#include "gafs/graph.hpp"
#include "gafs/model.hpp"
#include "gafs/optim.hpp"
#include "gafs/select.hpp"

using namespace gafs;

TEST_CASE("quadratic bowl converges in a few iterations") {
    const Index dim = 10;
    Vector target = Vector::LinSpaced(dim, -2.0, 3.0);
    auto fn = [&](const Vector& v, Vector& g) {
        g = 2.0 * (v - target);
        return (v - target).squaredNorm();
    };
    const MinimizeResult res = minimize(fn, Vector::Zero(dim));
    CHECK((res.point - target).norm() <= 1e-8);
    CHECK(res.trace.iterations() <= 3);
}

TEST_CASE("near-exact line search finishes a convex quadratic in dimension steps") {
    // With memory >= dimension and (almost) exact steps the two-loop
    // recursion behaves like conjugate gradients: finite termination.
    const Index dim = 6;
    Vector scale(dim);
    scale << 1, 3, 10, 30, 60, 100;
    Vector target = Vector::LinSpaced(dim, -1.0, 2.0);
    auto fn = [&](const Vector& v, Vector& g) {
        g = 2.0 * scale.cwiseProduct(v - target);
        return scale.cwiseProduct(v - target).dot(v - target);
    };
    LbfgsConfig cfg;
    cfg.relative_tolerance = 1e-14;
    cfg.gradient_tolerance = 1e-9;
    cfg.wolfe_c2 = 1e-3;  // forces |phi'(alpha)| ~ 0 at every accepted step
    const MinimizeResult res = minimize(fn, Vector::Zero(dim), cfg);
    CHECK(res.trace.iterations() <= dim);
    CHECK((res.point - target).norm() <= 1e-10);
}

TEST_CASE("Rosenbrock reaches the analytic minimum") {
    auto fn = [](const Vector& v, Vector& g) {
        const double x = v(0), y = v(1);
        g.resize(2);
        g(0) = -400.0 * x * (y - x * x) - 2.0 * (1.0 - x);
        g(1) = 200.0 * (y - x * x);
        return 100.0 * (y - x * x) * (y - x * x) + (1.0 - x) * (1.0 - x);
    };
    Vector start(2);
    start << -1.2, 1.0;
    LbfgsConfig cfg;
    cfg.max_iterations = 200;
    cfg.relative_tolerance = 1e-15;
    cfg.gradient_tolerance = 1e-10;
    const MinimizeResult res = minimize(fn, start, cfg);
    CHECK(std::abs(res.point(0) - 1.0) <= 1e-6);
    CHECK(std::abs(res.point(1) - 1.0) <= 1e-6);
}

TEST_CASE("GAFS objective trace is monotone and reports a reason") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> dist(0.05, 0.95);
    const Index d = 12, n = 30, m = 5;
    DataMatrix x;
    x.values.resize(d, n);
    for (Index i = 0; i < x.values.size(); ++i) x.values(i) = dist(rng);
    const NeighborGraph graph = build_graph(x, 5);

    ObjectiveContext ctx;
    ctx.x = x.values;
    ctx.laplacian = graph.laplacian;
    ctx.lambda = 0.01;
    ctx.gamma = 0.001;

    GradientBundle workspace;
    auto fn = [&](const Vector& v, Vector& g) {
        const ModelParams p = unflatten_params(v, d, m);
        const double value = value_and_gradient(p, ctx, workspace);
        g = flatten_blocks(workspace.w1, workspace.w2, workspace.b1, workspace.b2);
        return value;
    };

    const Vector theta0 = flatten_params(init_params(d, m, 7));
    const MinimizeResult res = minimize(fn, theta0);  // default config

    REQUIRE(res.trace.objective.size() >= 2);
    for (std::size_t i = 1; i < res.trace.objective.size(); ++i) {
        CHECK(res.trace.objective[i] <= res.trace.objective[i - 1]);
    }
    const StopReason reason = res.trace.reason;
    CHECK((reason == StopReason::kRelativeChange || reason == StopReason::kGradientNorm ||
           reason == StopReason::kMaxIterations || reason == StopReason::kLineSearchFailure));
}

TEST_CASE("minimize is deterministic") {
    auto fn = [](const Vector& v, Vector& g) {
        g = 4.0 * v.array().pow(3).matrix() - 2.0 * v;
        return (v.array().pow(4) - v.array().pow(2)).sum() + 1.0;
    };
    Vector start = Vector::Constant(6, 0.3);
    const MinimizeResult a = minimize(fn, start);
    const MinimizeResult b = minimize(fn, start);
    CHECK(a.point == b.point);
    CHECK(a.trace.objective == b.trace.objective);
    CHECK(a.trace.reason == b.trace.reason);
}

TEST_CASE("non-finite start is rejected") {
    auto fn = [](const Vector& v, Vector& g) {
        g = v;
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(minimize(fn, Vector::Zero(3)), NumericError);
}

TEST_CASE("mid-run blowup returns the best iterate with a failure reason") {
    // Finite in a band, NaN beyond it; the minimizer must hand back the best
    // accepted point instead of crashing.
    auto fn = [](const Vector& v, Vector& g) {
        const double x = v(0);
        if (std::abs(x) > 3.0) {
            g = Vector::Constant(1, std::numeric_limits<double>::quiet_NaN());
            return std::numeric_limits<double>::quiet_NaN();
        }
        g = Vector::Constant(1, -1.0);  // constant slope: runs toward the edge
        return -x;
    };
    Vector start = Vector::Zero(1);
    const MinimizeResult res = minimize(fn, start);
    CHECK(res.trace.reason == StopReason::kLineSearchFailure);
    CHECK(std::isfinite(res.value));
    CHECK(std::abs(res.point(0)) <= 3.0);
}

TEST_CASE("config invariants are validated") {
    auto fn = [](const Vector& v, Vector& g) {
        g = v;
        return 0.5 * v.squaredNorm();
    };
    LbfgsConfig bad;
    bad.wolfe_c1 = 0.95;  // violates c1 < c2
    CHECK_THROWS_AS(minimize(fn, Vector::Zero(2), bad), ConfigError);
    bad = {};
    bad.memory = 0;
    CHECK_THROWS_AS(minimize(fn, Vector::Zero(2), bad), ConfigError);
}

TEST_CASE("flatten length is 2md + d + m") {
    const ModelParams p = ModelParams::zeros(2, 3);
    CHECK(flatten_params(p).size() == 17);
}

TEST_CASE("flatten/unflatten round-trip is bit exact") {
    std::mt19937 rng(73);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ModelParams p = ModelParams::zeros(4, 3);
    for (Index i = 0; i < p.w1.size(); ++i) p.w1(i) = dist(rng);
    for (Index i = 0; i < p.w2.size(); ++i) p.w2(i) = dist(rng);
    for (Index i = 0; i < p.b1.size(); ++i) p.b1(i) = dist(rng);
    for (Index i = 0; i < p.b2.size(); ++i) p.b2(i) = dist(rng);

    const Vector v = flatten_params(p);
    const ModelParams q = unflatten_params(v, 4, 3);
    CHECK(p.w1 == q.w1);
    CHECK(p.w2 == q.w2);
    CHECK(p.b1 == q.b1);
    CHECK(p.b2 == q.b2);
    CHECK(flatten_params(q) == v);
}

TEST_CASE("unflatten rejects wrong lengths") {
    CHECK_THROWS_AS(unflatten_params(Vector::Zero(16), 2, 3), ShapeError);
}

TEST_CASE("trace export writes iteration-value pairs") {
    OptimTrace trace;
    trace.objective = {3.0, 2.0, 1.5};
    trace.gradient_norm = {1.0, 0.5, 0.1};
    trace.reason = StopReason::kRelativeChange;
    const std::string path = "trace_export_test.txt";
    write_trace(trace, path);

    std::ifstream in(path);
    int iter;
    double value;
    int rows = 0;
    while (in >> iter >> value) {
        CHECK(iter == rows);
        CHECK(value == trace.objective[static_cast<std::size_t>(rows)]);
        ++rows;
    }
    CHECK(rows == 3);
    std::remove(path.c_str());
}

TEST_CASE("stop reasons have stable names") {
    CHECK(std::string(to_string(StopReason::kRelativeChange)) == "relative-change");
    CHECK(std::string(to_string(StopReason::kGradientNorm)) == "gradient-norm");
    CHECK(std::string(to_string(StopReason::kMaxIterations)) == "max-iterations");
    CHECK(std::string(to_string(StopReason::kLineSearchFailure)) == "line-search-failure");
}
