#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gafs/select.hpp"
#include "test_support.hpp"

using namespace gafs;

TEST_CASE("init_params is deterministic and bounded") {
    const ModelParams a = init_params(100, 10, 42);
    const ModelParams b = init_params(100, 10, 42);
    CHECK(a.w1 == b.w1);
    CHECK(a.w2 == b.w2);

    const double r = std::sqrt(6.0 / 110.0);
    CHECK(a.w1.cwiseAbs().maxCoeff() <= r);
    CHECK(a.w2.cwiseAbs().maxCoeff() <= r);
    CHECK(a.b1.cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.b2.cwiseAbs().maxCoeff() == 0.0);

    const ModelParams c = init_params(100, 10, 43);
    CHECK(a.w1 != c.w1);
}

TEST_CASE("feature_scores are column norms") {
    Matrix w1(2, 3);
    w1 << 3, 0, 1,
          4, 0, 0;
    const Vector scores = feature_scores(w1);
    CHECK(scores(0) == 5.0);
    CHECK(scores(1) == 0.0);
    CHECK(scores(2) == 1.0);

    Matrix swapped(2, 3);
    swapped << 4, 0, 0,
               3, 0, 1;
    CHECK(feature_scores(swapped) == scores);  // row permutation invariance
}

TEST_CASE("ranking sorts by descending score with ascending-index ties") {
    Vector scores(3);
    scores << 0.1, 3.0, 2.0;
    const FeatureRanking ranking = rank_features(scores);
    CHECK(ranking.order == std::vector<int>{1, 2, 0});
    CHECK(top_features(ranking, 2) == std::vector<int>{1, 2});

    Vector ties = Vector::Constant(3, 1.0);
    CHECK(rank_features(ties).order == std::vector<int>{0, 1, 2});

    CHECK(top_features(ranking, 3).size() == 3);
    CHECK_THROWS_AS(top_features(ranking, 4), ConfigError);
}

TEST_CASE("resolve_top_count handles counts and percentages") {
    CHECK(resolve_top_count(100, 20, std::nullopt) == 20);
    CHECK(resolve_top_count(100, std::nullopt, 20.0) == 20);
    CHECK(resolve_top_count(100, std::nullopt, 2.0) == 2);
    CHECK(resolve_top_count(50, std::nullopt, 3.0) == 2);  // ceil(1.5)
    CHECK(resolve_top_count(100, std::nullopt, 100.0) == 100);
    CHECK_THROWS_AS(resolve_top_count(100, std::nullopt, std::nullopt), ConfigError);
    CHECK_THROWS_AS(resolve_top_count(100, 20, 20.0), ConfigError);
    CHECK_THROWS_AS(resolve_top_count(100, 0, std::nullopt), ConfigError);
    CHECK_THROWS_AS(resolve_top_count(100, std::nullopt, 0.0), ConfigError);
}

TEST_CASE("ranking file round-trips") {
    Vector scores(4);
    scores << 0.25, 1.5, 1.5, 0.0;
    const FeatureRanking ranking = rank_features(scores);
    const std::string path = "ranking_roundtrip_test.txt";
    write_ranking(ranking, path);

    const FeatureRanking loaded = read_ranking(path);
    CHECK(loaded.order == ranking.order);
    CHECK(loaded.scores == ranking.scores);
    std::remove(path.c_str());
}

TEST_CASE("read_ranking rejects non-permutations") {
    const std::string path = "ranking_bad_test.txt";
    {
        std::ofstream out(path);
        out << "1 2 0.5\n2 2 0.25\n";
    }
    CHECK_THROWS_AS(read_ranking(path), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("config file application and overrides") {
    const std::string path = "config_apply_test.txt";
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "hidden_size = 7\n";
        out << "neighbors: 3\n";
        out << "lambda 0.25\n";
        out << "seed = 99\n";
        out << "percent = 12.5\n";
        out << "max_iterations = 50\n";
    }
    SelectOptions options;
    apply_config_file(options, path);
    CHECK(options.config.hidden_size == 7);
    CHECK(options.config.neighbors == 3);
    CHECK(options.config.lambda == 0.25);
    CHECK(options.config.seed == 99);
    CHECK(options.percent == 12.5);
    CHECK(options.config.optimizer.max_iterations == 50);
    CHECK(options.config.gamma == doctest::Approx(1e-3));  // untouched default
    std::remove(path.c_str());

    {
        std::ofstream out(path);
        out << "unknown_key = 1\n";
    }
    SelectOptions other;
    CHECK_THROWS_AS(apply_config_file(other, path), ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("fit validates configuration and scaling") {
    auto synth = testsupport::make_synthetic(1, 20, 4, 30);
    const DataMatrix scaled = scale_features(synth.data);

    GafsConfig cfg;
    cfg.hidden_size = 0;
    CHECK_THROWS_AS(fit(scaled, cfg), ConfigError);

    cfg = {};
    cfg.neighbors = 0;
    CHECK_THROWS_AS(fit(scaled, cfg), ConfigError);

    cfg = {};
    cfg.neighbors = 30;  // k > n-1
    CHECK_THROWS_AS(fit(scaled, cfg), ConfigError);

    cfg = {};
    CHECK_THROWS_AS(fit(synth.data, cfg), ConfigError);  // unscaled input
}

TEST_CASE("fit names the objective term that overflows at initialization") {
    auto synth = testsupport::make_synthetic(6, 15, 3, 30);
    const DataMatrix scaled = scale_features(synth.data);

    GafsConfig cfg;
    cfg.hidden_size = 3;
    cfg.neighbors = 4;
    cfg.lambda = 1e308;  // lambda * ||W1||_2,1 overflows
    try {
        fit(scaled, cfg);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("sparsity") != std::string::npos);
    }

    cfg.lambda = 0.01;
    cfg.gamma = 1e308;
    try {
        fit(scaled, cfg);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("graph") != std::string::npos);
    }
}

TEST_CASE("fit with zero penalties reduces the reconstruction loss") {
    auto synth = testsupport::make_synthetic(2, 15, 3, 36);
    const DataMatrix scaled = scale_features(synth.data);

    GafsConfig cfg;
    cfg.hidden_size = 4;
    cfg.neighbors = 5;
    cfg.lambda = 0.0;
    cfg.gamma = 0.0;
    cfg.seed = 5;
    cfg.optimizer.max_iterations = 60;

    const FitResult result = fit(scaled, cfg);
    const double initial = reconstruction_loss(init_params(15, 4, cfg.seed), scaled.values);
    CHECK(reconstruction_loss(result.params, scaled.values) <= initial);
    CHECK(result.graph.empty());  // graph construction skipped when gamma == 0

    // With gamma == 0 the optimized objective equals the sparsity-only path.
    ObjectiveContext ctx;
    ctx.x = scaled.values;
    ctx.lambda = cfg.lambda;
    ctx.gamma = 0.0;
    CHECK(objective(result.params, ctx) ==
          doctest::Approx(reconstruction_loss(result.params, scaled.values)).epsilon(1e-12));
}

TEST_CASE("fit is deterministic under a fixed seed") {
    auto synth = testsupport::make_synthetic(3, 12, 3, 24);
    const DataMatrix scaled = scale_features(synth.data);

    GafsConfig cfg;
    cfg.hidden_size = 3;
    cfg.neighbors = 4;
    cfg.lambda = 0.01;
    cfg.gamma = 1e-3;
    cfg.seed = 11;
    cfg.optimizer.max_iterations = 40;

    const FitResult a = fit(scaled, cfg);
    const FitResult b = fit(scaled, cfg);
    CHECK(a.ranking.order == b.ranking.order);
    CHECK(a.ranking.scores == b.ranking.scores);
    CHECK(a.trace.objective == b.trace.objective);
}

TEST_CASE("fit recovers informative features on a small synthetic instance") {
    auto synth = testsupport::make_synthetic(4, 40, 5, 120);
    const DataMatrix scaled = scale_features(synth.data);

    GafsConfig cfg;
    cfg.hidden_size = 5;
    cfg.neighbors = 5;
    cfg.lambda = 0.01;
    cfg.gamma = 1e-3;
    cfg.seed = 1;

    const FitResult result = fit(scaled, cfg);
    const auto top = top_features(result.ranking, 5);
    CHECK(testsupport::count_informative_in_top(top, synth.informative) >= 4);
}

TEST_CASE("raising one encoder column's scale cannot lower its rank") {
    Matrix w1(2, 4);
    w1 << 0.5, 1.0, 0.2, 0.8,
          0.1, 0.3, 0.9, 0.4;
    const FeatureRanking before = rank_features(feature_scores(w1));
    auto rank_of = [](const FeatureRanking& r, int feature) {
        for (std::size_t pos = 0; pos < r.order.size(); ++pos)
            if (r.order[pos] == feature) return static_cast<int>(pos);
        return -1;
    };
    for (int feature = 0; feature < 4; ++feature) {
        Matrix scaled = w1;
        scaled.col(feature) *= 3.0;
        const FeatureRanking after = rank_features(feature_scores(scaled));
        CHECK(rank_of(after, feature) <= rank_of(before, feature));
    }
}
