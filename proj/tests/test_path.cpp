#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "abm/common.hpp"
#include "abm/model.hpp"
#include "abm/path.hpp"
#include "abm/synth.hpp"

namespace {

struct Fixture {
    abm::Dataset data;
    abm::EncodedDesign design;
};

Fixture make_fixture(std::size_t rows, std::uint64_t seed) {
    abm::SynthSpec spec = abm::default_spec(rows, 3, seed);
    Fixture f;
    f.data = abm::generate(spec).data;
    f.design = abm::encode(f.data, abm::fit_grid(f.data, 6));
    return f;
}

abm::PathConfig small_config() {
    abm::PathConfig config;
    config.lambda2_count = 5;
    config.lambda2_ratio = 1e-2;
    config.lambda1_multipliers = {0.5, 1.0};
    config.folds = 3;
    config.seed = 4;
    return config;
}

}  // namespace

TEST_CASE("lambda2_max scales inversely with the weights") {
    Fixture f = make_fixture(400, 3);
    std::vector<double> w = abm::default_group_weights(f.design.layout);
    double base = abm::lambda2_max(f.design, f.data.target, w);
    CHECK(base > 0.0);

    std::vector<double> doubled = w;
    for (auto& x : doubled) x *= 2.0;
    double halved = abm::lambda2_max(f.design, f.data.target, doubled);
    CHECK(halved == doctest::Approx(0.5 * base).epsilon(1e-14));

    std::vector<double> ones(f.data.n_rows(), 1.0);
    CHECK_THROWS_AS(abm::lambda2_max(f.design, ones, w), abm::DataError);
}

TEST_CASE("make_folds stratifies both classes") {
    Fixture f = make_fixture(501, 5);
    const std::size_t k = 4;
    std::vector<std::uint8_t> folds = abm::make_folds(f.data.target, k, 9);
    REQUIRE(folds.size() == f.data.n_rows());

    std::vector<std::size_t> pos(k, 0), neg(k, 0);
    for (std::size_t i = 0; i < folds.size(); ++i) {
        REQUIRE(folds[i] < k);
        if (f.data.target[i] == 1.0) {
            ++pos[folds[i]];
        } else {
            ++neg[folds[i]];
        }
    }
    auto spread = [](const std::vector<std::size_t>& v) {
        auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *hi - *lo;
    };
    CHECK(spread(pos) <= 1);
    CHECK(spread(neg) <= 1);

    CHECK(abm::make_folds(f.data.target, k, 9) == folds);  // same seed, same split
    CHECK(abm::make_folds(f.data.target, k, 10) != folds);
}

TEST_CASE("make_folds rejects impossible splits") {
    std::vector<double> y = {1.0, 0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(abm::make_folds(y, 2, 1), abm::DataError);  // one positive, two folds
    std::vector<double> y2 = {1.0, 1.0, 0.0, 0.0};
    CHECK_NOTHROW(abm::make_folds(y2, 2, 1));
    CHECK_THROWS_AS(abm::make_folds(y2, 1, 1), abm::DataError);
}

TEST_CASE("trace walks the grid and selects by the one-SE rule") {
    Fixture f = make_fixture(400, 7);
    abm::PathConfig config = small_config();

    std::size_t fits_seen = 0;
    config.on_fit = [&](const abm::FitResult& fit) {
        ++fits_seen;
        for (std::size_t i = 1; i < fit.trace.size(); ++i) {
            CHECK(fit.trace[i] <= fit.trace[i - 1]);
        }
    };

    abm::PathResult result = abm::trace(f.design, f.data.target, config);
    const std::size_t expected_points = config.lambda2_count * config.lambda1_multipliers.size();
    REQUIRE(result.points.size() == expected_points);
    CHECK(fits_seen == expected_points * (1 + config.folds) + 1);

    // Grid structure: multiplier-major, lambda2 descending from lambda2_max.
    for (std::size_t m = 0; m < config.lambda1_multipliers.size(); ++m) {
        for (std::size_t i = 0; i < config.lambda2_count; ++i) {
            const auto& pt = result.points[m * config.lambda2_count + i];
            CHECK(pt.lambda1 ==
                  doctest::Approx(config.lambda1_multipliers[m] * pt.lambda2).epsilon(1e-14));
            if (i == 0) {
                CHECK(pt.lambda2 == result.lambda2_max_value);
            } else {
                CHECK(pt.lambda2 < result.points[m * config.lambda2_count + i - 1].lambda2);
            }
            if (i + 1 == config.lambda2_count) {
                CHECK(pt.lambda2 ==
                      doctest::Approx(config.lambda2_ratio * result.lambda2_max_value)
                          .epsilon(1e-12));
            }
            CHECK(pt.mean_auc >= 0.0);
            CHECK(pt.mean_auc <= 1.0);
            CHECK(pt.sd_auc >= 0.0);
            CHECK(pt.kept_vars <= f.design.layout.groups());
            CHECK(pt.total_bins <= f.design.layout.total());
        }
    }

    // Exactly one selected point, consistent with the recorded index.
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        if (result.points[i].selected) {
            ++flagged;
            CHECK(i == result.selected);
        }
    }
    CHECK(flagged == 1);

    // Re-derive the one-SE selection from the published point stats.
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.points.size(); ++i) {
        if (result.points[i].mean_auc > result.points[best].mean_auc) best = i;
    }
    double threshold = result.points[best].mean_auc -
                       result.points[best].sd_auc / std::sqrt(static_cast<double>(config.folds));
    auto better = [&](std::size_t lhs, std::size_t rhs) {
        const auto& a = result.points[lhs];
        const auto& b = result.points[rhs];
        if (a.kept_vars != b.kept_vars) return a.kept_vars < b.kept_vars;
        if (a.total_bins != b.total_bins) return a.total_bins < b.total_bins;
        if (a.lambda2 != b.lambda2) return a.lambda2 > b.lambda2;
        return a.lambda1 > b.lambda1;
    };
    std::size_t want = result.points.size();
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        if (result.points[i].mean_auc < threshold) continue;
        if (want == result.points.size() || better(i, want)) want = i;
    }
    CHECK(result.selected == want);

    // The final fit reproduces the selected point's structural counts.
    std::size_t kept = 0, bins = 0;
    for (std::size_t j = 0; j < f.design.layout.groups(); ++j) {
        auto g = result.final_fit.beta.group(j);
        if (abm::group_kept(g, config.tol)) {
            ++kept;
            bins += abm::merged_bin_count(g, config.tol);
        }
    }
    CHECK(kept == result.points[result.selected].kept_vars);
    CHECK(bins == result.points[result.selected].total_bins);
}

TEST_CASE("trace is deterministic") {
    Fixture f = make_fixture(300, 8);
    abm::PathConfig config = small_config();
    abm::PathResult a = abm::trace(f.design, f.data.target, config);
    abm::PathResult b = abm::trace(f.design, f.data.target, config);

    CHECK(a.selected == b.selected);
    CHECK(a.lambda2_max_value == b.lambda2_max_value);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].lambda1 == b.points[i].lambda1);
        CHECK(a.points[i].lambda2 == b.points[i].lambda2);
        CHECK(a.points[i].mean_auc == b.points[i].mean_auc);
        CHECK(a.points[i].sd_auc == b.points[i].sd_auc);
    }
    CHECK(a.final_fit.beta.values == b.final_fit.beta.values);
    CHECK(abm::path_to_csv(a) == abm::path_to_csv(b));
}

TEST_CASE("warm starts never lose to cold starts") {
    Fixture f = make_fixture(400, 9);
    abm::PathConfig config = small_config();
    config.solver.rel_tol = 1e-10;

    std::vector<abm::FitResult> all_fits;
    config.on_fit = [&](const abm::FitResult& fit) { all_fits.push_back(fit); };
    abm::PathResult result = abm::trace(f.design, f.data.target, config);

    // Fits arrive point by point: the full-data fit first, then the folds.
    const std::size_t stride = 1 + config.folds;
    REQUIRE(all_fits.size() == result.points.size() * stride + 1);

    std::vector<double> w = abm::default_group_weights(f.design.layout);
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const auto& pt = result.points[i];
        abm::PenaltyParams params;
        params.lambda1 = pt.lambda1;
        params.lambda2 = pt.lambda2;
        params.group_weights = w;
        abm::FitResult cold = abm::fit(f.design, f.data.target, params, config.solver);
        double warm_obj = abm::objective_at(f.design, f.data.target,
                                            all_fits[i * stride].beta, params);
        CHECK(warm_obj <= cold.trace.back() + 1e-8);
    }
}

TEST_CASE("a single-point grid at lambda2_max keeps nothing") {
    Fixture f = make_fixture(300, 10);
    abm::PathConfig config = small_config();
    config.lambda2_count = 1;
    config.lambda2_ratio = 1.0;
    config.lambda1_multipliers = {1.0};

    abm::PathResult result = abm::trace(f.design, f.data.target, config);
    REQUIRE(result.points.size() == 1);
    CHECK(result.points[0].kept_vars == 0);
    CHECK(result.points[0].total_bins == 0);
    CHECK(result.points[0].mean_auc == 0.5);  // constant scores tie every pair
    for (double v : result.final_fit.beta.values) CHECK(v == 0.0);
}

TEST_CASE("path_to_csv layout") {
    Fixture f = make_fixture(300, 12);
    abm::PathConfig config = small_config();
    abm::PathResult result = abm::trace(f.design, f.data.target, config);
    std::string csv = abm::path_to_csv(result);

    CHECK(csv.rfind("lambda1,lambda2,mean_auc,sd_auc,kept_vars,total_bins,selected\n", 0) == 0);
    std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == result.points.size() + 1);
    std::size_t selected_rows = 0;
    for (std::size_t pos = 0; (pos = csv.find(",1\n", pos)) != std::string::npos; ++pos) {
        ++selected_rows;
    }
    CHECK(selected_rows == 1);
}

TEST_CASE("path config validation") {
    abm::PathConfig config;
    config.lambda2_count = 0;
    CHECK_THROWS_AS(config.validate(), abm::DataError);
    config = {};
    config.lambda2_ratio = 0.0;
    CHECK_THROWS_AS(config.validate(), abm::DataError);
    config = {};
    config.lambda2_ratio = 1.5;
    CHECK_THROWS_AS(config.validate(), abm::DataError);
    config = {};
    config.lambda1_multipliers = {};
    CHECK_THROWS_AS(config.validate(), abm::DataError);
    config = {};
    config.lambda1_multipliers = {-1.0};
    CHECK_THROWS_AS(config.validate(), abm::DataError);
    config = {};
    config.folds = 1;
    CHECK_THROWS_AS(config.validate(), abm::DataError);
    config = {};
    config.tol = -1.0;
    CHECK_THROWS_AS(config.validate(), abm::DataError);
    config = {};
    CHECK_NOTHROW(config.validate());
}
