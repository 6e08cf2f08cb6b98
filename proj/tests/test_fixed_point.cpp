#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfg/fixed_point.hpp"
#include "mfg/nash.hpp"
#include "mfg/rng.hpp"

using namespace mfg;

TEST_CASE("trivial data converge in one iteration with zero residual") {
    ModelCoefficients m = make_model("ou-common", {{"kappa", 0.0}, {"a", 0.0}});
    m.terminal_cost = [](double, const MeasureRef&) { return 0.0; };
    const Grid1D g(-4.0, 4.0, 161);
    const GridMeasure v0 = gaussian_measure(g, 0.0, 0.8);
    const FixedPointResult res = mfg_fixed_point_deterministic(m, v0, 1e-3, 100, 10, 0.5, 1e-12);
    CHECK(res.converged);
    CHECK(res.residual_history.size() == 1);
    CHECK(res.residual_history[0] == 0.0);
}

TEST_CASE("deterministic loop refuses common noise") {
    const ModelCoefficients m = make_model("ou-common", {{"a", 0.3}});
    const Grid1D g(-4.0, 4.0, 161);
    const GridMeasure v0 = gaussian_measure(g, 0.0, 0.8);
    CHECK_THROWS(mfg_fixed_point_deterministic(m, v0, 1e-3, 50, 5, 0.5));
}

TEST_CASE("LQ model: residual drops below 1e-4 within 30 damped iterations") {
    const ModelCoefficients m = make_model("ou-common", {{"kappa", 1.0}, {"a", 0.0}});
    const Grid1D g(-6.0, 6.0, 241);
    const GridMeasure v0 = gaussian_measure(g, 0.3, 0.8);
    const double dt = 1e-3;
    const int steps = 250;  // T = 0.25
    const FixedPointResult res = mfg_fixed_point_deterministic(m, v0, dt, steps, 30, 0.5, 1e-4);
    CHECK(res.converged);
    CHECK(res.residual_history.back() <= 1e-4);
    // Residuals settle monotonically after the opening iterations.
    for (size_t k = 3; k < res.residual_history.size(); ++k)
        CHECK(res.residual_history[k] <= res.residual_history[k - 1] * (1.0 + 1e-9));
}

TEST_CASE("zero damping never updates the policy") {
    const ModelCoefficients m = make_model("ou-common", {{"kappa", 1.0}, {"a", 0.0}});
    const Grid1D g(-5.0, 5.0, 201);
    const GridMeasure v0 = gaussian_measure(g, 0.2, 0.8);
    const FixedPointResult res = mfg_fixed_point_deterministic(m, v0, 1e-3, 100, 6, 0.0, 0.0);
    for (const auto& row : res.policy.u_values)
        for (double u : row) CHECK(u == 0.0);
    for (size_t k = 1; k < res.residual_history.size(); ++k)
        CHECK(res.residual_history[k] == doctest::Approx(res.residual_history[0]).epsilon(1e-12));
}

TEST_CASE("per-path run on a degenerate path is bit-identical to the deterministic one") {
    const ModelCoefficients m = make_model("ou-common", {{"kappa", 1.0}, {"a", 0.0}});
    const Grid1D g(-5.0, 5.0, 201);
    const GridMeasure v0 = gaussian_measure(g, 0.2, 0.8);
    const double dt = 1e-3;
    const int steps = 150;
    const FixedPointResult det = mfg_fixed_point_deterministic(m, v0, dt, steps, 12, 0.5, 1e-6);
    const std::vector<double> W0(static_cast<size_t>(steps) + 1, 0.0);
    const FixedPointResult pp = mfg_fixed_point_per_path(m, v0, W0, dt, 12, 0.5, 1e-6);
    CHECK(pp.policy.u_values == det.policy.u_values);
    CHECK(pp.residual_history == det.residual_history);
    for (size_t n = 0; n < det.path.slices.size(); ++n)
        CHECK(pp.path.slices[n].density == det.path.slices[n].density);
}

TEST_CASE("per-path residuals decrease with common noise on") {
    const ModelCoefficients m = make_model("ou-common", {{"kappa", 1.0}, {"a", 0.3}});
    const Grid1D g(-6.0, 6.0, 201);
    const GridMeasure v0 = gaussian_measure(g, 0.2, 0.8);
    const double dt = 1e-3;
    const int steps = 200;
    for (uint32_t seed : {0u, 1u}) {
        const NoiseBundle noise(dt, steps, 0, 500u, seed);
        const FixedPointResult res =
            mfg_fixed_point_per_path(m, v0, noise.W_path(), dt, 15, 0.5, 1e-3);
        CHECK(res.residual_history.back() <= 1e-3);
        CHECK(res.note.find("per-path") != std::string::npos);
    }
}

TEST_CASE("deviation family: shapes, clamping and the null member") {
    const ModelCoefficients m = make_model("ou-common", {{"a", 0.0}});
    const Grid1D g(-4.0, 4.0, 101);
    std::vector<double> times(51);
    for (int n = 0; n <= 50; ++n) times[static_cast<size_t>(n)] = 0.01 * n;
    PolicyField u = PolicyField::constant(g, times, 0.4);
    const auto family = build_deviation_family(u, m, {0.1, 0.2}, {0.5, 1.5}, {0.1});
    CHECK(family.size() == 7);  // 4 additive + 2 rescale + 1 time shift
    for (const auto& dev : family) {
        CHECK(dev.field.u_values.size() == u.u_values.size());
        for (const auto& row : dev.field.u_values)
            for (double v : row) {
                CHECK(v >= m.u_box.lo);
                CHECK(v <= m.u_box.hi);
            }
    }
    CHECK(family[0].field.u_values[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(family[1].field.u_values[0][0] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("coupled nash estimate is exactly zero for the null deviation") {
    const ModelCoefficients m = make_model("ou-common", {{"kappa", 1.0}, {"a", 0.0}});
    const Grid1D g(-5.0, 5.0, 101);
    std::vector<double> times(41);
    for (int n = 0; n <= 40; ++n) times[static_cast<size_t>(n)] = 0.005 * n;
    PolicyField u = PolicyField::constant(g, times, 0.0);
    std::vector<NamedDeviation> only_null = {{"null", u}};
    NashOptions opt;
    opt.n_seeds = 4;
    opt.groups_base = 1;
    opt.bootstrap_resamples = 50;
    const NashTable table = epsilon_nash_estimate(m, u, only_null, {8, 16}, 0.005, 40, opt);
    for (const auto& level : table.levels) {
        CHECK(level.eps_hat == 0.0);
        CHECK(level.null_gap == 0.0);
        CHECK(level.ci_lo == 0.0);
        CHECK(level.ci_hi == 0.0);
    }
}
