#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfg/hjb.hpp"
#include "mfg/model.hpp"
#include "mfg/spde.hpp"

using namespace mfg;

namespace {

MeasurePath frozen_path(const ModelCoefficients& m, const Grid1D& g, double dt, int steps) {
    const GridMeasure v0 = gaussian_measure(g, 0.0, 0.8);
    const std::vector<double> W(static_cast<size_t>(steps) + 1, 0.0);
    return solve_spde(m, zero_policy(), v0, W, dt, SpdeMethod::ito);
}

}  // namespace

TEST_CASE("best response: closed form and clamping") {
    const ModelCoefficients m = make_model("ou-common");
    const Grid1D g(-5.0, 5.0, 201);
    const GridMeasure mu = gaussian_measure(g, 0.0, 1.0);
    const MeasureRef ref(mu);
    bool clamped = false;
    CHECK(best_response(m, 0.7, 0.0, 0.0, ref, &clamped) == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(!clamped);

    ModelCoefficients boxed = m;
    boxed.u_box = {-1.0, 1.0};
    CHECK(best_response(boxed, -2.0, 0.0, 0.0, ref, &clamped) == doctest::Approx(1.0));
    CHECK(clamped);
}

TEST_CASE("best response agrees with dense grid search for a quartic cost") {
    ModelCoefficients m = make_model("ou-common");
    m.quadratic_cost_in_u = false;
    m.running_cost = [](double, double, const MeasureRef&, double u) {
        return 0.5 * u * u + 0.1 * u * u * u * u;
    };
    m.running_cost_du = [](double, double, const MeasureRef&, double u) {
        return u + 0.4 * u * u * u;
    };
    const Grid1D g(-5.0, 5.0, 201);
    const GridMeasure mu = gaussian_measure(g, 0.0, 1.0);
    const MeasureRef ref(mu);
    for (double dvdx : {-2.0, -0.3, 0.0, 0.9, 3.1}) {
        const double u_star = best_response(m, dvdx, 0.0, 0.0, ref);
        double best_u = m.u_box.lo, best_val = 1e300;
        for (int k = 0; k <= 10000; ++k) {
            const double u = m.u_box.lo + (m.u_box.hi - m.u_box.lo) * k / 10000.0;
            const double val = u * dvdx + m.running_cost(0.0, 0.0, ref, u);
            if (val < best_val) { best_val = val; best_u = u; }
        }
        CHECK(std::fabs(u_star - best_u) < 1e-3);
    }
}

TEST_CASE("best response flags a non-convex running cost") {
    ModelCoefficients m = make_model("ou-common");
    m.quadratic_cost_in_u = false;
    m.running_cost = [](double, double, const MeasureRef&, double u) { return -u * u; };
    m.running_cost_du = [](double, double, const MeasureRef&, double u) { return -2.0 * u; };
    const Grid1D g(-5.0, 5.0, 201);
    const GridMeasure mu = gaussian_measure(g, 0.0, 1.0);
    CHECK_THROWS_WITH_AS(best_response(m, 0.5, 0.0, 0.0, MeasureRef(mu)),
                         doctest::Contains("convex"), std::runtime_error);
}

TEST_CASE("zero data fixes V = 0, u = 0") {
    ModelCoefficients m = make_model("ou-common", {{"kappa", 0.0}, {"a", 0.0}});
    m.terminal_cost = [](double, const MeasureRef&) { return 0.0; };
    const Grid1D g(-4.0, 4.0, 161);
    const double dt = 1e-3;
    const MeasurePath path = frozen_path(m, g, dt, 100);
    const HjbResult res = hjb_backward(m, path);
    for (const auto& row : res.value.V)
        for (double v : row) CHECK(v == 0.0);
    for (const auto& row : res.policy.u_values)
        for (double u : row) CHECK(u == 0.0);
}

TEST_CASE("interior residual of the backward sweep is second order in h") {
    // Frozen drift (kappa = 0), quadratic terminal cost: plug V back into
    // the equation with independent central differences in t and x.
    const ModelCoefficients m = make_model("ou-common", {{"kappa", 0.0}, {"a", 0.0}});
    auto residual_for = [&](int n_points, double dt, int steps) {
        const Grid1D g(-6.0, 6.0, n_points);
        const MeasurePath path = frozen_path(m, g, dt, steps);
        const HjbResult res = hjb_backward(m, path);
        double max_res = 0.0;
        const int nq = n_points / 4;
        for (int n = 1; n + 1 < static_cast<int>(res.value.V.size()); ++n) {
            const auto vx = diff1_values(g, res.value.V[static_cast<size_t>(n)]);
            const auto vxx = diff2_values(g, res.value.V[static_cast<size_t>(n)]);
            for (int j = nq; j < n_points - nq; ++j) {
                const double dvdt = (res.value.V[static_cast<size_t>(n) + 1][static_cast<size_t>(j)] -
                                     res.value.V[static_cast<size_t>(n) - 1][static_cast<size_t>(j)]) /
                                    (2.0 * dt);
                // J = u^2/2 with b = u: min_u u vx + u^2/2 = -vx^2/2.
                const double ham = -0.5 * vx[static_cast<size_t>(j)] * vx[static_cast<size_t>(j)];
                const double r =
                    dvdt + ham + 0.5 * m.sigma_tot_sq(g.x(j)) * vxx[static_cast<size_t>(j)];
                max_res = std::max(max_res, std::fabs(r));
            }
        }
        return max_res;
    };
    const double r1 = residual_for(121, 8e-3, 50);
    const double r2 = residual_for(241, 4e-3, 100);
    CHECK(r1 < 1.0 * (8e-3 + 0.1 * 0.1));
    CHECK(r1 / r2 > 1.6);  // dominated by the O(dt) + O(h^2) scheme error
}

TEST_CASE("adding a constant to the running cost shifts V by (T - t) c") {
    ModelCoefficients m = make_model("ou-common", {{"a", 0.0}});
    const Grid1D g(-5.0, 5.0, 201);
    const double dt = 1e-3;
    const int steps = 200;
    const MeasurePath path = frozen_path(m, g, dt, steps);
    const HjbResult base = hjb_backward(m, path);

    ModelCoefficients shifted = m;
    const double c = 0.37;
    shifted.running_cost = [c](double, double, const MeasureRef&, double u) {
        return 0.5 * u * u + c;
    };
    const HjbResult up = hjb_backward(shifted, path);
    for (size_t n = 0; n < base.value.V.size(); ++n) {
        const double horizon = path.times.back() - path.times[n];
        for (int j = 0; j < g.n_points; ++j)
            CHECK(up.value.V[n][static_cast<size_t>(j)] -
                      base.value.V[n][static_cast<size_t>(j)] ==
                  doctest::Approx(horizon * c).epsilon(1e-8));
    }
}

TEST_CASE("hjb enforces its CFL bound") {
    const ModelCoefficients m = make_model("ou-common", {{"a", 0.0}});
    const Grid1D g(-4.0, 4.0, 401);
    const MeasurePath path = frozen_path(m, g, 5e-4, 100);
    MeasurePath bad = path;
    for (double& t : bad.times) t *= 100.0;  // dt now violates h^2 bound
    CHECK_THROWS_WITH_AS(hjb_backward(m, bad), doctest::Contains("cfl"), std::runtime_error);
}

TEST_CASE("policy field interpolation matches its nodes") {
    const Grid1D g(0.0, 1.0, 11);
    std::vector<double> times = {0.0, 0.1, 0.2};
    PolicyField f = PolicyField::constant(g, times, 0.0);
    for (int n = 0; n < 2; ++n)
        for (int j = 0; j < 11; ++j)
            f.u_values[static_cast<size_t>(n)][static_cast<size_t>(j)] = n + g.x(j);
    CHECK(f.at(0.0, 0.35) == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(f.at(0.1, 0.5) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(f.at(0.19, 1.0) == doctest::Approx(2.0).epsilon(1e-12));  // clamps to the last row
    CHECK(f.at(5.0, 2.0) == doctest::Approx(2.0).epsilon(1e-12));   // clamps x and t
}
