#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfg/generators.hpp"
#include "mfg/rng.hpp"

using namespace mfg;

namespace {

CylinderFunctional mean_sq() {
    Kernel2 k{[](double x, double y) { return x * y; }, [](double, double y) { return y; },
              [](double, double) { return 0.0; }, [](double, double) { return 1.0; }};
    return CylinderFunctional::single(MomentFunctional::pairwise(k, "mean-squared"));
}

CylinderFunctional linear_x2() {
    Kernel1 k{[](double x) { return x * x; }, [](double x) { return 2.0 * x; },
              [](double) { return 2.0; }};
    return CylinderFunctional::single(MomentFunctional::linear(k, "second-moment"));
}

std::vector<double> random_positions(int n, uint32_t tag) {
    std::vector<double> pos(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        pos[static_cast<size_t>(i)] =
            -2.0 + 4.0 * philox_uniform({4u, tag, static_cast<uint32_t>(i), 0u}, {2718u, 0u});
    return pos;
}

}  // namespace

TEST_CASE("constant functionals sit in the kernel of every generator piece") {
    Kernel1 k_const{[](double) { return 2.5; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
    const CylinderFunctional F = CylinderFunctional::single(MomentFunctional::linear(k_const));
    const ModelCoefficients m = make_model("ou-common");
    const std::vector<double> pos = {-1.0, 0.0, 1.0};
    const MeasureRef mu{std::span<const double>(pos)};
    CHECK(std::fabs(apply_AN_fd(m, zero_policy(), 0.0, F, pos)) < 1e-8);
    CHECK(apply_lambda_lim(m, zero_policy(), 0.0, F, mu) == 0.0);
    CHECK(apply_lambda_corr(m, F, mu) == 0.0);
}

TEST_CASE("additive coordinate functions have no cross-derivative term") {
    // f = F(mu) with a linear functional is a sum of single-coordinate
    // terms: the pair term of A_N vanishes, the B-part sums the diffusion.
    const ModelCoefficients m = make_model("ou-common", {{"kappa", 0.0}, {"sigma", 1.0}, {"a", 0.5}});
    const CylinderFunctional F = linear_x2();
    const std::vector<double> pos = {-0.7, 0.1, 0.4, 1.2};
    // A_N F = sum_i 1/2 sigma_tot^2 * (2/N) = sigma_ind^2 + sigma_com^2.
    CHECK(apply_AN_fd(m, zero_policy(), 0.0, F, pos) == doctest::Approx(1.25).epsilon(1e-7));
}

TEST_CASE("lambda_corr: closed form, linear kill, sigma scaling") {
    const std::vector<double> pos = {-1.0, -0.2, 0.3, 0.9, 1.4};
    const MeasureRef mu{std::span<const double>(pos)};
    const ModelCoefficients m1 = make_model("ou-common", {{"sigma", 1.0}});
    const ModelCoefficients m2 = make_model("ou-common", {{"sigma", 2.0}});

    CHECK(apply_lambda_corr(m1, linear_x2(), mu) == 0.0);
    // d2F/dmu^2 = 2xy has mixed partial 2; with sigma_ind = 1 the value is 1.
    CHECK(apply_lambda_corr(m1, mean_sq(), mu) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(apply_lambda_corr(m2, mean_sq(), mu) ==
          doctest::Approx(4.0 * apply_lambda_corr(m1, mean_sq(), mu)).epsilon(1e-12));

    ModelCoefficients m0 = make_model("ou-common");
    m0.sigma_ind = [](double) { return 0.0; };
    CHECK(apply_lambda_corr(m0, mean_sq(), mu) == 0.0);
}

TEST_CASE("decomposition residual: hand-checked mean-squared case") {
    // b = 0, sigma_ind = s, sigma_com = a constants, F = (mean)^2:
    // A_N F = (s^2 + a^2)/2 * 2/N + a^2 (N-1)/N; Lambda_lim = a^2;
    // Lambda_corr = s^2. The identity is exact.
    const double s = 1.3, a = 0.7;
    const ModelCoefficients m =
        make_model("ou-common", {{"kappa", 0.0}, {"sigma", s}, {"a", a}});
    const std::vector<double> pos = {-1.0, -0.5, 0.0, 0.5, 1.0};
    const MeasureRef mu{std::span<const double>(pos)};
    const double n = 5.0;
    CHECK(apply_lambda_lim(m, zero_policy(), 0.0, mean_sq(), mu) ==
          doctest::Approx(a * a).epsilon(1e-12));
    CHECK(apply_lambda_corr(m, mean_sq(), mu) == doctest::Approx(s * s).epsilon(1e-12));
    CHECK(apply_AN_fd(m, zero_policy(), 0.0, mean_sq(), pos) ==
          doctest::Approx(a * a + s * s / n).epsilon(1e-7));
    CHECK(decomposition_residual(m, zero_policy(), 0.0, mean_sq(), pos) < 1e-6);
}

TEST_CASE("decomposition residual across the gallery and ensemble sizes") {
    const auto gallery = functional_gallery();
    for (const char* name : {"ou-common", "var-a"}) {
        const ModelCoefficients m = make_model(name);
        for (const auto& F : gallery) {
            for (int N : {2, 5, 8}) {
                for (uint32_t c = 0; c < 5; ++c) {
                    const auto pos = random_positions(N, 1000u * static_cast<uint32_t>(N) + c);
                    CHECK(decomposition_residual(m, zero_policy(), 0.3, F, pos) < 1e-5);
                }
            }
        }
    }
}

TEST_CASE("decomposition residual with a nontrivial control field") {
    const ModelCoefficients m = make_model("ou-common", {{"kappa", 1.0}, {"a", 0.5}});
    const Policy u = [](double, double x, const MeasureRef& mu) {
        return 0.3 * std::tanh(x) - 0.1 * mu.moment1();
    };
    for (int N : {3, 8}) {
        const auto pos = random_positions(N, 77u + static_cast<uint32_t>(N));
        CHECK(decomposition_residual(m, u, 0.3, functional_gallery()[3], pos) < 1e-5);
    }
}

TEST_CASE("all three operations are linear in F") {
    const ModelCoefficients m = make_model("ou-common");
    const auto pos = random_positions(6, 4u);
    const MeasureRef mu{std::span<const double>(pos)};
    const CylinderFunctional A = mean_sq();
    const CylinderFunctional B = linear_x2();
    CylinderFunctional combo;
    combo.weights = {2.0, -0.5};
    combo.parts = {A.parts[0], B.parts[0]};

    auto lin_check = [&](auto&& op) {
        const double lhs = op(combo);
        const double rhs = 2.0 * op(A) - 0.5 * op(B);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    };
    lin_check([&](const CylinderFunctional& F) { return apply_lambda_lim(m, zero_policy(), 0.0, F, mu); });
    lin_check([&](const CylinderFunctional& F) { return apply_lambda_corr(m, F, mu); });
    lin_check([&](const CylinderFunctional& F) { return apply_AN_fd(m, zero_policy(), 0.0, F, pos); });
}

TEST_CASE("oracle guards its configuration size") {
    const ModelCoefficients m = make_model("ou-common");
    CHECK_THROWS(apply_AN_fd(m, zero_policy(), 0.0, mean_sq(), std::vector<double>(65, 0.0)));
    CHECK_THROWS(apply_AN_fd(m, zero_policy(), 0.0, mean_sq(), {}));
}
