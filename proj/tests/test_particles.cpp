#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/numeric.hpp"
#include "mfg/particles.hpp"

using namespace mfg;

namespace {

ModelCoefficients free_model(double sigma_ind, double sigma_com) {
    // kappa = 0 turns the gallery drift off.
    return make_model("ou-common", {{"kappa", 0.0}, {"sigma", sigma_ind}, {"a", sigma_com}});
}

}  // namespace

TEST_CASE("pure common noise moves every particle by the same shock") {
    const ModelCoefficients m = free_model(0.0, 1.0);
    const NoiseBundle noise(1e-3, 10, 8, 5u, 0u);
    ParticleEnsemble ens;
    ens.positions = {-1.0, -0.5, 0.0, 0.5, 1.0};
    const ParticleEnsemble next = step_particles(ens, m, zero_policy(), noise, 0);
    for (int i = 0; i < 5; ++i)
        CHECK(next.positions[static_cast<size_t>(i)] - ens.positions[static_cast<size_t>(i)] ==
              doctest::Approx(noise.dW(0)).epsilon(1e-14));
}

TEST_CASE("pure idiosyncratic noise moves particle i by its own increment") {
    const ModelCoefficients m = free_model(1.0, 0.0);
    const NoiseBundle noise(1e-3, 10, 8, 5u, 1u);
    ParticleEnsemble ens;
    ens.positions = {0.0, 0.0, 0.0, 0.0};
    const ParticleEnsemble next = step_particles(ens, m, zero_policy(), noise, 3);
    for (int i = 0; i < 4; ++i)
        CHECK(next.positions[static_cast<size_t>(i)] == doctest::Approx(noise.dB(i, 3)).epsilon(1e-14));
}

TEST_CASE("one-step mean identity for the mean-reverting model") {
    const ModelCoefficients m = make_model("ou-common", {{"kappa", 1.0}, {"a", 0.5}});
    const NoiseBundle noise(1e-3, 5, 64, 6u, 0u);
    ParticleEnsemble ens;
    for (int i = 0; i < 64; ++i) ens.positions.push_back(0.1 * i - 3.0);
    const double mean_before = mean(ens.positions);
    const ParticleEnsemble next = step_particles(ens, m, zero_policy(), noise, 0);
    double db_mean = 0.0;
    for (int i = 0; i < 64; ++i) db_mean += noise.dB(i, 0);
    db_mean /= 64.0;
    // The mean-reverting drift cancels in the average: the sample mean
    // moves by a dW + sigma dB-bar exactly.
    CHECK(mean(next.positions) - mean_before ==
          doctest::Approx(0.5 * noise.dW(0) + db_mean).epsilon(1e-12));
}

TEST_CASE("single free particle follows the common path exactly") {
    const ModelCoefficients m = free_model(0.0, 1.0);
    const NoiseBundle noise(1e-3, 200, 1, 7u, 2u);
    const auto traj = simulate_ensemble(m, zero_policy(), 1, noise, [](int) { return 0.4; });
    CHECK(traj.back().positions[0] ==
          doctest::Approx(0.4 + noise.W_path().back()).epsilon(1e-12));
}

TEST_CASE("trajectories are bit-identical under seed replay") {
    const ModelCoefficients m = make_model("ou-common", {{"a", 0.3}});
    const NoiseBundle n1(1e-3, 50, 16, 11u, 4u);
    const NoiseBundle n2(1e-3, 50, 16, 11u, 4u);
    const auto t1 = simulate_ensemble(m, zero_policy(), 16, n1, gaussian_x0(n1, 0.0, 1.0));
    const auto t2 = simulate_ensemble(m, zero_policy(), 16, n2, gaussian_x0(n2, 0.0, 1.0));
    for (size_t n = 0; n < t1.size(); ++n)
        CHECK(t1[n].positions == t2[n].positions);
}

TEST_CASE("exchangeability: permuting particles permutes trajectories") {
    const ModelCoefficients m = make_model("ou-common", {{"a", 0.3}});
    const double dt = 1e-3, dW = 0.02;
    const std::vector<double> x0 = {-1.0, 0.2, 0.8, 1.5};
    const std::vector<double> db = {0.01, -0.03, 0.002, 0.04};
    const std::vector<int> perm = {2, 0, 3, 1};

    std::vector<double> out(4), out_perm(4);
    std::vector<double> x0p(4);
    std::vector<double> dbp(4);
    for (int i = 0; i < 4; ++i) {
        x0p[static_cast<size_t>(i)] = x0[static_cast<size_t>(perm[static_cast<size_t>(i)])];
        dbp[static_cast<size_t>(i)] = db[static_cast<size_t>(perm[static_cast<size_t>(i)])];
    }
    step_positions(x0, out, m, nullptr, zero_policy(), 0.0, dt, dW,
                   [&](int i) { return db[static_cast<size_t>(i)]; }, 0);
    step_positions(x0p, out_perm, m, nullptr, zero_policy(), 0.0, dt, dW,
                   [&](int i) { return dbp[static_cast<size_t>(i)]; }, 0);
    for (int i = 0; i < 4; ++i)
        CHECK(out_perm[static_cast<size_t>(i)] ==
              doctest::Approx(out[static_cast<size_t>(perm[static_cast<size_t>(i)])]).epsilon(1e-14));
}

TEST_CASE("payoff: zero and constant-control running cost") {
    ModelCoefficients m = make_model("ou-common", {{"kappa", 0.0}, {"sigma", 1.0}, {"a", 0.2}});
    m.terminal_cost = [](double, const MeasureRef&) { return 0.0; };
    const double T = 0.5, dt = 1e-3;
    const NoiseBundle noise(dt, 500, 4, 3u, 0u);
    const auto traj0 = simulate_ensemble(m, zero_policy(), 4, noise, gaussian_x0(noise, 0.0, 1.0));
    CHECK(payoff_tagged(m, traj0, zero_policy(), noise) == 0.0);

    const Policy uc = constant_policy(0.7);
    const auto trajc = simulate_ensemble(m, uc, 4, noise, gaussian_x0(noise, 0.0, 1.0));
    CHECK(payoff_tagged(m, trajc, uc, noise) ==
          doctest::Approx(0.5 * 0.7 * 0.7 * T).epsilon(1e-12));
}

TEST_CASE("mean and payoff against the discrete moment recursion") {
    const double kappa = 1.0, sigma = 1.0, a = 0.5, dt = 1e-3, T = 0.1;
    const int steps = 100, N = 800, seeds = 200;
    const ModelCoefficients m =
        make_model("ou-common", {{"kappa", kappa}, {"sigma", sigma}, {"a", a}});
    const double m0 = 0.3, sd0 = 0.8;

    std::vector<double> mean_gap(seeds), payoffs(seeds);
    for (int s = 0; s < seeds; ++s) {
        const NoiseBundle noise(dt, steps, N, 21u, static_cast<uint32_t>(s));
        const auto traj = simulate_ensemble(m, zero_policy(), N, noise, gaussian_x0(noise, m0, sd0));
        mean_gap[static_cast<size_t>(s)] =
            mean(traj.back().positions) - a * noise.W_path().back();
        payoffs[static_cast<size_t>(s)] = payoff_tagged(m, traj, zero_policy(), noise);
    }
    // E[mean(X_T) - a W_T] = m0: the drift averages out exactly.
    const double gap = mean(mean_gap) - m0;
    CHECK(std::fabs(gap) <= 3.0 * standard_error(mean_gap) + 1e-12);

    // Exact discrete recursion for (E X^2, E X m-bar, E m-bar^2) of the
    // Euler scheme; payoff = E x_T^2 / 2 with V_T = x^2/2, J-term zero.
    const double v0 = sd0 * sd0;
    double p = m0 * m0 + v0, q = m0 * m0 + v0 / N, r = m0 * m0 + v0 / N;
    const double alpha = 1.0 - kappa * dt, beta = kappa * dt;
    for (int n = 0; n < steps; ++n) {
        const double p_next = alpha * alpha * p + 2.0 * alpha * beta * q + beta * beta * r +
                              sigma * sigma * dt + a * a * dt;
        const double q_next = alpha * q + beta * r + sigma * sigma * dt / N + a * a * dt;
        const double r_next = r + sigma * sigma * dt / N + a * a * dt;
        p = p_next; q = q_next; r = r_next;
    }
    const double oracle = 0.5 * p;
    CHECK(std::fabs(mean(payoffs) - oracle) <= 3.0 * standard_error(payoffs));
}

TEST_CASE("tagged pair reduces to the plain ensemble when controls agree") {
    const ModelCoefficients m = make_model("ou-common", {{"a", 0.3}});
    const NoiseBundle noise(1e-3, 80, 8, 13u, 0u);
    const Policy u = constant_policy(0.4);
    const auto plain = simulate_ensemble(m, u, 8, noise, gaussian_x0(noise, 0.0, 1.0));
    const TaggedRun tagged = simulate_tagged_pair(m, u, u, 8, noise, gaussian_x0(noise, 0.0, 1.0));
    for (size_t n = 0; n < plain.size(); ++n)
        CHECK(plain[n].positions == tagged.trajectory[n].positions);
    CHECK(tagged.payoff == payoff_tagged(m, plain, u, noise));
}

TEST_CASE("tagged pair: opposite constant controls drift apart deterministically") {
    const ModelCoefficients m = free_model(1.0, 0.0);
    const double dt = 1e-3;
    const int steps = 100;
    const NoiseBundle noise(dt, steps, 2, 17u, 0u);
    const TaggedRun run = simulate_tagged_pair(m, constant_policy(1.0), constant_policy(-1.0), 2,
                                               noise, [](int) { return 0.0; });
    double b1 = 0.0, b2 = 0.0;
    for (int n = 0; n < steps; ++n) {
        b1 += noise.dB(0, n);
        b2 += noise.dB(1, n);
    }
    const double T = steps * dt;
    CHECK(run.trajectory.back().positions[0] == doctest::Approx(T + b1).epsilon(1e-12));
    CHECK(run.trajectory.back().positions[1] == doctest::Approx(-T + b2).epsilon(1e-12));
}

TEST_CASE("divergence reports the particle and the step") {
    ModelCoefficients m = free_model(1.0, 0.0);
    m.b1.value = [](double, double, const MeasureRef&) {
        return std::numeric_limits<double>::infinity();
    };
    const NoiseBundle noise(1e-3, 5, 2, 1u, 0u);
    ParticleEnsemble ens;
    ens.positions = {0.0, 0.0};
    CHECK_THROWS_WITH_AS(step_particles(ens, m, zero_policy(), noise, 0),
                         doctest::Contains("particle 0"), std::runtime_error);
}
