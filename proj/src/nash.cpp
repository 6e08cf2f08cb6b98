#include "mfg/nash.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mfg/numeric.hpp"
#include "mfg/parallel.hpp"
#include "mfg/particles.hpp"
#include "mfg/rng.hpp"

namespace mfg {

namespace {

PolicyField clamp_field(PolicyField f, const ControlBox& box) {
    for (auto& row : f.u_values)
        for (double& u : row) u = std::clamp(u, box.lo, box.hi);
    return f;
}

// Player 0's realized cost in one N-player group, rows starting at
// row_offset of the bundle. The deviator field applies to player 0 when
// given; everyone else follows u_com.
double group_payoff(const ModelCoefficients& coeffs, const PolicyField* dev,
                    const PolicyField& u_com, int N, const NoiseBundle& noise, int row_offset,
                    double init_mean, double init_sd) {
    const double dt = noise.dt();
    std::vector<double> x(static_cast<size_t>(N)), x_next(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i)
        x[static_cast<size_t>(i)] = init_mean + init_sd * noise.init_normal(row_offset + i);

    const Policy crowd = [&u_com](double t, double xx, const MeasureRef&) { return u_com.at(t, xx); };
    const Policy tagged = [&](double t, double xx, const MeasureRef&) {
        return dev ? dev->at(t, xx) : u_com.at(t, xx);
    };

    double cost = 0.0;
    for (int n = 0; n < noise.n_steps(); ++n) {
        const double t = n * dt;
        {
            const MeasureRef mu{std::span<const double>(x)};
            const double u0 = dev ? dev->at(t, x[0]) : u_com.at(t, x[0]);
            cost += coeffs.running_cost(t, x[0], mu, u0) * dt;
        }
        step_positions(x, x_next, coeffs, &tagged, crowd, t, dt, noise.dW(n),
                       [&](int i) { return noise.dB(row_offset + i, n); }, n);
        x.swap(x_next);
    }
    const MeasureRef mu_T{std::span<const double>(x)};
    return cost + coeffs.terminal_cost(x[0], mu_T);
}

}  // namespace

std::vector<NamedDeviation> build_deviation_family(const PolicyField& u_com,
                                                   const ModelCoefficients& coeffs,
                                                   const std::vector<double>& additive,
                                                   const std::vector<double>& rescale,
                                                   const std::vector<double>& timeshift_fractions) {
    std::vector<NamedDeviation> out;
    for (double d : additive) {
        for (double sign : {+1.0, -1.0}) {
            PolicyField f = u_com;
            for (auto& row : f.u_values)
                for (double& u : row) u += sign * d;
            char name[64];
            std::snprintf(name, sizeof name, "additive%+g", sign * d);
            out.push_back({name, clamp_field(std::move(f), coeffs.u_box)});
        }
    }
    for (double c : rescale) {
        PolicyField f = u_com;
        for (auto& row : f.u_values)
            for (double& u : row) u *= c;
        char name[64];
        std::snprintf(name, sizeof name, "rescale-x%g", c);
        out.push_back({name, clamp_field(std::move(f), coeffs.u_box)});
    }
    for (double frac : timeshift_fractions) {
        PolicyField f = u_com;
        const int n_rows = f.n_steps();
        const int shift = static_cast<int>(std::lround(frac * n_rows));
        for (int n = 0; n < n_rows; ++n) {
            const int src = std::clamp(n + shift, 0, n_rows - 1);
            f.u_values[static_cast<size_t>(n)] = u_com.u_values[static_cast<size_t>(src)];
        }
        char name[64];
        std::snprintf(name, sizeof name, "timeshift%+g", frac);
        out.push_back({name, clamp_field(std::move(f), coeffs.u_box)});
    }
    return out;
}

NashTable epsilon_nash_estimate(const ModelCoefficients& coeffs, const PolicyField& u_com,
                                const std::vector<NamedDeviation>& deviations,
                                const std::vector<int>& N_list, double dt, int n_steps,
                                const NashOptions& options) {
    if (N_list.empty()) throw std::invalid_argument("epsilon_nash_estimate: empty N list");
    const int n_dev = static_cast<int>(deviations.size());
    const int S = options.n_seeds;
    const int n_min = *std::min_element(N_list.begin(), N_list.end());

    NashTable table;
    table.n_seeds = S;
    for (const auto& d : deviations) table.deviation_names.push_back(d.name);

    for (int N : N_list) {
        const int ratio = N / n_min;
        const int groups = std::max(1, options.groups_base * ratio * ratio);
        NashLevel level;
        level.N = N;
        level.groups = groups;

        // delta[d][s] = coupled payoff gain of deviation d at seed s.
        std::vector<std::vector<double>> delta(static_cast<size_t>(n_dev),
                                               std::vector<double>(static_cast<size_t>(S), 0.0));
        std::vector<double> null_gaps(static_cast<size_t>(S), 0.0);

        parallel_for_indexed(S, options.workers, [&](int s) {
            const NoiseBundle noise(dt, n_steps, N * groups, options.master_seed,
                                    options.seed_offset + static_cast<uint32_t>(s));
            double v_com = 0.0;
            std::vector<double> v_dev(static_cast<size_t>(n_dev), 0.0);
            double v_null = 0.0;
            for (int g = 0; g < groups; ++g) {
                const int off = g * N;
                v_com += group_payoff(coeffs, nullptr, u_com, N, noise, off, options.init_mean,
                                      options.init_sd);
                v_null += group_payoff(coeffs, &u_com, u_com, N, noise, off, options.init_mean,
                                       options.init_sd);
                for (int d = 0; d < n_dev; ++d)
                    v_dev[static_cast<size_t>(d)] +=
                        group_payoff(coeffs, &deviations[static_cast<size_t>(d)].field, u_com, N,
                                     noise, off, options.init_mean, options.init_sd);
            }
            const double inv_g = 1.0 / static_cast<double>(groups);
            null_gaps[static_cast<size_t>(s)] = (v_com - v_null) * inv_g;
            for (int d = 0; d < n_dev; ++d)
                delta[static_cast<size_t>(d)][static_cast<size_t>(s)] =
                    (v_com - v_dev[static_cast<size_t>(d)]) * inv_g;
        });

        level.dev_mean.resize(static_cast<size_t>(n_dev));
        level.dev_se.resize(static_cast<size_t>(n_dev));
        for (int d = 0; d < n_dev; ++d) {
            level.dev_mean[static_cast<size_t>(d)] = mean(delta[static_cast<size_t>(d)]);
            level.dev_se[static_cast<size_t>(d)] = standard_error(delta[static_cast<size_t>(d)]);
        }
        level.best_index = static_cast<int>(
            std::max_element(level.dev_mean.begin(), level.dev_mean.end()) - level.dev_mean.begin());
        level.eps_hat = level.dev_mean[static_cast<size_t>(level.best_index)];
        double max_null = 0.0;
        for (double g : null_gaps) max_null = std::max(max_null, std::fabs(g));
        level.null_gap = max_null;

        // Bootstrap the max-over-deviations statistic by resampling seeds.
        const int B = options.bootstrap_resamples;
        std::vector<double> boot(static_cast<size_t>(B));
        const PhiloxKey key{options.master_seed, 0xB007u};
        for (int b = 0; b < B; ++b) {
            double best = -1e300;
            std::vector<double> sums(static_cast<size_t>(n_dev), 0.0);
            for (int s = 0; s < S; ++s) {
                const double u = philox_uniform(
                    {static_cast<uint32_t>(N), static_cast<uint32_t>(b), static_cast<uint32_t>(s), 0u},
                    key);
                const int idx = std::min(S - 1, static_cast<int>(u * S));
                for (int d = 0; d < n_dev; ++d)
                    sums[static_cast<size_t>(d)] += delta[static_cast<size_t>(d)][static_cast<size_t>(idx)];
            }
            for (int d = 0; d < n_dev; ++d) best = std::max(best, sums[static_cast<size_t>(d)] / S);
            boot[static_cast<size_t>(b)] = best;
        }
        std::sort(boot.begin(), boot.end());
        const int lo_idx = static_cast<int>(std::floor(0.025 * (B - 1)));
        const int hi_idx = static_cast<int>(std::ceil(0.975 * (B - 1)));
        level.ci_lo = boot[static_cast<size_t>(lo_idx)];
        level.ci_hi = boot[static_cast<size_t>(hi_idx)];
        level.ci_half = 0.5 * (level.ci_hi - level.ci_lo);

        table.levels.push_back(std::move(level));
    }
    return table;
}

}  // namespace mfg
