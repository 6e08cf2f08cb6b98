#pragma once

#include <string>
#include <vector>

#include "mfg/hjb.hpp"
#include "mfg/model.hpp"

namespace mfg {

struct NamedDeviation {
    std::string name;
    PolicyField field;
};

// The shipped feedback perturbation family of a candidate crowd policy:
// additive constants (both signs), gradient rescalings, and time-shifted
// fields. Values are clamped to the admissible box after perturbation.
std::vector<NamedDeviation> build_deviation_family(const PolicyField& u_com,
                                                   const ModelCoefficients& coeffs,
                                                   const std::vector<double>& additive,
                                                   const std::vector<double>& rescale,
                                                   const std::vector<double>& timeshift_fractions);

struct NashLevel {
    int N = 0;
    int groups = 0;
    double eps_hat = 0.0;      // max over deviations of mean payoff gain
    double ci_lo = 0.0;        // bootstrap percentile CI of eps_hat
    double ci_hi = 0.0;
    double ci_half = 0.0;      // half-width used in the upper-bound curve
    double null_gap = 0.0;     // gain of the null deviation, exactly 0 by coupling
    std::vector<double> dev_mean;
    std::vector<double> dev_se;
    int best_index = -1;
};

struct NashTable {
    std::vector<std::string> deviation_names;
    std::vector<NashLevel> levels;
    int n_seeds = 0;
};

struct NashOptions {
    int n_seeds = 128;
    uint32_t master_seed = 1;
    uint32_t seed_offset = 0;
    int groups_base = 1;       // groups at level N scale as (N/N_min)^2
    double init_mean = 0.0;
    double init_sd = 1.0;
    int workers = 1;
    int bootstrap_resamples = 1000;
};

// Coupled estimate of the family-restricted equilibrium gap: for each N,
// eps(N) = max over deviations of [payoff(everyone u_com) -
// payoff(deviator, others u_com)], estimated with common random numbers
// across deviations and N-levels (one W per seed, nested idiosyncratic
// rows, group-averaged payoffs). The estimate is a lower bound of the
// true gap restricted to the family; eps + CI gives the upper-bound
// curve the rate test regresses.
NashTable epsilon_nash_estimate(const ModelCoefficients& coeffs, const PolicyField& u_com,
                                const std::vector<NamedDeviation>& deviations,
                                const std::vector<int>& N_list, double dt, int n_steps,
                                const NashOptions& options);

}  // namespace mfg
