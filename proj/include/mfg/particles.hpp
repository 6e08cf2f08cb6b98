#pragma once

#include <functional>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/policy.hpp"
#include "mfg/rng.hpp"

namespace mfg {

struct ParticleEnsemble {
    std::vector<double> positions;
    double t = 0.0;

    int size() const { return static_cast<int>(positions.size()); }
};

// Explicit Euler-Maruyama update of all particles over step `step_index`
// of the noise mesh, with the empirical measure frozen at step start:
//   X^i += b(t, X^i, mu^N, u^i) dt + sigma_ind(X^i) dB^i + sigma_com(X^i) dW.
// Player 0 uses u_ind when given, everyone else u_com. Reads from `x`,
// writes to `x_out` (may not alias); dB_of(i) supplies the idiosyncratic
// increment of particle i for this step. Throws a divergence error naming
// the particle and step if a position stops being finite.
void step_positions(const std::vector<double>& x, std::vector<double>& x_out,
                    const ModelCoefficients& coeffs, const Policy* u_ind, const Policy& u_com,
                    double t, double dt, double dW, const std::function<double(int)>& dB_of,
                    int step_index);

// Single functional step on an ensemble (allocating convenience wrapper).
ParticleEnsemble step_particles(const ParticleEnsemble& ens, const ModelCoefficients& coeffs,
                                const Policy& policy_common, const NoiseBundle& noise,
                                int step_index);

// Full trajectory on the bundle's mesh; deterministic given the seed.
// x0_sampler(i) supplies the initial position of particle i.
std::vector<ParticleEnsemble> simulate_ensemble(const ModelCoefficients& coeffs,
                                                const Policy& policy, int N,
                                                const NoiseBundle& noise,
                                                const std::function<double(int)>& x0_sampler);

// Realized cost of player 0 along a trajectory: left-endpoint Riemann sum
// of the running cost plus the terminal cost against the final empirical
// measure. Expectations over seeds are the caller's business.
double payoff_tagged(const ModelCoefficients& coeffs,
                     const std::vector<ParticleEnsemble>& trajectory,
                     const Policy& policy_of_player1, const NoiseBundle& noise);

struct TaggedRun {
    std::vector<ParticleEnsemble> trajectory;
    double payoff = 0.0;
};

// Player 0 uses u_ind, players 1..N-1 use u_com; payoff is player 0's.
TaggedRun simulate_tagged_pair(const ModelCoefficients& coeffs, const Policy& u_ind,
                               const Policy& u_com, int N, const NoiseBundle& noise,
                               const std::function<double(int)>& x0_sampler);

// Gaussian initial sampler tied to the bundle's reserved init stream,
// reading rows starting at row_offset.
std::function<double(int)> gaussian_x0(const NoiseBundle& noise, double mean, double sd,
                                       int row_offset = 0);

}  // namespace mfg
