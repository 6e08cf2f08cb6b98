#include "mfg/particles.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfg {

void step_positions(const std::vector<double>& x, std::vector<double>& x_out,
                    const ModelCoefficients& coeffs, const Policy* u_ind, const Policy& u_com,
                    double t, double dt, double dW, const std::function<double(int)>& dB_of,
                    int step_index) {
    const int n = static_cast<int>(x.size());
    x_out.resize(x.size());
    const MeasureRef mu{std::span<const double>(x)};
    for (int i = 0; i < n; ++i) {
        const double xi = x[static_cast<size_t>(i)];
        const double u = (i == 0 && u_ind) ? (*u_ind)(t, xi, mu) : u_com(t, xi, mu);
        const double b = drift(coeffs, t, xi, mu, u);
        const double xn = xi + b * dt + coeffs.sigma_ind(xi) * dB_of(i) + coeffs.sigma_com(xi) * dW;
        if (!std::isfinite(xn))
            throw std::runtime_error("particles: divergence at particle " + std::to_string(i) +
                                     ", step " + std::to_string(step_index));
        x_out[static_cast<size_t>(i)] = xn;
    }
}

ParticleEnsemble step_particles(const ParticleEnsemble& ens, const ModelCoefficients& coeffs,
                                const Policy& policy_common, const NoiseBundle& noise,
                                int step_index) {
    if (step_index < 0 || step_index >= noise.n_steps())
        throw std::out_of_range("step_particles: step index outside the noise mesh");
    ParticleEnsemble out;
    out.t = ens.t + noise.dt();
    step_positions(ens.positions, out.positions, coeffs, nullptr, policy_common, ens.t, noise.dt(),
                   noise.dW(step_index), [&](int i) { return noise.dB(i, step_index); },
                   step_index);
    return out;
}

std::vector<ParticleEnsemble> simulate_ensemble(const ModelCoefficients& coeffs,
                                                const Policy& policy, int N,
                                                const NoiseBundle& noise,
                                                const std::function<double(int)>& x0_sampler) {
    if (N < 1) throw std::invalid_argument("simulate_ensemble: need N >= 1");
    if (N > noise.n_streams())
        throw std::invalid_argument("simulate_ensemble: noise bundle has too few streams");
    std::vector<ParticleEnsemble> traj;
    traj.reserve(static_cast<size_t>(noise.n_steps()) + 1);
    ParticleEnsemble ens;
    ens.t = 0.0;
    ens.positions.resize(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) ens.positions[static_cast<size_t>(i)] = x0_sampler(i);
    traj.push_back(ens);
    for (int n = 0; n < noise.n_steps(); ++n) traj.push_back(step_particles(traj.back(), coeffs, policy, noise, n));
    return traj;
}

double payoff_tagged(const ModelCoefficients& coeffs,
                     const std::vector<ParticleEnsemble>& trajectory,
                     const Policy& policy_of_player1, const NoiseBundle& noise) {
    if (trajectory.size() != static_cast<size_t>(noise.n_steps()) + 1)
        throw std::invalid_argument("payoff_tagged: trajectory does not match the noise mesh");
    const double dt = noise.dt();
    double acc = 0.0;
    for (int n = 0; n < noise.n_steps(); ++n) {
        const ParticleEnsemble& ens = trajectory[static_cast<size_t>(n)];
        const MeasureRef mu{std::span<const double>(ens.positions)};
        const double x1 = ens.positions[0];
        const double u1 = policy_of_player1(ens.t, x1, mu);
        acc += coeffs.running_cost(ens.t, x1, mu, u1) * dt;
    }
    const ParticleEnsemble& last = trajectory.back();
    const MeasureRef mu_T{std::span<const double>(last.positions)};
    return acc + coeffs.terminal_cost(last.positions[0], mu_T);
}

TaggedRun simulate_tagged_pair(const ModelCoefficients& coeffs, const Policy& u_ind,
                               const Policy& u_com, int N, const NoiseBundle& noise,
                               const std::function<double(int)>& x0_sampler) {
    if (N < 1) throw std::invalid_argument("simulate_tagged_pair: need N >= 1");
    TaggedRun run;
    run.trajectory.reserve(static_cast<size_t>(noise.n_steps()) + 1);
    ParticleEnsemble ens;
    ens.t = 0.0;
    ens.positions.resize(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) ens.positions[static_cast<size_t>(i)] = x0_sampler(i);
    run.trajectory.push_back(ens);
    for (int n = 0; n < noise.n_steps(); ++n) {
        const ParticleEnsemble& prev = run.trajectory.back();
        ParticleEnsemble next;
        next.t = prev.t + noise.dt();
        step_positions(prev.positions, next.positions, coeffs, &u_ind, u_com, prev.t, noise.dt(),
                       noise.dW(n), [&](int i) { return noise.dB(i, n); }, n);
        run.trajectory.push_back(std::move(next));
    }
    run.payoff = payoff_tagged(coeffs, run.trajectory, u_ind, noise);
    return run;
}

std::function<double(int)> gaussian_x0(const NoiseBundle& noise, double mean, double sd,
                                       int row_offset) {
    return [&noise, mean, sd, row_offset](int i) {
        return mean + sd * noise.init_normal(row_offset + i);
    };
}

}  // namespace mfg
