#include "mfg/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfg {

namespace {

double max_abs_gap(const PolicyField& a, const PolicyField& b) {
    double m = 0.0;
    for (size_t n = 0; n < a.u_values.size(); ++n)
        for (size_t j = 0; j < a.u_values[n].size(); ++j)
            m = std::max(m, std::fabs(a.u_values[n][j] - b.u_values[n][j]));
    return m;
}

FixedPointResult fixed_point_core(const ModelCoefficients& coeffs, const GridMeasure& v0,
                                  const std::vector<double>& W_path, double dt, int n_iter,
                                  double damping, double tol, SpdeMethod method,
                                  std::string note) {
    const int n_steps = static_cast<int>(W_path.size()) - 1;
    std::vector<double> times(static_cast<size_t>(n_steps) + 1);
    for (int n = 0; n <= n_steps; ++n) times[static_cast<size_t>(n)] = n * dt;

    FixedPointResult res;
    res.note = std::move(note);
    res.policy = PolicyField::constant(v0.grid, times, 0.0);
    res.policy.context = method == SpdeMethod::ito ? "fixed-point" : "fixed-point-per-path";

    int rises = 0;
    double prev_residual = 0.0;
    for (int k = 0; k < n_iter; ++k) {
        const Policy u_com = policy_from_field(res.policy);
        res.path = solve_spde(coeffs, u_com, v0, W_path, dt, method);
        HjbResult hjb = hjb_backward(coeffs, res.path);
        const double residual = max_abs_gap(hjb.policy, res.policy);
        res.residual_history.push_back(residual);
        res.value = std::move(hjb.value);

        for (size_t n = 0; n < res.policy.u_values.size(); ++n)
            for (size_t j = 0; j < res.policy.u_values[n].size(); ++j)
                res.policy.u_values[n][j] = (1.0 - damping) * res.policy.u_values[n][j] +
                                            damping * hjb.policy.u_values[n][j];

        if (residual <= tol) {
            res.converged = true;
            break;
        }
        if (k > 0 && residual > prev_residual) {
            if (++rises >= 5) {
                res.note += "; residual rose 5 consecutive iterations, stopping";
                break;
            }
        } else {
            rises = 0;
        }
        prev_residual = residual;
    }
    // Return the forward path driven by the final (blended) policy so the
    // returned pieces are mutually consistent.
    res.path = solve_spde(coeffs, policy_from_field(res.policy), v0, W_path, dt, method);
    return res;
}

}  // namespace

FixedPointResult mfg_fixed_point_deterministic(const ModelCoefficients& coeffs,
                                               const GridMeasure& v0, double dt, int n_steps,
                                               int n_iter, double damping, double tol) {
    for (int j = 0; j < v0.grid.n_points; ++j)
        if (coeffs.sigma_com(v0.grid.x(j)) != 0.0)
            throw std::invalid_argument(
                "mfg_fixed_point_deterministic: requires sigma_com identically zero");
    const std::vector<double> W_zero(static_cast<size_t>(n_steps) + 1, 0.0);
    return fixed_point_core(coeffs, v0, W_zero, dt, n_iter, damping, tol, SpdeMethod::ito,
                            "deterministic reduction, forward Kolmogorov + backward HJB");
}

FixedPointResult mfg_fixed_point_per_path(const ModelCoefficients& coeffs, const GridMeasure& v0,
                                          const std::vector<double>& W_path, double dt, int n_iter,
                                          double damping, double tol) {
    bool sigma_com_zero = true;
    for (int j = 0; j < v0.grid.n_points && sigma_com_zero; ++j)
        if (coeffs.sigma_com(v0.grid.x(j)) != 0.0) sigma_com_zero = false;
    // The characteristics transform needs sigma_com > 0; in the degenerate
    // case the noise terms vanish and the Ito stepper is the same
    // deterministic forward pass.
    const SpdeMethod method = sigma_com_zero ? SpdeMethod::ito : SpdeMethod::characteristics;
    return fixed_point_core(coeffs, v0, W_path, dt, n_iter, damping, tol, method,
                            "per-path surrogate: forward solve on a fixed W path, backward value "
                            "anticipative with respect to the noise");
}

}  // namespace mfg
