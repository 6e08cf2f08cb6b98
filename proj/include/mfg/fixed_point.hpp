#pragma once

#include <string>
#include <vector>

#include "mfg/hjb.hpp"
#include "mfg/spde.hpp"

namespace mfg {

struct FixedPointResult {
    PolicyField policy;
    ValueField value;
    MeasurePath path;
    std::vector<double> residual_history;  // max |u_hat - u_com| per iteration
    bool converged = false;
    std::string note;  // approximation metadata, divergence reports
};

// Damped Picard iteration on the consistency map: solve the forward
// measure equation under u_com, sweep the conditional HJB backward to get
// the best response u_hat, then blend u_com <- (1-damping) u_com +
// damping u_hat. Stops at n_iter iterations or when the residual drops
// below tol; five consecutive residual increases end the loop with a
// non-convergence note instead of an exception.
//
// Requires sigma_com identically zero: in that reduction the forward
// equation is deterministic and the consistency condition is exact.
FixedPointResult mfg_fixed_point_deterministic(const ModelCoefficients& coeffs,
                                               const GridMeasure& v0, double dt, int n_steps,
                                               int n_iter, double damping, double tol = 0.0);

// Same loop along one fixed realization of the common noise, with the
// characteristics solver as the forward pass. The resulting policy is
// path-specific, and the per-path backward value is anticipative with
// respect to the noise; both facts are recorded in the result note. With
// sigma_com identically zero the forward pass falls back to the
// deterministic stepper, making a W = 0 run bit-identical to
// mfg_fixed_point_deterministic.
FixedPointResult mfg_fixed_point_per_path(const ModelCoefficients& coeffs, const GridMeasure& v0,
                                          const std::vector<double>& W_path, double dt, int n_iter,
                                          double damping, double tol = 0.0);

}  // namespace mfg
