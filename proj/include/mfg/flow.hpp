#pragma once

#include <functional>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/model.hpp"
#include "mfg/numeric.hpp"
#include "mfg/policy.hpp"

namespace mfg {

// One-dimensional characteristics machinery for the common-noise
// transport operator. With A = sigma_com > 0 the flow Y(t, x) of
//
//     dY/dt = -A(Y),  Y(0, x) = x
//
// is Y(t, x) = Phi^{-1}(-t + Phi(x)) with Phi(y) the cumulative integral
// of 1/A. Note the sign: the defining property kept exact here is the
// ODE, so Y moves left for t > 0; Y(-t, .) is its inverse. The flow
// derivative is available analytically through Phi:
//
//     dY/dx (t, x) = A(Y(t, x)) / A(x),
//
// and the second derivative follows by differentiating once more with
// A' taken from a grid stencil. Tables live on the request grid enlarged
// by a padding margin sized for the expected excursion of the driving
// Brownian path.
class FlowTable {
  public:
    FlowTable() = default;

    const Grid1D& padded_grid() const { return grid_; }
    const std::vector<double>& A_values() const { return a_values_; }
    const std::vector<double>& phi_values() const { return phi_values_; }

    double A(double x) const { return a_fn_(x); }
    double A_prime(double x) const { return a_prime_(x); }
    double phi(double x) const;
    double phi_inv(double s) const;

    // Y(t, x); throws when -t + Phi(x) leaves the tabulated range, which
    // means the padding budget was too small for this path.
    double Y(double t, double x) const;
    // dY/dx(t, x) = A(Y)/A(x).
    double dY_dx(double t, double x) const;

    friend FlowTable build_flow_padded(const ModelCoefficients& coeffs, const Grid1D& grid,
                                       double pad);

  private:
    Grid1D grid_;
    std::function<double(double)> a_fn_;
    std::vector<double> a_values_;
    std::vector<double> phi_values_;
    MonotoneCubic phi_interp_;
    MonotoneCubic phi_inverse_;
    MonotoneCubic a_prime_;
};

// Builds Phi on the grid extended by `pad` on both sides (same spacing).
FlowTable build_flow_padded(const ModelCoefficients& coeffs, const Grid1D& grid, double pad);

// Convenience builder: padding = multiplier * sqrt(t_budget) * max A,
// the quantile-style margin for the running maximum of W on [0, T].
FlowTable build_flow(const ModelCoefficients& coeffs, const Grid1D& grid, double t_budget,
                     double multiplier = 4.0);

// Image of a measure under the transport group for time t: density
// z -> v(Y(t, z)) * dY/dz(t, z). A point mass at x is carried to
// Y(-t, x); mass is preserved. Throws when more than 1e-4 of the mass
// leaks through the padded boundary.
GridMeasure pushforward(const FlowTable& ft, const GridMeasure& v, double t);

struct TransformedCoeffs {
    std::vector<double> sigma_sq;  // transformed squared diffusion
    std::vector<double> b;         // transformed drift, Stratonovich-corrected
};

// Coefficients of the transformed (pathwise deterministic) equation for
// g = exp(-Omega' W_t) v at noise level W_t:
//
//     sigma~^2(x) = sigma_ind^2(z) (A(x)/A(z))^2,
//     b~(x) = [b(t, z, [v], u(t, z, [v])) - A A'(z)/2] A(x)/A(z)
//             + sigma_ind^2(z)/2 * A(x)(A'(x) - A'(z))/A(z)^2,
//
// with z = Y(-W_t, x) and v = pushforward(g, W_t). The -A A'/2 term is
// the Stratonovich correction carried by the drift of the transformed
// operator; it vanishes for constant sigma_com.
TransformedCoeffs transformed_coeffs(const FlowTable& ft, const ModelCoefficients& coeffs,
                                     const Policy& policy, double t, double W_t,
                                     const GridMeasure& g);

}  // namespace mfg
