#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfg/flow.hpp"
#include "mfg/grid.hpp"
#include "mfg/model.hpp"
#include "mfg/policy.hpp"

namespace mfg {

enum class SpdeMethod { ito, characteristics };

// Solution of the measure equation along one realization of the common
// noise. Slices are the physical measures v_t; for the characteristics
// method the transformed slices g_t are kept as well because the
// sensitivity equations are formulated on g.
struct MeasurePath {
    Grid1D grid;
    std::vector<double> times;
    std::vector<GridMeasure> slices;
    std::vector<GridMeasure> g_slices;  // empty for the Ito method
    std::vector<double> W;
    SpdeMethod method = SpdeMethod::ito;

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
    void write_csv(const std::string& path) const;  // long format t,x,density
};

// Flux-form increment (F_{j+1/2} - F_{j-1/2}) / w_j of the operator
// 1/2 (D u)'' - (b u)' with zero-flux closure; w_j are the trapezoid cell
// weights. Building block shared with the linearized sensitivity
// equations, which must use the very same discrete operator.
std::vector<double> divergence_increment(const Grid1D& g, const std::vector<double>& u,
                                         const std::vector<double>& diff_sq,
                                         const std::vector<double>& b_nodes);

// Flux-form increment of the pure transport term -(c u)'.
std::vector<double> advective_increment(const Grid1D& g, const std::vector<double>& u,
                                        const std::vector<double>& c_nodes);

// Divergence-form discretization of the forward operator
//   L' mu = 1/2 d^2/dx^2[(sigma_ind^2 + sigma_com^2) mu] - d/dx[b mu]
// as flux differences F_{j+1/2} - F_{j-1/2} over trapezoid cell weights,
// with zero-flux closure at both ends, so the trapezoid integral of the
// output vanishes identically. The advective flux averages nodal values
// (b_j mu_j + b_{j+1} mu_{j+1})/2, which makes the discrete moment
// dynamics of polynomial drifts exact in the node values.
GridMeasure apply_L_prime(const ModelCoefficients& coeffs, const Policy& policy, double t,
                          const GridMeasure& mu);

// One explicit Euler-Maruyama step of the strong-form equation
//   d mu = L' mu dt - d/dx(sigma_com mu) dW,
// optionally with the Milstein correction
//   + 1/2 (dW^2 - dt) d/dx(sigma_com d/dx(sigma_com mu)).
// Checks the parabolic and advective CFL conditions, and that the step
// conserves the trapezoid mass to 1e-10.
GridMeasure step_ito(const ModelCoefficients& coeffs, const Policy& policy, const GridMeasure& mu,
                     double t, double dW, double dt, bool milstein);

// One explicit step of the transformed deterministic equation for g at
// noise level W_t (coefficients frozen at step start).
GridMeasure step_characteristics(const ModelCoefficients& coeffs, const Policy& policy,
                                 const FlowTable& flow, const GridMeasure& g, double t, double W_t,
                                 double dt);

struct SpdeOptions {
    bool milstein = true;
    double flow_pad_multiplier = 4.0;
};

// Integrates the measure equation over the mesh implied by W_path
// (n_steps+1 values, W_path[0] = 0) with step dt. For the
// characteristics method the stored slices are v_t = pushforward(g_t,
// W_t). v0 may be signed; probability inputs stay probabilities up to the
// scheme's tolerances.
MeasurePath solve_spde(const ModelCoefficients& coeffs, const Policy& policy, const GridMeasure& v0,
                       const std::vector<double>& W_path, double dt, SpdeMethod method,
                       const SpdeOptions& options = {});

// Streaming variant: calls observe(step_index, t, v_slice) after every
// step (and once for the initial slice) without storing the path.
void solve_spde_observe(const ModelCoefficients& coeffs, const Policy& policy,
                        const GridMeasure& v0, const std::vector<double>& W_path, double dt,
                        SpdeMethod method, const SpdeOptions& options,
                        const std::function<void(int, double, const GridMeasure&)>& observe);

}  // namespace mfg
