#include "mfg/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace mfg {

double FlowTable::phi(double x) const {
    if (x < grid_.x_min || x > grid_.x_max)
        throw std::runtime_error("flow: point outside the padded domain");
    return phi_interp_(x);
}

double FlowTable::phi_inv(double s) const {
    if (s < phi_values_.front() || s > phi_values_.back())
        throw std::runtime_error("flow: domain exit, enlarge the padding");
    return phi_inverse_(s);
}

double FlowTable::Y(double t, double x) const { return phi_inv(-t + phi(x)); }

double FlowTable::dY_dx(double t, double x) const {
    const double y = Y(t, x);
    return a_fn_(y) / a_fn_(x);
}

FlowTable build_flow_padded(const ModelCoefficients& coeffs, const Grid1D& grid, double pad) {
    FlowTable ft;
    const int n_pad = std::max(0, static_cast<int>(std::ceil(pad / grid.h)));
    const int n = grid.n_points + 2 * n_pad;
    ft.grid_ = Grid1D(grid.x_min - n_pad * grid.h, grid.x_max + n_pad * grid.h, n);
    ft.a_fn_ = coeffs.sigma_com;
    ft.a_values_.resize(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double a = coeffs.sigma_com(ft.grid_.x(j));
        if (a <= 0.0) throw std::runtime_error("flow: sigma_com must be positive on the padded grid");
        ft.a_values_[static_cast<size_t>(j)] = a;
    }
    // Phi by cumulative trapezoid of 1/A, anchored so Phi(0) = 0 when the
    // origin lies inside the padded domain.
    ft.phi_values_.resize(static_cast<size_t>(n), 0.0);
    for (int j = 1; j < n; ++j)
        ft.phi_values_[static_cast<size_t>(j)] =
            ft.phi_values_[static_cast<size_t>(j) - 1] +
            0.5 * ft.grid_.h * (1.0 / ft.a_values_[static_cast<size_t>(j) - 1] +
                                1.0 / ft.a_values_[static_cast<size_t>(j)]);
    const auto xs = ft.grid_.nodes();
    double anchor = 0.0;
    if (ft.grid_.x_min <= 0.0 && 0.0 <= ft.grid_.x_max) {
        MonotoneCubic raw(xs, ft.phi_values_);
        anchor = raw(0.0);
    }
    for (double& v : ft.phi_values_) v -= anchor;
    ft.phi_interp_ = MonotoneCubic(xs, ft.phi_values_);
    ft.phi_inverse_ = MonotoneCubic(ft.phi_values_, xs);
    ft.a_prime_ = MonotoneCubic(xs, diff1_values(ft.grid_, ft.a_values_));
    return ft;
}

FlowTable build_flow(const ModelCoefficients& coeffs, const Grid1D& grid, double t_budget,
                     double multiplier) {
    double a_max = 0.0;
    for (int j = 0; j < grid.n_points; ++j) a_max = std::max(a_max, coeffs.sigma_com(grid.x(j)));
    const double pad = multiplier * std::sqrt(std::max(t_budget, 0.0)) * a_max + grid.h;
    return build_flow_padded(coeffs, grid, pad);
}

GridMeasure pushforward(const FlowTable& ft, const GridMeasure& v, double t) {
    const Grid1D& g = v.grid;
    MonotoneCubic v_interp(g.nodes(), v.density);
    GridMeasure out = GridMeasure::zero(g);
    for (int j = 0; j < g.n_points; ++j) {
        const double z = g.x(j);
        const double y = ft.Y(t, z);
        if (y < g.x_min || y > g.x_max) continue;  // density treated as 0 outside its grid
        out.density[static_cast<size_t>(j)] = v_interp(y) * ft.A(y) / ft.A(z);
    }
    const double leak = std::fabs(out.mass() - v.mass());
    if (leak > 1e-4 * std::max(1.0, v.total_variation()))
        throw std::runtime_error("flow: pushforward mass leakage, enlarge the padding");
    return out;
}

TransformedCoeffs transformed_coeffs(const FlowTable& ft, const ModelCoefficients& coeffs,
                                     const Policy& policy, double t, double W_t,
                                     const GridMeasure& g) {
    const Grid1D& grid = g.grid;
    const GridMeasure v = pushforward(ft, g, W_t);
    const MeasureRef mu(v);
    TransformedCoeffs tc;
    tc.sigma_sq.resize(static_cast<size_t>(grid.n_points));
    tc.b.resize(static_cast<size_t>(grid.n_points));
    for (int j = 0; j < grid.n_points; ++j) {
        const double x = grid.x(j);
        const double z = ft.Y(-W_t, x);
        const double az = ft.A(z);
        const double ax = ft.A(x);
        const double jac = ax / az;
        const double curv = ax * (ft.A_prime(x) - ft.A_prime(z)) / (az * az);
        const double si = coeffs.sigma_ind(z);
        const double u = policy(t, z, mu);
        const double b_strat = coeffs.b1.value(t, z, mu) + coeffs.b2.value(t, z, mu) * u -
                               0.5 * az * ft.A_prime(z);
        tc.sigma_sq[static_cast<size_t>(j)] = si * si * jac * jac;
        tc.b[static_cast<size_t>(j)] = b_strat * jac + 0.5 * si * si * curv;
    }
    return tc;
}

}  // namespace mfg
