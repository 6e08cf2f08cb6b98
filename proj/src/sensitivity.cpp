#include "mfg/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

namespace mfg {

namespace {

GridMeasure axpy(double a, const GridMeasure& x, const GridMeasure& y) {
    GridMeasure out = y;
    for (size_t j = 0; j < out.density.size(); ++j) out.density[j] += a * x.density[j];
    return out;
}

// Directional derivative of the drift b1 + b2 u in the measure slot,
// evaluated at (t, z) against the direction rho (a signed grid measure):
// integral of db/dmu(t, z, [v])(r) rho(r) dr.
double drift_measure_response(const ModelCoefficients& coeffs, const Policy& policy, double t,
                              double z, const MeasureRef& v, const GridMeasure& rho) {
    const bool has_b1 = static_cast<bool>(coeffs.b1.vd1);
    const bool has_b2 = static_cast<bool>(coeffs.b2.vd1);
    if (!has_b1 && !has_b2) return 0.0;
    const double u = has_b2 ? policy(t, z, v) : 0.0;
    double acc = 0.0;
    for (int j = 0; j < rho.grid.n_points; ++j) {
        const double r = rho.grid.x(j);
        double k = 0.0;
        if (has_b1) k += coeffs.b1.vd1(t, z, v, r);
        if (has_b2) k += u * coeffs.b2.vd1(t, z, v, r);
        acc += rho.quad_weight(j) * k * rho.density[static_cast<size_t>(j)];
    }
    return acc;
}

// Second directional derivative against two directions.
double drift_measure_response2(const ModelCoefficients& coeffs, const Policy& policy, double t,
                               double z, const MeasureRef& v, const GridMeasure& rho1,
                               const GridMeasure& rho2) {
    const bool has_b1 = static_cast<bool>(coeffs.b1.vd2);
    const bool has_b2 = static_cast<bool>(coeffs.b2.vd2);
    if (!has_b1 && !has_b2) return 0.0;
    const double u = has_b2 ? policy(t, z, v) : 0.0;
    double acc = 0.0;
    for (int j = 0; j < rho1.grid.n_points; ++j) {
        const double r1 = rho1.grid.x(j);
        const double w1 = rho1.quad_weight(j) * rho1.density[static_cast<size_t>(j)];
        if (w1 == 0.0) continue;
        for (int k = 0; k < rho2.grid.n_points; ++k) {
            const double r2 = rho2.grid.x(k);
            double kk = 0.0;
            if (has_b1) kk += coeffs.b1.vd2(t, z, v, r1, r2);
            if (has_b2) kk += u * coeffs.b2.vd2(t, z, v, r1, r2);
            acc += w1 * rho2.quad_weight(k) * kk * rho2.density[static_cast<size_t>(k)];
        }
    }
    return acc;
}

void require_characteristics_base(const MeasurePath& base) {
    if (base.method != SpdeMethod::characteristics || base.g_slices.empty())
        throw std::runtime_error(
            "sensitivity: base path must be solved by the characteristics method");
}

}  // namespace

SensitivityPath solve_xi(const ModelCoefficients& coeffs, const Policy& policy,
                         const MeasurePath& base, double x0, double bandwidth,
                         double flow_pad_multiplier) {
    require_characteristics_base(base);
    const Grid1D& grid = base.grid;
    const int n_steps = base.n_steps();
    const double dt = base.dt();
    const FlowTable flow = build_flow(coeffs, grid, n_steps * dt, flow_pad_multiplier);

    SensitivityPath sp;
    sp.bump_point = x0;
    sp.bandwidth = bandwidth;
    sp.times = base.times;
    GridMeasure xi_g = mollified_delta(grid, x0, bandwidth);
    sp.xi_g.push_back(xi_g);
    sp.xi.push_back(xi_g);  // W_0 = 0

    for (int n = 0; n < n_steps; ++n) {
        const double t = base.times[static_cast<size_t>(n)];
        const double W = base.W[static_cast<size_t>(n)];
        const GridMeasure& g = base.g_slices[static_cast<size_t>(n)];
        const auto tc = transformed_coeffs(flow, coeffs, policy, t, W, g);

        // Transport of xi by the frozen transformed operator.
        const auto transport = divergence_increment(grid, xi_g.density, tc.sigma_sq, tc.b);

        // Drift-response source: -(Db~ g)' with Db~ the response of the
        // transformed drift to the xi direction, carried through the
        // flow Jacobian and evaluated against the pushed-forward xi.
        std::vector<double> src(static_cast<size_t>(grid.n_points), 0.0);
        if (coeffs.b1.vd1 || coeffs.b2.vd1) {
            const GridMeasure v = pushforward(flow, g, W);
            const MeasureRef v_ref(v);
            const GridMeasure xi_push = pushforward(flow, xi_g, W);
            std::vector<double> response(static_cast<size_t>(grid.n_points));
            for (int j = 0; j < grid.n_points; ++j) {
                const double x = grid.x(j);
                const double z = flow.Y(-W, x);
                const double jac = flow.A(x) / flow.A(z);
                response[static_cast<size_t>(j)] =
                    drift_measure_response(coeffs, policy, t, z, v_ref, xi_push) * jac;
            }
            src = advective_increment(grid, g.density, response);
        }

        for (int j = 0; j < grid.n_points; ++j)
            xi_g.density[static_cast<size_t>(j)] +=
                dt * (transport[static_cast<size_t>(j)] + src[static_cast<size_t>(j)]);

        sp.xi_g.push_back(xi_g);
        sp.xi.push_back(pushforward(flow, xi_g, base.W[static_cast<size_t>(n) + 1]));
    }
    return sp;
}

std::vector<GridMeasure> xi_fd_oracle(const ModelCoefficients& coeffs, const Policy& policy,
                                      const GridMeasure& v0, const std::vector<double>& W_path,
                                      double dt, double x0, double bandwidth, double h_bump,
                                      SpdeMethod method) {
    const GridMeasure bump = mollified_delta(v0.grid, x0, bandwidth);
    const GridMeasure up = axpy(h_bump, bump, v0);
    const GridMeasure dn = axpy(-h_bump, bump, v0);
    if (dn.negative_part_mass() > h_bump)
        throw std::runtime_error("xi_fd_oracle: bump too large for the base measure");
    const MeasurePath p_up = solve_spde(coeffs, policy, up, W_path, dt, method);
    const MeasurePath p_dn = solve_spde(coeffs, policy, dn, W_path, dt, method);
    std::vector<GridMeasure> out;
    out.reserve(p_up.slices.size());
    for (size_t n = 0; n < p_up.slices.size(); ++n) {
        GridMeasure d = p_up.slices[n];
        for (size_t j = 0; j < d.density.size(); ++j)
            d.density[j] = (d.density[j] - p_dn.slices[n].density[j]) / (2.0 * h_bump);
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<GridMeasure> solve_eta(const ModelCoefficients& coeffs, const Policy& policy,
                                   const MeasurePath& base, const SensitivityPath& xi1,
                                   const SensitivityPath& xi2, double flow_pad_multiplier) {
    require_characteristics_base(base);
    if (xi1.times.size() != base.times.size() || xi2.times.size() != base.times.size())
        throw std::runtime_error("solve_eta: xi paths do not match the base mesh");
    const Grid1D& grid = base.grid;
    const int n_steps = base.n_steps();
    const double dt = base.dt();
    const FlowTable flow = build_flow(coeffs, grid, n_steps * dt, flow_pad_multiplier);

    std::vector<GridMeasure> out;
    GridMeasure eta_g = GridMeasure::zero(grid);
    out.push_back(eta_g);

    const bool first_order = static_cast<bool>(coeffs.b1.vd1) || static_cast<bool>(coeffs.b2.vd1);
    const bool second_order = static_cast<bool>(coeffs.b1.vd2) || static_cast<bool>(coeffs.b2.vd2);

    for (int n = 0; n < n_steps; ++n) {
        const double t = base.times[static_cast<size_t>(n)];
        const double W = base.W[static_cast<size_t>(n)];
        const GridMeasure& g = base.g_slices[static_cast<size_t>(n)];
        const auto tc = transformed_coeffs(flow, coeffs, policy, t, W, g);

        const auto transport = divergence_increment(grid, eta_g.density, tc.sigma_sq, tc.b);
        std::vector<double> increment = transport;

        if (first_order || second_order) {
            const GridMeasure v = pushforward(flow, g, W);
            const MeasureRef v_ref(v);
            const GridMeasure xi1_push = pushforward(flow, xi1.xi_g[static_cast<size_t>(n)], W);
            const GridMeasure xi2_push = pushforward(flow, xi2.xi_g[static_cast<size_t>(n)], W);
            const GridMeasure eta_push = pushforward(flow, eta_g, W);

            std::vector<double> resp_eta(static_cast<size_t>(grid.n_points), 0.0);
            std::vector<double> resp_x1(static_cast<size_t>(grid.n_points), 0.0);
            std::vector<double> resp_x2(static_cast<size_t>(grid.n_points), 0.0);
            std::vector<double> resp_2nd(static_cast<size_t>(grid.n_points), 0.0);
            for (int j = 0; j < grid.n_points; ++j) {
                const double x = grid.x(j);
                const double z = flow.Y(-W, x);
                const double jac = flow.A(x) / flow.A(z);
                if (first_order) {
                    resp_eta[static_cast<size_t>(j)] =
                        drift_measure_response(coeffs, policy, t, z, v_ref, eta_push) * jac;
                    resp_x1[static_cast<size_t>(j)] =
                        drift_measure_response(coeffs, policy, t, z, v_ref, xi1_push) * jac;
                    resp_x2[static_cast<size_t>(j)] =
                        drift_measure_response(coeffs, policy, t, z, v_ref, xi2_push) * jac;
                }
                if (second_order)
                    resp_2nd[static_cast<size_t>(j)] =
                        drift_measure_response2(coeffs, policy, t, z, v_ref, xi1_push, xi2_push) *
                        jac;
            }
            if (first_order) {
                // Response of the drift to eta itself plus the symmetrized
                // xi-cross terms.
                const auto s_eta = advective_increment(grid, g.density, resp_eta);
                const auto s_12 =
                    advective_increment(grid, xi1.xi_g[static_cast<size_t>(n)].density, resp_x2);
                const auto s_21 =
                    advective_increment(grid, xi2.xi_g[static_cast<size_t>(n)].density, resp_x1);
                for (size_t j = 0; j < increment.size(); ++j)
                    increment[j] += s_eta[j] + s_12[j] + s_21[j];
            }
            if (second_order) {
                const auto s_2 = advective_increment(grid, g.density, resp_2nd);
                for (size_t j = 0; j < increment.size(); ++j) increment[j] += s_2[j];
            }
        }

        for (size_t j = 0; j < eta_g.density.size(); ++j) eta_g.density[j] += dt * increment[j];
        out.push_back(pushforward(flow, eta_g, base.W[static_cast<size_t>(n) + 1]));
    }
    return out;
}

GridMeasure eta_fd_oracle(const ModelCoefficients& coeffs, const Policy& policy,
                          const GridMeasure& v0, const std::vector<double>& W_path, double dt,
                          double x1, double x2, double bandwidth, double h_bump,
                          SpdeMethod method) {
    const GridMeasure b1 = mollified_delta(v0.grid, x1, bandwidth);
    const GridMeasure b2 = mollified_delta(v0.grid, x2, bandwidth);
    auto solve_last = [&](double h1, double h2) {
        const GridMeasure v = axpy(h2, b2, axpy(h1, b1, v0));
        return solve_spde(coeffs, policy, v, W_path, dt, method).slices.back();
    };
    const GridMeasure pp = solve_last(h_bump, h_bump);
    const GridMeasure pm = solve_last(h_bump, -h_bump);
    const GridMeasure mp = solve_last(-h_bump, h_bump);
    const GridMeasure mm = solve_last(-h_bump, -h_bump);
    GridMeasure out = pp;
    for (size_t j = 0; j < out.density.size(); ++j)
        out.density[j] = (pp.density[j] - pm.density[j] - mp.density[j] + mm.density[j]) /
                         (4.0 * h_bump * h_bump);
    return out;
}

double l1_distance(const GridMeasure& a, const GridMeasure& b) {
    if (!a.grid.same_as(b.grid)) throw std::invalid_argument("l1_distance: grids differ");
    double acc = 0.0;
    for (int j = 0; j < a.grid.n_points; ++j)
        acc += a.quad_weight(j) *
               std::fabs(a.density[static_cast<size_t>(j)] - b.density[static_cast<size_t>(j)]);
    return acc;
}

}  // namespace mfg
