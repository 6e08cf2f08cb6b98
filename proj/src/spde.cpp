#include "mfg/spde.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mfg {

namespace {

// Flux-difference update core shared by both solvers: out_j +=
// scale * (F_{j+1/2} - F_{j-1/2}) / w_j with zero boundary fluxes and
// trapezoid cell weights w_j.
void add_flux_differences(const Grid1D& g, const std::vector<double>& flux, double scale,
                          std::vector<double>& out) {
    const int n = g.n_points;
    out[0] += scale * flux[0] / (0.5 * g.h);
    for (int j = 1; j + 1 < n; ++j)
        out[static_cast<size_t>(j)] +=
            scale * (flux[static_cast<size_t>(j)] - flux[static_cast<size_t>(j) - 1]) / g.h;
    out[static_cast<size_t>(n) - 1] += scale * (-flux[static_cast<size_t>(n) - 2]) / (0.5 * g.h);
}

// F_{j+1/2} = (D_{j+1} mu_{j+1} - D_j mu_j) / (2h) - (b_j mu_j + b_{j+1} mu_{j+1}) / 2.
std::vector<double> divergence_flux(const Grid1D& g, const std::vector<double>& mu,
                                    const std::vector<double>& diff_sq,
                                    const std::vector<double>& b) {
    const int n = g.n_points;
    std::vector<double> flux(static_cast<size_t>(n) - 1);
    for (int j = 0; j + 1 < n; ++j) {
        const size_t sj = static_cast<size_t>(j);
        flux[sj] = 0.5 * (diff_sq[sj + 1] * mu[sj + 1] - diff_sq[sj] * mu[sj]) / g.h -
                   0.5 * (b[sj] * mu[sj] + b[sj + 1] * mu[sj + 1]);
    }
    return flux;
}

void check_cfl(const Grid1D& g, const std::vector<double>& diff_sq, const std::vector<double>& b,
               double dt, const char* who) {
    double dmax = 0.0, bmax = 0.0;
    for (double d : diff_sq) dmax = std::max(dmax, d);
    for (double v : b) bmax = std::max(bmax, std::fabs(v));
    if (dmax > 0.0 && dt > g.h * g.h / dmax)
        throw std::runtime_error(std::string("cfl: ") + who + " needs dt <= h^2/max(sigma^2)");
    if (bmax > 0.0 && dt > g.h / bmax)
        throw std::runtime_error(std::string("cfl: ") + who + " needs dt <= h/max|drift|");
}

std::vector<double> nodal_drift(const ModelCoefficients& coeffs, const Policy& policy, double t,
                                const GridMeasure& mu) {
    const MeasureRef ref(mu);
    const int n = mu.grid.n_points;
    std::vector<double> b(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double x = mu.grid.x(j);
        b[static_cast<size_t>(j)] =
            coeffs.b1.value(t, x, ref) + coeffs.b2.value(t, x, ref) * policy(t, x, ref);
    }
    return b;
}

std::vector<double> total_diffusion_sq(const ModelCoefficients& coeffs, const Grid1D& g) {
    std::vector<double> d(static_cast<size_t>(g.n_points));
    for (int j = 0; j < g.n_points; ++j) d[static_cast<size_t>(j)] = coeffs.sigma_tot_sq(g.x(j));
    return d;
}

}  // namespace

std::vector<double> divergence_increment(const Grid1D& g, const std::vector<double>& u,
                                         const std::vector<double>& diff_sq,
                                         const std::vector<double>& b_nodes) {
    const auto flux = divergence_flux(g, u, diff_sq, b_nodes);
    std::vector<double> out(u.size(), 0.0);
    add_flux_differences(g, flux, 1.0, out);
    return out;
}

std::vector<double> advective_increment(const Grid1D& g, const std::vector<double>& u,
                                        const std::vector<double>& c_nodes) {
    const int n = g.n_points;
    std::vector<double> flux(static_cast<size_t>(n) - 1);
    for (int j = 0; j + 1 < n; ++j) {
        const size_t sj = static_cast<size_t>(j);
        flux[sj] = -0.5 * (c_nodes[sj] * u[sj] + c_nodes[sj + 1] * u[sj + 1]);
    }
    std::vector<double> out(u.size(), 0.0);
    add_flux_differences(g, flux, 1.0, out);
    return out;
}

GridMeasure apply_L_prime(const ModelCoefficients& coeffs, const Policy& policy, double t,
                          const GridMeasure& mu) {
    const Grid1D& g = mu.grid;
    const auto b = nodal_drift(coeffs, policy, t, mu);
    const auto dsq = total_diffusion_sq(coeffs, g);
    const auto flux = divergence_flux(g, mu.density, dsq, b);
    GridMeasure out = GridMeasure::zero(g);
    add_flux_differences(g, flux, 1.0, out.density);
    return out;
}

GridMeasure step_ito(const ModelCoefficients& coeffs, const Policy& policy, const GridMeasure& mu,
                     double t, double dW, double dt, bool milstein) {
    const Grid1D& g = mu.grid;
    const int n = g.n_points;
    const auto b = nodal_drift(coeffs, policy, t, mu);
    const auto dsq = total_diffusion_sq(coeffs, g);
    check_cfl(g, dsq, b, dt, "step_ito");

    GridMeasure out = mu;
    const auto flux = divergence_flux(g, mu.density, dsq, b);
    add_flux_differences(g, flux, dt, out.density);

    // Common-noise transport flux: -(a_j mu_j + a_{j+1} mu_{j+1})/2.
    std::vector<double> a(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) a[static_cast<size_t>(j)] = coeffs.sigma_com(g.x(j));
    std::vector<double> tflux(static_cast<size_t>(n) - 1);
    for (int j = 0; j + 1 < n; ++j) {
        const size_t sj = static_cast<size_t>(j);
        tflux[sj] = -0.5 * (a[sj] * mu.density[sj] + a[sj + 1] * mu.density[sj + 1]);
    }
    add_flux_differences(g, tflux, dW, out.density);

    if (milstein) {
        // 1/2 (dW^2 - dt) d/dx(a d/dx(a mu)) with flux a_{j+1/2}(c_{j+1}-c_j)/h.
        std::vector<double> c(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) c[static_cast<size_t>(j)] = a[static_cast<size_t>(j)] * mu.density[static_cast<size_t>(j)];
        std::vector<double> mflux(static_cast<size_t>(n) - 1);
        for (int j = 0; j + 1 < n; ++j) {
            const size_t sj = static_cast<size_t>(j);
            const double a_mid = coeffs.sigma_com(g.x(j) + 0.5 * g.h);
            mflux[sj] = a_mid * (c[sj + 1] - c[sj]) / g.h;
        }
        add_flux_differences(g, mflux, 0.5 * (dW * dW - dt), out.density);
    }

    const double drift_scale = std::max(1.0, mu.total_variation());
    if (std::fabs(out.mass() - mu.mass()) > 1e-10 * drift_scale)
        throw std::runtime_error("conservation: step_ito lost mass beyond tolerance");
    return out;
}

GridMeasure step_characteristics(const ModelCoefficients& coeffs, const Policy& policy,
                                 const FlowTable& flow, const GridMeasure& g, double t, double W_t,
                                 double dt) {
    const auto tc = transformed_coeffs(flow, coeffs, policy, t, W_t, g);
    check_cfl(g.grid, tc.sigma_sq, tc.b, dt, "step_characteristics");
    GridMeasure out = g;
    const auto flux = divergence_flux(g.grid, g.density, tc.sigma_sq, tc.b);
    add_flux_differences(g.grid, flux, dt, out.density);
    const double drift_scale = std::max(1.0, g.total_variation());
    if (std::fabs(out.mass() - g.mass()) > 1e-10 * drift_scale)
        throw std::runtime_error("conservation: step_characteristics lost mass beyond tolerance");
    return out;
}

void solve_spde_observe(const ModelCoefficients& coeffs, const Policy& policy,
                        const GridMeasure& v0, const std::vector<double>& W_path, double dt,
                        SpdeMethod method, const SpdeOptions& options,
                        const std::function<void(int, double, const GridMeasure&)>& observe) {
    if (W_path.size() < 2) throw std::invalid_argument("solve_spde: W_path needs >= 2 entries");
    const int n_steps = static_cast<int>(W_path.size()) - 1;
    if (method == SpdeMethod::ito) {
        GridMeasure v = v0;
        observe(0, 0.0, v);
        for (int n = 0; n < n_steps; ++n) {
            const double t = n * dt;
            const double dW = W_path[static_cast<size_t>(n) + 1] - W_path[static_cast<size_t>(n)];
            v = step_ito(coeffs, policy, v, t, dW, dt, options.milstein);
            observe(n + 1, (n + 1) * dt, v);
        }
        return;
    }
    const FlowTable flow = build_flow(coeffs, v0.grid, n_steps * dt, options.flow_pad_multiplier);
    GridMeasure g = v0;  // W_0 = 0, so g_0 = v_0
    observe(0, 0.0, g);
    for (int n = 0; n < n_steps; ++n) {
        const double t = n * dt;
        g = step_characteristics(coeffs, policy, flow, g, t, W_path[static_cast<size_t>(n)], dt);
        const GridMeasure v = pushforward(flow, g, W_path[static_cast<size_t>(n) + 1]);
        observe(n + 1, (n + 1) * dt, v);
    }
}

MeasurePath solve_spde(const ModelCoefficients& coeffs, const Policy& policy, const GridMeasure& v0,
                       const std::vector<double>& W_path, double dt, SpdeMethod method,
                       const SpdeOptions& options) {
    MeasurePath path;
    path.grid = v0.grid;
    path.W = W_path;
    path.method = method;
    const int n_steps = static_cast<int>(W_path.size()) - 1;
    path.times.resize(static_cast<size_t>(n_steps) + 1);
    for (int n = 0; n <= n_steps; ++n) path.times[static_cast<size_t>(n)] = n * dt;

    if (method == SpdeMethod::ito) {
        GridMeasure v = v0;
        path.slices.push_back(v);
        for (int n = 0; n < n_steps; ++n) {
            const double t = n * dt;
            const double dW = W_path[static_cast<size_t>(n) + 1] - W_path[static_cast<size_t>(n)];
            v = step_ito(coeffs, policy, v, t, dW, dt, options.milstein);
            path.slices.push_back(v);
        }
        return path;
    }

    const FlowTable flow = build_flow(coeffs, v0.grid, n_steps * dt, options.flow_pad_multiplier);
    GridMeasure g = v0;
    path.g_slices.push_back(g);
    path.slices.push_back(g);  // W_0 = 0
    for (int n = 0; n < n_steps; ++n) {
        const double t = n * dt;
        g = step_characteristics(coeffs, policy, flow, g, t, W_path[static_cast<size_t>(n)], dt);
        path.g_slices.push_back(g);
        path.slices.push_back(pushforward(flow, g, W_path[static_cast<size_t>(n) + 1]));
    }
    return path;
}

void MeasurePath::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("MeasurePath: cannot open " + path);
    out << "t,x,density\n";
    char buf[120];
    for (size_t n = 0; n < slices.size(); ++n) {
        for (int j = 0; j < grid.n_points; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", times[n], grid.x(j),
                          slices[n].density[static_cast<size_t>(j)]);
            out << buf;
        }
    }
}

}  // namespace mfg
