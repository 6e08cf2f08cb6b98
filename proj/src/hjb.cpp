#include "mfg/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mfg {

double PolicyField::at(double t, double x) const {
    if (u_values.empty()) throw std::runtime_error("PolicyField: empty field");
    const double step = dt();
    int n = step > 0.0 ? static_cast<int>(std::lround((t - times.front()) / step)) : 0;
    n = std::clamp(n, 0, n_steps() - 1);
    const auto& row = u_values[static_cast<size_t>(n)];
    if (x <= grid.x_min) return row.front();
    if (x >= grid.x_max) return row.back();
    const double s = (x - grid.x_min) / grid.h;
    const int j = std::min(static_cast<int>(s), grid.n_points - 2);
    const double w = s - j;
    return (1.0 - w) * row[static_cast<size_t>(j)] + w * row[static_cast<size_t>(j) + 1];
}

PolicyField PolicyField::constant(const Grid1D& grid, const std::vector<double>& times, double u) {
    PolicyField f;
    f.times = times;
    f.grid = grid;
    f.u_values.assign(times.size() - 1, std::vector<double>(static_cast<size_t>(grid.n_points), u));
    f.context = "constant";
    return f;
}

void PolicyField::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("PolicyField: cannot open " + path);
    out << "t,x,value\n";
    char buf[120];
    for (int n = 0; n < n_steps(); ++n)
        for (int j = 0; j < grid.n_points; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", times[static_cast<size_t>(n)],
                          grid.x(j), u_values[static_cast<size_t>(n)][static_cast<size_t>(j)]);
            out << buf;
        }
}

Policy policy_from_field(const PolicyField& field) {
    return [field](double t, double x, const MeasureRef&) { return field.at(t, x); };
}

void ValueField::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("ValueField: cannot open " + path);
    out << "t,x,value\n";
    char buf[120];
    for (size_t n = 0; n < V.size(); ++n)
        for (int j = 0; j < grid.n_points; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", times[n], grid.x(j),
                          V[n][static_cast<size_t>(j)]);
            out << buf;
        }
}

double best_response(const ModelCoefficients& coeffs, double dVdx, double t, double x,
                     const MeasureRef& mu, bool* clamped) {
    const double b2 = coeffs.b2.value(t, x, mu);
    const double lo = coeffs.u_box.lo, hi = coeffs.u_box.hi;
    if (clamped) *clamped = false;

    double u;
    if (coeffs.quadratic_cost_in_u) {
        u = -b2 * dVdx;
        if (u < lo || u > hi) {
            u = std::clamp(u, lo, hi);
            if (clamped) *clamped = true;
        }
    } else {
        // dJ/du is strictly increasing; find the root of dJ/du + b2 dVdx.
        auto slope = [&](double v) { return coeffs.running_cost_du(t, x, mu, v) + b2 * dVdx; };
        if (slope(lo) >= 0.0) {
            u = lo;
            if (clamped) *clamped = true;
        } else if (slope(hi) <= 0.0) {
            u = hi;
            if (clamped) *clamped = true;
        } else {
            double a = lo, b = hi;
            for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + std::fabs(a)); ++it) {
                const double m = 0.5 * (a + b);
                (slope(m) < 0.0 ? a : b) = m;
            }
            u = 0.5 * (a + b);
        }
    }

    const double delta = std::max(1e-6, 1e-4 * (hi - lo));
    const double ua = std::clamp(u, lo + delta, hi - delta);
    const double second = coeffs.running_cost(t, x, mu, ua + delta) -
                          2.0 * coeffs.running_cost(t, x, mu, ua) +
                          coeffs.running_cost(t, x, mu, ua - delta);
    if (second <= 0.0)
        throw std::runtime_error("model: running cost not convex in u at the evaluation point");
    return u;
}

HjbResult hjb_backward(const ModelCoefficients& coeffs, const MeasurePath& path) {
    const Grid1D& grid = path.grid;
    const int n_steps = path.n_steps();
    const int m = grid.n_points;
    const double dt = path.dt();

    double dmax = 0.0;
    for (int j = 0; j < m; ++j) dmax = std::max(dmax, coeffs.sigma_tot_sq(grid.x(j)));
    if (dmax > 0.0 && dt > grid.h * grid.h / dmax)
        throw std::runtime_error("cfl: hjb_backward needs dt <= h^2/max(sigma^2)");

    HjbResult res;
    res.value.times = path.times;
    res.value.grid = grid;
    res.value.V.assign(static_cast<size_t>(n_steps) + 1,
                       std::vector<double>(static_cast<size_t>(m), 0.0));
    res.policy.times = path.times;
    res.policy.grid = grid;
    res.policy.u_values.assign(static_cast<size_t>(n_steps),
                               std::vector<double>(static_cast<size_t>(m), 0.0));
    res.policy.context = "hjb-backward";

    {
        const MeasureRef mu_T(path.slices.back());
        for (int j = 0; j < m; ++j)
            res.value.V[static_cast<size_t>(n_steps)][static_cast<size_t>(j)] =
                coeffs.terminal_cost(grid.x(j), mu_T);
    }

    for (int n = n_steps - 1; n >= 0; --n) {
        const auto& Vn1 = res.value.V[static_cast<size_t>(n) + 1];
        const double t1 = path.times[static_cast<size_t>(n) + 1];
        const MeasureRef mu(path.slices[static_cast<size_t>(n) + 1]);
        const auto Vx = diff1_values(grid, Vn1);
        const auto Vxx = diff2_values(grid, Vn1);
        auto& Vn = res.value.V[static_cast<size_t>(n)];
        double bmax = 0.0;
        for (int j = 0; j < m; ++j) {
            const double x = grid.x(j);
            bool cl = false;
            const double u = best_response(coeffs, Vx[static_cast<size_t>(j)], t1, x, mu, &cl);
            if (cl) ++res.clamp_count;
            const double b = coeffs.b1.value(t1, x, mu) + coeffs.b2.value(t1, x, mu) * u;
            bmax = std::max(bmax, std::fabs(b));
            const double ham = b * Vx[static_cast<size_t>(j)] + coeffs.running_cost(t1, x, mu, u);
            Vn[static_cast<size_t>(j)] =
                Vn1[static_cast<size_t>(j)] +
                dt * (ham + 0.5 * coeffs.sigma_tot_sq(x) * Vxx[static_cast<size_t>(j)]);
        }
        if (bmax > 0.0 && dt > grid.h / bmax)
            throw std::runtime_error("cfl: hjb_backward drift violates dt <= h/max|b|");
    }

    // Policy rows: best response to V(t_n) against mu(t_n).
    for (int n = 0; n < n_steps; ++n) {
        const double t = path.times[static_cast<size_t>(n)];
        const MeasureRef mu(path.slices[static_cast<size_t>(n)]);
        const auto Vx = diff1_values(grid, res.value.V[static_cast<size_t>(n)]);
        for (int j = 0; j < m; ++j) {
            bool cl = false;
            res.policy.u_values[static_cast<size_t>(n)][static_cast<size_t>(j)] =
                best_response(coeffs, Vx[static_cast<size_t>(j)], t, grid.x(j), mu, &cl);
            if (cl) ++res.clamp_count;
        }
    }
    return res;
}

}  // namespace mfg
