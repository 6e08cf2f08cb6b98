#include "mfg/model.hpp"

#include <cmath>
#include <stdexcept>

namespace mfg {

MomentFunctional MomentFunctional::linear(Kernel1 k, std::string name) {
    MomentFunctional f;
    f.order = 1;
    f.k1 = std::move(k);
    f.name = std::move(name);
    return f;
}

MomentFunctional MomentFunctional::pairwise(Kernel2 k, std::string name) {
    MomentFunctional f;
    f.order = 2;
    f.k2 = std::move(k);
    f.name = std::move(name);
    return f;
}

double moment_value(const MomentFunctional& f, const MeasureRef& mu) {
    if (f.order == 1) return mu.pair1(f.k1.value);
    return mu.pair2(f.k2.value);
}

double moment_vd1(const MomentFunctional& f, const MeasureRef& mu, double x) {
    if (f.order == 1) return f.k1.value(x);
    return 2.0 * mu.pair1([&](double z) { return f.k2.value(x, z); });
}

double moment_vd2(const MomentFunctional& f, const MeasureRef&, double x, double y) {
    if (f.order == 1) return 0.0;
    return 2.0 * f.k2.value(x, y);
}

double moment_vd1_dx(const MomentFunctional& f, const MeasureRef& mu, double x) {
    if (f.order == 1) return f.k1.d1(x);
    return 2.0 * mu.pair1([&](double z) { return f.k2.dx(x, z); });
}

double moment_vd1_dxx(const MomentFunctional& f, const MeasureRef& mu, double x) {
    if (f.order == 1) return f.k1.d2(x);
    return 2.0 * mu.pair1([&](double z) { return f.k2.dxx(x, z); });
}

double moment_vd2_dxy(const MomentFunctional& f, double x, double y) {
    if (f.order == 1) return 0.0;
    return 2.0 * f.k2.dxy(x, y);
}

MeasureField MeasureField::constant(double c) {
    MeasureField f;
    f.value = [c](double, double, const MeasureRef&) { return c; };
    return f;
}

void ModelCoefficients::validate_on_grid(const Grid1D& grid) const {
    for (int j = 0; j < grid.n_points; ++j) {
        const double x = grid.x(j);
        if (sigma_ind(x) < sigma_ind_lower || sigma_ind(x) <= 0.0)
            throw std::runtime_error("model: sigma_ind drops below its declared lower bound");
        if (sigma_com_lower > 0.0 && (sigma_com(x) < sigma_com_lower || sigma_com(x) <= 0.0))
            throw std::runtime_error("model: sigma_com drops below its declared lower bound");
    }
    // Strict convexity of J in u, sampled by second differences at a few
    // spatial points and control values.
    const GridMeasure probe = mollified_delta(grid, 0.5 * (grid.x_min + grid.x_max),
                                              std::max(2.0 * grid.h, 0.05 * (grid.x_max - grid.x_min)));
    const MeasureRef mu(probe);
    const double du = (u_box.hi - u_box.lo) / 16.0;
    for (int j = 0; j < grid.n_points; j += std::max(1, grid.n_points / 8)) {
        const double x = grid.x(j);
        for (double u = u_box.lo + du; u <= u_box.hi - du + 1e-12; u += du) {
            const double second = running_cost(0.0, x, mu, u + du) - 2.0 * running_cost(0.0, x, mu, u) +
                                  running_cost(0.0, x, mu, u - du);
            if (second <= 0.0)
                throw std::runtime_error("model: running cost is not strictly convex in u");
        }
    }
}

double drift(const ModelCoefficients& coeffs, double t, double x, const MeasureRef& mu, double u) {
    if (u < coeffs.u_box.lo || u > coeffs.u_box.hi)
        throw std::out_of_range("drift: control outside the admissible box");
    return coeffs.b1.value(t, x, mu) + coeffs.b2.value(t, x, mu) * u;
}

namespace {

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

ModelCoefficients make_common_base(const std::map<std::string, double>& params) {
    ModelCoefficients m;
    const double kappa = param(params, "kappa", 1.0);
    const double sigma = param(params, "sigma", 1.0);
    m.sigma_ind = [sigma](double) { return sigma; };
    m.sigma_ind_lower = sigma;
    m.b1.value = [kappa](double, double x, const MeasureRef& mu) { return kappa * (mu.moment1() - x); };
    m.b1.vd1 = [kappa](double, double, const MeasureRef&, double r) { return kappa * r; };
    m.b2 = MeasureField::constant(1.0);
    m.running_cost = [](double, double, const MeasureRef&, double u) { return 0.5 * u * u; };
    m.running_cost_du = [](double, double, const MeasureRef&, double u) { return u; };
    m.terminal_cost = [](double x, const MeasureRef&) { return 0.5 * x * x; };
    m.u_box = {param(params, "u_lo", -8.0), param(params, "u_hi", 8.0)};
    m.quadratic_cost_in_u = true;
    return m;
}

}  // namespace

ModelCoefficients make_model(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "ou-common") {
        ModelCoefficients m = make_common_base(params);
        m.name = name;
        const double a = param(params, "a", 0.3);
        m.sigma_com = [a](double) { return a; };
        m.sigma_com_lower = a;
        return m;
    }
    if (name == "var-a") {
        ModelCoefficients m = make_common_base(params);
        m.name = name;
        const double a0 = param(params, "a0", 2.0);
        const double a1 = param(params, "a1", 0.5);
        if (a0 - std::fabs(a1) <= 0.0)
            throw std::runtime_error("model var-a: a0 - |a1| must stay positive");
        m.sigma_com = [a0, a1](double x) { return a0 + a1 * std::tanh(x); };
        m.sigma_com_lower = a0 - std::fabs(a1);
        return m;
    }
    throw std::invalid_argument("make_model: unknown model '" + name + "'");
}

}  // namespace mfg
