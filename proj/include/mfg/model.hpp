#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

// Scalar kernel with analytic derivatives, used for order-1 moment
// functionals and for generator calculus (which needs the spatial
// derivatives of variational derivatives in closed form).
struct Kernel1 {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
};

// Symmetric two-point kernel with the analytic partials the generator
// calculus needs. Only the first-argument partials are stored; the rest
// follow from symmetry.
struct Kernel2 {
    std::function<double(double, double)> value;
    std::function<double(double, double)> dx;    // d/dx
    std::function<double(double, double)> dxx;   // d^2/dx^2
    std::function<double(double, double)> dxy;   // d^2/dx dy
};

// F(mu) = integral of F~ against mu^{tensor k}, k = 1 or 2.
struct MomentFunctional {
    int order = 1;
    Kernel1 k1;
    Kernel2 k2;
    std::string name;

    static MomentFunctional linear(Kernel1 k, std::string name = "");
    static MomentFunctional pairwise(Kernel2 k, std::string name = "");
};

double moment_value(const MomentFunctional& f, const MeasureRef& mu);
// First variational derivative at point x: k=1 gives F~(x); k=2 gives
// 2 * integral F~(x, .) d mu.
double moment_vd1(const MomentFunctional& f, const MeasureRef& mu, double x);
// Second variational derivative: 0 for k=1, 2 F~(x, y) for k=2.
double moment_vd2(const MomentFunctional& f, const MeasureRef& mu, double x, double y);

// Spatial derivatives of the first variational derivative, needed by the
// limit generator.
double moment_vd1_dx(const MomentFunctional& f, const MeasureRef& mu, double x);
double moment_vd1_dxx(const MomentFunctional& f, const MeasureRef& mu, double x);
// Mixed spatial derivative of the second variational derivative.
double moment_vd2_dxy(const MomentFunctional& f, double x, double y);

// Drift component b_i(t, x, mu) whose measure dependence runs through a
// finite list of moment functionals, so its variational derivatives are
// available in closed form.
struct MeasureField {
    std::function<double(double, double, const MeasureRef&)> value;
    // d/d mu(r) of value(t, x, mu); null means identically zero.
    std::function<double(double, double, const MeasureRef&, double)> vd1;
    // d^2/d mu(r1) d mu(r2); null means identically zero.
    std::function<double(double, double, const MeasureRef&, double, double)> vd2;

    bool measure_free() const { return !vd1 && !vd2; }
    static MeasureField constant(double c);
};

struct ControlBox {
    double lo = -1.0;
    double hi = 1.0;
};

struct ModelCoefficients {
    std::string name;
    std::function<double(double)> sigma_ind;
    std::function<double(double)> sigma_com;
    double sigma_ind_lower = 0.0;  // declared positive lower bound
    double sigma_com_lower = 0.0;  // declared positive lower bound (= A_1)
    MeasureField b1;
    MeasureField b2;
    std::function<double(double, double, const MeasureRef&, double)> running_cost;
    std::function<double(double, double, const MeasureRef&, double)> running_cost_du;
    std::function<double(double, const MeasureRef&)> terminal_cost;
    ControlBox u_box;
    bool quadratic_cost_in_u = false;  // running cost is u^2/2

    double sigma_tot_sq(double x) const {
        const double si = sigma_ind(x), sc = sigma_com(x);
        return si * si + sc * sc;
    }

    // Checks the declared diffusion lower bounds on the given grid and the
    // strict convexity of the running cost in u by sampled second
    // differences. Throws on violation.
    void validate_on_grid(const Grid1D& grid) const;
};

// b(t, x, mu, u) = b1 + b2 u; throws when u leaves the admissible box.
double drift(const ModelCoefficients& coeffs, double t, double x, const MeasureRef& mu, double u);

// Built-in model gallery. Parameters not present in the map take the
// documented defaults.
//   "ou-common": sigma_ind = sigma (1), sigma_com = a (0.3) constant,
//                b1 = kappa (1) * (m1(mu) - x), b2 = 1,
//                J = u^2/2, V_T = x^2/2.
//   "var-a":     same drift/cost, sigma_com(x) = a0 (2) + a1 (0.5) tanh x.
ModelCoefficients make_model(const std::string& name, const std::map<std::string, double>& params = {});

}  // namespace mfg
