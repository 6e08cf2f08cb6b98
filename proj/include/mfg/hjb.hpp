#pragma once

#include <string>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/policy.hpp"
#include "mfg/spde.hpp"

namespace mfg {

// Feedback control sampled on the time-space mesh; row n is the field
// acting on [t_n, t_{n+1}). Values are kept inside the admissible box.
struct PolicyField {
    std::vector<double> times;  // full mesh, n_steps+1 entries
    Grid1D grid;
    std::vector<std::vector<double>> u_values;  // n_steps rows
    std::string context;

    int n_steps() const { return static_cast<int>(u_values.size()); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
    // Piecewise-constant in t (mesh rows), linear interpolation in x.
    double at(double t, double x) const;
    static PolicyField constant(const Grid1D& grid, const std::vector<double>& times, double u);
    void write_csv(const std::string& path) const;  // t,x,value
};

// Adapts a field to the Policy interface (the measure argument is
// ignored; the field already encodes its measure-path context).
Policy policy_from_field(const PolicyField& field);

// Value function along a fixed measure path.
struct ValueField {
    std::vector<double> times;
    Grid1D grid;
    std::vector<std::vector<double>> V;  // n_steps+1 rows

    void write_csv(const std::string& path) const;
};

// Pointwise minimizer of b2 u dV/dx + J(t, x, mu, u) over the control
// box. Closed form -b2 dV/dx for the quadratic cost, monotone root find
// on dJ/du + b2 dV/dx otherwise; boundary minimizers count as clamped.
// Throws a model error when a sampled second difference of J in u is
// non-positive.
double best_response(const ModelCoefficients& coeffs, double dVdx, double t, double x,
                     const MeasureRef& mu, bool* clamped = nullptr);

struct HjbResult {
    ValueField value;
    PolicyField policy;
    long clamp_count = 0;
};

// Explicit backward sweep of the conditional HJB equation
//   dV/dt + inf_u [b dV/dx + J] + 1/2 (sigma_ind^2 + sigma_com^2) V'' = 0
// along the frozen measure path, from V(T, x) = V_T(x, mu_T). The
// measure-derivative terms of the full common-noise equation are absent
// by construction; with common noise this is the documented per-path
// approximation. Policy rows record the best response at (t_n, mu_n,
// V(t_n)).
HjbResult hjb_backward(const ModelCoefficients& coeffs, const MeasurePath& measure_path);

}  // namespace mfg
