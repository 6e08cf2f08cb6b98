#pragma once

#include <vector>

#include "mfg/spde.hpp"

namespace mfg {

// First variational derivative of the solution map with respect to the
// initial measure, for one tagged (mollified) bump point: xi_t = the
// response of the solution at time t to a unit point mass added at
// bump_point at time 0. Slices are kept both in physical space (xi) and
// in transformed space (xi_g), since the second-derivative equation
// sources from the latter.
struct SensitivityPath {
    double bump_point = 0.0;
    double bandwidth = 0.0;
    std::vector<double> times;
    std::vector<GridMeasure> xi;    // physical-space slices
    std::vector<GridMeasure> xi_g;  // transformed-space slices
};

// Integrates the linearized transformed equation along a base path solved
// by the characteristics method: transport of xi by the frozen
// transformed operator plus the drift-response source coming from the
// measure dependence of b (closed form through the model's variational
// derivative hooks). xi_0 is the mollified delta at x0.
SensitivityPath solve_xi(const ModelCoefficients& coeffs, const Policy& policy,
                         const MeasurePath& base, double x0, double bandwidth,
                         double flow_pad_multiplier = 4.0);

// Central-difference oracle on the full solver, same W path:
// (v_t[v0 + h delta~] - v_t[v0 - h delta~]) / (2h) for every time slice.
std::vector<GridMeasure> xi_fd_oracle(const ModelCoefficients& coeffs, const Policy& policy,
                                      const GridMeasure& v0, const std::vector<double>& W_path,
                                      double dt, double x0, double bandwidth, double h_bump,
                                      SpdeMethod method = SpdeMethod::characteristics);

// Second variational derivative eta_t(.; x1, x2), integrated with the
// already-solved xi paths of the two bump points as sources (symmetrized)
// plus the second-derivative term of b when the model provides it.
// Returns physical-space slices; eta_0 = 0 and total mass stays 0.
std::vector<GridMeasure> solve_eta(const ModelCoefficients& coeffs, const Policy& policy,
                                   const MeasurePath& base, const SensitivityPath& xi1,
                                   const SensitivityPath& xi2, double flow_pad_multiplier = 4.0);

// Mixed second central difference on the full solver, same W path:
// (v[+h,+h] - v[+h,-h] - v[-h,+h] + v[-h,-h]) / (4 h^2) at final time.
GridMeasure eta_fd_oracle(const ModelCoefficients& coeffs, const Policy& policy,
                          const GridMeasure& v0, const std::vector<double>& W_path, double dt,
                          double x1, double x2, double bandwidth, double h_bump,
                          SpdeMethod method = SpdeMethod::characteristics);

// L1 distance between two grid measures on the same grid.
double l1_distance(const GridMeasure& a, const GridMeasure& b);

}  // namespace mfg
