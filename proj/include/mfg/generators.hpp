#pragma once

#include <string>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/policy.hpp"

namespace mfg {

// Weighted sum of moment functionals, F = sum_j w_j F_j. These are the
// cylinder functionals on which the N-particle generator splits exactly
// into a limit part plus a 1/N correction.
struct CylinderFunctional {
    std::vector<double> weights;
    std::vector<MomentFunctional> parts;
    std::string name;

    static CylinderFunctional single(MomentFunctional f, double w = 1.0);
    double value(const MeasureRef& mu) const;
};

// Brute-force oracle: evaluates the N-particle generator
//   A_N f = sum_i B^i_mu f + sum_{i<j} sigma_com(x_i) sigma_com(x_j) d2f/dx_i dx_j
// on f(x_1..x_N) = F(empirical measure) with every partial taken by
// five-point central finite differences in the particle coordinates.
// The SDE coefficients (and the control) are frozen at the unbumped
// configuration; only F is differenced. O(N^2) functional evaluations,
// guarded to N <= 64.
double apply_AN_fd(const ModelCoefficients& coeffs, const Policy& policy, double t,
                   const CylinderFunctional& F, const std::vector<double>& positions,
                   double fd_step = 2e-2);

// Limit generator on measures: the mean-field term plus the common-noise
// pair term, evaluated through the closed-form variational derivatives of
// the moment functionals. Works on grid measures and atomic measures
// alike (sums replace integrals exactly in the atomic case).
double apply_lambda_lim(const ModelCoefficients& coeffs, const Policy& policy, double t,
                        const CylinderFunctional& F, const MeasureRef& mu);

// 1/N-correction term driven by the idiosyncratic noise.
double apply_lambda_corr(const ModelCoefficients& coeffs, const CylinderFunctional& F,
                         const MeasureRef& mu);

// |A_N F - (Lambda_lim F + Lambda_corr F / N)| at the atomic measure of
// the given positions. The identity is exact in exact arithmetic, so the
// residual measures only the finite-difference error of the oracle.
double decomposition_residual(const ModelCoefficients& coeffs, const Policy& policy, double t,
                              const CylinderFunctional& F, const std::vector<double>& positions);

// The functional gallery used by the generator experiments and tests.
std::vector<CylinderFunctional> functional_gallery();

}  // namespace mfg
