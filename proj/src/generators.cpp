#include "mfg/generators.hpp"

#include <cmath>
#include <stdexcept>

namespace mfg {

CylinderFunctional CylinderFunctional::single(MomentFunctional f, double w) {
    CylinderFunctional c;
    c.name = f.name;
    c.weights.push_back(w);
    c.parts.push_back(std::move(f));
    return c;
}

double CylinderFunctional::value(const MeasureRef& mu) const {
    double acc = 0.0;
    for (size_t j = 0; j < parts.size(); ++j) acc += weights[j] * moment_value(parts[j], mu);
    return acc;
}

namespace {

// Five-point central stencils, fourth-order first derivative and
// fourth-order second derivative.
double fd_first(const std::function<double(double)>& f, double x, double h) {
    return (f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) / (12.0 * h);
}

double fd_second(const std::function<double(double)>& f, double x, double h) {
    return (-f(x - 2 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2 * h)) /
           (12.0 * h * h);
}

}  // namespace

double apply_AN_fd(const ModelCoefficients& coeffs, const Policy& policy, double t,
                   const CylinderFunctional& F, const std::vector<double>& positions,
                   double fd_step) {
    const int n = static_cast<int>(positions.size());
    if (n < 1) throw std::invalid_argument("apply_AN_fd: empty configuration");
    if (n > 64) throw std::invalid_argument("apply_AN_fd: oracle limited to N <= 64");
    const MeasureRef mu{std::span<const double>(positions)};
    std::vector<double> work = positions;
    auto f_at = [&](int i, double xi) {
        work[static_cast<size_t>(i)] = xi;
        const double v = F.value(MeasureRef(std::span<const double>(work)));
        work[static_cast<size_t>(i)] = positions[static_cast<size_t>(i)];
        return v;
    };

    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double xi = positions[static_cast<size_t>(i)];
        const double u = policy(t, xi, mu);
        const double b = coeffs.b1.value(t, xi, mu) + coeffs.b2.value(t, xi, mu) * u;
        const double dsq = coeffs.sigma_tot_sq(xi);
        auto fi = [&](double v) { return f_at(i, v); };
        acc += b * fd_first(fi, xi, fd_step) + 0.5 * dsq * fd_second(fi, xi, fd_step);
    }
    // Pair term: cross-partials by the tensor of five-point first stencils.
    const double w[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
    const double o[4] = {-2.0, -1.0, 1.0, 2.0};
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double xi = positions[static_cast<size_t>(i)];
            const double xj = positions[static_cast<size_t>(j)];
            double mixed = 0.0;
            for (int a = 0; a < 4; ++a) {
                work[static_cast<size_t>(i)] = xi + o[a] * fd_step;
                for (int c = 0; c < 4; ++c) {
                    work[static_cast<size_t>(j)] = xj + o[c] * fd_step;
                    mixed += w[a] * w[c] * F.value(MeasureRef(std::span<const double>(work)));
                }
            }
            work[static_cast<size_t>(i)] = xi;
            work[static_cast<size_t>(j)] = xj;
            mixed /= fd_step * fd_step;
            acc += coeffs.sigma_com(xi) * coeffs.sigma_com(xj) * mixed;
        }
    }
    return acc;
}

double apply_lambda_lim(const ModelCoefficients& coeffs, const Policy& policy, double t,
                        const CylinderFunctional& F, const MeasureRef& mu) {
    double acc = 0.0;
    for (size_t p = 0; p < F.parts.size(); ++p) {
        const MomentFunctional& part = F.parts[p];
        // Mean-field term: integral of B_mu applied to x -> dF/dmu(x).
        const double term1 = mu.pair1([&](double y) {
            const double u = policy(t, y, mu);
            const double b = coeffs.b1.value(t, y, mu) + coeffs.b2.value(t, y, mu) * u;
            return b * moment_vd1_dx(part, mu, y) + 0.5 * coeffs.sigma_tot_sq(y) * moment_vd1_dxx(part, mu, y);
        });
        double term2 = 0.0;
        if (part.order == 2) {
            term2 = 0.5 * mu.pair2([&](double y, double z) {
                return coeffs.sigma_com(y) * coeffs.sigma_com(z) * moment_vd2_dxy(part, y, z);
            });
        }
        acc += F.weights[p] * (term1 + term2);
    }
    return acc;
}

double apply_lambda_corr(const ModelCoefficients& coeffs, const CylinderFunctional& F,
                         const MeasureRef& mu) {
    double acc = 0.0;
    for (size_t p = 0; p < F.parts.size(); ++p) {
        const MomentFunctional& part = F.parts[p];
        if (part.order != 2) continue;  // vanishes on linear functionals
        acc += F.weights[p] * 0.5 * mu.pair1([&](double x) {
            const double si = coeffs.sigma_ind(x);
            return si * si * moment_vd2_dxy(part, x, x);
        });
    }
    return acc;
}

double decomposition_residual(const ModelCoefficients& coeffs, const Policy& policy, double t,
                              const CylinderFunctional& F, const std::vector<double>& positions) {
    const MeasureRef mu{std::span<const double>(positions)};
    const double lhs = apply_AN_fd(coeffs, policy, t, F, positions);
    const double rhs = apply_lambda_lim(coeffs, policy, t, F, mu) +
                       apply_lambda_corr(coeffs, F, mu) / static_cast<double>(positions.size());
    return std::fabs(lhs - rhs);
}

std::vector<CylinderFunctional> functional_gallery() {
    std::vector<CylinderFunctional> gallery;

    Kernel1 kx{[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    gallery.push_back(CylinderFunctional::single(MomentFunctional::linear(kx, "mean")));

    Kernel1 kx2{[](double x) { return x * x; }, [](double x) { return 2.0 * x; },
                [](double) { return 2.0; }};
    gallery.push_back(CylinderFunctional::single(MomentFunctional::linear(kx2, "second-moment")));

    Kernel2 kxy{[](double x, double y) { return x * y; }, [](double, double y) { return y; },
                [](double, double) { return 0.0; }, [](double, double) { return 1.0; }};
    gallery.push_back(CylinderFunctional::single(MomentFunctional::pairwise(kxy, "mean-squared")));

    Kernel2 kvar{[](double x, double y) { return 0.5 * (x - y) * (x - y); },
                 [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
                 [](double, double) { return -1.0; }};
    gallery.push_back(CylinderFunctional::single(MomentFunctional::pairwise(kvar, "variance")));

    Kernel2 kcos{[](double x, double y) { return std::cos(x - y); },
                 [](double x, double y) { return -std::sin(x - y); },
                 [](double x, double y) { return -std::cos(x - y); },
                 [](double x, double y) { return std::cos(x - y); }};
    gallery.push_back(CylinderFunctional::single(MomentFunctional::pairwise(kcos, "cos-pair")));

    // One genuinely mixed cylinder functional.
    CylinderFunctional mixed;
    mixed.name = "mixed";
    mixed.weights = {0.7, -0.4};
    mixed.parts = {MomentFunctional::linear(kx2, "second-moment"),
                   MomentFunctional::pairwise(kcos, "cos-pair")};
    gallery.push_back(mixed);

    return gallery;
}

}  // namespace mfg
