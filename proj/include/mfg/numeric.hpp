#pragma once

#include <span>
#include <vector>

namespace mfg {

// Shape-preserving cubic Hermite interpolant (Fritsch-Carlson). Built on
// strictly increasing abscissae; monotone data yields a monotone
// interpolant, which is what the inverse of a cumulative integral needs.
class MonotoneCubic {
  public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> xs, std::vector<double> ys);

    double operator()(double x) const;
    double derivative(double x) const;
    double x_front() const { return xs_.front(); }
    double x_back() const { return xs_.back(); }

  private:
    std::vector<double> xs_, ys_, ds_;
    int segment(double x) const;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    int n_used = 0;
};

// Ordinary least squares with residual-based standard error.
LineFit ols_fit(std::span<const double> x, std::span<const double> y);

// Weighted least squares with known per-point standard deviations; the
// slope standard error comes from the known variances.
LineFit wls_fit(std::span<const double> x, std::span<const double> y,
                std::span<const double> y_sd);

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);
double standard_error(std::span<const double> v);

}  // namespace mfg
