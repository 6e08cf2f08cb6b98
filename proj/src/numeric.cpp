#include "mfg/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfg {

MonotoneCubic::MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    const size_t n = xs_.size();
    if (n < 2 || ys_.size() != n)
        throw std::invalid_argument("MonotoneCubic: need matching inputs with >= 2 nodes");
    for (size_t i = 1; i < n; ++i)
        if (!(xs_[i] > xs_[i - 1]))
            throw std::invalid_argument("MonotoneCubic: abscissae must be strictly increasing");
    std::vector<double> h(n - 1), slope(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        h[i] = xs_[i + 1] - xs_[i];
        slope[i] = (ys_[i + 1] - ys_[i]) / h[i];
    }
    ds_.resize(n);
    if (n == 2) {
        ds_[0] = ds_[1] = slope[0];
    } else {
        for (size_t i = 1; i + 1 < n; ++i) {
            if (slope[i - 1] * slope[i] <= 0.0) {
                ds_[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                ds_[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
            }
        }
        auto end_derivative = [](double h0, double h1, double s0, double s1) {
            double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
            if (d * s0 <= 0.0)
                d = 0.0;
            else if (s0 * s1 <= 0.0 && std::fabs(d) > 3.0 * std::fabs(s0))
                d = 3.0 * s0;
            return d;
        };
        ds_[0] = end_derivative(h[0], h[1], slope[0], slope[1]);
        ds_[n - 1] = end_derivative(h[n - 2], h[n - 3], slope[n - 2], slope[n - 3]);
    }
}

int MonotoneCubic::segment(double x) const {
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    int i = static_cast<int>(it - xs_.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(xs_.size()) - 2);
    return i;
}

double MonotoneCubic::operator()(double x) const {
    const int i = segment(x);
    const double h = xs_[static_cast<size_t>(i) + 1] - xs_[static_cast<size_t>(i)];
    const double t = (x - xs_[static_cast<size_t>(i)]) / h;
    const double y0 = ys_[static_cast<size_t>(i)], y1 = ys_[static_cast<size_t>(i) + 1];
    const double d0 = ds_[static_cast<size_t>(i)], d1 = ds_[static_cast<size_t>(i) + 1];
    const double t2 = t * t, t3 = t2 * t;
    return y0 * (2.0 * t3 - 3.0 * t2 + 1.0) + h * d0 * (t3 - 2.0 * t2 + t) +
           y1 * (-2.0 * t3 + 3.0 * t2) + h * d1 * (t3 - t2);
}

double MonotoneCubic::derivative(double x) const {
    const int i = segment(x);
    const double h = xs_[static_cast<size_t>(i) + 1] - xs_[static_cast<size_t>(i)];
    const double t = (x - xs_[static_cast<size_t>(i)]) / h;
    const double y0 = ys_[static_cast<size_t>(i)], y1 = ys_[static_cast<size_t>(i) + 1];
    const double d0 = ds_[static_cast<size_t>(i)], d1 = ds_[static_cast<size_t>(i) + 1];
    const double t2 = t * t;
    return (y0 * (6.0 * t2 - 6.0 * t) + h * d0 * (3.0 * t2 - 4.0 * t + 1.0) +
            y1 * (-6.0 * t2 + 6.0 * t) + h * d1 * (3.0 * t2 - 2.0 * t)) /
           h;
}

LineFit ols_fit(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("ols_fit: need >= 2 matching points");
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ss_res += r * r;
    }
    fit.slope_se = n > 2 ? std::sqrt(ss_res / (static_cast<double>(n) - 2.0) / sxx) : 0.0;
    fit.n_used = static_cast<int>(n);
    return fit;
}

LineFit wls_fit(std::span<const double> x, std::span<const double> y,
                std::span<const double> y_sd) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n || y_sd.size() != n)
        throw std::invalid_argument("wls_fit: need >= 2 matching points");
    double sw = 0.0, swx = 0.0, swy = 0.0;
    std::vector<double> w(n);
    for (size_t i = 0; i < n; ++i) {
        const double sd = std::max(y_sd[i], 1e-300);
        w[i] = 1.0 / (sd * sd);
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
    }
    const double mx = swx / sw, my = swy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.slope_se = std::sqrt(1.0 / sxx);
    fit.n_used = static_cast<int>(n);
    return fit;
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double a : v) s += a;
    return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    const size_t n = v.size();
    if (n < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double a : v) ss += (a - m) * (a - m);
    return std::sqrt(ss / (static_cast<double>(n) - 1.0));
}

double standard_error(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    return sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace mfg
