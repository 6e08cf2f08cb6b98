#include "mfg/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfg {

Grid1D::Grid1D(double xmin, double xmax, int n) : x_min(xmin), x_max(xmax), n_points(n) {
    if (!(x_min < x_max)) throw std::invalid_argument("Grid1D: x_min must be < x_max");
    if (n_points < 8) throw std::invalid_argument("Grid1D: need at least 8 points");
    h = (x_max - x_min) / (n_points - 1);
}

std::vector<double> Grid1D::nodes() const {
    std::vector<double> xs(static_cast<size_t>(n_points));
    for (int j = 0; j < n_points; ++j) xs[static_cast<size_t>(j)] = x(j);
    return xs;
}

bool Grid1D::same_as(const Grid1D& other) const {
    return x_min == other.x_min && x_max == other.x_max && n_points == other.n_points;
}

GridMeasure::GridMeasure(const Grid1D& g, std::vector<double> d) : grid(g), density(std::move(d)) {
    if (static_cast<int>(density.size()) != grid.n_points)
        throw std::invalid_argument("GridMeasure: density length does not match grid");
}

GridMeasure GridMeasure::zero(const Grid1D& g) {
    return GridMeasure(g, std::vector<double>(static_cast<size_t>(g.n_points), 0.0));
}

double GridMeasure::quad_weight(int j) const {
    return (j == 0 || j == grid.n_points - 1) ? 0.5 * grid.h : grid.h;
}

double GridMeasure::mass() const {
    double acc = 0.0;
    for (int j = 0; j < grid.n_points; ++j) acc += quad_weight(j) * density[static_cast<size_t>(j)];
    return acc;
}

double GridMeasure::total_variation() const {
    double acc = 0.0;
    for (int j = 0; j < grid.n_points; ++j)
        acc += quad_weight(j) * std::fabs(density[static_cast<size_t>(j)]);
    return acc;
}

double GridMeasure::negative_part_mass() const {
    double acc = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const double d = density[static_cast<size_t>(j)];
        if (d < 0.0) acc -= quad_weight(j) * d;
    }
    return acc;
}

double GridMeasure::moment(int order) const {
    double acc = 0.0;
    for (int j = 0; j < grid.n_points; ++j)
        acc += quad_weight(j) * std::pow(grid.x(j), order) * density[static_cast<size_t>(j)];
    return acc;
}

void GridMeasure::check_probability() const {
    for (double d : density)
        if (d < 0.0) throw std::runtime_error("GridMeasure: probability density has negative values");
    if (std::fabs(mass() - 1.0) > 1e-8)
        throw std::runtime_error("GridMeasure: probability mass deviates from 1 by more than 1e-8");
}

void GridMeasure::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("GridMeasure: cannot open " + path);
    out << "x,density\n";
    char buf[80];
    for (int j = 0; j < grid.n_points; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid.x(j), density[static_cast<size_t>(j)]);
        out << buf;
    }
}

GridMeasure GridMeasure::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("GridMeasure: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("GridMeasure: empty file " + path);
    std::vector<double> xs, ds;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw std::runtime_error("GridMeasure: malformed row in " + path);
        xs.push_back(std::stod(a));
        ds.push_back(std::stod(b));
    }
    if (xs.size() < 8) throw std::runtime_error("GridMeasure: too few rows in " + path);
    Grid1D g(xs.front(), xs.back(), static_cast<int>(xs.size()));
    return GridMeasure(g, std::move(ds));
}

double pair(std::span<const double> phi_values, const GridMeasure& m) {
    if (static_cast<int>(phi_values.size()) != m.grid.n_points)
        throw std::invalid_argument("pair: phi length does not match grid");
    double acc = 0.0;
    for (int j = 0; j < m.grid.n_points; ++j)
        acc += m.quad_weight(j) * phi_values[static_cast<size_t>(j)] * m.density[static_cast<size_t>(j)];
    return acc;
}

GridMeasure mollified_delta(const Grid1D& grid, double x0, double bandwidth) {
    if (bandwidth < 2.0 * grid.h)
        throw std::domain_error("mollified_delta: bandwidth must be at least 2h");
    if (x0 < grid.x_min + 4.0 * bandwidth || x0 > grid.x_max - 4.0 * bandwidth)
        throw std::domain_error("mollified_delta: x0 too close to the boundary");
    std::vector<double> d(static_cast<size_t>(grid.n_points));
    const double inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
    for (int j = 0; j < grid.n_points; ++j) {
        const double dx = grid.x(j) - x0;
        d[static_cast<size_t>(j)] = std::exp(-dx * dx * inv2s2);
    }
    GridMeasure m(grid, std::move(d));
    const double total = m.mass();
    for (double& v : m.density) v /= total;
    return m;
}

GridMeasure gaussian_measure(const Grid1D& grid, double mean, double sd) {
    if (sd <= 0.0) throw std::invalid_argument("gaussian_measure: sd must be positive");
    std::vector<double> d(static_cast<size_t>(grid.n_points));
    const double inv2s2 = 1.0 / (2.0 * sd * sd);
    for (int j = 0; j < grid.n_points; ++j) {
        const double dx = grid.x(j) - mean;
        d[static_cast<size_t>(j)] = std::exp(-dx * dx * inv2s2);
    }
    GridMeasure m(grid, std::move(d));
    const double total = m.mass();
    for (double& v : m.density) v /= total;
    return m;
}

std::vector<double> diff1_values(const Grid1D& g, std::span<const double> f) {
    const int n = g.n_points;
    const double h = g.h;
    std::vector<double> out(static_cast<size_t>(n));
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (int j = 1; j + 1 < n; ++j)
        out[static_cast<size_t>(j)] = (f[static_cast<size_t>(j) + 1] - f[static_cast<size_t>(j) - 1]) / (2.0 * h);
    out[static_cast<size_t>(n) - 1] =
        (3.0 * f[static_cast<size_t>(n) - 1] - 4.0 * f[static_cast<size_t>(n) - 2] + f[static_cast<size_t>(n) - 3]) /
        (2.0 * h);
    return out;
}

std::vector<double> diff2_values(const Grid1D& g, std::span<const double> f) {
    const int n = g.n_points;
    const double h2 = g.h * g.h;
    std::vector<double> out(static_cast<size_t>(n));
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    for (int j = 1; j + 1 < n; ++j)
        out[static_cast<size_t>(j)] =
            (f[static_cast<size_t>(j) + 1] - 2.0 * f[static_cast<size_t>(j)] + f[static_cast<size_t>(j) - 1]) / h2;
    out[static_cast<size_t>(n) - 1] =
        (2.0 * f[static_cast<size_t>(n) - 1] - 5.0 * f[static_cast<size_t>(n) - 2] +
         4.0 * f[static_cast<size_t>(n) - 3] - f[static_cast<size_t>(n) - 4]) /
        h2;
    return out;
}

GridMeasure diff1(const GridMeasure& m) { return GridMeasure(m.grid, diff1_values(m.grid, m.density)); }
GridMeasure diff2(const GridMeasure& m) { return GridMeasure(m.grid, diff2_values(m.grid, m.density)); }

GridMeasure empirical_to_grid(std::span<const double> positions, const Grid1D& grid,
                              double bandwidth, std::size_t* clamped_count) {
    if (positions.empty()) throw std::invalid_argument("empirical_to_grid: no positions");
    if (bandwidth < 2.0 * grid.h)
        throw std::domain_error("empirical_to_grid: bandwidth must be at least 2h");
    const double lo = grid.x_min + 4.0 * bandwidth;
    const double hi = grid.x_max - 4.0 * bandwidth;
    std::size_t clamped = 0;
    std::vector<double> d(static_cast<size_t>(grid.n_points), 0.0);
    const double inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
    // Each kernel decays to ~1e-18 of its peak at 9 bandwidths; stamping a
    // truncated window keeps the cost linear in N.
    const int half_window = static_cast<int>(std::ceil(9.0 * bandwidth / grid.h)) + 1;
    for (double p : positions) {
        double x0 = p;
        if (x0 < lo) { x0 = lo; ++clamped; }
        if (x0 > hi) { x0 = hi; ++clamped; }
        const int jc = static_cast<int>(std::lround((x0 - grid.x_min) / grid.h));
        const int j0 = std::max(0, jc - half_window);
        const int j1 = std::min(grid.n_points - 1, jc + half_window);
        for (int j = j0; j <= j1; ++j) {
            const double dx = grid.x(j) - x0;
            d[static_cast<size_t>(j)] += std::exp(-dx * dx * inv2s2);
        }
    }
    GridMeasure m(grid, std::move(d));
    const double total = m.mass();
    for (double& v : m.density) v /= total;
    if (clamped_count) *clamped_count = clamped;
    return m;
}

MeasureRef::MeasureRef(const GridMeasure& gm) : grid_(&gm) {
    mass_ = gm.mass();
    m1_ = gm.moment(1);
}

MeasureRef::MeasureRef(std::span<const double> atoms) : atoms_(atoms) {
    if (atoms_.empty()) return;
    mass_ = 1.0;
    double acc = 0.0;
    for (double x : atoms_) acc += x;
    m1_ = acc / static_cast<double>(atoms_.size());
}

}  // namespace mfg
