#pragma once

#include <span>
#include <string>
#include <vector>

namespace mfg {

// Uniform 1D grid on [x_min, x_max] with n_points nodes.
struct Grid1D {
    double x_min = 0.0;
    double x_max = 1.0;
    int n_points = 0;
    double h = 0.0;

    Grid1D() = default;
    Grid1D(double xmin, double xmax, int n);

    double x(int j) const { return x_min + h * j; }
    std::vector<double> nodes() const;
    bool same_as(const Grid1D& other) const;
};

// Signed measure represented by its density sampled on a grid. All
// integrals in the project use the trapezoid rule on this grid, so the
// quadrature weight of node j is h (interior) or h/2 (endpoints).
struct GridMeasure {
    Grid1D grid;
    std::vector<double> density;

    GridMeasure() = default;
    GridMeasure(const Grid1D& g, std::vector<double> d);
    static GridMeasure zero(const Grid1D& g);

    double quad_weight(int j) const;
    double mass() const;                 // trapezoid integral of the density
    double total_variation() const;      // trapezoid integral of |density|
    double negative_part_mass() const;   // trapezoid integral of max(-density, 0)
    double moment(int order) const;      // trapezoid integral of x^order * density

    // Validates density >= 0 and |mass - 1| <= 1e-8; throws otherwise.
    void check_probability() const;

    void write_csv(const std::string& path) const;
    static GridMeasure read_csv(const std::string& path);
};

// (phi, mu) by the trapezoid rule; phi given by its node values.
double pair(std::span<const double> phi_values, const GridMeasure& m);

// Gaussian bump centered at x0, renormalized so its trapezoid mass is
// exactly 1. Grid-level stand-in for a Dirac delta.
GridMeasure mollified_delta(const Grid1D& grid, double x0, double bandwidth);

// Gaussian density with the given mean and standard deviation,
// renormalized to unit trapezoid mass (no boundary-margin precondition;
// the caller picks a domain that holds the mass it cares about).
GridMeasure gaussian_measure(const Grid1D& grid, double mean, double sd);

// Second-order finite differences of a grid density: central stencils in
// the interior, one-sided second-order at the two boundary nodes.
GridMeasure diff1(const GridMeasure& m);
GridMeasure diff2(const GridMeasure& m);
std::vector<double> diff1_values(const Grid1D& g, std::span<const double> f);
std::vector<double> diff2_values(const Grid1D& g, std::span<const double> f);

// Kernel-density smoothing of particle positions onto the grid:
// (x_1..x_N) -> (delta_{x_1}+...+delta_{x_N})/N convolved with a Gaussian
// of the given bandwidth and renormalized to unit mass. Positions outside
// the admissible interior are clamped; the count of clamped points is
// reported through clamped_count when non-null.
GridMeasure empirical_to_grid(std::span<const double> positions, const Grid1D& grid,
                              double bandwidth, std::size_t* clamped_count = nullptr);

// Read-only view of a measure that both grid densities and particle
// ensembles can provide. Coefficient functions take this view, so the
// same model evaluates against a smoothed density or the raw empirical
// measure of an ensemble.
class MeasureRef {
  public:
    MeasureRef() = default;
    explicit MeasureRef(const GridMeasure& gm);
    explicit MeasureRef(std::span<const double> atoms);

    bool is_atomic() const { return grid_ == nullptr; }
    const GridMeasure* grid_measure() const { return grid_; }
    std::span<const double> atoms() const { return atoms_; }

    double mass() const { return mass_; }
    double moment1() const { return m1_; }  // raw first moment (x, mu)

    // (f, mu) for a scalar function f.
    template <class F>
    double pair1(F&& f) const {
        if (grid_) {
            double acc = 0.0;
            for (int j = 0; j < grid_->grid.n_points; ++j)
                acc += grid_->quad_weight(j) * f(grid_->grid.x(j)) * grid_->density[static_cast<size_t>(j)];
            return acc;
        }
        double acc = 0.0;
        for (double x : atoms_) acc += f(x);
        return atoms_.empty() ? 0.0 : acc / static_cast<double>(atoms_.size());
    }

    // Double integral of f(x, y) against mu (x) mu (y); atomic sums include
    // the diagonal, matching the tensor-product definition.
    template <class F>
    double pair2(F&& f) const {
        if (grid_) {
            const int n = grid_->grid.n_points;
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                const double wj = grid_->quad_weight(j) * grid_->density[static_cast<size_t>(j)];
                if (wj == 0.0) continue;
                double inner = 0.0;
                for (int k = 0; k < n; ++k)
                    inner += grid_->quad_weight(k) * f(grid_->grid.x(j), grid_->grid.x(k)) *
                             grid_->density[static_cast<size_t>(k)];
                acc += wj * inner;
            }
            return acc;
        }
        const double n = static_cast<double>(atoms_.size());
        if (atoms_.empty()) return 0.0;
        double acc = 0.0;
        for (double x : atoms_)
            for (double y : atoms_) acc += f(x, y);
        return acc / (n * n);
    }

  private:
    const GridMeasure* grid_ = nullptr;
    std::span<const double> atoms_;
    double mass_ = 0.0;
    double m1_ = 0.0;  // first moment, computed eagerly so per-node
                       // coefficient evaluations stay O(1)
};

}  // namespace mfg
