#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace gaslab {

/// Uniform grid on a compact interval [lower, upper] with trapezoid-rule
/// quadrature weights: h/2 at the endpoints, h in the interior.
class Grid {
  public:
    Grid(double lower, double upper, int n_points);

    double lower() const { return lower_; }
    double upper() const { return upper_; }
    double spacing() const { return spacing_; }
    double length() const { return upper_ - lower_; }
    int size() const { return static_cast<int>(nodes_.size()); }

    double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    double weight(int i) const { return weights_[static_cast<std::size_t>(i)]; }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

    double clamp(double x) const {
        return x < lower_ ? lower_ : (x > upper_ ? upper_ : x);
    }
    bool contains(double x) const { return x >= lower_ && x <= upper_; }

    /// Value equality; grid functions defined on grids with identical
    /// (lower, upper, n) are compatible even if the objects differ.
    bool same_as(const Grid& other) const {
        return lower_ == other.lower_ && upper_ == other.upper_ &&
               size() == other.size();
    }

  private:
    double lower_;
    double upper_;
    double spacing_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(double lower, double upper, int n_points);

/// Real-valued function sampled at the nodes of a grid. The continuum
/// object it stands for is the piecewise-linear interpolant.
struct GridFunction {
    GridPtr grid;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(GridPtr g, std::vector<double> v);

    int size() const { return static_cast<int>(values.size()); }
};

/// Linear interpolation with the argument clamped into the grid.
double interp_clamped(const GridFunction& f, double x);

/// Linear interpolation, zero outside the grid (densities vanish beyond
/// their truncation interval).
double interp_zero_outside(const GridFunction& f, double x);

/// Trapezoid-rule integral. Throws "non-finite grid function" if any node
/// value is not finite.
double quadrature(const GridFunction& f);

/// Nonnegative grid function with unit trapezoid mass (tolerance 1e-9).
class GridDensity {
  public:
    explicit GridDensity(GridFunction f);

    const GridFunction& base() const { return f_; }
    const GridPtr& grid() const { return f_.grid; }
    std::span<const double> values() const { return f_.values; }
    double value(int i) const { return f_.values[static_cast<std::size_t>(i)]; }

    double interp_clamped(double x) const { return gaslab::interp_clamped(f_, x); }
    double interp_zero_outside(double x) const {
        return gaslab::interp_zero_outside(f_, x);
    }

    bool strictly_positive() const;

  private:
    GridFunction f_;
};

/// Pointwise (max, min) of a density over its grid nodes.
std::pair<double, double> density_stats(const GridDensity& d);

/// f / quadrature(f). Throws "non-normalizable" on zero/negative mass or
/// negative values.
GridDensity normalize(const GridFunction& f);

/// Unnormalized nonnegative grid function with finite L1 norm; the running
/// object of the filter recursion.
class InformationState {
  public:
    explicit InformationState(GridFunction f);
    InformationState(GridPtr grid, std::vector<double> values);
    explicit InformationState(const GridDensity& d);

    const GridFunction& base() const { return f_; }
    const GridPtr& grid() const { return f_.grid; }
    std::span<const double> values() const { return f_.values; }
    double value(int i) const { return f_.values[static_cast<std::size_t>(i)]; }
    int size() const { return f_.size(); }

    double l1_norm() const;

  private:
    GridFunction f_;
};

/// L1 distance between two information states on the same grid.
/// Throws "incompatible grids" when the grids differ.
double l1_distance(const InformationState& a, const InformationState& b);

/// Exact inverse-CDF sampler for the piecewise-linear density. One uniform
/// in [0,1) maps to one sample; the map is strictly deterministic, so seeded
/// draws are identical across platforms.
class DensitySampler {
  public:
    explicit DensitySampler(const GridDensity& d);

    double sample(double u01) const;

  private:
    GridPtr grid_;
    std::vector<double> value_;  // node density values
    std::vector<double> cdf_;    // node CDF, normalized so cdf_.back() == 1
};

}  // namespace gaslab
