#include "gaslab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gaslab/numeric.hpp"

namespace gaslab {

Grid::Grid(double lower, double upper, int n_points)
    : lower_(lower), upper_(upper) {
    if (!(std::isfinite(lower) && std::isfinite(upper)) || !(lower < upper)) {
        throw std::invalid_argument("grid bounds must satisfy lower < upper");
    }
    if (n_points < 2) {
        throw std::invalid_argument("grid needs at least 2 points");
    }
    const std::size_t n = static_cast<std::size_t>(n_points);
    spacing_ = (upper - lower) / static_cast<double>(n_points - 1);
    nodes_.resize(n);
    weights_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes_[i] = lower + static_cast<double>(i) * spacing_;
        weights_[i] = spacing_;
    }
    nodes_.back() = upper;  // avoid accumulated rounding at the right end
    weights_.front() = 0.5 * spacing_;
    weights_.back() = 0.5 * spacing_;
}

GridPtr make_grid(double lower, double upper, int n_points) {
    return std::make_shared<const Grid>(lower, upper, n_points);
}

GridFunction::GridFunction(GridPtr g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw std::invalid_argument("grid function needs a grid");
    if (static_cast<int>(values.size()) != grid->size()) {
        throw std::invalid_argument("grid function length mismatch");
    }
}

namespace {

// Shared interpolation core: returns the cell index and fraction for a
// point already inside [lower, upper].
inline double interp_inside(const GridFunction& f, double x) {
    const Grid& g = *f.grid;
    const int last = g.size() - 1;
    double t = (x - g.lower()) / g.spacing();
    int i = static_cast<int>(t);
    if (i < 0) i = 0;
    if (i >= last) i = last - 1;
    const double frac = t - static_cast<double>(i);
    const double a = f.values[static_cast<std::size_t>(i)];
    const double b = f.values[static_cast<std::size_t>(i) + 1];
    return a + (b - a) * clamp_to(frac, 0.0, 1.0);
}

}  // namespace

double interp_clamped(const GridFunction& f, double x) {
    return interp_inside(f, f.grid->clamp(x));
}

double interp_zero_outside(const GridFunction& f, double x) {
    if (!f.grid->contains(x)) return 0.0;
    return interp_inside(f, x);
}

double quadrature(const GridFunction& f) {
    if (!all_finite(f.values)) {
        throw std::invalid_argument("non-finite grid function");
    }
    const Grid& g = *f.grid;
    std::vector<double> terms(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        terms[i] = g.weight(static_cast<int>(i)) * f.values[i];
    }
    return pairwise_sum(terms);
}

GridDensity::GridDensity(GridFunction f) : f_(std::move(f)) {
    for (double v : f_.values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("density values must be nonnegative");
        }
    }
    const double mass = quadrature(f_);
    if (std::abs(mass - 1.0) > 1e-9) {
        throw std::invalid_argument("density mass differs from 1 beyond 1e-9");
    }
}

bool GridDensity::strictly_positive() const {
    for (double v : f_.values) {
        if (!(v > 0.0)) return false;
    }
    return true;
}

std::pair<double, double> density_stats(const GridDensity& d) {
    const auto [lo, hi] =
        std::minmax_element(d.values().begin(), d.values().end());
    return {*hi, *lo};
}

GridDensity normalize(const GridFunction& f) {
    for (double v : f.values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("non-normalizable");
        }
    }
    const double mass = quadrature(f);
    if (!(mass > 0.0)) {
        throw std::invalid_argument("non-normalizable");
    }
    GridFunction out(f.grid, f.values);
    for (double& v : out.values) v /= mass;
    return GridDensity(std::move(out));
}

InformationState::InformationState(GridFunction f) : f_(std::move(f)) {
    for (double v : f_.values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("information state must be nonnegative and finite");
        }
    }
}

InformationState::InformationState(GridPtr grid, std::vector<double> values)
    : InformationState(GridFunction(std::move(grid), std::move(values))) {}

InformationState::InformationState(const GridDensity& d)
    : InformationState(d.base()) {}

double InformationState::l1_norm() const {
    // values are nonnegative, so the L1 norm is the plain integral
    return quadrature(f_);
}

double l1_distance(const InformationState& a, const InformationState& b) {
    if (!a.grid()->same_as(*b.grid())) {
        throw std::invalid_argument("incompatible grids");
    }
    const Grid& g = *a.grid();
    std::vector<double> terms(a.values().size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        terms[i] = g.weight(static_cast<int>(i)) *
                   std::abs(a.values()[i] - b.values()[i]);
    }
    return pairwise_sum(terms);
}

DensitySampler::DensitySampler(const GridDensity& d)
    : grid_(d.grid()), value_(d.values().begin(), d.values().end()) {
    const std::size_t n = value_.size();
    cdf_.resize(n);
    cdf_[0] = 0.0;
    const double h = grid_->spacing();
    for (std::size_t i = 1; i < n; ++i) {
        cdf_[i] = cdf_[i - 1] + 0.5 * h * (value_[i - 1] + value_[i]);
    }
    const double total = cdf_.back();
    if (!(total > 0.0)) {
        throw std::invalid_argument("non-normalizable");
    }
    for (double& c : cdf_) c /= total;
    for (double& v : value_) v /= total;
    cdf_.back() = 1.0;
}

double DensitySampler::sample(double u01) const {
    const double target = clamp_to(u01, 0.0, 1.0);
    // locate the cell with cdf_[i] <= target < cdf_[i+1]
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t i = it == cdf_.begin()
                        ? 0
                        : static_cast<std::size_t>(it - cdf_.begin()) - 1;
    if (i >= cdf_.size() - 1) i = cdf_.size() - 2;

    const double h = grid_->spacing();
    const double a = value_[i];
    const double b = value_[i + 1];
    const double tau = target - cdf_[i];  // mass to place inside the cell
    double t;
    const double slope = b - a;
    if (std::abs(slope) * h < 1e-14 * (a + b + 1e-300)) {
        // flat cell
        const double cell_mass = 0.5 * h * (a + b);
        t = cell_mass > 0.0 ? tau / cell_mass : 0.0;
    } else {
        // solve (slope/2) t^2 + a t - tau/h = 0 for t in [0,1]
        const double disc = a * a + 2.0 * slope * tau / h;
        t = (-a + std::sqrt(std::max(disc, 0.0))) / slope;
    }
    t = clamp_to(t, 0.0, 1.0);
    return grid_->node(static_cast<int>(i)) + t * h;
}

}  // namespace gaslab
