#pragma once

// Shared builders and independent oracles for the test suites. Everything
// here is deliberately written from scratch (plain loops, erf-based normal
// CDF) so it cannot share a bug with the library paths it checks.

#include <cmath>
#include <vector>

#include "gaslab/grid.hpp"
#include "gaslab/rng.hpp"

namespace testutil {

inline double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

inline double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

/// Truncated-normal grid density: normal pdf sampled at the nodes and
/// renormalized by the trapezoid mass (this is the model family used across
/// the scenarios; the continuum object is the piecewise-linear interpolant).
inline gaslab::GridDensity truncated_normal(const gaslab::GridPtr& grid,
                                            double mean, double sd,
                                            bool zero_endpoints = false) {
    std::vector<double> v(static_cast<std::size_t>(grid->size()));
    for (int i = 0; i < grid->size(); ++i) {
        v[static_cast<std::size_t>(i)] = normal_pdf(grid->node(i), mean, sd);
    }
    if (zero_endpoints) {
        v.front() = 0.0;
        v.back() = 0.0;
    }
    return gaslab::normalize(gaslab::GridFunction(grid, std::move(v)));
}

inline gaslab::GridDensity uniform_density(const gaslab::GridPtr& grid) {
    std::vector<double> v(static_cast<std::size_t>(grid->size()),
                          1.0 / grid->length());
    return gaslab::GridDensity(gaslab::GridFunction(grid, std::move(v)));
}

inline gaslab::InformationState random_state(const gaslab::GridPtr& grid,
                                             gaslab::SplitMix64& rng,
                                             double scale = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(grid->size()));
    for (double& x : v) x = scale * rng.next_double();
    return gaslab::InformationState(grid, std::move(v));
}

/// Naive ordered summation oracle for the trapezoid rule.
inline double trapezoid_oracle(const gaslab::GridFunction& f) {
    double acc = 0.0;
    const auto& g = *f.grid;
    for (int i = 0; i + 1 < g.size(); ++i) {
        acc += 0.5 * g.spacing() *
               (f.values[static_cast<std::size_t>(i)] +
                f.values[static_cast<std::size_t>(i) + 1]);
    }
    return acc;
}

}  // namespace testutil
