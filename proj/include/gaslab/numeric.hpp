#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gaslab {

/// Execution width for trial-level parallelism (default 1). Results do not
/// depend on it: every trial derives its own seed and writes its own slot,
/// and reductions are pairwise over the index order.
int runtime_threads();
void set_runtime_threads(int n);

/// Runs body(0..n-1), splitting the index range across runtime_threads().
void parallel_for_trials(int n, const std::function<void(int)>& body);

/// Pairwise (cascade) summation. Accumulation error grows like O(log n)
/// instead of O(n), and the result is independent of how callers chunk
/// their work as long as the element order is fixed.
double pairwise_sum(std::span<const double> values);

struct MeanSe {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Sample mean and standard error of the mean (two-pass, pairwise sums).
/// n = 1 yields std_error = 0.
MeanSe mean_and_standard_error(std::span<const double> values);

inline double clamp_to(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

inline bool all_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace gaslab
