#include "gaslab/numeric.hpp"

#include <atomic>
#include <thread>

namespace gaslab {

namespace {

std::atomic<int> g_threads{1};

}  // namespace

int runtime_threads() { return g_threads.load(); }

void set_runtime_threads(int n) { g_threads.store(n < 1 ? 1 : n); }

void parallel_for_trials(int n, const std::function<void(int)>& body) {
    const int width = std::min(runtime_threads(), n);
    if (width <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(width));
    for (int w = 0; w < width; ++w) {
        workers.emplace_back([&, w] {
            for (int i = w; i < n; i += width) body(i);
        });
    }
    for (auto& t : workers) t.join();
}

namespace {

double pairwise_sum_impl(const double* data, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_impl(values.data(), values.size());
}

MeanSe mean_and_standard_error(std::span<const double> values) {
    MeanSe out;
    out.n = values.size();
    if (out.n == 0) return out;
    out.mean = pairwise_sum(values) / static_cast<double>(out.n);
    if (out.n == 1) return out;
    std::vector<double> centered_sq(out.n);
    for (std::size_t i = 0; i < out.n; ++i) {
        const double d = values[i] - out.mean;
        centered_sq[i] = d * d;
    }
    const double ss = pairwise_sum(centered_sq);
    const double var = ss / static_cast<double>(out.n - 1);
    out.std_error = std::sqrt(var / static_cast<double>(out.n));
    return out;
}

}  // namespace gaslab
