#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gaslab/grid.hpp"

namespace gaslab {

/// A rule mapping (information state, stage) to a control value. Feedback
/// rules receive the filtered state; open-loop rules ignore it, which lets
/// the simulator skip filtering when nothing consumes it.
class ControlPolicy {
  public:
    using Fn = std::function<double(const InformationState*, int stage)>;

    static ControlPolicy constant(double u) {
        return ControlPolicy([u](const InformationState*, int) { return u; },
                             false);
    }

    static ControlPolicy open_loop(std::vector<double> us) {
        return ControlPolicy(
            [seq = std::move(us)](const InformationState*, int k) {
                if (k < 0 || k >= static_cast<int>(seq.size())) {
                    throw std::out_of_range("open-loop policy stage out of range");
                }
                return seq[static_cast<std::size_t>(k)];
            },
            false);
    }

    static ControlPolicy feedback(Fn fn) {
        return ControlPolicy(std::move(fn), true);
    }

    double operator()(const InformationState* sigma, int stage) const {
        return fn_(sigma, stage);
    }

    bool uses_information_state() const { return uses_information_state_; }

  private:
    ControlPolicy(Fn fn, bool uses_state)
        : fn_(std::move(fn)), uses_information_state_(uses_state) {}

    Fn fn_;
    bool uses_information_state_;
};

}  // namespace gaslab
