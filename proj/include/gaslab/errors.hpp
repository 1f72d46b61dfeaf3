#pragma once

#include <stdexcept>
#include <string>

namespace gaslab {

/// A configured size guard tripped (alpha sets, policy trees, menu products).
/// The CLI maps this to its own exit code.
struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent scenario configuration.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gaslab
