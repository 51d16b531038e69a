#pragma once

#include <stdexcept>
#include <string>

namespace modcs {

// Bad arguments: shape mismatches, out-of-range indices, infeasible parameters.
struct input_error : std::invalid_argument {
    explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

// Numerically rank-deficient system where full column rank was required.
struct singular_error : std::runtime_error {
    explicit singular_error(const std::string& what) : std::runtime_error(what) {}
};

// Constraint set is empty (e.g. eps = 0 with y outside range(A)).
struct infeasible_error : std::runtime_error {
    explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

// A generated state stopped satisfying its model's invariants.
struct model_error : std::runtime_error {
    explicit model_error(const std::string& what) : std::runtime_error(what) {}
};

// Enumeration would exceed the caller-supplied subset budget.
struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace modcs
