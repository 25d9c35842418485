#pragma once

#include <cstdint>
#include <string>

#include "ngmkl/network.hpp"

namespace ngmkl {

/// Central-difference audit of backward() against loss evaluations that go
/// through forward() + cross_entropy() only.
struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t parameters_checked = 0;
    bool passed = true;
};

/// Checks every parameter of `model` at the given input. A parameter passes
/// when |analytic - fd| <= abs_floor or the relative error against
/// max(|analytic|, |fd|) is below rel_tol.
GradCheckReport check_gradients(const KernelNetwork& model, const Matrix& kernel_rows,
                                std::size_t target, double h = 1e-5,
                                double rel_tol = 1e-5, double abs_floor = 1e-8);

/// Randomized sweep: `instances` models with S in {1,3,5}, n in [5,20],
/// hidden width in [2,8], classes in {2,3}, random weights and inputs.
GradCheckReport run_gradient_check_suite(std::uint64_t seed, std::size_t instances = 25,
                                         double h = 1e-5, double rel_tol = 1e-5,
                                         double abs_floor = 1e-8);

}  // namespace ngmkl
