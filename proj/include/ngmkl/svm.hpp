#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ngmkl/common.hpp"

namespace ngmkl {

/// Soft-margin dual SVM on a precomputed kernel. `gram` is non-owning and
/// must outlive the problem. When sample_weights is non-empty (nonnegative,
/// summing to 1), per-sample boxes become c_reg * n * w_i, which realizes a
/// weighted empirical error through box scaling.
struct SvmProblem {
    const Matrix* gram = nullptr;     // n x n, symmetric
    std::vector<double> labels;       // +-1, length n
    double c_reg = 1.0;
    std::vector<double> sample_weights;  // empty = uniform boxes

    SvmProblem() = default;
    SvmProblem(const Matrix& g, std::vector<double> y, double c)
        : gram(&g), labels(std::move(y)), c_reg(c) {}

    std::size_t size() const { return labels.size(); }
    double box(std::size_t i) const {
        return sample_weights.empty()
                   ? c_reg
                   : c_reg * static_cast<double>(labels.size()) * sample_weights[i];
    }
};

struct SvmOptions {
    double tol = 1e-3;
    std::size_t max_iter = 0;  // 0 = max(100 * n, 100000)
};

struct SvmModel {
    std::vector<double> alpha;
    double bias = 0.0;
    std::vector<std::size_t> support_indices;  // { i : alpha_i > 1e-9 }
    std::vector<double> train_labels;          // +-1
    bool converged = true;

    std::size_t size() const { return alpha.size(); }
};

/// Minimization-form dual value 1/2 (a*y)' G (a*y) - sum(a).
double dual_objective(const std::vector<double>& alpha, const SvmProblem& problem);

/// SMO with second-order working-pair selection and lowest-index
/// tie-breaking. Stops when the maximal KKT violating pair gap falls below
/// tol; bias averages over free support vectors, or takes the midpoint of the
/// KKT bounds when none are free.
SvmModel smo_train(const SvmProblem& problem, const SvmOptions& options = {});

/// f(x) = sum_i alpha_i y_i k(x, x_i) + bias for a row of kernel values
/// against the training anchors. Predicted label is the sign; exact zero
/// counts as +1.
double svm_decision(const SvmModel& model, std::span<const double> gram_row);

/// Maximum KKT violation of a trained model, measured beyond the zero-slack
/// bound: alpha=0 wants y f >= 1, at-box wants y f <= 1, free wants y f = 1.
/// A converged model satisfies kkt_max_violation <= tol.
double kkt_max_violation(const SvmProblem& problem, const SvmModel& model);

}  // namespace ngmkl
