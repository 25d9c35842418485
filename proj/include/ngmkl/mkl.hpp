#pragma once

#include <cstddef>
#include <vector>

#include "ngmkl/kernels.hpp"
#include "ngmkl/svm.hpp"

namespace ngmkl {

struct MklOptions {
    double c_reg = 1.0;
    double step = 0.1;          // halved whenever the outer objective regresses
    double beta_tol = 1e-4;     // L-infinity stop on beta movement
    std::size_t max_outer = 100;
    SvmOptions svm;
};

/// L1 multiple-kernel solution: simplex weights over the bank plus the SVM
/// trained on the beta-combined Gram. `objective` is the classical dual value
/// sum(a) - 1/2 (a*y)' G(beta) (a*y) at the final solution.
struct MklSolution {
    std::vector<double> beta;
    SvmModel svm;
    std::vector<KernelSpec> kernel_specs;
    double objective = 0.0;
};

/// Entrywise sum of beta_j * G_j. Convex combination of PSD matrices stays
/// PSD. The result carries no KernelSpec.
GramMatrix combined_gram(const std::vector<GramMatrix>& grams,
                         const std::vector<double>& beta);

/// Euclidean projection onto { b >= 0, sum b = 1 } (sort-and-threshold).
std::vector<double> project_simplex(std::vector<double> v);

/// Alternating optimization: SVM solve on G(beta), then a projected
/// subgradient step on beta using the per-kernel quadratic terms
/// 1/2 (a*y)' G_j (a*y). Stops when beta moves less than beta_tol in
/// L-infinity or max_outer is reached.
MklSolution mkl_train(const std::vector<GramMatrix>& grams,
                      const std::vector<double>& labels, const MklOptions& options = {});

/// Labels (+-1) for test rows given per-kernel query-by-anchor Gram blocks,
/// via the decision on the beta-combined rows. Ties (exact zero) go to +1.
std::vector<int> mkl_predict(const MklSolution& solution,
                             const std::vector<GramMatrix>& test_grams);

/// Decision values rather than labels, same contract as mkl_predict.
std::vector<double> mkl_decision(const MklSolution& solution,
                                 const std::vector<GramMatrix>& test_grams);

}  // namespace ngmkl
