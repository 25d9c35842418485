#include "ngmkl/mkl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ngmkl {

namespace {

// Per-kernel quadratic terms 1/2 (a*y)' G_j (a*y), restricted to support
// vectors. These are the outer subgradient components of the min-max problem.
std::vector<double> kernel_quadratic_terms(const std::vector<GramMatrix>& grams,
                                           const SvmModel& model) {
    std::vector<double> q(grams.size(), 0.0);
    const auto& sv = model.support_indices;
    for (std::size_t j = 0; j < grams.size(); ++j) {
        const Matrix& g = grams[j].values;
        double sum = 0.0;
        for (std::size_t a : sv) {
            const double ga = model.alpha[a] * model.train_labels[a];
            for (std::size_t b : sv)
                sum += ga * model.alpha[b] * model.train_labels[b] * g(a, b);
        }
        q[j] = 0.5 * sum;
    }
    return q;
}

double linf_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

GramMatrix combined_gram(const std::vector<GramMatrix>& grams,
                         const std::vector<double>& beta) {
    detail::require(!grams.empty(), "combined_gram: empty kernel list");
    detail::require(beta.size() == grams.size(), "combined_gram: beta length mismatch");
    const std::size_t m = grams.front().values.rows();
    const std::size_t n = grams.front().values.cols();
    for (const auto& g : grams)
        detail::require(g.values.rows() == m && g.values.cols() == n,
                        "combined_gram: shape mismatch");

    GramMatrix out{Matrix(m, n), std::nullopt};
    for (std::size_t j = 0; j < grams.size(); ++j) {
        if (beta[j] == 0.0) continue;
        const double* src = grams[j].values.data();
        double* dst = out.values.data();
        for (std::size_t k = 0; k < m * n; ++k) dst[k] += beta[j] * src[k];
    }
    return out;
}

std::vector<double> project_simplex(std::vector<double> v) {
    const std::size_t n = v.size();
    detail::require(n >= 1, "project_simplex: empty vector");

    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double running = 0.0, theta = 0.0;
    std::size_t rho = 0;
    for (std::size_t j = 0; j < n; ++j) {
        running += u[j];
        const double candidate = (running - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0) {
            rho = j + 1;
            theta = candidate;
        }
    }
    (void)rho;
    for (double& x : v) x = std::max(x - theta, 0.0);
    return v;
}

MklSolution mkl_train(const std::vector<GramMatrix>& grams,
                      const std::vector<double>& labels, const MklOptions& options) {
    detail::require(!grams.empty(), "mkl_train: empty kernel list");
    const std::size_t s = grams.size();

    struct Iterate {
        std::vector<double> beta;
        Matrix combined;
        SvmModel model;
        std::vector<double> q;   // per-kernel quadratic terms
        double objective;        // classical dual value sum(a) - sum_j beta_j q_j
    };

    auto solve = [&](std::vector<double> beta) {
        Iterate it;
        it.combined = combined_gram(grams, beta).values;
        SvmProblem problem(it.combined, labels, options.c_reg);
        it.model = smo_train(problem, options.svm);
        it.q = kernel_quadratic_terms(grams, it.model);
        double lin = std::accumulate(it.model.alpha.begin(), it.model.alpha.end(), 0.0);
        double quad = 0.0;
        for (std::size_t j = 0; j < s; ++j) quad += beta[j] * it.q[j];
        it.objective = lin - quad;
        it.beta = std::move(beta);
        return it;
    };

    Iterate best = solve(std::vector<double>(s, 1.0 / static_cast<double>(s)));
    double step = options.step;

    for (std::size_t outer = 0; outer < options.max_outer; ++outer) {
        double scale = 0.0;
        for (double qj : best.q) scale = std::max(scale, std::abs(qj));
        if (scale == 0.0) break;

        std::vector<double> candidate = best.beta;
        for (std::size_t j = 0; j < s; ++j) candidate[j] += step * best.q[j] / scale;
        candidate = project_simplex(std::move(candidate));

        if (linf_distance(candidate, best.beta) < options.beta_tol) break;

        Iterate next = solve(std::move(candidate));
        if (next.objective <= best.objective + 1e-12 * std::abs(best.objective)) {
            best = std::move(next);
        } else {
            step *= 0.5;
            if (step < 1e-6) break;
        }
    }

    MklSolution solution;
    solution.beta = best.beta;
    solution.svm = std::move(best.model);
    solution.objective = best.objective;
    solution.kernel_specs.reserve(s);
    for (const auto& g : grams) solution.kernel_specs.push_back(g.spec.value_or(KernelSpec{}));
    return solution;
}

std::vector<double> mkl_decision(const MklSolution& solution,
                                 const std::vector<GramMatrix>& test_grams) {
    detail::require(test_grams.size() == solution.beta.size(),
                    "mkl_decision: kernel count mismatch");
    const GramMatrix combined = combined_gram(test_grams, solution.beta);
    detail::require(combined.values.cols() == solution.svm.size(),
                    "mkl_decision: anchor count mismatch");

    std::vector<double> decisions(combined.values.rows());
    for (std::size_t i = 0; i < decisions.size(); ++i)
        decisions[i] = svm_decision(solution.svm, combined.values.row(i));
    return decisions;
}

std::vector<int> mkl_predict(const MklSolution& solution,
                             const std::vector<GramMatrix>& test_grams) {
    const auto decisions = mkl_decision(solution, test_grams);
    std::vector<int> labels(decisions.size());
    for (std::size_t i = 0; i < decisions.size(); ++i)
        labels[i] = decisions[i] >= 0.0 ? 1 : -1;
    return labels;
}

}  // namespace ngmkl
