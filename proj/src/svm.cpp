#include "ngmkl/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ngmkl {

namespace {

constexpr double kTau = 1e-12;          // curvature floor for degenerate pairs
constexpr double kSupportEps = 1e-9;    // alpha threshold for support vectors

void validate_problem(const SvmProblem& problem) {
    detail::require(problem.gram != nullptr, "svm: missing gram matrix");
    const std::size_t n = problem.labels.size();
    detail::require(n >= 1, "svm: empty problem");
    detail::require(problem.gram->rows() == n && problem.gram->cols() == n,
                    "svm: gram must be square n x n");
    detail::require(problem.c_reg > 0.0, "svm: c_reg must be positive");

    bool pos = false, neg = false;
    for (double y : problem.labels) {
        detail::require(y == 1.0 || y == -1.0, "svm: labels must be +-1");
        (y > 0 ? pos : neg) = true;
    }
    detail::require(pos && neg, "single-class problem");

    if (!problem.sample_weights.empty()) {
        detail::require(problem.sample_weights.size() == n,
                        "svm: sample_weights length mismatch");
        for (double w : problem.sample_weights)
            detail::require(w >= 0.0, "svm: negative sample weight");
    }
}

}  // namespace

double dual_objective(const std::vector<double>& alpha, const SvmProblem& problem) {
    detail::require(alpha.size() == problem.labels.size(),
                    "dual_objective: alpha length mismatch");
    const Matrix& g = *problem.gram;
    const std::size_t n = alpha.size();
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lin += alpha[i];
        if (alpha[i] == 0.0) continue;
        const double gi = alpha[i] * problem.labels[i];
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row += g(i, j) * alpha[j] * problem.labels[j];
        quad += gi * row;
    }
    return 0.5 * quad - lin;
}

SvmModel smo_train(const SvmProblem& problem, const SvmOptions& options) {
    validate_problem(problem);
    detail::require(options.tol > 0.0, "svm: tol must be positive");

    const Matrix& g = *problem.gram;
    const std::size_t n = problem.labels.size();
    const std::vector<double>& y = problem.labels;

    std::vector<double> box(n);
    for (std::size_t i = 0; i < n; ++i) box[i] = problem.box(i);

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - sum(a)

    const std::size_t max_iter =
        options.max_iter > 0 ? options.max_iter : std::max<std::size_t>(100 * n, 100000);

    auto in_up = [&](std::size_t t) {
        return (y[t] > 0 && alpha[t] < box[t]) || (y[t] < 0 && alpha[t] > 0.0);
    };
    auto in_low = [&](std::size_t t) {
        return (y[t] > 0 && alpha[t] > 0.0) || (y[t] < 0 && alpha[t] < box[t]);
    };

    bool converged = false;
    double m_val = 0.0, big_m_val = 0.0;

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // Maximal violating value over I_up, and the opposite bound.
        std::size_t i = n;
        m_val = -std::numeric_limits<double>::infinity();
        big_m_val = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] > m_val) {
                m_val = -y[t] * grad[t];
                i = t;
            }
            if (in_low(t)) big_m_val = std::min(big_m_val, -y[t] * grad[t]);
        }
        if (i == n || m_val - big_m_val <= options.tol) {
            converged = true;
            break;
        }

        // Second-order partner: maximal decrease of the dual objective.
        std::size_t j = n;
        double best = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            const double b = m_val + y[t] * grad[t];
            if (b <= 0.0) continue;
            double a = g(i, i) + g(t, t) - 2.0 * y[i] * y[t] * g(i, t);
            if (a <= 0.0) a = kTau;
            const double score = -(b * b) / a;
            if (j == n || score < best) {
                best = score;
                j = t;
            }
        }
        if (j == n) {
            converged = true;  // no admissible partner: numerically optimal
            break;
        }

        const double ci = box[i], cj = box[j];
        const double old_ai = alpha[i], old_aj = alpha[j];

        if (y[i] != y[j]) {
            double quad = g(i, i) + g(j, j) + 2.0 * g(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
            }
            if (diff > ci - cj) {
                if (alpha[i] > ci) {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else {
                if (alpha[j] > cj) {
                    alpha[j] = cj;
                    alpha[i] = cj + diff;
                }
            }
        } else {
            double quad = g(i, i) + g(j, j) - 2.0 * g(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > ci) {
                if (alpha[i] > ci) {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
            }
            if (sum > cj) {
                if (alpha[j] > cj) {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        if (dai == 0.0 && daj == 0.0) {
            converged = true;  // step collapsed to the boundary
            break;
        }
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += y[t] * (y[i] * g(t, i) * dai + y[j] * g(t, j) * daj);
    }

    SvmModel model;
    model.alpha = alpha;
    model.train_labels = y;
    model.converged = converged;

    double bias_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > kSupportEps) model.support_indices.push_back(t);
        if (alpha[t] > 0.0 && alpha[t] < box[t]) {
            bias_sum += -y[t] * grad[t];
            ++free_count;
        }
    }
    if (free_count > 0) {
        model.bias = bias_sum / static_cast<double>(free_count);
    } else {
        // Midpoint of the KKT bounds at termination.
        double up = -std::numeric_limits<double>::infinity();
        double low = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t)) up = std::max(up, -y[t] * grad[t]);
            if (in_low(t)) low = std::min(low, -y[t] * grad[t]);
        }
        model.bias = (std::isfinite(up) && std::isfinite(low)) ? 0.5 * (up + low) : 0.0;
    }
    return model;
}

double svm_decision(const SvmModel& model, std::span<const double> gram_row) {
    detail::require(gram_row.size() == model.alpha.size(),
                    "svm_decision: row length mismatch");
    double f = model.bias;
    for (std::size_t idx : model.support_indices)
        f += model.alpha[idx] * model.train_labels[idx] * gram_row[idx];
    return f;
}

double kkt_max_violation(const SvmProblem& problem, const SvmModel& model) {
    const Matrix& g = *problem.gram;
    const std::size_t n = model.alpha.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double margin = problem.labels[i] * svm_decision(model, g.row(i));
        const double box = problem.box(i);
        double v;
        if (model.alpha[i] <= kSupportEps)
            v = 1.0 - margin;                 // should satisfy y f >= 1
        else if (model.alpha[i] >= box - kSupportEps)
            v = margin - 1.0;                 // should satisfy y f <= 1
        else
            v = std::abs(margin - 1.0);       // free: y f = 1
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace ngmkl
