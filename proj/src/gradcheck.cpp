#include "ngmkl/gradcheck.hpp"

#include <cmath>

namespace ngmkl {

namespace {

double loss_at(const KernelNetwork& model, const Matrix& kernel_rows, std::size_t target) {
    auto [logits, cache] = forward(model, kernel_rows);
    return cross_entropy(logits, target);
}

}  // namespace

GradCheckReport check_gradients(const KernelNetwork& model, const Matrix& kernel_rows,
                                std::size_t target, double h, double rel_tol,
                                double abs_floor) {
    KernelNetwork probe = model;
    auto [logits, cache] = forward(probe, kernel_rows);
    const Gradients analytic = backward(probe, cache, target);

    GradCheckReport report;

    auto check_block = [&](Matrix& w, const Matrix& g) {
        for (std::size_t r = 0; r < w.rows(); ++r) {
            for (std::size_t c = 0; c < w.cols(); ++c) {
                const double saved = w(r, c);
                w(r, c) = saved + h;
                const double up = loss_at(probe, kernel_rows, target);
                w(r, c) = saved - h;
                const double down = loss_at(probe, kernel_rows, target);
                w(r, c) = saved;

                const double fd = (up - down) / (2.0 * h);
                const double a = g(r, c);
                const double diff = std::abs(a - fd);
                ++report.parameters_checked;
                if (diff <= abs_floor) continue;
                const double rel = diff / std::max(std::abs(a), std::abs(fd));
                report.max_rel_error = std::max(report.max_rel_error, rel);
                if (rel >= rel_tol) report.passed = false;
            }
        }
    };

    check_block(probe.gammas, analytic.gammas);
    for (std::size_t l = 0; l < probe.hidden_layers.size(); ++l)
        check_block(probe.hidden_layers[l], analytic.hidden_layers[l]);
    check_block(probe.output_weights, analytic.output_weights);
    return report;
}

GradCheckReport run_gradient_check_suite(std::uint64_t seed, std::size_t instances,
                                         double h, double rel_tol, double abs_floor) {
    SplitMix64 rng(seed);
    GradCheckReport total;

    const std::size_t s_choices[] = {1, 3, 5};
    for (std::size_t inst = 0; inst < instances; ++inst) {
        const std::size_t s = s_choices[rng.uniform_index(3)];
        const std::size_t n = 5 + rng.uniform_index(16);   // 5..20
        const std::size_t n1 = 2 + rng.uniform_index(7);   // 2..8
        const std::size_t c = 2 + rng.uniform_index(2);    // 2..3

        KernelNetwork model;
        model.kernels.assign(s, KernelSpec::gaussian(1.0));
        model.kernel_indices.resize(s);
        for (std::size_t j = 0; j < s; ++j) model.kernel_indices[j] = static_cast<int>(j);
        model.anchors = Matrix(n, 1);
        model.gammas = Matrix(s, n);
        model.hidden_layers = {Matrix(n1, s)};
        model.output_weights = Matrix(c, n1);

        auto randomize = [&](Matrix& w, double bound) {
            for (std::size_t r = 0; r < w.rows(); ++r)
                for (std::size_t t = 0; t < w.cols(); ++t)
                    w(r, t) = rng.uniform(-bound, bound);
        };
        randomize(model.gammas, 1.0);
        randomize(model.hidden_layers[0], 1.0);
        randomize(model.output_weights, 1.0);

        Matrix kernel_rows(s, n);
        for (std::size_t j = 0; j < s; ++j)
            for (std::size_t a = 0; a < n; ++a)
                kernel_rows(j, a) = rng.uniform(0.0, 1.0);

        const std::size_t target = rng.uniform_index(c);
        const GradCheckReport r =
            check_gradients(model, kernel_rows, target, h, rel_tol, abs_floor);
        total.parameters_checked += r.parameters_checked;
        total.max_rel_error = std::max(total.max_rel_error, r.max_rel_error);
        total.passed = total.passed && r.passed;
    }
    return total;
}

}  // namespace ngmkl
