#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ngmkl/common.hpp"

namespace ngmkl {

/// A base kernel: polynomial (x.y)^degree or Gaussian
/// exp(-||x-y||^2 / (2 sigma^2)).
struct KernelSpec {
    enum class Kind { polynomial, gaussian };

    Kind kind = Kind::polynomial;
    int degree = 1;       // polynomial only
    double sigma = 1.0;   // gaussian only

    static KernelSpec polynomial(int degree);
    static KernelSpec gaussian(double sigma);

    std::string name() const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Evaluated kernel values between query rows and anchor rows. `spec` is
/// empty for synthetic combinations (see combined_gram).
struct GramMatrix {
    Matrix values;  // m x n
    std::optional<KernelSpec> spec;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y);

/// values[i][j] = k(queries[i], anchors[j]). Anchors are always training
/// rows, so test representations live in the training-anchor basis.
GramMatrix gram(const KernelSpec& spec, const Matrix& queries, const Matrix& anchors);

/// The 17-kernel bank in canonical order: polynomial degrees 1,2,3 then
/// Gaussian sigma = 2^-6 ... 2^7 ascending.
std::vector<KernelSpec> base_kernel_bank();

/// Binary Gram cache: little-endian header (magic, spec, m, n) + row-major
/// doubles. Requires spec to be present.
void write_gram_cache(const GramMatrix& g, const std::string& path);
GramMatrix read_gram_cache(const std::string& path);

}  // namespace ngmkl
