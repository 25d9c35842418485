#include "ngmkl/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace ngmkl {

namespace {

double powi(double base, int times) {
    double tmp = base, ret = 1.0;
    for (int t = times; t > 0; t /= 2) {
        if (t % 2 == 1) ret *= tmp;
        tmp = tmp * tmp;
    }
    return ret;
}

// Squared distance by expansion, guarded against negative round-off. The
// per-row self products are passed in so gram() and kernel_eval() share the
// exact arithmetic.
double gaussian_value(double xx, double yy, double xy, double sigma) {
    double d2 = xx - 2.0 * xy + yy;
    if (d2 < 0.0) d2 = 0.0;
    return std::exp(-d2 / (2.0 * sigma * sigma));
}

}  // namespace

KernelSpec KernelSpec::polynomial(int degree) {
    detail::require(degree >= 1, "polynomial degree must be positive");
    KernelSpec spec;
    spec.kind = Kind::polynomial;
    spec.degree = degree;
    return spec;
}

KernelSpec KernelSpec::gaussian(double sigma) {
    detail::require(sigma > 0.0, "gaussian sigma must be positive");
    KernelSpec spec;
    spec.kind = Kind::gaussian;
    spec.sigma = sigma;
    return spec;
}

std::string KernelSpec::name() const {
    if (kind == Kind::polynomial) return "poly(d=" + std::to_string(degree) + ")";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "gauss(sigma=%g)", sigma);
    return buf;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y) {
    detail::require(x.size() == y.size(), "kernel_eval: dimension mismatch");
    if (spec.kind == KernelSpec::Kind::polynomial) return powi(dot(x, y), spec.degree);
    return gaussian_value(dot(x, x), dot(y, y), dot(x, y), spec.sigma);
}

GramMatrix gram(const KernelSpec& spec, const Matrix& queries, const Matrix& anchors) {
    detail::require(queries.cols() == anchors.cols(), "gram: dimension mismatch");
    const std::size_t m = queries.rows(), n = anchors.rows();
    GramMatrix result{Matrix(m, n), spec};

    if (spec.kind == KernelSpec::Kind::polynomial) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                result.values(i, j) = powi(dot(queries.row(i), anchors.row(j)), spec.degree);
        return result;
    }

    std::vector<double> qq(m), aa(n);
    for (std::size_t i = 0; i < m; ++i) qq[i] = dot(queries.row(i), queries.row(i));
    for (std::size_t j = 0; j < n; ++j) aa[j] = dot(anchors.row(j), anchors.row(j));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            result.values(i, j) =
                gaussian_value(qq[i], aa[j], dot(queries.row(i), anchors.row(j)), spec.sigma);
    return result;
}

std::vector<KernelSpec> base_kernel_bank() {
    std::vector<KernelSpec> bank;
    bank.reserve(17);
    for (int degree = 1; degree <= 3; ++degree)
        bank.push_back(KernelSpec::polynomial(degree));
    for (int k = -6; k <= 7; ++k)
        bank.push_back(KernelSpec::gaussian(std::ldexp(1.0, k)));
    return bank;
}

namespace {

constexpr std::uint32_t kGramMagic = 0x4b474e47;  // "GNGK" little-endian
constexpr std::uint32_t kGramVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

void write_gram_cache(const GramMatrix& g, const std::string& path) {
    detail::require(g.spec.has_value(), "gram cache requires a kernel spec");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open gram cache for writing: " + path);
    write_pod(out, kGramMagic);
    write_pod(out, kGramVersion);
    write_pod(out, static_cast<std::uint8_t>(g.spec->kind));
    write_pod(out, static_cast<std::int32_t>(g.spec->degree));
    write_pod(out, g.spec->sigma);
    write_pod(out, static_cast<std::uint64_t>(g.values.rows()));
    write_pod(out, static_cast<std::uint64_t>(g.values.cols()));
    out.write(reinterpret_cast<const char*>(g.values.data()),
              static_cast<std::streamsize>(sizeof(double) * g.values.rows() * g.values.cols()));
    if (!out) throw std::runtime_error("short write to gram cache: " + path);
}

GramMatrix read_gram_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open gram cache: " + path);
    std::uint32_t magic = 0, version = 0;
    read_pod(in, magic);
    read_pod(in, version);
    if (magic != kGramMagic || version != kGramVersion)
        throw std::runtime_error("bad gram cache header: " + path);
    std::uint8_t kind = 0;
    std::int32_t degree = 0;
    double sigma = 0.0;
    std::uint64_t m = 0, n = 0;
    read_pod(in, kind);
    read_pod(in, degree);
    read_pod(in, sigma);
    read_pod(in, m);
    read_pod(in, n);
    KernelSpec spec = kind == static_cast<std::uint8_t>(KernelSpec::Kind::polynomial)
                          ? KernelSpec::polynomial(degree)
                          : KernelSpec::gaussian(sigma);
    GramMatrix g{Matrix(m, n), spec};
    in.read(reinterpret_cast<char*>(g.values.data()),
            static_cast<std::streamsize>(sizeof(double) * m * n));
    if (!in) throw std::runtime_error("truncated gram cache: " + path);
    return g;
}

}  // namespace ngmkl
