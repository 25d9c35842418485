#include "ngmkl/common.hpp"

#include <numeric>
#include <utility>

namespace ngmkl {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        detail::require(rows[i].size() == m.cols(), "ragged row lengths");
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::vector<std::size_t> random_permutation(std::size_t n, SplitMix64& rng) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = rng.uniform_index(i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

}  // namespace ngmkl
