#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace magconv {

using cplx = std::complex<double>;

// Small dense complex matrix, row-major. Sized for the coupled-mode chains
// (3 rows for a single magnon, a few dozen at most for multi-mode maps).
class DenseMatrix {
public:
    explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n) {}

    std::size_t size() const noexcept { return n_; }

    cplx& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * n_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * n_ + c]; }

    // Maximum absolute column sum.
    double norm1() const noexcept;

private:
    std::size_t n_;
    std::vector<cplx> data_;
};

struct LinearSolution {
    std::vector<cplx> x;
    double condition = 0.0; // 1-norm condition number, ||A|| * ||A^-1||
};

inline constexpr double default_condition_limit = 1e12;

// Solves A x = rhs by LU with partial pivoting. The condition number is
// formed from the explicit inverse; a rank-deficient matrix or one whose
// condition exceeds `condition_limit` raises ErrorCode::SingularSystem.
LinearSolution solve_dense(const DenseMatrix& a, std::span<const cplx> rhs,
                           double condition_limit = default_condition_limit);

} // namespace magconv
