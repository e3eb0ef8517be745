#include "magconv/dense_solve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "magconv/error.hpp"

namespace magconv {

double DenseMatrix::norm1() const noexcept
{
    double best = 0.0;
    for (std::size_t c = 0; c < n_; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < n_; ++r)
            sum += std::abs((*this)(r, c));
        best = std::max(best, sum);
    }
    return best;
}

namespace {

struct LuFactors {
    DenseMatrix lu;
    std::vector<std::size_t> perm;
};

LuFactors factorize(const DenseMatrix& a)
{
    const std::size_t n = a.size();
    LuFactors f{a, std::vector<std::size_t>(n)};
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    DenseMatrix& m = f.lu;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double pivot_mag = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double mag = std::abs(m(i, k));
            if (mag > pivot_mag) {
                pivot_mag = mag;
                pivot = i;
            }
        }
        if (!(pivot_mag > 0.0) || !std::isfinite(pivot_mag))
            fail(ErrorCode::SingularSystem, "coefficient matrix is rank-deficient");
        if (pivot != k) {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(m(k, c), m(pivot, c));
            std::swap(f.perm[k], f.perm[pivot]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx factor = m(i, k) / m(k, k);
            m(i, k) = factor;
            for (std::size_t c = k + 1; c < n; ++c)
                m(i, c) -= factor * m(k, c);
        }
    }
    return f;
}

std::vector<cplx> substitute(const LuFactors& f, std::span<const cplx> rhs)
{
    const std::size_t n = f.lu.size();
    std::vector<cplx> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx sum = rhs[f.perm[i]];
        for (std::size_t j = 0; j < i; ++j)
            sum -= f.lu(i, j) * x[j];
        x[i] = sum;
    }
    for (std::size_t i = n; i-- > 0;) {
        cplx sum = x[i];
        for (std::size_t j = i + 1; j < n; ++j)
            sum -= f.lu(i, j) * x[j];
        x[i] = sum / f.lu(i, i);
    }
    return x;
}

} // namespace

LinearSolution solve_dense(const DenseMatrix& a, std::span<const cplx> rhs, double condition_limit)
{
    const std::size_t n = a.size();
    require(rhs.size() == n, "solve_dense: right-hand side length does not match matrix");

    const LuFactors f = factorize(a);

    // Explicit inverse, column by column, for the condition estimate.
    DenseMatrix inverse(n);
    std::vector<cplx> unit(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(unit.begin(), unit.end(), cplx{});
        unit[c] = 1.0;
        const auto col = substitute(f, unit);
        for (std::size_t r = 0; r < n; ++r)
            inverse(r, c) = col[r];
    }
    const double condition = a.norm1() * inverse.norm1();
    if (!std::isfinite(condition) || condition > condition_limit)
        fail(ErrorCode::SingularSystem,
             "coefficient matrix is numerically singular (condition " + std::to_string(condition) + ")");

    return {substitute(f, rhs), condition};
}

} // namespace magconv
