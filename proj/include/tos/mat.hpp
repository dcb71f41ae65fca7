#pragma once

#include <cstddef>

#include "tos/vec.hpp"

namespace tos {

// Row-major dense matrix.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;  // rows*cols entries, row-major

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Mat(std::size_t r, std::size_t c, Vec entries) : rows(r), cols(c), data(std::move(entries)) {
        if (data.size() != rows * cols) throw std::invalid_argument("Mat: entry count mismatch");
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

Mat identity(std::size_t n);
Mat diag(const Vec& d);
Mat transpose(const Mat& m);
Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& m, const Vec& x);
// y = Mᵀ x
Vec matvec_t(const Mat& m, const Vec& x);
double frobenius_norm(const Mat& m);
bool is_symmetric(const Mat& m, double tol = 1e-12);

struct SvdResult {
    Mat u;   // rows × r, orthonormal columns
    Vec s;   // r singular values, nonincreasing
    Mat v;   // cols × r, orthonormal columns
};

// Thin SVD by one-sided Jacobi with a deterministic sweep order.
// Throws std::runtime_error (with the residual attached) if the sweep cap is hit.
SvdResult svd(const Mat& m);

// Solve M x = b for symmetric positive definite M (Cholesky + one refinement
// step). Throws std::invalid_argument when a nonpositive pivot is detected.
Vec solve_spd(const Mat& m, const Vec& b);

// Largest singular value via power iteration on LᵀL (all-ones start,
// capped at 1000 iterations, Rayleigh-quotient tolerance 1e-12).
// A zero matrix returns exactly 0.
double op_norm(const Mat& m);

// Eigenvalues of a 2x2 matrix, real parts only valid when the discriminant
// is nonnegative (the caller checks); returned with |e0| <= |e1|.
struct Eig2 {
    double e0, e1;
    bool real;
};
Eig2 eig2x2(double a, double b, double c, double d);

}  // namespace tos
