#include "tos/mat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tos {

Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat diag(const Vec& d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Mat transpose(const Mat& m) {
    Mat t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
    Mat c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vec matvec(const Mat& m, const Vec& x) {
    check_dim(x, m.cols, "matvec");
    Vec y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Vec matvec_t(const Mat& m, const Vec& x) {
    check_dim(x, m.rows, "matvec_t");
    Vec y(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += m(i, j) * xi;
    }
    return y;
}

double frobenius_norm(const Mat& m) { return norm2(m.data); }

bool is_symmetric(const Mat& m, double tol) {
    if (m.rows != m.cols) return false;
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = i + 1; j < m.cols; ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol) return false;
    return true;
}

namespace {

// One-sided Jacobi on the columns of w (rows >= cols); accumulates the
// rotations into v. Returns the largest off-diagonal coherence seen in the
// last sweep so the caller can report it on failure.
double jacobi_sweeps(Mat& w, Mat& v, int max_sweeps, bool& converged) {
    const std::size_t n = w.cols;
    const double tol = 1e-15;
    double last_off = 0.0;
    converged = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        last_off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < w.rows; ++i) {
                    app += w(i, p) * w(i, p);
                    aqq += w(i, q) * w(i, q);
                    apq += w(i, p) * w(i, q);
                }
                const double denom = std::sqrt(app * aqq);
                if (denom == 0.0) continue;
                last_off = std::max(last_off, std::abs(apq) / denom);
                if (std::abs(apq) <= tol * denom) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t i = 0; i < w.rows; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = cs * wp - sn * wq;
                    w(i, q) = sn * wp + cs * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = cs * vp - sn * vq;
                    v(i, q) = sn * vp + cs * vq;
                }
            }
        }
        if (!rotated) {
            converged = true;
            return last_off;
        }
    }
    return last_off;
}

// Thin SVD for rows >= cols.
SvdResult svd_tall(const Mat& m) {
    const std::size_t n = m.cols;
    Mat w = m;
    Mat v = identity(n);
    bool converged = false;
    const double off = jacobi_sweeps(w, v, 60, converged);
    if (!converged) {
        std::ostringstream os;
        os << "svd: Jacobi sweeps did not converge, off-diagonal residual " << off;
        throw std::runtime_error(os.str());
    }

    Vec s(n);
    for (std::size_t j = 0; j < n; ++j) {
        double nj = 0.0;
        for (std::size_t i = 0; i < w.rows; ++i) nj += w(i, j) * w(i, j);
        s[j] = std::sqrt(nj);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&s](std::size_t a, std::size_t b) { return s[a] > s[b]; });

    SvdResult out;
    out.u = Mat(m.rows, n);
    out.v = Mat(n, n);
    out.s = Vec(n);
    const double rank_tol = 1e-13 * std::max(1.0, s.empty() ? 0.0 : s[order[0]]);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.s[j] = s[src];
        for (std::size_t i = 0; i < n; ++i) out.v(i, j) = v(i, src);
        if (s[src] > rank_tol) {
            for (std::size_t i = 0; i < m.rows; ++i) out.u(i, j) = w(i, src) / s[src];
        }
    }
    // Complete U on (numerically) null columns so UᵀU = I still holds:
    // Gram-Schmidt canonical basis vectors against the columns built so far.
    for (std::size_t j = 0; j < n; ++j) {
        if (out.s[j] > rank_tol) continue;
        out.s[j] = std::max(out.s[j], 0.0);
        Vec col(m.rows, 0.0);
        for (std::size_t seed = 0; seed < m.rows; ++seed) {
            Vec cand(m.rows, 0.0);
            cand[seed] = 1.0;
            for (std::size_t c = 0; c < n; ++c) {
                if (c == j) continue;
                double proj = 0.0;
                for (std::size_t i = 0; i < m.rows; ++i) proj += cand[i] * out.u(i, c);
                for (std::size_t i = 0; i < m.rows; ++i) cand[i] -= proj * out.u(i, c);
            }
            const double nrm = norm2(cand);
            if (nrm > 0.5) {  // comfortably independent
                col = scale(1.0 / nrm, cand);
                break;
            }
        }
        for (std::size_t i = 0; i < m.rows; ++i) out.u(i, j) = col[i];
    }
    return out;
}

}  // namespace

SvdResult svd(const Mat& m) {
    if (m.rows == 0 || m.cols == 0) throw std::invalid_argument("svd: empty matrix");
    if (!is_finite(m.data)) throw std::invalid_argument("svd: non-finite entries");
    if (m.rows >= m.cols) return svd_tall(m);
    SvdResult t = svd_tall(transpose(m));
    SvdResult out;
    out.u = std::move(t.v);
    out.s = std::move(t.s);
    out.v = std::move(t.u);
    return out;
}

Vec solve_spd(const Mat& m, const Vec& b) {
    if (m.rows != m.cols) throw std::invalid_argument("solve_spd: matrix not square");
    check_dim(b, m.rows, "solve_spd");
    const std::size_t n = m.rows;

    Mat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) throw std::invalid_argument("solve_spd: matrix is not positive definite");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }

    auto chol_solve = [&](const Vec& rhs) {
        Vec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = rhs[i];
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
            y[i] = s / l(i, i);
        }
        Vec x(n);
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
            x[ii] = s / l(ii, ii);
        }
        return x;
    };

    Vec x = chol_solve(b);
    // one refinement step keeps the residual near machine precision
    Vec r = sub(b, matvec(m, x));
    Vec dx = chol_solve(r);
    return add(x, dx);
}

double op_norm(const Mat& m) {
    if (!is_finite(m.data)) throw std::invalid_argument("op_norm: non-finite entries");
    bool all_zero = true;
    for (double x : m.data)
        if (x != 0.0) {
            all_zero = false;
            break;
        }
    if (all_zero) return 0.0;

    const std::size_t n = m.cols;
    Vec v = constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double rho_prev = -1.0;
    for (int it = 0; it < 1000; ++it) {
        // two Gram applications per sweep sharpen clustered top pairs
        Vec w = matvec_t(m, matvec(m, v));
        const double nw1 = norm2(w);
        if (nw1 == 0.0) return 0.0;
        w = scale(1.0 / nw1, w);
        Vec w2 = matvec_t(m, matvec(m, w));
        const double rho = dot(w, w2);
        const double nw2 = norm2(w2);
        if (nw2 == 0.0) return 0.0;
        v = scale(1.0 / nw2, w2);
        if (it > 0 && std::abs(rho - rho_prev) < 1e-12) return std::sqrt(std::max(rho, 0.0));
        rho_prev = rho;
    }
    return std::sqrt(std::max(rho_prev, 0.0));
}

Eig2 eig2x2(double a, double b, double c, double d) {
    const double tr = a + d;
    const double det = a * d - b * c;
    const double disc = tr * tr - 4.0 * det;
    Eig2 e{0.0, 0.0, disc >= 0.0};
    if (!e.real) return e;
    const double rt = std::sqrt(disc);
    double e0 = (tr - rt) / 2.0;
    double e1 = (tr + rt) / 2.0;
    if (std::abs(e0) > std::abs(e1)) std::swap(e0, e1);
    e.e0 = e0;
    e.e1 = e1;
    return e;
}

}  // namespace tos
