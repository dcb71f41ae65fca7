#include "tos/operators.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace tos {

ProxOperator identity_prox() {
    ProxOperator op;
    op.resolvent = [](double, const Vec& z) { return z; };
    op.mu = 0.0;
    op.lipschitz = 0.0;
    op.label = "zero";
    return op;
}

ForwardOperator zero_forward() {
    ForwardOperator op;
    op.forward = [](const Vec& x) { return zeros(x.size()); };
    op.beta = kInf;
    op.mu_c = 0.0;
    op.l_c = 0.0;
    op.label = "zero";
    return op;
}

ProxOperator make_quadratic_prox(const Mat& p, const Vec& c, double mu, double lipschitz) {
    if (p.rows != p.cols) throw std::invalid_argument("make_quadratic_prox: P not square");
    check_dim(c, p.rows, "make_quadratic_prox: c");
    auto pm = std::make_shared<Mat>(p);
    auto cv = std::make_shared<Vec>(c);
    ProxOperator op;
    op.resolvent = [pm, cv](double gamma, const Vec& z) {
        check_dim(z, pm->rows, "quadratic_prox input");
        Mat sys = *pm;
        for (auto& e : sys.data) e *= gamma;
        for (std::size_t i = 0; i < sys.rows; ++i) sys(i, i) += 1.0;
        return solve_spd(sys, axpy(z, -gamma, *cv));
    };
    op.mu = mu;
    op.lipschitz = lipschitz;
    op.label = "quadratic";
    return op;
}

ForwardOperator make_quadratic_gradient(const Mat& p, const Vec& c) {
    if (p.rows != p.cols) throw std::invalid_argument("make_quadratic_gradient: P not square");
    check_dim(c, p.rows, "make_quadratic_gradient: c");
    auto pm = std::make_shared<Mat>(p);
    auto cv = std::make_shared<Vec>(c);
    const double lmax = op_norm(p);
    ForwardOperator op;
    op.forward = [pm, cv](const Vec& x) { return add(matvec(*pm, x), *cv); };
    op.beta = lmax > 0.0 ? 1.0 / lmax : kInf;
    op.l_c = lmax;
    op.mu_c = 0.0;  // caller overrides when λ_min is known
    op.label = "quadratic_gradient";
    return op;
}

ProxOperator project_box(const Vec& l, const Vec& u) {
    check_dim(u, l.size(), "project_box: u");
    for (std::size_t i = 0; i < l.size(); ++i)
        if (l[i] > u[i]) throw std::invalid_argument("project_box: l > u at component " + std::to_string(i));
    auto lo = std::make_shared<Vec>(l);
    auto hi = std::make_shared<Vec>(u);
    ProxOperator op;
    op.resolvent = [lo, hi](double, const Vec& z) {
        check_dim(z, lo->size(), "project_box input");
        Vec r(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) r[i] = std::min(std::max(z[i], (*lo)[i]), (*hi)[i]);
        return r;
    };
    op.label = "box";
    return op;
}

ProxOperator project_simplex() {
    ProxOperator op;
    op.resolvent = [](double, const Vec& z) {
        if (z.empty()) throw std::invalid_argument("project_simplex: empty input");
        Vec u = z;
        std::sort(u.begin(), u.end(), std::greater<double>());
        double csum = 0.0, tau = 0.0;
        std::size_t rho = 0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            csum += u[j];
            const double t = (csum - 1.0) / static_cast<double>(j + 1);
            if (u[j] - t > 0.0) {
                rho = j + 1;
                tau = t;
            }
        }
        (void)rho;
        Vec r(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) r[i] = std::max(z[i] - tau, 0.0);
        return r;
    };
    op.label = "simplex";
    return op;
}

ProxOperator project_halfspace(const Vec& m, double r) {
    const double nsq = norm2_sq(m);
    if (nsq == 0.0) throw std::invalid_argument("project_halfspace: zero normal vector");
    auto mv = std::make_shared<Vec>(m);
    ProxOperator op;
    op.resolvent = [mv, r, nsq](double, const Vec& z) {
        check_dim(z, mv->size(), "project_halfspace input");
        const double g = dot(*mv, z);
        if (g >= r) return z;
        return axpy(z, (r - g) / nsq, *mv);
    };
    op.label = "halfspace";
    return op;
}

ProxOperator project_hyperplane(const Vec& m) {
    const double nsq = norm2_sq(m);
    if (nsq == 0.0) throw std::invalid_argument("project_hyperplane: zero normal vector");
    auto mv = std::make_shared<Vec>(m);
    ProxOperator op;
    op.resolvent = [mv, nsq](double, const Vec& z) {
        check_dim(z, mv->size(), "project_hyperplane input");
        return axpy(z, -dot(*mv, z) / nsq, *mv);
    };
    op.label = "hyperplane";
    op.linear_projection = true;
    return op;
}

ProxOperator project_linear_subspace(const Mat& p) {
    if (p.rows != p.cols) throw std::invalid_argument("project_linear_subspace: P not square");
    const Mat pp = matmul(p, p);
    for (std::size_t i = 0; i < p.rows; ++i)
        for (std::size_t j = 0; j < p.cols; ++j) {
            if (std::abs(pp(i, j) - p(i, j)) > 1e-10 || std::abs(p(i, j) - p(j, i)) > 1e-10)
                throw std::invalid_argument("project_linear_subspace: not an orthogonal projector");
        }
    auto pm = std::make_shared<Mat>(p);
    ProxOperator op;
    op.resolvent = [pm](double, const Vec& z) { return matvec(*pm, z); };
    op.label = "subspace";
    op.linear_projection = true;
    return op;
}

ProxOperator prox_l1(double weight) {
    if (!(weight > 0.0)) throw std::invalid_argument("prox_l1: weight must be positive");
    ProxOperator op;
    op.resolvent = [weight](double gamma, const Vec& z) {
        const double t = gamma * weight;
        Vec r(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (z[i] > t)
                r[i] = z[i] - t;
            else if (z[i] < -t)
                r[i] = z[i] + t;
            else
                r[i] = 0.0;  // ties land on 0
        }
        return r;
    };
    op.label = "l1";
    return op;
}

ProxOperator prox_nuclear(double weight, std::size_t rows, std::size_t cols) {
    if (!(weight > 0.0)) throw std::invalid_argument("prox_nuclear: weight must be positive");
    ProxOperator op;
    op.resolvent = [weight, rows, cols](double gamma, const Vec& z) {
        check_dim(z, rows * cols, "prox_nuclear input");
        SvdResult f = svd(Mat(rows, cols, z));
        const double t = gamma * weight;
        for (auto& s : f.s) s = std::max(s - t, 0.0);
        // U diag(s) Vᵀ, flattened row-major
        Vec r(rows * cols, 0.0);
        for (std::size_t k = 0; k < f.s.size(); ++k) {
            if (f.s[k] == 0.0) continue;
            for (std::size_t i = 0; i < rows; ++i) {
                const double us = f.u(i, k) * f.s[k];
                for (std::size_t j = 0; j < cols; ++j) r[i * cols + j] += us * f.v(j, k);
            }
        }
        return r;
    };
    op.label = "nuclear";
    return op;
}

ForwardOperator grad_feasibility(const Mat& l, const ProxOperator& project_c3) {
    auto lm = std::make_shared<Mat>(l);
    auto proj = std::make_shared<ProxOperator>(project_c3);
    const double nl = op_norm(l);
    ForwardOperator op;
    op.forward = [lm, proj](const Vec& x) {
        Vec y = matvec(*lm, x);
        Vec py = (*proj)(1.0, y);
        return matvec_t(*lm, sub(y, py));
    };
    op.beta = nl > 0.0 ? 1.0 / (nl * nl) : kInf;
    op.l_c = nl * nl;
    op.label = "grad_feasibility";
    return op;
}

ForwardOperator compose_gradient(const Mat& l, const ForwardOperator& grad_h) {
    if (!(grad_h.beta > 0.0)) throw std::invalid_argument("compose_gradient: grad_h.beta must be positive");
    auto lm = std::make_shared<Mat>(l);
    auto gh = std::make_shared<ForwardOperator>(grad_h);
    const double nl = op_norm(l);
    ForwardOperator op;
    op.forward = [lm, gh](const Vec& x) { return matvec_t(*lm, (*gh)(matvec(*lm, x))); };
    op.beta = nl > 0.0 ? grad_h.beta / (nl * nl) : kInf;
    op.mu_c = 0.0;
    op.l_c = grad_h.l_c == kInf ? kInf : grad_h.l_c * nl * nl;
    op.label = "composed_gradient";
    return op;
}

}  // namespace tos
