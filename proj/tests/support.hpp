#pragma once

// Shared corpus generators and independent oracles for the test suites. The
// KKT solves here are the reference path; they must not reuse the solver
// iterations they check.

#include <memory>

#include "tos/admm.hpp"
#include "tos/applications.hpp"
#include "tos/diagnostics.hpp"
#include "tos/rng.hpp"
#include "tos/variants.hpp"

namespace tos::testsup {

inline Mat random_mat(CounterRng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Mat m(rows, cols);
    for (auto& e : m.data) e = rng.uniform(-scale, scale);
    return m;
}

// Well-conditioned SPD: GᵀG/n + shift·I.
inline Mat random_spd(CounterRng& rng, std::size_t n, double shift = 0.5) {
    Mat g = random_mat(rng, n, n);
    Mat m = matmul(transpose(g), g);
    for (auto& e : m.data) e /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) += shift;
    return m;
}

struct QuadTriple {
    Mat pf, pg, ph;
    Vec cf, cg, ch;
    double mu_f = 0.0, l_f = 0.0;
    double mu_g = 0.0, l_g = 0.0;
    double mu_h = 0.0, l_h = 0.0;
};

inline QuadTriple random_quad_triple(CounterRng& rng, std::size_t n, double shift = 0.5) {
    QuadTriple t;
    t.pf = random_spd(rng, n, shift);
    t.pg = random_spd(rng, n, shift);
    t.ph = random_spd(rng, n, shift);
    t.cf = rng.uniform_vec(n, -1.0, 1.0);
    t.cg = rng.uniform_vec(n, -1.0, 1.0);
    t.ch = rng.uniform_vec(n, -1.0, 1.0);
    auto extremes = [](const Mat& p, double& mu, double& l) {
        SvdResult s = svd(p);
        l = s.s.front();
        mu = s.s.back();
    };
    extremes(t.pf, t.mu_f, t.l_f);
    extremes(t.pg, t.mu_g, t.l_g);
    extremes(t.ph, t.mu_h, t.l_h);
    return t;
}

inline double quad_value(const Mat& p, const Vec& c, const Vec& x) {
    return 0.5 * dot(x, matvec(p, x)) + dot(c, x);
}

inline ThreeOperatorProblem make_problem(const QuadTriple& t) {
    ThreeOperatorProblem p;
    p.dim = t.cf.size();
    p.a = make_quadratic_prox(t.pf, t.cf, t.mu_f, t.l_f);
    p.b = make_quadratic_prox(t.pg, t.cg, t.mu_g, t.l_g);
    p.c = make_quadratic_gradient(t.ph, t.ch);
    p.c.mu_c = t.mu_h;
    auto tt = std::make_shared<QuadTriple>(t);
    p.objective = ObjectiveTriple{
        [tt](const Vec& x) { return quad_value(tt->pf, tt->cf, x); },
        [tt](const Vec& x) { return quad_value(tt->pg, tt->cg, x); },
        [tt](const Vec& x) { return quad_value(tt->ph, tt->ch, x); }};
    return p;
}

// (Pf + Pg + Ph) x = −(cf + cg + ch)
inline Vec kkt_solution(const QuadTriple& t) {
    Mat sum = t.pf;
    for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += t.pg.data[i] + t.ph.data[i];
    return solve_spd(sum, negate(add(add(t.cf, t.cg), t.ch)));
}

inline Vec grad_g_at(const QuadTriple& t, const Vec& x) { return add(matvec(t.pg, x), t.cg); }
inline Vec grad_h_at(const QuadTriple& t, const Vec& x) { return add(matvec(t.ph, x), t.ch); }

// fixed point z* = x* + γ ∇g(x*)
inline Vec fixed_point(const QuadTriple& t, double gamma, const Vec& x_star) {
    return axpy(x_star, gamma, grad_g_at(t, x_star));
}

// Independent classical references for the reduction checks.
inline std::vector<Vec> fbs_reference(const ProxOperator& a, const ForwardOperator& c, double gamma,
                                      Vec x, int iters) {
    std::vector<Vec> out{x};
    for (int k = 0; k < iters; ++k) {
        x = a(gamma, sub(x, scale(gamma, c(x))));
        out.push_back(x);
    }
    return out;
}

inline std::vector<Vec> drs_reference(const ProxOperator& a, const ProxOperator& b, double gamma,
                                      Vec z, int iters) {
    std::vector<Vec> out{z};
    for (int k = 0; k < iters; ++k) {
        Vec xb = b(gamma, z);
        Vec xa = a(gamma, sub(scale(2.0, xb), z));
        z = add(z, sub(xa, xb));
        out.push_back(z);
    }
    return out;
}

}  // namespace tos::testsup
