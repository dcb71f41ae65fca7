#pragma once

#include "tos/splitting.hpp"

namespace tos {

// One block of a linearly coupled monotropic program: the objective f, the
// coupling map L, and the two subproblem oracles the ADMM steps need.
//   linear_argmin(w)      -> argmin_x f(x) + <w, Lx>
//   penalized_argmin(g,v) -> argmin_x f(x) + (g/2)‖Lx − v‖²
// Oracles may return any minimizer; only L·x of a penalized step is unique.
struct ArgminOracle {
    std::function<Vec(const Vec&)> linear_argmin;
    std::function<Vec(double, const Vec&)> penalized_argmin;
    std::function<Vec(const Vec&)> apply_map;  // x -> Lx
    std::function<double(const Vec&)> value;   // f(x)
    std::size_t domain_dim = 0;
    std::size_t range_dim = 0;
    double mu = 0.0;        // strong convexity of f (0 = unknown)
    double map_norm = 0.0;  // ‖L‖ (0 = unknown)
};

// min Σ f_i(x_i)  s.t.  Σ L_i x_i = b, with f_1 strongly convex (mu1 > 0).
// The dual runs the splitting scheme on d_i(w) = f_i*(L_iᵀw), with the -<w,b>
// shift carried by the last block; the primal linear step therefore receives
// -w. This is the one place the sign convention is fixed; the dual-equivalence
// test pins it.
struct AdmmProblem {
    std::vector<ArgminOracle> blocks;
    Vec b;
    double mu1 = 0.0;   // strong convexity of f_1 (grouped blocks: of each f_i, i <= m-2)
    double gamma = 0.0; // in (0, 2*mu1/‖L_1‖²)
};

struct AdmmResult {
    Vec w;
    std::vector<Vec> x_blocks;
    std::vector<TraceRecord> trace;  // fpr_sq carries the joint residual ‖ΣLx−b‖² + ‖Δw‖²
    std::vector<Vec> w_history;
    bool converged = false;
};

// prox of the dual block d(w) = f*(Lᵀw) − <w,c> at y, realized through the
// penalized oracle; also returns the inner minimizer.
struct ProxDualResult {
    Vec prox;
    Vec x_pp;
};
ProxDualResult prox_dual(const ArgminOracle& oracle, const Vec& c, double gamma, const Vec& y);

// 3-block ADMM (linear step, two penalized steps, multiplier update).
AdmmResult solve_admm3(const AdmmProblem& problem, const Vec& w0, const Vec& x3_0, int max_iter,
                       double tol);

// The same iteration run in its dual fixed-point form; returns the w^k
// sequence. With z0 = w0 + gamma*(L3 x3_0 − b) and x3_0 consistent with w0
// it reproduces solve_admm3's multipliers.
std::vector<Vec> solve_admm_dual(const AdmmProblem& problem, const Vec& z0, int max_iter,
                                 double tol);

// m-block extension: blocks 1..m-2 take independent linear steps (parallel
// contract), blocks m-1 and m take sequential penalized steps.
AdmmResult solve_admm_m(const AdmmProblem& problem, const Vec& w0, const Vec& xm_0, int max_iter,
                        double tol);

// Quadratic block f(x) = (1/2)xᵀPx + qᵀx with coupling matrix L. P must keep
// the penalized systems positive definite (SPD P suffices).
ArgminOracle make_quadratic_block(const Mat& p, const Vec& q, const Mat& l);

}  // namespace tos
