#include "tos/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace tos {

std::vector<KappaRecord> kappa_bounds(const ThreeOperatorProblem& problem,
                                      const std::vector<SolverState>& states, double gamma,
                                      const std::function<double(int)>& lambdas,
                                      const Vec& x_or_xstar, KappaKind which,
                                      const std::optional<Vec>& grad_at_xstar) {
    if (states.size() < 2)
        throw std::invalid_argument("kappa_bounds: needs consecutive states");
    std::vector<KappaRecord> out;
    out.reserve(states.size() - 1);
    for (std::size_t k = 0; k + 1 < states.size(); ++k) {
        const double lam = lambdas ? lambdas(static_cast<int>(k)) : 1.0;
        const Vec& z = states[k].z;
        const Vec& zn = states[k + 1].z;
        const Vec dz = sub(z, zn);
        Vec cxb = problem.c(states[k].x_b);
        KappaRecord rec;
        rec.k = static_cast<int>(k);
        rec.lambda_k = lam;
        const double base = norm2_sq(sub(z, x_or_xstar)) - norm2_sq(sub(zn, x_or_xstar)) +
                            (1.0 - 2.0 / lam) * norm2_sq(dz);
        rec.inner1 = dot(dz, cxb);
        rec.kappa1 = base + 2.0 * gamma * rec.inner1;
        if (which == KappaKind::k2) {
            if (!grad_at_xstar) throw std::invalid_argument("kappa_bounds: kappa2 needs C(x*)");
            rec.inner2 = dot(dz, sub(cxb, *grad_at_xstar));
            rec.kappa2 = base + 2.0 * gamma * rec.inner2;
        }
        out.push_back(rec);
    }
    return out;
}

double rate_fit(const std::vector<std::pair<int, double>>& points, int k_min, int k_max) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [k, v] : points) {
        if (k < k_min || k > k_max) continue;
        if (!(v > 0.0)) throw std::invalid_argument("rate_fit: values must be positive in range");
        pts.emplace_back(std::log(static_cast<double>(k) + 1.0), std::log(v));
    }
    if (pts.size() < 10) throw std::invalid_argument("rate_fit: needs at least 10 points in range");
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / pts.size(), my = sy / pts.size();
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("rate_fit: degenerate abscissa");
    return sxy / sxx;
}

double contraction_factor(int contraction_case, const ContractionParams& p) {
    const double g = p.gamma, lam = p.lambda;
    if (!(g > 0.0) || !(lam > 0.0))
        throw std::invalid_argument("contraction_factor: gamma and lambda must be positive");
    const double alpha = p.alpha > 0.0 ? p.alpha : (p.epsilon > 0.0 ? 1.0 / (2.0 - p.epsilon) : 0.0);
    auto need_finite = [&](double v, const char* what) {
        if (!(v < kInf)) throw std::invalid_argument(std::string("contraction_factor: ") + what +
                                                     " must be finite for this case");
    };
    auto need_positive = [&](double v, const char* what) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string("contraction_factor: ") + what +
                                                    " must be positive for this case");
    };
    auto relax_term = [&]() {
        need_positive(alpha, "alpha (or epsilon)");
        return lam * (1.0 / (alpha * lam) - 1.0);
    };
    auto coco_term = [&](double eta_scale) {
        need_positive(p.epsilon, "epsilon");
        need_finite(p.beta, "beta");
        return (2.0 * eta_scale * p.beta - g / p.epsilon) / g;
    };

    double c = 0.0;
    switch (contraction_case) {
        case 1:
            need_finite(p.l_b, "L_B");
            c = 2.0 * g * lam * p.mu_b / ((1.0 + g * p.l_b) * (1.0 + g * p.l_b));
            break;
        case 2: {
            need_finite(p.l_a, "L_A");
            const double t0 = 2.0 * p.mu_a * g / ((1.0 + g * p.l_a) * (1.0 + g * p.l_a));
            const double t1 = (lam / 4.0) * (1.0 / (alpha * lam) - 1.0);
            need_positive(alpha, "alpha (or epsilon)");
            const double t2 = coco_term(1.0);
            c = (lam / 3.0) * std::min({t0, t1, t2});
            break;
        }
        case 3: {
            need_finite(p.l_b, "L_B");
            const double scale3 = lam / (3.0 * (1.0 + 2.0 * g * g * p.l_b * p.l_b));
            c = scale3 * std::min(2.0 * g * p.mu_a, relax_term());
            break;
        }
        case 4: {
            need_finite(p.l_a, "L_A");
            const double den = 1.0 + 2.0 * g * g * p.l_a * p.l_a;
            c = (lam / 4.0) * std::min({2.0 * g * p.mu_b / den, coco_term(1.0), relax_term() / den});
            break;
        }
        case 5: {
            need_finite(p.l_a, "L_A");
            need_positive(p.eta, "eta");
            const double den = 1.0 + 2.0 * g * g * p.l_a * p.l_a;
            c = (lam / 4.0) *
                std::min({2.0 * g * p.mu_c * (1.0 - p.eta) / den, coco_term(p.eta), relax_term() / den});
            break;
        }
        case 6: {
            need_finite(p.l_b, "L_B");
            need_positive(p.eta, "eta");
            if (coco_term(p.eta) < 0.0)
                throw std::invalid_argument("contraction_factor: case 6 needs 2*eta*beta >= gamma/epsilon");
            c = 2.0 * g * lam * p.mu_c * (1.0 - p.eta) / ((1.0 + g * p.l_b) * (1.0 + g * p.l_b));
            break;
        }
        default:
            throw std::invalid_argument("contraction_factor: case must be 1..6");
    }
    return std::min(std::max(c, 0.0), 1.0);
}

Vec running_min(const Vec& values) {
    Vec out(values.size());
    double m = kInf;
    for (std::size_t i = 0; i < values.size(); ++i) {
        m = std::min(m, values[i]);
        out[i] = m;
    }
    return out;
}

namespace {

// block-diagonal product-space operators for the rotating example
struct SlowOps {
    double a = 0.0;
    Vec cos_t, sin_t;
};

RotatingSubspaceExample assemble(double a, const Vec& thetas) {
    if (a < 0.0) throw std::invalid_argument("build_slow_example: a must be >= 0");
    const std::size_t n = thetas.size();
    if (n == 0) throw std::invalid_argument("build_slow_example: needs at least one block");
    for (double t : thetas)
        if (!(t > 0.0 && t <= 1.5707963267948966 + 1e-12))
            throw std::invalid_argument("build_slow_example: angles must lie in (0, pi/2]");

    auto ops = std::make_shared<SlowOps>();
    ops->a = a;
    ops->cos_t.resize(n);
    ops->sin_t.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ops->cos_t[i] = std::cos(thetas[i]);
        ops->sin_t[i] = std::sin(thetas[i]);
    }

    RotatingSubspaceExample ex;
    ex.a = a;
    ex.thetas = thetas;
    ex.n_blocks = n;

    // A = ∂(ι_U + (a/2)‖·‖²): resolvent is (1/(1+aγ)) P_U blockwise
    ProxOperator prox_u;
    prox_u.resolvent = [ops](double gamma, const Vec& z) {
        const std::size_t nb = ops->cos_t.size();
        check_dim(z, 2 * nb, "slow_example: prox_u input");
        Vec out(z.size());
        const double scale_u = 1.0 / (1.0 + ops->a * gamma);
        for (std::size_t i = 0; i < nb; ++i) {
            const double c = ops->cos_t[i], s = ops->sin_t[i];
            const double proj = c * z[2 * i] + s * z[2 * i + 1];  // <e_theta, z_i>
            out[2 * i] = scale_u * proj * c;
            out[2 * i + 1] = scale_u * proj * s;
        }
        return out;
    };
    prox_u.mu = a;
    prox_u.label = "slow_A";

    // B = N_V with V = span(e_0) per block: resolvent is P_V
    ProxOperator prox_v;
    prox_v.resolvent = [ops](double, const Vec& z) {
        const std::size_t nb = ops->cos_t.size();
        check_dim(z, 2 * nb, "slow_example: prox_v input");
        Vec out(z.size(), 0.0);
        for (std::size_t i = 0; i < nb; ++i) out[2 * i] = z[2 * i];
        return out;
    };
    prox_v.label = "slow_B";

    ForwardOperator ident;
    ident.forward = [](const Vec& x) { return x; };
    ident.beta = 1.0;
    ident.mu_c = 1.0;
    ident.l_c = 1.0;
    ident.label = "slow_C";

    ex.problem.dim = 2 * n;
    ex.problem.a = prox_u;
    ex.problem.b = prox_v;
    ex.problem.c = ident;

    // materialize each block's 2x2 map from the actual operator (γ = 1) and
    // take the numerically computed nonzero eigenvalue
    ex.blocks.reserve(n);
    ex.eigenvalues.resize(n);
    ex.z0.assign(2 * n, 0.0);
    ThreeOperatorProblem single;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = ops->cos_t[i], s = ops->sin_t[i];
        Mat t(2, 2);
        {
            // columns of the block map via the problem restricted to block i
            SlowOps one;
            one.a = a;
            one.cos_t = {c};
            one.sin_t = {s};
            auto one_p = std::make_shared<SlowOps>(one);
            single.dim = 2;
            single.a = prox_u;
            single.a.resolvent = [one_p](double gamma, const Vec& z) {
                const double scale_u = 1.0 / (1.0 + one_p->a * gamma);
                const double proj = one_p->cos_t[0] * z[0] + one_p->sin_t[0] * z[1];
                return Vec{scale_u * proj * one_p->cos_t[0], scale_u * proj * one_p->sin_t[0]};
            };
            single.b = prox_v;
            single.b.resolvent = [](double, const Vec& z) { return Vec{z[0], 0.0}; };
            single.c = ident;
            for (std::size_t col = 0; col < 2; ++col) {
                Vec e(2, 0.0);
                e[col] = 1.0;
                Vec te = apply_t(single, 1.0, e).tz();
                t(0, col) = te[0];
                t(1, col) = te[1];
            }
        }
        Eig2 e = eig2x2(t(0, 0), t(0, 1), t(1, 0), t(1, 1));
        if (!e.real) throw std::runtime_error("build_slow_example: complex block eigenvalues");
        const double b_i = e.e1;  // the nonzero one (|e0| <= |e1|, e0 = 0 here)
        ex.blocks.push_back(t);
        ex.eigenvalues[i] = b_i;

        // eigenvector for b_i: solve (T − b I) v = 0 with v = (v0, 1)
        double v0;
        if (std::abs(t(0, 0) - b_i) > 1e-300)
            v0 = -t(0, 1) / (t(0, 0) - b_i);
        else
            v0 = 0.0;
        const double nrm = std::sqrt(v0 * v0 + 1.0);
        ex.z0[2 * i] = v0 / (nrm * static_cast<double>(i + 1));
        ex.z0[2 * i + 1] = 1.0 / (nrm * static_cast<double>(i + 1));
    }
    return ex;
}

}  // namespace

RotatingSubspaceExample build_slow_example(double a, const Vec& thetas) {
    return assemble(a, thetas);
}

RotatingSubspaceExample build_slow_example_for_horizon(double a, std::size_t n_blocks, int k_max) {
    if (n_blocks == 0) throw std::invalid_argument("build_slow_example_for_horizon: n_blocks > 0");
    // Eigenvalue ladder b_i -> 1: block i is calibrated so that
    // b_i^{R_i}/(i+1) = e^{-1} F(R_i) at its takeover iteration R_i, then the
    // angle follows from b = (1+a−sin²θ)/(1+a).
    const double eul = std::exp(1.0);
    Vec thetas(n_blocks);
    Vec b(n_blocks);
    for (std::size_t i = 0; i < n_blocks; ++i) {
        const double admissible = eul * std::log(static_cast<double>(i) + 3.0);
        double r = std::ceil(std::exp(static_cast<double>(i + 1) / eul)) - 2.0;
        r = std::max(r, 1.0);
        (void)admissible;
        const double target = slow_example_floor(static_cast<int>(r)) * static_cast<double>(i + 1);
        double bi = target < 1.0 ? std::pow(target, 1.0 / r) : 1.0 - 1e-12;
        const double lo = a / (a + 1.0);  // keeps sin²θ <= 1
        bi = std::min(std::max(bi, lo + 1e-9), 1.0 - 1e-12);
        b[i] = bi;
        const double s2 = (a + 1.0) * (1.0 - bi);
        thetas[i] = std::asin(std::sqrt(std::min(s2, 1.0)));
    }
    RotatingSubspaceExample ex = assemble(a, thetas);

    // verify coverage of the floor by the certified per-block decay
    const double tail = slow_example_tail(n_blocks);
    for (int k = 0; k <= k_max; ++k) {
        double best = 0.0;
        for (std::size_t i = 0; i < n_blocks; ++i)
            best = std::max(best, std::pow(ex.eigenvalues[i], k) / static_cast<double>(i + 1));
        if (best < slow_example_floor(k) - tail)
            throw std::runtime_error("build_slow_example_for_horizon: ladder fails the floor at k=" +
                                     std::to_string(k));
    }
    return ex;
}

double slow_example_tail(std::size_t n_blocks) {
    // Σ_{i >= N} 1/(i+1)² = ψ'(N+1); bounded by 1/N, computed directly here
    double s = 0.0;
    for (std::size_t i = n_blocks; i < n_blocks + 2000000; ++i) {
        const double term = 1.0 / (static_cast<double>(i + 1) * static_cast<double>(i + 1));
        s += term;
        if (term < 1e-16) break;
    }
    return std::sqrt(s);
}

MonitorReport check_monitors(const ThreeOperatorProblem& problem,
                             const std::vector<SolverState>& states,
                             const RelaxationSchedule& schedule, const Vec& z_star) {
    MonitorReport rep;
    if (states.empty()) return rep;
    const Vec x_star = problem.b(schedule.gamma, z_star);
    const Vec cx_star = problem.c(x_star);
    const double d0_sq = norm2_sq(sub(states.front().z, z_star));
    double tau_min = kInf;
    double prev_fpr = kInf, prev_dist = kInf;
    for (std::size_t k = 0; k < states.size(); ++k) {
        tau_min = std::min(tau_min, schedule.tau(static_cast<int>(k)));
        const double fpr = states[k].fpr_sq;
        const double dist = norm2(sub(states[k].z, z_star));
        if (k > 0) {
            rep.max_fpr_increase = std::max(rep.max_fpr_increase, fpr - prev_fpr);
            rep.max_dist_increase = std::max(rep.max_dist_increase, dist - prev_dist);
        }
        prev_fpr = fpr;
        prev_dist = dist;
        const double bound = d0_sq / (tau_min * (static_cast<double>(k) + 1.0));
        rep.max_rate_violation = std::max(rep.max_rate_violation, fpr - bound);
        if (fpr <= 1e-16) {  // FPR ≤ 1e-8
            const double gap = norm2(sub(problem.c(states[k].x_b), cx_star));
            rep.grad_gap_at_tol = rep.grad_gap_at_tol == kInf ? gap : std::max(rep.grad_gap_at_tol, gap);
        }
    }
    return rep;
}

}  // namespace tos
