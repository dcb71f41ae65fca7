#include "tos/applications.hpp"

#include <chrono>
#include <cmath>
#include <memory>

namespace tos {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

RelaxationSchedule schedule_for(const AppControls& ctl, double beta) {
    double gamma = ctl.gamma;
    if (gamma == 0.0) gamma = beta == kInf ? 1.0 : default_gamma(beta);
    RelaxationSchedule s = make_schedule(gamma, beta);
    if (ctl.lambdas) s.lambdas = ctl.lambdas;
    return s;
}

SolveOptions options_for(const AppControls& ctl) {
    SolveOptions o;
    o.max_iter = ctl.max_iter;
    o.tol = ctl.tol;
    o.record_states = ctl.record_states;
    return o;
}

AppResult from_solve(SolveResult&& r) {
    AppResult out;
    out.x = r.state.x_b;
    out.trace = std::move(r.trace);
    out.converged = r.converged;
    return out;
}

}  // namespace

AppResult solve_split_feasibility(const ProxOperator& c1, const ProxOperator& c2,
                                  const ProxOperator& c3, const Mat& l, const Vec& z0,
                                  const AppControls& ctl) {
    ThreeOperatorProblem p;
    p.dim = z0.size();
    p.a = c1;
    p.b = c2;
    p.c = grad_feasibility(l, c3);
    AppResult out = from_solve(solve_basic(p, schedule_for(ctl, p.c.beta), z0, options_for(ctl)));
    Vec lx = matvec(l, out.x);
    out.final_distance = dist2(lx, c3(1.0, lx));
    return out;
}

AppResult solve_three_objective(const ProxOperator& prox_f, const ProxOperator& prox_g,
                                const Mat& l, const ForwardOperator& grad_h, const Vec& z0,
                                const AppControls& ctl, std::optional<ObjectiveTriple> objective) {
    ThreeOperatorProblem p;
    p.dim = z0.size();
    p.a = prox_f;
    p.b = prox_g;
    p.c = compose_gradient(l, grad_h);
    p.objective = std::move(objective);
    return from_solve(solve_basic(p, schedule_for(ctl, p.c.beta), z0, options_for(ctl)));
}

ThreeOperatorProblem make_multi_reg_problem(const std::vector<ProxOperator>& regs, const Mat& l,
                                            const ForwardOperator& grad_h, std::size_t dim) {
    const std::size_t m = regs.size();
    if (m == 0) throw std::invalid_argument("multi_reg: needs at least one regularizer");
    const std::size_t d = dim;

    auto regs_p = std::make_shared<std::vector<ProxOperator>>(regs);
    ProxOperator consensus;
    consensus.resolvent = [m, d](double, const Vec& z) {
        Vec mean(d, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j) mean[j] += z[i * d + j];
        for (auto& v : mean) v /= static_cast<double>(m);
        Vec out(m * d);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j) out[i * d + j] = mean[j];
        return out;
    };
    consensus.label = "consensus";

    ProxOperator block_prox;
    block_prox.resolvent = [regs_p, m, d](double gamma, const Vec& z) {
        Vec out(m * d);
        for (std::size_t i = 0; i < m; ++i) {
            Vec zi(z.begin() + i * d, z.begin() + (i + 1) * d);
            Vec xi = (*regs_p)[i](gamma, zi);
            check_dim(xi, d, "multi_reg: regularizer output");
            std::copy(xi.begin(), xi.end(), out.begin() + i * d);
        }
        return out;
    };
    block_prox.label = "multi_reg_blocks";

    ForwardOperator composed = compose_gradient(l, grad_h);
    auto comp_p = std::make_shared<ForwardOperator>(composed);
    ForwardOperator c_prod;
    c_prod.forward = [comp_p, m, d](const Vec& z) {
        // blocks are identical after consensus; evaluate once on block 0
        Vec x0(z.begin(), z.begin() + d);
        Vec gi = scale(1.0 / static_cast<double>(m), (*comp_p)(x0));
        Vec out(m * d);
        for (std::size_t i = 0; i < m; ++i) std::copy(gi.begin(), gi.end(), out.begin() + i * d);
        return out;
    };
    c_prod.beta = composed.beta == kInf ? kInf : composed.beta * static_cast<double>(m);
    c_prod.label = "multi_reg_forward";

    ThreeOperatorProblem p;
    p.dim = m * d;
    p.a = block_prox;
    p.b = consensus;
    p.c = c_prod;
    return p;
}

AppResult solve_multi_reg(const std::vector<ProxOperator>& regs, const Mat& l,
                          const ForwardOperator& grad_h, const std::vector<Vec>& z0s,
                          const AppControls& ctl) {
    const std::size_t m = regs.size();
    if (m == 0) throw std::invalid_argument("solve_multi_reg: needs at least one regularizer");
    if (z0s.size() != m) throw std::invalid_argument("solve_multi_reg: one start vector per block");
    const std::size_t d = z0s[0].size();
    for (const auto& z : z0s)
        if (z.size() != d) throw std::invalid_argument("solve_multi_reg: block dimension mismatch");

    ThreeOperatorProblem p = make_multi_reg_problem(regs, l, grad_h, d);

    Vec z0(m * d);
    for (std::size_t i = 0; i < m; ++i) std::copy(z0s[i].begin(), z0s[i].end(), z0.begin() + i * d);

    SolveResult r = solve_basic(p, schedule_for(ctl, p.c.beta), z0, options_for(ctl));
    AppResult out;
    out.x = Vec(r.state.x_b.begin(), r.state.x_b.begin() + d);  // consensus point
    out.trace = std::move(r.trace);
    out.converged = r.converged;
    return out;
}

MatrixCompletionResult solve_matrix_completion(const Mat& x0, const Mat& mask, double mu,
                                               double l_bound, double u_bound, const Vec& z0,
                                               const AppControls& ctl) {
    if (mask.rows != x0.rows || mask.cols != x0.cols)
        throw std::invalid_argument("solve_matrix_completion: mask/data shape mismatch");
    if (mu < 0.0) throw std::invalid_argument("solve_matrix_completion: mu must be >= 0");
    const std::size_t n = x0.rows * x0.cols;
    check_dim(z0, n, "solve_matrix_completion: z0");
    double observed = 0.0;
    for (double v : mask.data) observed += v != 0.0 ? 1.0 : 0.0;
    if (observed == 0.0) throw std::invalid_argument("solve_matrix_completion: empty mask");

    auto x0_p = std::make_shared<Vec>(x0.data);
    auto mask_p = std::make_shared<Vec>(mask.data);

    ThreeOperatorProblem p;
    p.dim = n;
    p.a = project_box(constant(n, l_bound), constant(n, u_bound));
    // mu = 0 keeps the model but drops the nuclear term
    p.b = mu > 0.0 ? prox_nuclear(mu, x0.rows, x0.cols) : identity_prox();
    ForwardOperator grad;
    grad.forward = [x0_p, mask_p](const Vec& x) {
        Vec g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            g[i] = (*mask_p)[i] != 0.0 ? x[i] - (*x0_p)[i] : 0.0;
        return g;
    };
    grad.beta = 1.0;  // mask-apply is an orthogonal projection
    grad.l_c = 1.0;
    grad.label = "masked_residual";
    p.c = grad;

    SolveOptions opts = options_for(ctl);
    opts.record_states = true;
    SolveResult r = solve_basic(p, schedule_for(ctl, 1.0), z0, opts);

    MatrixCompletionResult out;
    out.x = Mat(x0.rows, x0.cols, r.state.x_b);
    out.trace = std::move(r.trace);
    out.converged = r.converged;
    out.rmse.reserve(r.states.size());
    for (const auto& s : r.states) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if ((*mask_p)[i] != 0.0) {
                const double d = s.x_b[i] - (*x0_p)[i];
                acc += d * d;
            }
        }
        out.rmse.push_back(std::sqrt(acc / observed));
    }
    if (!ctl.record_states) out.trace.shrink_to_fit();
    return out;
}

AppResult solve_constrained_qp(const QpSpec& spec, const Vec& z0, const AppControls& ctl) {
    if (!is_symmetric(spec.q, 1e-12))
        throw std::invalid_argument("solve_constrained_qp: Q must be symmetric");
    const std::size_t d = spec.q.rows;
    check_dim(spec.c, d, "solve_constrained_qp: c");
    check_dim(z0, d, "solve_constrained_qp: z0");

    Mat q = spec.q;
    if (spec.precondition_flag) {
        if (!spec.c2.linear_projection)
            throw std::invalid_argument(
                "solve_constrained_qp: preconditioning needs a linear C2 projection");
        // assemble P_{C2} column by column, then Q <- P Q P
        Mat proj(d, d);
        for (std::size_t j = 0; j < d; ++j) {
            Vec e(d, 0.0);
            e[j] = 1.0;
            Vec pe = spec.c2(1.0, e);
            for (std::size_t i = 0; i < d; ++i) proj(i, j) = pe[i];
        }
        q = matmul(matmul(proj, q), proj);
        // symmetrize away roundoff
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) {
                const double v = 0.5 * (q(i, j) + q(j, i));
                q(i, j) = v;
                q(j, i) = v;
            }
    }

    ThreeOperatorProblem p;
    p.dim = d;
    p.a = spec.c2;
    p.b = spec.c1;
    p.c = make_quadratic_gradient(q, spec.c);
    return from_solve(solve_basic(p, schedule_for(ctl, p.c.beta), z0, options_for(ctl)));
}

PrimalDualResult solve_primal_dual(const ThreeOperatorProblem& problem, double tau, double sigma,
                                   const Vec& x0, const Vec& y0, PrimalDualVariant variant,
                                   int max_iter, double tol, bool zero_correction) {
    if (!(tau > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("solve_primal_dual: stepsizes must be positive");
    if (variant == PrimalDualVariant::equivalent_form &&
        std::abs(sigma * tau - 1.0) > 1e-12)
        throw std::invalid_argument("solve_primal_dual: equivalent_form requires sigma = 1/tau");

    // J_{σA⁻¹}(v) = v − σ J_{(1/σ)A}(v/σ)
    auto resolvent_inverse = [&](double s, const Vec& v) {
        return sub(v, scale(s, problem.a(1.0 / s, scale(1.0 / s, v))));
    };

    PrimalDualResult out;
    Vec x = x0, y = y0;
    Vec cx = problem.c(x);
    out.x_history.push_back(x);
    const double t_start = now_seconds();
    for (int k = 0; k <= max_iter; ++k) {
        Vec arg_x = x;
        add_scaled_inplace(arg_x, -tau, cx);
        add_scaled_inplace(arg_x, -tau, y);
        Vec x_next = problem.b(tau, arg_x);
        Vec cx_next = problem.c(x_next);

        Vec arg_y = y;
        add_scaled_inplace(arg_y, sigma, sub(scale(2.0, x_next), x));
        // correction C(x^k) − C(x^{k+1}), the sign the change of variables needs
        if (variant == PrimalDualVariant::equivalent_form && !zero_correction)
            add_scaled_inplace(arg_y, 1.0, sub(cx, cx_next));
        Vec y_next = resolvent_inverse(sigma, arg_y);

        const double move_sq = norm2_sq(sub(x_next, x)) + norm2_sq(sub(y_next, y));
        TraceRecord rec;
        rec.k = k;
        rec.fpr_sq = move_sq;
        rec.gamma_k = tau;
        rec.lambda_k = sigma;
        rec.elapsed_s = now_seconds() - t_start;
        if (problem.objective) rec.objective = problem.objective_value(x_next, x_next);
        out.trace.push_back(rec);

        x = std::move(x_next);
        y = std::move(y_next);
        cx = std::move(cx_next);
        out.x_history.push_back(x);
        if (!is_finite(x) || !is_finite(y))
            throw DivergenceError("solve_primal_dual: non-finite iterate at k=" + std::to_string(k));
        if ((tol > 0.0 && move_sq <= tol * tol) || k == max_iter) {
            out.x = x;
            out.y = y;
            out.converged = move_sq <= tol * tol;
            return out;
        }
    }
    return out;  // unreachable
}

}  // namespace tos
