#include "tos/admm.hpp"

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

void validate_blocks(const AdmmProblem& p, std::size_t expected) {
    if (expected > 0 && p.blocks.size() != expected)
        throw std::invalid_argument("admm: expected " + std::to_string(expected) + " blocks");
    if (p.blocks.size() < 3) throw std::invalid_argument("admm: needs at least 3 blocks");
    for (const auto& blk : p.blocks)
        if (blk.range_dim != p.b.size())
            throw std::invalid_argument("admm: block range dim must match dim(b)");
    if (!(p.gamma > 0.0)) throw std::invalid_argument("admm: gamma must be positive");
    if (expected == 3) {
        if (!(p.mu1 > 0.0)) throw std::invalid_argument("admm: mu1 must be positive");
        const double nl1 = p.blocks[0].map_norm;
        if (nl1 > 0.0 && !(p.gamma < 2.0 * p.mu1 / (nl1 * nl1)))
            throw std::invalid_argument("admm: gamma must be < 2*mu1/‖L1‖²");
    } else {
        // head blocks grouped as f_1; the grouped dual gradient is
        // (Σ ‖L_i‖²/μ_i)-Lipschitz
        double lip = 0.0;
        bool norms_known = true;
        for (std::size_t i = 0; i + 2 < p.blocks.size(); ++i) {
            if (!(p.blocks[i].mu > 0.0))
                throw std::invalid_argument("admm: head block " + std::to_string(i + 1) +
                                            " is missing its strong-convexity constant");
            if (p.blocks[i].map_norm > 0.0)
                lip += p.blocks[i].map_norm * p.blocks[i].map_norm / p.blocks[i].mu;
            else
                norms_known = false;
        }
        if (norms_known && lip > 0.0 && !(p.gamma < 2.0 / lip))
            throw std::invalid_argument("admm: gamma must be < 2 / sum_i(‖L_i‖²/mu_i)");
    }
}
}  // namespace

ProxDualResult prox_dual(const ArgminOracle& oracle, const Vec& c, double gamma, const Vec& y) {
    if (!(gamma > 0.0)) throw std::invalid_argument("prox_dual: gamma must be positive");
    // argmin f(x) + (γ/2)‖Lx − c − y/γ‖² gives prox_{γd}(y) = y − γ(Lx − c)
    Vec v = axpy(c, 1.0 / gamma, y);
    ProxDualResult r;
    r.x_pp = oracle.penalized_argmin(gamma, v);
    r.prox = sub(y, scale(gamma, sub(oracle.apply_map(r.x_pp), c)));
    return r;
}

AdmmResult solve_admm3(const AdmmProblem& problem, const Vec& w0, const Vec& x3_0, int max_iter,
                       double tol) {
    validate_blocks(problem, 3);
    const double gamma = problem.gamma;
    const auto& f1 = problem.blocks[0];
    const auto& f2 = problem.blocks[1];
    const auto& f3 = problem.blocks[2];

    AdmmResult out;
    Vec w = w0;
    Vec l3x3 = f3.apply_map(x3_0);
    out.x_blocks = {Vec(f1.domain_dim, 0.0), Vec(f2.domain_dim, 0.0), x3_0};
    const double t_start = now_seconds();
    for (int k = 0; k <= max_iter; ++k) {
        out.w_history.push_back(w);
        Vec x1 = f1.linear_argmin(negate(w));
        Vec l1x1 = f1.apply_map(x1);
        // v2 = b + w/γ − L1 x1 − L3 x3
        Vec v2 = axpy(problem.b, 1.0 / gamma, w);
        add_scaled_inplace(v2, -1.0, l1x1);
        add_scaled_inplace(v2, -1.0, l3x3);
        Vec x2 = f2.penalized_argmin(gamma, v2);
        Vec l2x2 = f2.apply_map(x2);
        Vec v3 = axpy(problem.b, 1.0 / gamma, w);
        add_scaled_inplace(v3, -1.0, l1x1);
        add_scaled_inplace(v3, -1.0, l2x2);
        Vec x3 = f3.penalized_argmin(gamma, v3);
        l3x3 = f3.apply_map(x3);

        Vec residual = add(add(l1x1, l2x2), l3x3);
        add_scaled_inplace(residual, -1.0, problem.b);
        Vec w_next = axpy(w, -gamma, residual);

        const double res_sq = norm2_sq(residual);
        const double dw_sq = norm2_sq(sub(w_next, w));
        TraceRecord rec;
        rec.k = k;
        rec.fpr_sq = res_sq + dw_sq;
        rec.gamma_k = gamma;
        rec.lambda_k = 1.0;
        rec.elapsed_s = now_seconds() - t_start;
        rec.objective = f1.value(x1) + f2.value(x2) + f3.value(x3);
        out.trace.push_back(rec);

        out.x_blocks = {std::move(x1), std::move(x2), std::move(x3)};
        w = std::move(w_next);
        if ((tol > 0.0 && res_sq <= tol * tol && dw_sq <= tol * tol) || k == max_iter) {
            out.w = w;
            out.converged = res_sq <= tol * tol && dw_sq <= tol * tol;
            return out;
        }
    }
    return out;  // unreachable
}

std::vector<Vec> solve_admm_dual(const AdmmProblem& problem, const Vec& z0, int max_iter,
                                 double tol) {
    validate_blocks(problem, 3);
    const double gamma = problem.gamma;
    const auto& f1 = problem.blocks[0];
    const auto& f2 = problem.blocks[1];
    const auto& f3 = problem.blocks[2];
    const Vec zero_c(problem.b.size(), 0.0);

    std::vector<Vec> w_seq;
    Vec z = z0;
    for (int k = 0; k <= max_iter; ++k) {
        // w^k = prox_{γ d3}(z^k), d3 carrying the −<w,b> shift
        ProxDualResult pb = prox_dual(f3, problem.b, gamma, z);
        const Vec& w = pb.prox;
        w_seq.push_back(w);
        // ∇d1(w) = L1 · argmin(f1 − <w, L1 x>)
        Vec grad_d1 = f1.apply_map(f1.linear_argmin(negate(w)));
        Vec mid = sub(scale(2.0, w), z);
        add_scaled_inplace(mid, -gamma, grad_d1);
        ProxDualResult pa = prox_dual(f2, zero_c, gamma, mid);
        Vec z_next = add(z, sub(pa.prox, w));
        const double step_sq = norm2_sq(sub(z_next, z));
        z = std::move(z_next);
        if ((tol > 0.0 && step_sq <= tol * tol) || k == max_iter) break;
    }
    return w_seq;
}

AdmmResult solve_admm_m(const AdmmProblem& problem, const Vec& w0, const Vec& xm_0, int max_iter,
                        double tol) {
    validate_blocks(problem, 0);
    const std::size_t m = problem.blocks.size();
    const double gamma = problem.gamma;

    AdmmResult out;
    Vec w = w0;
    Vec lmxm = problem.blocks[m - 1].apply_map(xm_0);
    out.x_blocks.assign(m, Vec());
    out.x_blocks[m - 1] = xm_0;
    const double t_start = now_seconds();
    for (int k = 0; k <= max_iter; ++k) {
        out.w_history.push_back(w);
        // blocks 1..m-2: independent linear steps (side-effect free, may run
        // concurrently per the module contract)
        std::vector<Vec> x(m);
        Vec head_sum(problem.b.size(), 0.0);
        const Vec neg_w = negate(w);
        for (std::size_t i = 0; i + 2 < m; ++i) {
            x[i] = problem.blocks[i].linear_argmin(neg_w);
            add_scaled_inplace(head_sum, 1.0, problem.blocks[i].apply_map(x[i]));
        }
        Vec v_pen = axpy(problem.b, 1.0 / gamma, w);
        add_scaled_inplace(v_pen, -1.0, head_sum);
        // block m-1 sees the previous x_m
        Vec v1 = sub(v_pen, lmxm);
        x[m - 2] = problem.blocks[m - 2].penalized_argmin(gamma, v1);
        Vec lx_m1 = problem.blocks[m - 2].apply_map(x[m - 2]);
        Vec v2 = sub(v_pen, lx_m1);
        x[m - 1] = problem.blocks[m - 1].penalized_argmin(gamma, v2);
        lmxm = problem.blocks[m - 1].apply_map(x[m - 1]);

        Vec residual = add(add(head_sum, lx_m1), lmxm);
        add_scaled_inplace(residual, -1.0, problem.b);
        Vec w_next = axpy(w, -gamma, residual);

        const double res_sq = norm2_sq(residual);
        const double dw_sq = norm2_sq(sub(w_next, w));
        TraceRecord rec;
        rec.k = k;
        rec.fpr_sq = res_sq + dw_sq;
        rec.gamma_k = gamma;
        rec.lambda_k = 1.0;
        rec.elapsed_s = now_seconds() - t_start;
        double obj = 0.0;
        for (std::size_t i = 0; i < m; ++i) obj += problem.blocks[i].value(x[i]);
        rec.objective = obj;
        out.trace.push_back(rec);

        out.x_blocks = std::move(x);
        w = std::move(w_next);
        if ((tol > 0.0 && res_sq <= tol * tol && dw_sq <= tol * tol) || k == max_iter) {
            out.w = w;
            out.converged = res_sq <= tol * tol && dw_sq <= tol * tol;
            return out;
        }
    }
    return out;  // unreachable
}

ArgminOracle make_quadratic_block(const Mat& p, const Vec& q, const Mat& l) {
    if (p.rows != p.cols || p.rows != q.size() || l.cols != p.rows)
        throw std::invalid_argument("make_quadratic_block: dimension mismatch");
    auto pm = std::make_shared<Mat>(p);
    auto qv = std::make_shared<Vec>(q);
    auto lm = std::make_shared<Mat>(l);
    auto ltl = std::make_shared<Mat>(matmul(transpose(l), l));
    ArgminOracle o;
    o.domain_dim = p.rows;
    o.range_dim = l.rows;
    o.mu = svd(p).s.back();  // λ_min of symmetric PSD
    o.map_norm = op_norm(l);
    o.linear_argmin = [pm, qv, lm](const Vec& w) {
        // P x = −q − Lᵀ w
        return solve_spd(*pm, negate(add(*qv, matvec_t(*lm, w))));
    };
    o.penalized_argmin = [pm, qv, lm, ltl](double gamma, const Vec& v) {
        // (P + γLᵀL) x = −q + γLᵀv
        Mat sys = *pm;
        for (std::size_t i = 0; i < sys.data.size(); ++i) sys.data[i] += gamma * ltl->data[i];
        return solve_spd(sys, axpy(negate(*qv), gamma, matvec_t(*lm, v)));
    };
    o.apply_map = [lm](const Vec& x) { return matvec(*lm, x); };
    o.value = [pm, qv](const Vec& x) { return 0.5 * dot(x, matvec(*pm, x)) + dot(*qv, x); };
    return o;
}

}  // namespace tos
