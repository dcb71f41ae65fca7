#include "tos/splitting.hpp"

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
}  // namespace

RelaxationSchedule make_schedule(double gamma, double beta, double lambda) {
    if (!(gamma > 0.0)) throw std::invalid_argument("schedule: gamma must be positive");
    double epsilon;
    if (beta == kInf) {
        epsilon = 1.0 - 1e-6;
    } else {
        if (!(gamma < 2.0 * beta))
            throw std::invalid_argument("schedule: gamma must be < 2*beta");
        epsilon = std::min(1.0 - 1e-6, gamma / (2.0 * beta) + 1e-6);
    }
    return make_schedule_eps(gamma, epsilon, lambda);
}

RelaxationSchedule make_schedule_eps(double gamma, double epsilon, double lambda) {
    if (!(gamma > 0.0)) throw std::invalid_argument("schedule: gamma must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("schedule: epsilon must lie in (0,1)");
    RelaxationSchedule s;
    s.gamma = gamma;
    s.epsilon = epsilon;
    s.alpha = 1.0 / (2.0 - epsilon);
    s.lambdas = [lambda](int) { return lambda; };
    return s;
}

SolverState apply_t(const ThreeOperatorProblem& problem, double gamma, const Vec& z) {
    if (!(gamma > 0.0)) throw std::invalid_argument("apply_t: gamma must be positive");
    SolverState s;
    s.z = z;
    s.gamma_k = gamma;
    s.x_b = problem.b(gamma, z);
    check_dim(s.x_b, z.size(), "apply_t: J_B output");
    s.u_b = scale(1.0 / gamma, sub(z, s.x_b));
    Vec cxb = problem.c(s.x_b);
    check_dim(cxb, z.size(), "apply_t: C output");
    // 2 x_b − z − γ C x_b
    Vec arg = sub(scale(2.0, s.x_b), z);
    add_scaled_inplace(arg, -gamma, cxb);
    s.x_a = problem.a(gamma, arg);
    check_dim(s.x_a, z.size(), "apply_t: J_A output");
    s.u_a = scale(1.0 / gamma, sub(arg, s.x_a));
    s.fpr_sq = norm2_sq(sub(s.x_a, s.x_b));
    if (!is_finite(s.x_a) || !is_finite(s.x_b) || !is_finite(cxb))
        throw DivergenceError("apply_t: non-finite iterate");
    return s;
}

SolveResult solve_basic(const ThreeOperatorProblem& problem, const RelaxationSchedule& schedule,
                        const Vec& z0, const SolveOptions& opts) {
    if (problem.c.beta != kInf && !(schedule.gamma < 2.0 * problem.c.beta * schedule.epsilon))
        throw std::invalid_argument("solve_basic: gamma must be < 2*beta*epsilon");
    if (opts.tol < 0.0) throw std::invalid_argument("solve_basic: tol must be >= 0");

    SolveResult out;
    Vec z = z0;
    const double t_start = now_seconds();
    for (int k = 0; k <= opts.max_iter; ++k) {
        SolverState s = apply_t(problem, schedule.gamma, z);
        s.k = k;
        const double lam = schedule.lambda(k);
        if (!(lam > 0.0 && lam < 1.0 / schedule.alpha))
            throw std::invalid_argument("solve_basic: lambda_k outside (0, 1/alpha)");

        TraceRecord rec;
        rec.k = k;
        rec.fpr_sq = s.fpr_sq;
        rec.gamma_k = schedule.gamma;
        rec.lambda_k = lam;
        rec.elapsed_s = now_seconds() - t_start;
        if (problem.objective) rec.objective = problem.objective_value(s.x_a, s.x_b);
        if (problem.reference_solution) rec.dist_ref = dist2(s.x_b, *problem.reference_solution);
        out.trace.push_back(rec);
        if (opts.record_states) out.states.push_back(s);

        if (s.fpr_sq <= opts.tol * opts.tol || k == opts.max_iter) {
            out.state = std::move(s);
            out.converged = out.state.fpr_sq <= opts.tol * opts.tol;
            return out;
        }
        add_scaled_inplace(z, lam, sub(s.x_a, s.x_b));
        if (!is_finite(z)) throw DivergenceError("solve_basic: non-finite iterate at k=" + std::to_string(k));
    }
    return out;  // unreachable
}

Vec recover_solution(const ThreeOperatorProblem& problem, double gamma, const Vec& z_star) {
    return problem.b(gamma, z_star);
}

ThreeOperatorProblem specialize(SpecialMode mode, const SpecializeSlots& slots) {
    ThreeOperatorProblem p;
    p.dim = slots.dim;
    switch (mode) {
        case SpecialMode::fbs:
            if (!slots.a || !slots.c) throw std::invalid_argument("specialize(fbs): needs A and C");
            p.a = *slots.a;
            p.b = identity_prox();
            p.c = *slots.c;
            break;
        case SpecialMode::drs:
            if (!slots.a || !slots.b) throw std::invalid_argument("specialize(drs): needs A and B");
            p.a = *slots.a;
            p.b = *slots.b;
            p.c = zero_forward();
            break;
        case SpecialMode::fdrs: {
            if (!slots.a || !slots.c || !slots.subspace)
                throw std::invalid_argument("specialize(fdrs): needs A, C' and the subspace projector");
            p.a = *slots.a;
            p.b = *slots.subspace;
            auto pv = std::make_shared<ProxOperator>(*slots.subspace);
            auto cp = std::make_shared<ForwardOperator>(*slots.c);
            ForwardOperator c;
            c.forward = [pv, cp](const Vec& x) { return (*pv)(1.0, (*cp)((*pv)(1.0, x))); };
            c.beta = cp->beta;  // P_V nonexpansive, so cocoercivity is preserved
            c.l_c = cp->l_c;
            c.label = "fdrs_forward";
            p.c = c;
            break;
        }
    }
    return p;
}

double averaged_inequality_gap(const ThreeOperatorProblem& problem, double gamma, const Vec& z,
                               const Vec& w) {
    const double beta = problem.c.beta;
    if (beta != kInf && !(gamma < 2.0 * beta))
        throw std::invalid_argument("averaged_inequality_gap: gamma must be < 2*beta");
    const double alpha = beta == kInf ? 0.5 : 2.0 * beta / (4.0 * beta - gamma);
    const SolverState sz = apply_t(problem, gamma, z);
    const SolverState sw = apply_t(problem, gamma, w);
    const Vec tz = sz.tz(), tw = sw.tz();
    const Vec rz = sub(z, tz), rw = sub(w, tw);
    return norm2_sq(sub(z, w)) - (1.0 - alpha) / alpha * norm2_sq(sub(rz, rw)) -
           norm2_sq(sub(tz, tw));
}

double strengthened_inequality_gap(const ThreeOperatorProblem& problem, double gamma_bar,
                                   double eps_bar, const Vec& z, const Vec& w) {
    const double beta = problem.c.beta;
    if (!(eps_bar > 0.0 && eps_bar < 1.0))
        throw std::invalid_argument("strengthened_inequality_gap: eps_bar must lie in (0,1)");
    if (beta != kInf && !(gamma_bar < 2.0 * beta * eps_bar))
        throw std::invalid_argument("strengthened_inequality_gap: gamma_bar must be < 2*beta*eps_bar");
    const double alpha_bar = 1.0 / (2.0 - eps_bar);
    const SolverState sz = apply_t(problem, gamma_bar, z);
    const SolverState sw = apply_t(problem, gamma_bar, w);
    const Vec tz = sz.tz(), tw = sw.tz();
    const Vec rz = sub(z, tz), rw = sub(w, tw);
    const double cterm = beta == kInf ? 0.0
                                      : gamma_bar * (2.0 * beta - gamma_bar / eps_bar) *
                                            norm2_sq(sub(problem.c(sz.x_b), problem.c(sw.x_b)));
    return norm2_sq(sub(z, w)) - (1.0 - alpha_bar) / alpha_bar * norm2_sq(sub(rz, rw)) -
           norm2_sq(sub(tz, tw)) - cterm;
}

}  // namespace tos
