#include "tos/variants.hpp"

#include <chrono>
#include <cmath>

namespace tos {

namespace {
double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}
}  // namespace

double next_stepsize_cocoercive(double gamma_k, double mu_b, double mu_c, double eta) {
    if (!(gamma_k > 0.0)) throw std::invalid_argument("next_stepsize_cocoercive: gamma_k must be positive");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("next_stepsize_cocoercive: eta must lie in (0,1)");
    if (mu_b < 0.0 || mu_c < 0.0) throw std::invalid_argument("next_stepsize_cocoercive: moduli must be >= 0");
    if (mu_b == 0.0 && mu_c == 0.0) return gamma_k;  // formula collapses exactly
    const double p = 2.0 * gamma_k * gamma_k * mu_c * eta;
    const double q = 1.0 + 2.0 * gamma_k * mu_b;
    return (-p + std::sqrt(p * p + 4.0 * q * gamma_k * gamma_k)) / (2.0 * q);
}

double next_stepsize_lipschitz(double gamma_k, double mu_b, double l_c) {
    if (!(mu_b > 0.0)) throw std::invalid_argument("next_stepsize_lipschitz: mu_b must be positive");
    // the boundary gamma = 2*mu_b/l_c² is the stationary point of the update
    if (!(gamma_k > 0.0 && gamma_k <= 2.0 * mu_b / (l_c * l_c)))
        throw std::invalid_argument("next_stepsize_lipschitz: gamma_k must lie in (0, 2*mu_b/l_c^2]");
    return gamma_k / std::sqrt(1.0 + 2.0 * gamma_k * (mu_b - gamma_k * l_c * l_c / 2.0));
}

AccelResult solve_accelerated(const ThreeOperatorProblem& problem, const AccelConfig& config,
                              const Vec& x_a0, const AccelOptions& opts) {
    const double beta = problem.c.beta;
    const double mu_b = problem.b.mu;
    const double mu_c = problem.c.mu_c;
    const double l_c = problem.c.l_c;
    if (config.branch == AccelConfig::Branch::cocoercive) {
        if (!(config.eta > 0.0 && config.eta < 1.0))
            throw std::invalid_argument("solve_accelerated: eta must lie in (0,1)");
        if (beta != kInf && !(config.gamma0 > 0.0 && config.gamma0 < 2.0 * beta * (1.0 - config.eta)))
            throw std::invalid_argument("solve_accelerated: gamma0 must lie in (0, 2*beta*(1-eta))");
    } else {
        if (!(mu_b > 0.0))
            throw std::invalid_argument("solve_accelerated: lipschitz branch requires mu_B > 0");
        if (l_c == kInf || !(config.gamma0 > 0.0 && config.gamma0 < 2.0 * mu_b / (l_c * l_c)))
            throw std::invalid_argument("solve_accelerated: gamma0 must lie in (0, 2*mu_B/L_C^2)");
    }

    auto next_gamma = [&](double g) {
        return config.branch == AccelConfig::Branch::cocoercive
                   ? next_stepsize_cocoercive(g, mu_b, mu_c, config.eta)
                   : next_stepsize_lipschitz(g, mu_b, l_c);
    };

    AccelResult out;
    const double t_start = now_seconds();

    // k = 0: x_b, u_b from the start point, then the first backward step.
    AccelState s;
    s.k = 0;
    s.gamma_prev = config.gamma0;
    s.gamma = config.gamma0;
    s.x_b = problem.b(config.gamma0, x_a0);
    s.u_b = scale(1.0 / config.gamma0, sub(x_a0, s.x_b));
    {
        Vec arg = sub(s.x_b, scale(config.gamma0, s.u_b));
        add_scaled_inplace(arg, -config.gamma0, problem.c(s.x_b));
        s.x_a = problem.a(config.gamma0, arg);
    }
    s.fpr_sq = norm2_sq(sub(s.x_a, s.x_b));

    for (int k = 0;; ++k) {
        s.k = k;
        TraceRecord rec;
        rec.k = k;
        rec.fpr_sq = s.fpr_sq;
        rec.gamma_k = s.gamma;
        rec.lambda_k = 1.0;
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

        AccelState n;
        n.gamma_prev = s.gamma;
        Vec arg_b = add(s.x_a, scale(s.gamma, s.u_b));
        n.x_b = problem.b(s.gamma, arg_b);
        n.u_b = scale(1.0 / s.gamma, sub(arg_b, n.x_b));
        n.gamma = next_gamma(s.gamma);
        Vec arg_a = sub(n.x_b, scale(n.gamma, n.u_b));
        add_scaled_inplace(arg_a, -n.gamma, problem.c(n.x_b));
        n.x_a = problem.a(n.gamma, arg_a);
        n.fpr_sq = norm2_sq(sub(n.x_a, n.x_b));
        if (!is_finite(n.x_a) || !is_finite(n.x_b))
            throw DivergenceError("solve_accelerated: non-finite iterate at k=" + std::to_string(k));
        s = std::move(n);
    }
}

RhoResult find_rho(const ThreeOperatorProblem& problem,
                   const std::function<double(const Vec&)>& h_value, double gamma, const Vec& z,
                   const Vec& x_b) {
    if (!(gamma > 0.0)) throw std::invalid_argument("find_rho: gamma must be positive");
    if (!h_value) throw std::invalid_argument("find_rho: h value callable required");
    const Vec grad = problem.c(x_b);
    const double h_b = h_value(x_b);
    for (double rho = 1.0; rho >= 1e-6; rho *= 0.5) {
        // x_b + ρ(x_b − z) − γρ∇h(x_b)
        Vec arg = axpy(x_b, rho, sub(x_b, z));
        add_scaled_inplace(arg, -gamma * rho, grad);
        Vec x_a = problem.a(gamma * rho, arg);
        const Vec d = sub(x_a, x_b);
        const double lhs = h_value(x_a);
        const double rhs = h_b + dot(d, grad) + norm2_sq(d) / (2.0 * gamma * rho);
        if (lhs <= rhs + 1e-12) return {rho, std::move(x_a)};
    }
    throw LineSearchError("find_rho: no rho in [1e-6, 1] satisfies the descent condition");
}

Vec apply_t_rho(const ThreeOperatorProblem& problem, double gamma, double rho, const Vec& z) {
    const Vec x_b = problem.b(gamma, z);
    Vec arg = axpy(x_b, rho, sub(x_b, z));
    add_scaled_inplace(arg, -gamma * rho, problem.c(x_b));
    const Vec x_a = problem.a(gamma * rho, arg);
    return add(z, sub(x_a, x_b));
}

SolveResult solve_linesearch(const ThreeOperatorProblem& problem, double gamma, const Vec& z0,
                             const SolveOptions& opts) {
    if (!problem.objective)
        throw std::invalid_argument("solve_linesearch: objective (with h) required");
    const auto h_value = problem.objective->h;

    SolveResult out;
    Vec z = z0;
    double fpr_min = kInf;
    int bad_streak = 0;
    const double t_start = now_seconds();
    for (int k = 0;; ++k) {
        SolverState s;
        s.k = k;
        s.z = z;
        s.gamma_k = gamma;
        s.x_b = problem.b(gamma, z);
        s.u_b = scale(1.0 / gamma, sub(z, s.x_b));
        RhoResult r = find_rho(problem, h_value, gamma, z, s.x_b);
        s.x_a = r.x_a;
        s.u_a = Vec(z.size(), 0.0);
        s.fpr_sq = norm2_sq(sub(s.x_a, s.x_b));

        TraceRecord rec;
        rec.k = k;
        rec.fpr_sq = s.fpr_sq;
        rec.gamma_k = gamma;
        rec.lambda_k = r.rho;  // accepted rho rides in the relaxation column
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

        // no convergence proof for this scheme; watch for sustained growth
        if (s.fpr_sq < fpr_min) {
            fpr_min = s.fpr_sq;
            bad_streak = 0;
        } else if (s.fpr_sq > 10.0 * fpr_min) {
            if (++bad_streak >= 100)
                throw DivergenceError("solve_linesearch: FPR stayed 10x above its running minimum");
        } else {
            bad_streak = 0;
        }

        add_scaled_inplace(z, 1.0, sub(s.x_a, s.x_b));
        if (!is_finite(z))
            throw DivergenceError("solve_linesearch: non-finite iterate at k=" + std::to_string(k));
    }
}

void ErgodicAccumulator::update(const Vec& x_b, const Vec& x_a, double lambda_k) {
    if (!(lambda_k > 0.0)) throw std::invalid_argument("ergodic_update: lambda must be positive");
    if (k_ < 0) {
        sum_x_b_ = zeros(x_b.size());
        sum_x_a_ = zeros(x_a.size());
        lambda_ref_ = lambda_k;
    } else if (mode_ == Mode::weighted && lambda_k != lambda_ref_) {
        throw std::invalid_argument("ergodic_update: weighted mode requires a constant lambda");
    }
    ++k_;
    const double w = mode_ == Mode::uniform ? lambda_k : static_cast<double>(k_ + 1);
    add_scaled_inplace(sum_x_b_, w, x_b);
    add_scaled_inplace(sum_x_a_, w, x_a);
    total_weight_ += w;
}

Vec ErgodicAccumulator::average_x_b() const {
    if (total_weight_ <= 0.0) throw std::logic_error("ErgodicAccumulator: no updates yet");
    return scale(1.0 / total_weight_, sum_x_b_);
}

Vec ErgodicAccumulator::average_x_a() const {
    if (total_weight_ <= 0.0) throw std::logic_error("ErgodicAccumulator: no updates yet");
    return scale(1.0 / total_weight_, sum_x_a_);
}

}  // namespace tos
