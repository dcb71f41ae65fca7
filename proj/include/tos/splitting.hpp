#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tos/operators.hpp"

namespace tos {

// Value callables for f, g, h when the inclusion comes from a minimization
// problem; used for trace objectives and rate diagnostics.
struct ObjectiveTriple {
    std::function<double(const Vec&)> f;
    std::function<double(const Vec&)> g;
    std::function<double(const Vec&)> h;
};

struct ThreeOperatorProblem {
    ProxOperator a;
    ProxOperator b;
    ForwardOperator c;
    std::size_t dim = 0;
    std::optional<ObjectiveTriple> objective;
    std::optional<Vec> reference_solution;

    // f evaluated at x_a, g and h at x_b; finite along iterates by construction.
    double objective_value(const Vec& x_a, const Vec& x_b) const {
        const auto& o = *objective;
        return o.f(x_a) + o.g(x_b) + o.h(x_b);
    }
};

// Stepsize/relaxation configuration for the relaxed fixed-point iteration:
// gamma < 2*beta*epsilon, alpha = 1/(2-epsilon), lambda_k in (0, 1/alpha),
// tau_k = lambda_k (1 - alpha lambda_k) / alpha.
struct RelaxationSchedule {
    double gamma = 0.0;
    double epsilon = 0.0;
    double alpha = 0.0;
    std::function<double(int)> lambdas;

    double lambda(int k) const { return lambdas ? lambdas(k) : 1.0; }
    double tau(int k) const {
        const double l = lambda(k);
        return l * (1.0 - alpha * l) / alpha;
    }
};

// Default parametrization: epsilon = min(1 - 1e-6, gamma/(2 beta) + 1e-6) so
// gamma < 2 beta epsilon whenever gamma < 2 beta; lambda_k constant.
RelaxationSchedule make_schedule(double gamma, double beta, double lambda = 1.0);
RelaxationSchedule make_schedule_eps(double gamma, double epsilon, double lambda = 1.0);

// midpoint of (0, 2 beta); the default stepsize when the caller has none
inline double default_gamma(double beta) { return beta; }

// One iteration's full point set.
struct SolverState {
    Vec z;
    Vec x_b, u_b;
    Vec x_a, u_a;
    int k = 0;
    double gamma_k = 0.0;
    double fpr_sq = 0.0;  // ‖Tz − z‖² = ‖x_a − x_b‖²

    Vec tz() const { return add(z, sub(x_a, x_b)); }
};

struct TraceRecord {
    int k = 0;
    double fpr_sq = 0.0;
    std::optional<double> objective;
    std::optional<double> dist_ref;  // ‖x_b − x*‖
    double gamma_k = 0.0;
    double lambda_k = 0.0;
    double elapsed_s = 0.0;
};

struct SolveResult {
    SolverState state;
    std::vector<TraceRecord> trace;
    std::vector<SolverState> states;  // filled only when record_states is set
    bool converged = false;
};

struct SolveOptions {
    int max_iter = 100000;
    double tol = 1e-10;  // on the FPR norm; stop when fpr_sq <= tol²
    bool record_states = false;
};

// Thrown when an iterate goes non-finite or a divergence monitor trips.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluate the splitting map at z: x_b = J_{γB}(z), u_b = (z − x_b)/γ,
// x_a = J_{γA}(2x_b − z − γ C x_b), u_a = (2x_b − z − γ C x_b − x_a)/γ,
// Tz = z + x_a − x_b.
SolverState apply_t(const ThreeOperatorProblem& problem, double gamma, const Vec& z);

// Relaxed fixed-point iteration z⁺ = z + λ_k (Tz − z); reported solution is
// x_b of the final state.
SolveResult solve_basic(const ThreeOperatorProblem& problem, const RelaxationSchedule& schedule,
                        const Vec& z0, const SolveOptions& opts = {});

// J_{γB}(z_star): maps an (approximate) fixed point to a solution.
Vec recover_solution(const ThreeOperatorProblem& problem, double gamma, const Vec& z_star);

enum class SpecialMode { fbs, drs, fdrs };

struct SpecializeSlots {
    std::optional<ProxOperator> a;
    std::optional<ProxOperator> b;        // drs only
    std::optional<ForwardOperator> c;     // fbs: C; fdrs: C′
    std::optional<ProxOperator> subspace; // fdrs: projector onto V
    std::size_t dim = 0;
};

// Builds the problem whose splitting map reproduces the named classical
// scheme (forward-backward, Douglas-Rachford, forward-Douglas-Rachford).
ThreeOperatorProblem specialize(SpecialMode mode, const SpecializeSlots& slots);

// ‖z−w‖² − (1−α)/α ‖(I−T)z − (I−T)w‖² − ‖Tz − Tw‖² with α = 2β/(4β−γ);
// nonnegative for γ ∈ (0, 2β).
double averaged_inequality_gap(const ThreeOperatorProblem& problem, double gamma, const Vec& z,
                               const Vec& w);

// Same gap with α̅ = 1/(2−ε̅) and the extra γ̅(2β − γ̅/ε̅)‖C x_b(z) − C x_b(w)‖²
// term; requires γ̅ < 2βε̅.
double strengthened_inequality_gap(const ThreeOperatorProblem& problem, double gamma_bar,
                                   double eps_bar, const Vec& z, const Vec& w);

}  // namespace tos
