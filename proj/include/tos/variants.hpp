#pragma once

#include "tos/splitting.hpp"

namespace tos {

// Varying-stepsize acceleration. The cocoercive branch needs
// gamma0 in (0, 2*beta*(1-eta)); the lipschitz branch needs mu_B > 0 and
// gamma0 in (0, 2*mu_B/L_C²).
struct AccelConfig {
    double gamma0 = 0.0;
    double eta = 0.5;  // cocoercive branch only
    enum class Branch { cocoercive, lipschitz } branch = Branch::cocoercive;
};

// gamma_{k+1} = (−2γ²μ_Cη + sqrt((2γ²μ_Cη)² + 4(1+2γμ_B)γ²)) / (2(1+2γμ_B));
// satisfies (1+2γ_kμ_B)/γ_k² = (1−2γ_{k+1}μ_Cη)/γ_{k+1}².
double next_stepsize_cocoercive(double gamma_k, double mu_b, double mu_c, double eta);

// gamma_{k+1} = γ_k / sqrt(1 + 2γ_k(μ_B − γ_k L_C²/2)).
double next_stepsize_lipschitz(double gamma_k, double mu_b, double l_c);

struct AccelState {
    Vec x_b, u_b, x_a;
    double gamma = 0.0;  // stepsize used for the x_a step of this iteration
    double gamma_prev = 0.0;  // stepsize used for the x_b/u_b step
    int k = 0;
    double fpr_sq = 0.0;  // ‖x_a − x_b‖²
};

struct AccelResult {
    AccelState state;
    std::vector<TraceRecord> trace;
    std::vector<AccelState> states;
    bool converged = false;
};

struct AccelOptions {
    int max_iter = 100000;
    double tol = 1e-10;
    bool record_states = false;
};

// Accelerated iteration in (x_b, u_b, x_a) variables; the stepsize advances
// mid-iteration, right after J_{γB}. With constant gamma it reproduces
// solve_basic (λ ≡ 1) under z^k = x_a^{k−1} + γ u_b^{k−1}.
AccelResult solve_accelerated(const ThreeOperatorProblem& problem, const AccelConfig& config,
                              const Vec& x_a0, const AccelOptions& opts = {});

struct LineSearchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Backtracks rho over {1, 1/2, 1/4, ...} down to 1e-6: accepts the first rho
// with h(x_a) <= h(x_b) + <x_a − x_b, ∇h(x_b)> + ‖x_a − x_b‖²/(2γρ) + 1e-12,
// where x_a = J_{γρA}(x_b + ρ(x_b − z) − γρ∇h(x_b)).
struct RhoResult {
    double rho;
    Vec x_a;
};
RhoResult find_rho(const ThreeOperatorProblem& problem,
                   const std::function<double(const Vec&)>& h_value, double gamma, const Vec& z,
                   const Vec& x_b);

// One application of the rho-relaxed map at a fixed rho (no backtracking).
Vec apply_t_rho(const ThreeOperatorProblem& problem, double gamma, double rho, const Vec& z);

// Line-search iteration z⁺ = z + x_a − x_b with backtracked rho; requires the
// problem's objective h. Guarded by a divergence monitor (abort when the FPR
// stays 10x above its running minimum for 100 consecutive steps).
SolveResult solve_linesearch(const ThreeOperatorProblem& problem, double gamma, const Vec& z0,
                             const SolveOptions& opts = {});

// Running averages of x_b and x_a. Uniform mode weights iterate i by
// lambda_i; weighted mode uses the triangular weights 2(i+1)/((k+1)(k+2))
// and requires a constant lambda.
class ErgodicAccumulator {
  public:
    enum class Mode { uniform, weighted };

    explicit ErgodicAccumulator(Mode mode) : mode_(mode) {}

    void update(const SolverState& state, double lambda_k) { update(state.x_b, state.x_a, lambda_k); }
    void update(const Vec& x_b, const Vec& x_a, double lambda_k);

    Vec average_x_b() const;
    Vec average_x_a() const;
    int count() const { return k_; }
    double total_weight() const { return total_weight_; }
    Mode mode() const { return mode_; }

  private:
    Mode mode_;
    Vec sum_x_b_, sum_x_a_;
    double total_weight_ = 0.0;
    double lambda_ref_ = 0.0;
    int k_ = -1;  // index of the last absorbed iterate
};

}  // namespace tos
