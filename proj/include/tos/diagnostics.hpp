#pragma once

#include "tos/splitting.hpp"

namespace tos {

// Per-iteration certificate terms for the nonergodic rate machinery:
//   kappa1(λ,x)  = ‖z−x‖² − ‖z⁺−x‖² + (1 − 2/λ)‖z−z⁺‖² + 2γ<z−z⁺, C x_b>
//   kappa2(λ,x*) = same with x = z* and C x_b − C x*.
struct KappaRecord {
    int k = 0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double lambda_k = 0.0;
    double inner1 = 0.0;  // <z−z⁺, C x_b>
    double inner2 = 0.0;  // <z−z⁺, C x_b − C x*>
};

enum class KappaKind { k1, k2 };

// Evaluates the kappa terms along a recorded state sequence. x_or_xstar is
// the comparison point (kappa1) or the fixed point z* (kappa2); kappa2 also
// needs C evaluated at x* = J_{γB}(z*).
std::vector<KappaRecord> kappa_bounds(const ThreeOperatorProblem& problem,
                                      const std::vector<SolverState>& states, double gamma,
                                      const std::function<double(int)>& lambdas,
                                      const Vec& x_or_xstar, KappaKind which,
                                      const std::optional<Vec>& grad_at_xstar = std::nullopt);

// Least-squares slope of log(value) against log(k+1) over k in [k_min,k_max].
// Requires at least 10 positive points in range.
double rate_fit(const std::vector<std::pair<int, double>>& points, int k_min, int k_max);

struct ContractionParams {
    double gamma = 0.0;
    double lambda = 1.0;
    double mu_a = 0.0, mu_b = 0.0, mu_c = 0.0;
    double l_a = kInf, l_b = kInf;
    double beta = kInf;
    double epsilon = 0.0;
    double eta = 0.0;    // cases 5-6
    double alpha = 0.0;  // 1/(2-epsilon)
};

// Per-step contraction constant C(λ) with ‖z⁺−z*‖ ≤ (1 − C(λ))^{1/2}‖z−z*‖,
// clamped to [0,1]. Cases:
//   1: B Lipschitz + strongly monotone     2: A Lipschitz + strongly monotone
//   3: A strongly monotone, B Lipschitz    4: A Lipschitz, B strongly monotone
//   5: A Lipschitz, C strongly monotone    6: B Lipschitz, C strongly monotone
double contraction_factor(int contraction_case, const ContractionParams& params);

// Prefix minimum.
Vec running_min(const Vec& values);

// Two-dimensional rotating-subspace blocks whose splitting map has one
// eigenvalue pushed toward 1; truncation of the construction that defeats
// linear convergence even with mu_A, mu_C > 0.
struct RotatingSubspaceExample {
    double a = 0.0;
    Vec thetas;                // block angles in (0, π/2]
    std::size_t n_blocks = 0;
    std::vector<Mat> blocks;   // 2x2 matrix of the splitting map per block
    Vec eigenvalues;           // nonzero eigenvalue b_i of each block
    Vec z0;                    // eigenvector start, block i scaled to 1/(i+1)
    ThreeOperatorProblem problem;  // the assembled product-space problem (γ = 1)
};

// Build the example from explicit angles. f = ι_U + (a/2)‖·‖², g = ι_V,
// h = (1/2)‖·‖², γ = 1, λ ≡ 1; the per-block matrix is computed from the
// actual splitting map and its eigenvalues numerically.
RotatingSubspaceExample build_slow_example(double a, const Vec& thetas);

// Choose angles so that block eigenvalues follow a ladder b_i -> 1 that keeps
// ‖z^k‖ >= e⁻¹ F(k) − tail(N) for k <= k_max, with F(k) = 1/ln(k+2).
RotatingSubspaceExample build_slow_example_for_horizon(double a, std::size_t n_blocks,
                                                       int k_max);

inline double slow_example_floor(int k) { return std::exp(-1.0) / std::log(static_cast<double>(k) + 2.0); }

// sqrt(Σ_{i >= n_blocks} 1/(i+1)²), the mass removed by truncation
double slow_example_tail(std::size_t n_blocks);

// Convergence monitors evaluated along a recorded run.
struct MonitorReport {
    double max_fpr_increase = 0.0;       // max over k of fpr²(k+1) − fpr²(k)
    double max_dist_increase = 0.0;      // max over k of ‖z⁺−z*‖ − ‖z−z*‖
    double max_rate_violation = 0.0;     // max over k of fpr²(k) − ‖z⁰−z*‖²/(τ̲(k+1))
    double grad_gap_at_tol = kInf;       // ‖C x_b − C x*‖ at the first k with fpr ≤ 1e-8
};
MonitorReport check_monitors(const ThreeOperatorProblem& problem,
                             const std::vector<SolverState>& states,
                             const RelaxationSchedule& schedule, const Vec& z_star);

}  // namespace tos
