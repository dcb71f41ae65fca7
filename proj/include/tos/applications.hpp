#pragma once

#include "tos/variants.hpp"

namespace tos {

struct AppResult {
    Vec x;
    std::vector<TraceRecord> trace;
    bool converged = false;
    double final_distance = 0.0;  // split feasibility: d(Lx, C3) at the solution
};

struct AppControls {
    double gamma = 0.0;  // 0 = pick the default for the instance
    std::function<double(int)> lambdas;  // empty = λ ≡ 1
    int max_iter = 100000;
    double tol = 1e-10;
    bool record_states = false;
};

// find x ∈ C1 ∩ C2 with Lx ∈ C3, via A = N_{C1}, B = N_{C2},
// C = Lᵀ(L· − P_{C3}(L·)); gamma ∈ (0, 2/‖L‖²).
AppResult solve_split_feasibility(const ProxOperator& c1, const ProxOperator& c2,
                                  const ProxOperator& c3, const Mat& l, const Vec& z0,
                                  const AppControls& ctl = {});

// min f(x) + g(x) + h(Lx): A = ∂f, B = ∂g, C = Lᵀ∇h(L·).
AppResult solve_three_objective(const ProxOperator& prox_f, const ProxOperator& prox_g,
                                const Mat& l, const ForwardOperator& grad_h, const Vec& z0,
                                const AppControls& ctl = {},
                                std::optional<ObjectiveTriple> objective = std::nullopt);

// min Σ r_i(x) + h(Lx) on the m-fold product space with a consensus block;
// gamma ∈ (0, 2m/(‖L‖²/β_h)). z0s holds the m per-block start vectors.
AppResult solve_multi_reg(const std::vector<ProxOperator>& regs, const Mat& l,
                          const ForwardOperator& grad_h, const std::vector<Vec>& z0s,
                          const AppControls& ctl = {});

// The product-space problem behind solve_multi_reg: B averages the blocks,
// A applies prox_{γ r_i} per block, C places (1/m) Lᵀ∇h(Lx̄) in every block.
ThreeOperatorProblem make_multi_reg_problem(const std::vector<ProxOperator>& regs, const Mat& l,
                                            const ForwardOperator& grad_h, std::size_t dim);

struct MatrixCompletionResult {
    Mat x;
    std::vector<TraceRecord> trace;
    Vec rmse;  // per-iteration RMSE over the observed entries
    bool converged = false;
};

// min (1/2)‖mask∘(X − X0)‖² + mu‖X‖_* s.t. l <= X <= u. The mask holds 1 on
// observed entries; x0 carries the observed data (anything elsewhere).
MatrixCompletionResult solve_matrix_completion(const Mat& x0, const Mat& mask, double mu,
                                               double l_bound, double u_bound, const Vec& z0,
                                               const AppControls& ctl = {});

// min (1/2)<Qx,x> + <c,x> over C1 ∩ C2: A = N_{C2}, B = N_{C1}, C = Qx + c.
// precondition_flag replaces Q by P_{C2} Q P_{C2}; valid only when C2's
// projection is linear.
struct QpSpec {
    Mat q;
    Vec c;
    ProxOperator c1;
    ProxOperator c2;
    bool precondition_flag = false;
};
AppResult solve_constrained_qp(const QpSpec& spec, const Vec& z0, const AppControls& ctl = {});

// Primal-dual iterations on the inclusion, with dual variable y paired to A.
//   fbs_pd:          x⁺ = J_{τB}(x − τCx − τy); y⁺ = J_{σA⁻¹}(y + σ(2x⁺ − x))
//   equivalent_form: σ = 1/γ and the y-step argument gains Cx⁺ − Cx
struct PrimalDualResult {
    Vec x, y;
    std::vector<TraceRecord> trace;
    std::vector<Vec> x_history;
    bool converged = false;
};
enum class PrimalDualVariant { fbs_pd, equivalent_form };
PrimalDualResult solve_primal_dual(const ThreeOperatorProblem& problem, double tau, double sigma,
                                   const Vec& x0, const Vec& y0, PrimalDualVariant variant,
                                   int max_iter, double tol, bool zero_correction = false);

}  // namespace tos
