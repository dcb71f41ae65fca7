#pragma once

#include <functional>
#include <limits>
#include <string>

#include "tos/mat.hpp"
#include "tos/vec.hpp"

namespace tos {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A maximal monotone operator represented by its resolvent (gamma, z) -> x,
// plus the regularity constants the stepsize and rate theory consumes.
// Unknown constants encode as mu = 0 and lipschitz = inf. Resolvent callables
// must be pure; operators are immutable after construction.
struct ProxOperator {
    std::function<Vec(double, const Vec&)> resolvent;
    double mu = 0.0;           // strong-monotonicity modulus
    double lipschitz = kInf;   // Lipschitz constant of the operator itself
    std::string label;
    bool linear_projection = false;  // resolvent is a gamma-independent linear projection

    Vec operator()(double gamma, const Vec& z) const { return resolvent(gamma, z); }
};

// A cocoercive single-valued operator represented by its forward map.
struct ForwardOperator {
    std::function<Vec(const Vec&)> forward;
    double beta = kInf;  // cocoercivity modulus
    double mu_c = 0.0;
    double l_c = kInf;
    std::string label;

    Vec operator()(const Vec& x) const { return forward(x); }
};

ProxOperator identity_prox();
ForwardOperator zero_forward();

// Resolvent of the gradient of (1/2)xᵀPx + cᵀx; solves (I + γP)x = z − γc.
// P symmetric PSD (zero allowed); mu/lipschitz are caller-supplied λ_min/λ_max.
ProxOperator make_quadratic_prox(const Mat& p, const Vec& c, double mu, double lipschitz);

// The matching forward operator x ↦ Px + c with beta = 1/λ_max(P).
ForwardOperator make_quadratic_gradient(const Mat& p, const Vec& c);

ProxOperator project_box(const Vec& l, const Vec& u);
ProxOperator project_simplex();
ProxOperator project_halfspace(const Vec& m, double r);
// Projection onto the hyperplane <m, x> = 0 (always projects; linear).
ProxOperator project_hyperplane(const Vec& m);
// Projection given an explicit orthogonal-projector matrix (P² = P = Pᵀ).
ProxOperator project_linear_subspace(const Mat& p);
ProxOperator prox_l1(double weight);
// Singular value soft-thresholding on a flattened rows×cols matrix.
ProxOperator prox_nuclear(double weight, std::size_t rows, std::size_t cols);

// x ↦ Lᵀ(Lx − P_{C3}(Lx)), the gradient of half the squared distance of Lx
// to C3; beta = 1/‖L‖².
ForwardOperator grad_feasibility(const Mat& l, const ProxOperator& project_c3);

// x ↦ Lᵀ ∇h(Lx) with beta = beta_h/‖L‖².
ForwardOperator compose_gradient(const Mat& l, const ForwardOperator& grad_h);

}  // namespace tos
