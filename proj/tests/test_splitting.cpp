#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"
#include "tos/splitting.hpp"

using namespace tos;
using namespace tos::testsup;

namespace {

// 1-d model: f = 0, g = h = (1/2)x²  =>  Tz = 0 for gamma = 1
ThreeOperatorProblem one_d_model() {
    ThreeOperatorProblem p;
    p.dim = 1;
    p.a = identity_prox();
    p.b = make_quadratic_prox(identity(1), zeros(1), 1.0, 1.0);
    p.c = make_quadratic_gradient(identity(1), zeros(1));
    p.objective = ObjectiveTriple{[](const Vec&) { return 0.0; },
                                  [](const Vec& x) { return 0.5 * x[0] * x[0]; },
                                  [](const Vec& x) { return 0.5 * x[0] * x[0]; }};
    return p;
}

ThreeOperatorProblem zero_problem(std::size_t dim) {
    ThreeOperatorProblem p;
    p.dim = dim;
    p.a = identity_prox();
    p.b = identity_prox();
    p.c = zero_forward();
    return p;
}

}  // namespace

TEST_CASE("apply_t: zero operators give the identity map") {
    ThreeOperatorProblem p = zero_problem(3);
    Vec z{1.0, -2.0, 0.5};
    SolverState s = apply_t(p, 0.7, z);
    CHECK(dist2(s.tz(), z) == 0.0);
    CHECK(s.fpr_sq == 0.0);
}

TEST_CASE("apply_t on the 1-d model") {
    ThreeOperatorProblem p = one_d_model();
    SolverState s = apply_t(p, 1.0, {4.0});
    CHECK(s.x_b[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s.x_a[0] == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(s.tz()[0] == doctest::Approx(0.0).epsilon(1e-14));
    // Lemma identities
    CHECK(s.u_b[0] == doctest::Approx((s.z[0] - s.x_b[0]) / 1.0).epsilon(1e-14));
    CHECK(s.tz()[0] == doctest::Approx(s.x_a[0] + 1.0 * s.u_b[0]).epsilon(1e-12));
}

TEST_CASE("apply_t: FBS-style example with a cone") {
    ThreeOperatorProblem p;
    p.dim = 1;
    p.a = project_box({0.0}, {kInf});
    p.b = identity_prox();
    p.c = make_quadratic_gradient(identity(1), {-1.0});  // ∇(1/2)(x−1)²
    for (double z : {-3.0, 0.0, 2.5}) {
        SolverState s = apply_t(p, 1.0, {z});
        CHECK(s.tz()[0] == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("solve_basic on the 1-d model converges in one step") {
    ThreeOperatorProblem p = one_d_model();
    RelaxationSchedule sched = make_schedule(1.0, p.c.beta, 1.0);
    SolveResult r = solve_basic(p, sched, {4.0}, {});
    CHECK(r.converged);
    CHECK(r.trace.size() == 2);
    CHECK(r.trace[1].k == 1);
    CHECK(r.state.fpr_sq == doctest::Approx(0.0));
    CHECK(r.state.z[0] == doctest::Approx(0.0));
}

TEST_CASE("solve_basic with zero operators stops immediately") {
    ThreeOperatorProblem p = zero_problem(2);
    RelaxationSchedule sched = make_schedule_eps(1.0, 0.5, 1.0);
    SolveResult r = solve_basic(p, sched, {1.0, 2.0}, {});
    CHECK(r.converged);
    CHECK(r.trace.size() == 1);
    CHECK(r.state.z[0] == 1.0);
}

TEST_CASE("solve_basic rejects an invalid schedule") {
    ThreeOperatorProblem p = one_d_model();  // beta = 1
    RelaxationSchedule bad = make_schedule_eps(2.5, 0.9, 1.0);  // gamma >= 2*beta*eps
    CHECK_THROWS_AS(solve_basic(p, bad, {1.0}, {}), std::invalid_argument);
}

TEST_CASE("solve_basic solves seeded quadratic triples to the KKT point") {
    CounterRng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        QuadTriple t = random_quad_triple(rng, 10);
        ThreeOperatorProblem p = make_problem(t);
        Vec x_star = kkt_solution(t);
        RelaxationSchedule sched = make_schedule(p.c.beta, p.c.beta, 1.0);
        SolveOptions opts;
        opts.tol = 1e-12;
        SolveResult r = solve_basic(p, sched, rng.uniform_vec(10, -1.0, 1.0), opts);
        CHECK(r.converged);
        CHECK(dist2(r.state.x_b, x_star) <= 1e-8);
        CHECK(dist2(recover_solution(p, sched.gamma, r.state.z), x_star) <= 1e-8);
    }
}

TEST_CASE("recover_solution is J_B") {
    ThreeOperatorProblem p = one_d_model();
    CHECK(recover_solution(p, 1.0, {0.0})[0] == doctest::Approx(0.0));
    ThreeOperatorProblem q = zero_problem(2);
    Vec z{3.0, -1.0};
    CHECK(dist2(recover_solution(q, 1.0, z), z) == 0.0);
}

TEST_CASE("fixed-point encoding round trip on the quadratic corpus") {
    CounterRng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        QuadTriple t = random_quad_triple(rng, 8);
        ThreeOperatorProblem p = make_problem(t);
        const double gamma = 0.8 * p.c.beta;
        Vec x_star = kkt_solution(t);
        Vec z_star = fixed_point(t, gamma, x_star);
        SolverState s = apply_t(p, gamma, z_star);
        CHECK(dist2(s.tz(), z_star) <= 1e-10);
    }
}

TEST_CASE("specialize: drs on the 1-d model gives Tz = z/2") {
    SpecializeSlots slots;
    slots.dim = 1;
    slots.a = identity_prox();  // f = 0
    slots.b = make_quadratic_prox(identity(1), zeros(1), 1.0, 1.0);
    ThreeOperatorProblem p = specialize(SpecialMode::drs, slots);
    SolverState s = apply_t(p, 1.0, {3.0});
    CHECK(s.tz()[0] == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("specialize: fbs reproduces the cone example") {
    SpecializeSlots slots;
    slots.dim = 1;
    slots.a = project_box({0.0}, {kInf});
    slots.c = make_quadratic_gradient(identity(1), {-1.0});
    ThreeOperatorProblem p = specialize(SpecialMode::fbs, slots);
    SolverState s = apply_t(p, 1.0, {-7.0});
    CHECK(s.tz()[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("specialize: fbs matches an independently coded FBS reference") {
    CounterRng rng(21);
    Mat pf = random_spd(rng, 6);
    SvdResult sf = svd(pf);
    SpecializeSlots slots;
    slots.dim = 6;
    slots.a = make_quadratic_prox(pf, rng.uniform_vec(6, -1.0, 1.0), sf.s.back(), sf.s.front());
    Mat ph = random_spd(rng, 6);
    slots.c = make_quadratic_gradient(ph, rng.uniform_vec(6, -1.0, 1.0));
    ThreeOperatorProblem p = specialize(SpecialMode::fbs, slots);

    const double gamma = 0.9 * p.c.beta;
    Vec z0 = rng.uniform_vec(6, -1.0, 1.0);
    auto ref = fbs_reference(*slots.a, *slots.c, gamma, z0, 50);
    Vec z = z0;
    for (int k = 0; k < 50; ++k) {
        z = apply_t(p, gamma, z).tz();
        CHECK(dist2(z, ref[k + 1]) <= 1e-12);
    }
}

TEST_CASE("specialize: drs matches an independently coded DRS reference") {
    CounterRng rng(22);
    SpecializeSlots slots;
    slots.dim = 4;
    slots.a = prox_l1(0.5);
    Mat pg = random_spd(rng, 4);
    SvdResult sg = svd(pg);
    slots.b = make_quadratic_prox(pg, rng.uniform_vec(4, -1.0, 1.0), sg.s.back(), sg.s.front());
    ThreeOperatorProblem p = specialize(SpecialMode::drs, slots);

    Vec z0 = rng.uniform_vec(4, -1.0, 1.0);
    auto ref = drs_reference(*slots.a, *slots.b, 0.7, z0, 50);
    Vec z = z0;
    for (int k = 0; k < 50; ++k) {
        z = apply_t(p, 0.7, z).tz();
        CHECK(dist2(z, ref[k + 1]) <= 1e-12);
    }
}

TEST_CASE("specialize: fdrs over the whole space equals fbs") {
    CounterRng rng(23);
    Mat pf = random_spd(rng, 5);
    SvdResult sf = svd(pf);
    SpecializeSlots slots;
    slots.dim = 5;
    slots.a = make_quadratic_prox(pf, rng.uniform_vec(5, -1.0, 1.0), sf.s.back(), sf.s.front());
    Mat ph = random_spd(rng, 5);
    slots.c = make_quadratic_gradient(ph, rng.uniform_vec(5, -1.0, 1.0));
    slots.subspace = project_linear_subspace(identity(5));
    ThreeOperatorProblem fdrs = specialize(SpecialMode::fdrs, slots);
    ThreeOperatorProblem fbs = specialize(SpecialMode::fbs, slots);

    const double gamma = 0.9 * fbs.c.beta;
    Vec zf = rng.uniform_vec(5, -1.0, 1.0);
    Vec zb = zf;
    for (int k = 0; k < 40; ++k) {
        zf = apply_t(fdrs, gamma, zf).tz();
        zb = apply_t(fbs, gamma, zb).tz();
        CHECK(dist2(zf, zb) <= 1e-13);
    }
}

TEST_CASE("averaged inequality gap: trivial and 1-d values") {
    ThreeOperatorProblem p = one_d_model();
    CHECK(averaged_inequality_gap(p, 1.0, {2.0}, {2.0}) == doctest::Approx(0.0));
    // alpha = 2/3: 4 − (1/2)·4 − 0 = 2
    CHECK(averaged_inequality_gap(p, 1.0, {2.0}, {0.0}) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("averaged inequality gap is nonnegative on 500 sampled pairs") {
    CounterRng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        QuadTriple t = random_quad_triple(rng, 6);
        ThreeOperatorProblem p = make_problem(t);
        const double gamma = rng.uniform(0.1, 1.9) * p.c.beta;
        for (int i = 0; i < 50; ++i) {
            Vec z = rng.uniform_vec(6, -3.0, 3.0);
            Vec w = rng.uniform_vec(6, -3.0, 3.0);
            CHECK(averaged_inequality_gap(p, gamma, z, w) >= -1e-10);
        }
    }
}

TEST_CASE("strengthened inequality gap is nonnegative on sampled pairs") {
    CounterRng rng(405);
    for (int trial = 0; trial < 10; ++trial) {
        QuadTriple t = random_quad_triple(rng, 5);
        ThreeOperatorProblem p = make_problem(t);
        const double eps_bar = rng.uniform(0.3, 0.99);
        const double gamma_bar = rng.uniform(0.1, 0.95) * 2.0 * p.c.beta * eps_bar;
        for (int i = 0; i < 50; ++i) {
            Vec z = rng.uniform_vec(5, -3.0, 3.0);
            Vec w = rng.uniform_vec(5, -3.0, 3.0);
            CHECK(strengthened_inequality_gap(p, gamma_bar, eps_bar, z, w) >= -1e-10);
        }
    }
}

TEST_CASE("FPR and distance monotonicity along corpus runs") {
    CounterRng rng(500);
    for (int trial = 0; trial < 5; ++trial) {
        QuadTriple t = random_quad_triple(rng, 8);
        ThreeOperatorProblem p = make_problem(t);
        const double gamma = p.c.beta;
        RelaxationSchedule sched = make_schedule(gamma, p.c.beta, 1.0);
        Vec x_star = kkt_solution(t);
        Vec z_star = fixed_point(t, gamma, x_star);
        SolveOptions opts;
        opts.record_states = true;
        opts.tol = 1e-13;
        SolveResult r = solve_basic(p, sched, rng.uniform_vec(8, -2.0, 2.0), opts);
        double prev_fpr = kInf, prev_dist = kInf;
        double tau_min = kInf;
        const double d0_sq = norm2_sq(sub(r.states.front().z, z_star));
        for (std::size_t k = 0; k < r.states.size(); ++k) {
            tau_min = std::min(tau_min, sched.tau(static_cast<int>(k)));
            const double fpr = r.states[k].fpr_sq;
            const double dist = norm2(sub(r.states[k].z, z_star));
            CHECK(fpr <= prev_fpr + 1e-12);
            CHECK(dist <= prev_dist + 1e-12);
            CHECK(fpr <= d0_sq / (tau_min * (static_cast<double>(k) + 1.0)) + 1e-12);
            prev_fpr = fpr;
            prev_dist = dist;
        }
        // gradient consequence: once FPR <= 1e-8 the forward images agree
        const Vec cx_star = p.c(p.b(gamma, z_star));
        for (const auto& s : r.states) {
            if (s.fpr_sq <= 1e-16) {
                CHECK(norm2(sub(p.c(s.x_b), cx_star)) <= 1e-6);
                break;
            }
        }
    }
}

TEST_CASE("varying relaxation sequences are honored per iteration") {
    CounterRng rng(502);
    QuadTriple t = random_quad_triple(rng, 6);
    ThreeOperatorProblem p = make_problem(t);
    RelaxationSchedule sched = make_schedule(p.c.beta, p.c.beta);
    sched.lambdas = [](int k) { return k % 2 == 0 ? 0.6 : 1.2; };  // inside (0, 1/alpha)
    Vec x_star = kkt_solution(t);
    Vec z_star = fixed_point(t, sched.gamma, x_star);
    SolveOptions opts;
    opts.record_states = true;
    opts.tol = 1e-12;
    SolveResult r = solve_basic(p, sched, rng.uniform_vec(6, -2.0, 2.0), opts);
    CHECK(r.converged);
    CHECK(dist2(r.state.x_b, x_star) <= 1e-8);
    for (std::size_t k = 0; k + 1 < r.trace.size(); ++k) {
        CHECK(r.trace[k].lambda_k == (k % 2 == 0 ? 0.6 : 1.2));
        // z⁺ = z + λ_k (x_a − x_b)
        Vec expect = axpy(r.states[k].z, r.trace[k].lambda_k,
                          sub(r.states[k].x_a, r.states[k].x_b));
        CHECK(dist2(r.states[k + 1].z, expect) <= 1e-14);
    }
    // distance monotonicity also holds under the varying sequence
    double prev = kInf;
    for (const auto& s : r.states) {
        const double d = norm2(sub(s.z, z_star));
        CHECK(d <= prev + 1e-12);
        prev = d;
    }

    RelaxationSchedule bad = sched;
    bad.lambdas = [](int) { return 1.9; };  // above 1/alpha for the default epsilon
    CHECK_THROWS_AS(solve_basic(p, bad, rng.uniform_vec(6, -1.0, 1.0), opts),
                    std::invalid_argument);
}

TEST_CASE("SolverState invariants from the identity lemma") {
    CounterRng rng(501);
    QuadTriple t = random_quad_triple(rng, 6);
    ThreeOperatorProblem p = make_problem(t);
    for (int i = 0; i < 20; ++i) {
        const double gamma = rng.uniform(0.1, 1.5) * p.c.beta;
        Vec z = rng.uniform_vec(6, -2.0, 2.0);
        SolverState s = apply_t(p, gamma, z);
        CHECK(dist2(s.u_b, scale(1.0 / gamma, sub(s.z, s.x_b))) <= 1e-12);
        CHECK(dist2(sub(s.tz(), s.z), sub(s.x_a, s.x_b)) <= 1e-12);
        // Tz = x_a + γ u_b
        CHECK(dist2(s.tz(), axpy(s.x_a, gamma, s.u_b)) <= 1e-12);
    }
}
