#include "runner.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>

#include "tos/admm.hpp"
#include "tos/applications.hpp"
#include "tos/diagnostics.hpp"
#include "tos/rng.hpp"
#include "tos/variants.hpp"

namespace tos::runner {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw ConfigError(field + ": " + msg);
}

const json& need(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing required field");
    return *it;
}

double need_num(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number()) fail(path + "." + key, "must be a number");
    return v.get<double>();
}

double opt_num(const json& j, const char* key, double def) {
    auto it = j.find(key);
    return it == j.end() ? def : it->get<double>();
}

std::string opt_str(const json& j, const char* key, const std::string& def) {
    auto it = j.find(key);
    return it == j.end() ? def : it->get<std::string>();
}

Vec parse_vec(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "must be an array of numbers");
    Vec v;
    v.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_number()) fail(path, "must be an array of numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

Vec parse_vec_or_const(const json& j, std::size_t dim, const std::string& path) {
    if (j.is_number()) return constant(dim, j.get<double>());
    Vec v = parse_vec(j, path);
    if (v.size() != dim) fail(path, "expected " + std::to_string(dim) + " entries");
    return v;
}

Mat parse_mat(const json& j, CounterRng& rng, const std::string& path) {
    if (j.is_object() && j.contains("identity")) return identity(j["identity"].get<std::size_t>());
    if (j.is_object() && j.contains("diag")) return diag(parse_vec(j["diag"], path + ".diag"));
    if (j.is_object() && j.contains("random")) {
        const auto& r = j["random"];
        const std::size_t rows = r.at("rows").get<std::size_t>();
        const std::size_t cols = r.at("cols").get<std::size_t>();
        const double s = r.value("scale", 1.0);
        Mat m(rows, cols);
        for (auto& e : m.data) e = rng.uniform(-s, s);
        return m;
    }
    if (j.is_object() && j.contains("random_spd")) {
        const auto& r = j["random_spd"];
        const std::size_t n = r.at("dim").get<std::size_t>();
        const double shift = r.value("shift", 0.5);
        Mat g(n, n);
        for (auto& e : g.data) e = rng.uniform(-1.0, 1.0);
        Mat m = matmul(transpose(g), g);
        for (auto& e : m.data) e /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) += shift;
        return m;
    }
    if (j.is_array()) {  // row-major nested arrays
        const std::size_t rows = j.size();
        if (rows == 0) fail(path, "empty matrix");
        const std::size_t cols = j[0].size();
        Mat m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            if (j[i].size() != cols) fail(path, "ragged rows");
            for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
        }
        return m;
    }
    fail(path, "unrecognized matrix spec");
}

struct QuadFn {
    Mat p;
    Vec c;
    double value(const Vec& x) const { return 0.5 * dot(x, matvec(p, x)) + dot(c, x); }
};

QuadFn parse_quadratic(const json& j, std::size_t dim, CounterRng& rng, const std::string& path) {
    QuadFn q;
    if (j.contains("p"))
        q.p = parse_mat(j["p"], rng, path + ".p");
    else
        q.p = identity(dim);
    q.c = j.contains("c") ? parse_vec_or_const(j["c"], q.p.rows, path + ".c") : zeros(q.p.rows);
    if (q.p.rows != dim) fail(path, "dimension mismatch with problem");
    return q;
}

struct OpSpec {
    ProxOperator op;
    std::function<double(const Vec&)> value;  // for objectives, when meaningful
};

OpSpec parse_prox(const json& j, std::size_t dim, CounterRng& rng, const std::string& path) {
    OpSpec out;
    const std::string type = need(j, "type", path).get<std::string>();
    if (type == "zero") {
        out.op = identity_prox();
        out.value = [](const Vec&) { return 0.0; };
    } else if (type == "l1") {
        const double w = need_num(j, "weight", path);
        if (!(w > 0.0)) fail(path + ".weight", "must be positive");
        out.op = prox_l1(w);
        out.value = [w](const Vec& x) {
            double s = 0.0;
            for (double v : x) s += std::abs(v);
            return w * s;
        };
    } else if (type == "box") {
        Vec lo = parse_vec_or_const(need(j, "lower", path), dim, path + ".lower");
        Vec hi = parse_vec_or_const(need(j, "upper", path), dim, path + ".upper");
        out.op = project_box(lo, hi);
        out.value = [](const Vec&) { return 0.0; };
    } else if (type == "simplex") {
        out.op = project_simplex();
        out.value = [](const Vec&) { return 0.0; };
    } else if (type == "halfspace") {
        Vec n = parse_vec(need(j, "normal", path), path + ".normal");
        out.op = project_halfspace(n, need_num(j, "offset", path));
        out.value = [](const Vec&) { return 0.0; };
    } else if (type == "hyperplane") {
        Vec n = parse_vec(need(j, "normal", path), path + ".normal");
        out.op = project_hyperplane(n);
        out.value = [](const Vec&) { return 0.0; };
    } else if (type == "quadratic") {
        QuadFn q = parse_quadratic(j, dim, rng, path);
        SvdResult s = svd(q.p);
        out.op = make_quadratic_prox(q.p, q.c, s.s.back(), s.s.front());
        auto qq = std::make_shared<QuadFn>(q);
        out.value = [qq](const Vec& x) { return qq->value(x); };
    } else {
        fail(path + ".type", "unknown operator type '" + type + "'");
    }
    return out;
}

struct BuiltProblem {
    enum class Family { splitting, admm, matrix_completion } family = Family::splitting;
    ThreeOperatorProblem problem;  // splitting family
    Vec z0;
    double gamma_hint = 0.0;   // instance-specific default stepsize bound info
    double gamma_cap = kInf;   // instance-level upper bound (2/‖L‖² style); 0 = none
    // admm family
    AdmmProblem admm;
    Vec w0, xm0;
    // matrix completion
    Mat mc_x0, mc_mask;
    double mc_mu = 0.0, mc_lo = 0.0, mc_hi = 0.0;
};

Vec parse_start(const json& params, const char* key, std::size_t dim, CounterRng& rng,
                const std::string& path) {
    if (!params.contains(key)) return rng.uniform_vec(dim, -1.0, 1.0);
    const json& j = params[key];
    if (j.is_number_integer() && j.get<long>() == 0) return zeros(dim);
    return parse_vec_or_const(j, dim, path);
}

BuiltProblem build_problem(const json& config, CounterRng& rng) {
    const json& prob = need(config, "problem", "");
    const std::string kind = need(prob, "kind", "problem").get<std::string>();
    const json params = prob.value("params", json::object());
    BuiltProblem out;

    if (kind == "three_objective") {
        const std::size_t dim = need(params, "dim", "problem.params").get<std::size_t>();
        OpSpec f = parse_prox(need(params, "f", "problem.params"), dim, rng, "problem.params.f");
        OpSpec g = parse_prox(need(params, "g", "problem.params"), dim, rng, "problem.params.g");
        Mat l = params.contains("l") ? parse_mat(params["l"], rng, "problem.params.l") : identity(dim);
        QuadFn h = parse_quadratic(need(params, "h", "problem.params"), l.rows, rng, "problem.params.h");
        ForwardOperator grad_h = make_quadratic_gradient(h.p, h.c);
        out.problem.dim = dim;
        out.problem.a = f.op;
        out.problem.b = g.op;
        out.problem.c = compose_gradient(l, grad_h);
        auto hq = std::make_shared<QuadFn>(h);
        auto lm = std::make_shared<Mat>(l);
        out.problem.objective = ObjectiveTriple{
            f.value, g.value, [hq, lm](const Vec& x) { return hq->value(matvec(*lm, x)); }};
        out.z0 = parse_start(params, "z0", dim, rng, "problem.params.z0");
    } else if (kind == "split_feasibility") {
        const std::size_t dim = need(params, "dim", "problem.params").get<std::size_t>();
        Mat l = params.contains("l") ? parse_mat(params["l"], rng, "problem.params.l") : identity(dim);
        OpSpec c1 = parse_prox(need(params, "c1", "problem.params"), dim, rng, "problem.params.c1");
        OpSpec c2 = parse_prox(need(params, "c2", "problem.params"), dim, rng, "problem.params.c2");
        OpSpec c3 = parse_prox(need(params, "c3", "problem.params"), l.rows, rng, "problem.params.c3");
        out.problem.dim = dim;
        out.problem.a = c1.op;
        out.problem.b = c2.op;
        out.problem.c = grad_feasibility(l, c3.op);
        out.z0 = parse_start(params, "z0", dim, rng, "problem.params.z0");
    } else if (kind == "multi_reg") {
        const std::size_t dim = need(params, "dim", "problem.params").get<std::size_t>();
        const json& regs = need(params, "regs", "problem.params");
        if (!regs.is_array() || regs.empty()) fail("problem.params.regs", "must be a nonempty array");
        Mat l = params.contains("l") ? parse_mat(params["l"], rng, "problem.params.l") : identity(dim);
        QuadFn h = parse_quadratic(need(params, "h", "problem.params"), l.rows, rng, "problem.params.h");
        const std::size_t m = regs.size();
        std::vector<ProxOperator> rops;
        for (std::size_t i = 0; i < m; ++i)
            rops.push_back(parse_prox(regs[i], dim, rng, "problem.params.regs[" + std::to_string(i) + "]").op);
        ForwardOperator grad_h = make_quadratic_gradient(h.p, h.c);
        out.problem = make_multi_reg_problem(rops, l, grad_h, dim);
        out.z0 = rng.uniform_vec(m * dim, -1.0, 1.0);
    } else if (kind == "qp") {
        const std::size_t dim = need(params, "dim", "problem.params").get<std::size_t>();
        QpSpec spec;
        spec.q = parse_mat(need(params, "q", "problem.params"), rng, "problem.params.q");
        spec.c = parse_vec_or_const(need(params, "c", "problem.params"), dim, "problem.params.c");
        spec.c1 = parse_prox(need(params, "c1", "problem.params"), dim, rng, "problem.params.c1").op;
        spec.c2 = parse_prox(need(params, "c2", "problem.params"), dim, rng, "problem.params.c2").op;
        spec.precondition_flag = params.value("precondition", false);
        if (!is_symmetric(spec.q, 1e-12)) fail("problem.params.q", "must be symmetric");
        if (spec.precondition_flag && !spec.c2.linear_projection)
            fail("problem.params.precondition", "requires a linear C2 projection (hyperplane/subspace)");
        Mat q = spec.q;
        if (spec.precondition_flag) {
            Mat proj(dim, dim);
            for (std::size_t j = 0; j < dim; ++j) {
                Vec e(dim, 0.0);
                e[j] = 1.0;
                Vec pe = spec.c2(1.0, e);
                for (std::size_t i = 0; i < dim; ++i) proj(i, j) = pe[i];
            }
            q = matmul(matmul(proj, spec.q), proj);
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = i + 1; j < dim; ++j) {
                    const double v = 0.5 * (q(i, j) + q(j, i));
                    q(i, j) = v;
                    q(j, i) = v;
                }
        }
        out.problem.dim = dim;
        out.problem.a = spec.c2;
        out.problem.b = spec.c1;
        out.problem.c = make_quadratic_gradient(q, spec.c);
        auto qq = std::make_shared<QuadFn>(QuadFn{q, spec.c});
        out.problem.objective = ObjectiveTriple{[](const Vec&) { return 0.0; },
                                                [](const Vec&) { return 0.0; },
                                                [qq](const Vec& x) { return qq->value(x); }};
        out.z0 = parse_start(params, "z0", dim, rng, "problem.params.z0");
    } else if (kind == "slow_example") {
        const double a = opt_num(params, "a", 0.0);
        RotatingSubspaceExample ex;
        if (params.contains("thetas")) {
            ex = build_slow_example(a, parse_vec(params["thetas"], "problem.params.thetas"));
        } else {
            const std::size_t n = params.value("n_blocks", std::size_t{200});
            const int k_max = params.value("k_max", 500);
            ex = build_slow_example_for_horizon(a, n, k_max);
        }
        out.problem = ex.problem;
        out.z0 = ex.z0;
        out.gamma_hint = 1.0;
    } else if (kind == "matrix_completion") {
        out.family = BuiltProblem::Family::matrix_completion;
        const std::size_t rows = need(params, "rows", "problem.params").get<std::size_t>();
        const std::size_t cols = need(params, "cols", "problem.params").get<std::size_t>();
        const std::size_t rank = params.value("rank", std::size_t{2});
        const double frac = params.value("observe_fraction", 0.6);
        out.mc_mu = opt_num(params, "mu", 0.1);
        out.mc_lo = opt_num(params, "lower", 0.0);
        out.mc_hi = opt_num(params, "upper", 5.0);
        Mat left(rows, rank), right(rank, cols);
        for (auto& e : left.data) e = rng.uniform(0.0, 1.0);
        for (auto& e : right.data) e = rng.uniform(0.0, 1.0);
        out.mc_x0 = matmul(left, right);
        for (auto& e : out.mc_x0.data)
            e = std::min(std::max(e, out.mc_lo), out.mc_hi);
        out.mc_mask = Mat(rows, cols);
        for (auto& e : out.mc_mask.data) e = rng.next_double() < frac ? 1.0 : 0.0;
        out.z0 = zeros(rows * cols);
    } else if (kind == "admm3" || kind == "admm_m") {
        out.family = BuiltProblem::Family::admm;
        const std::size_t m = kind == "admm3" ? 3 : need(params, "m", "problem.params").get<std::size_t>();
        if (m < 3) fail("problem.params.m", "needs at least 3 blocks");
        const std::size_t bdim = need(params, "range_dim", "problem.params").get<std::size_t>();
        const std::size_t xdim = params.value("block_dim", bdim);
        for (std::size_t i = 0; i < m; ++i) {
            Mat g(xdim, xdim);
            for (auto& e : g.data) e = rng.uniform(-1.0, 1.0);
            Mat p = matmul(transpose(g), g);
            for (auto& e : p.data) e /= static_cast<double>(xdim);
            for (std::size_t d = 0; d < xdim; ++d) p(d, d) += 1.0;
            Vec q = rng.uniform_vec(xdim, -1.0, 1.0);
            Mat l(bdim, xdim);
            for (auto& e : l.data) e = rng.uniform(-1.0, 1.0);
            out.admm.blocks.push_back(make_quadratic_block(p, q, l));
        }
        out.admm.b = params.contains("b") ? parse_vec_or_const(params["b"], bdim, "problem.params.b")
                                          : rng.uniform_vec(bdim, -1.0, 1.0);
        out.admm.mu1 = out.admm.blocks[0].mu;
        out.w0 = zeros(bdim);
        out.xm0 = zeros(xdim);
    } else {
        fail("problem.kind", "unknown kind '" + kind + "'");
    }
    return out;
}

struct SolverSpec {
    std::string variant;
    double gamma = 0.0;
    double lambda = 1.0;
    std::optional<double> epsilon;
    double eta = 0.5;
    std::string branch = "cocoercive";
    double tau = 0.0, sigma = 0.0;
    std::string pd_variant = "fbs_pd";
    int max_iter = 100000;
    double tol = 1e-10;
    std::string averaging = "none";
    std::string reference = "none";  // none | self | explicit list under "reference_solution"
};

SolverSpec parse_solver(const json& config) {
    const json& s = need(config, "solver", "");
    SolverSpec out;
    out.variant = need(s, "variant", "solver").get<std::string>();
    if (out.variant != "basic" && out.variant != "accelerated" && out.variant != "linesearch" &&
        out.variant != "primal_dual")
        fail("solver.variant", "must be basic|accelerated|linesearch|primal_dual");
    out.gamma = need_num(s, "gamma", "solver");
    if (!(out.gamma > 0.0)) fail("solver.gamma", "must be positive");
    out.lambda = opt_num(s, "lambda", 1.0);
    if (s.contains("epsilon")) out.epsilon = s["epsilon"].get<double>();
    out.eta = opt_num(s, "eta", 0.5);
    out.branch = opt_str(s, "branch", "cocoercive");
    out.tau = opt_num(s, "tau", out.gamma);
    out.sigma = opt_num(s, "sigma", 1.0 / out.tau);
    out.pd_variant = opt_str(s, "pd_variant", "fbs_pd");
    out.max_iter = static_cast<int>(opt_num(s, "max_iter", 100000));
    out.tol = opt_num(s, "tol", 1e-10);
    out.averaging = opt_str(s, "averaging", "none");
    out.reference = opt_str(s, "reference", "none");
    if (out.max_iter < 0) fail("solver.max_iter", "must be >= 0");
    if (out.tol < 0.0) fail("solver.tol", "must be >= 0");
    if (out.averaging != "none" && out.averaging != "uniform" && out.averaging != "weighted")
        fail("solver.averaging", "must be none|uniform|weighted");
    return out;
}

void collect_solver_findings(const BuiltProblem& built, const SolverSpec& s, const json& config,
                             std::vector<std::string>& findings) {
    const std::string kind = config["problem"]["kind"].get<std::string>();
    if (built.family == BuiltProblem::Family::admm) {
        if (s.variant != "basic")
            findings.push_back("solver.variant: admm problems run their own iteration; use basic");
        const double nl1 = built.admm.blocks.empty() ? 0.0 : built.admm.blocks[0].map_norm;
        if (built.admm.mu1 > 0.0 && nl1 > 0.0 && !(s.gamma < 2.0 * built.admm.mu1 / (nl1 * nl1)))
            findings.push_back("solver.gamma: gamma must be < 2*mu1/‖L1‖^2 for admm");
        return;
    }
    double beta = built.family == BuiltProblem::Family::matrix_completion ? 1.0 : built.problem.c.beta;
    const double eps = s.epsilon ? *s.epsilon
                                 : (beta == kInf ? 1.0 - 1e-6
                                                 : std::min(1.0 - 1e-6, s.gamma / (2.0 * beta) + 1e-6));
    if (s.epsilon && !(*s.epsilon > 0.0 && *s.epsilon < 1.0))
        findings.push_back("solver.epsilon: must lie in (0,1)");
    if (s.variant == "basic") {
        if (beta != kInf && !(s.gamma < 2.0 * beta * eps))
            findings.push_back("solver.gamma: gamma must be < 2*beta*epsilon (beta=" +
                               format_double(beta) + ", epsilon=" + format_double(eps) + ")");
        const double alpha = 1.0 / (2.0 - eps);
        if (!(s.lambda > 0.0 && s.lambda < 1.0 / alpha))
            findings.push_back("solver.lambda: must lie in (0, 1/alpha) with alpha=" +
                               format_double(alpha));
    }
    if (s.variant == "accelerated") {
        if (s.branch == "cocoercive") {
            if (!(s.eta > 0.0 && s.eta < 1.0)) findings.push_back("solver.eta: must lie in (0,1)");
            if (beta != kInf && !(s.gamma < 2.0 * beta * (1.0 - s.eta)))
                findings.push_back("solver.gamma: cocoercive branch needs gamma0 < 2*beta*(1-eta)");
        } else if (s.branch == "lipschitz") {
            const double mu_b = built.problem.b.mu;
            const double l_c = built.problem.c.l_c;
            if (!(mu_b > 0.0))
                findings.push_back("solver.branch: lipschitz branch requires mu_B > 0");
            else if (l_c == kInf)
                findings.push_back("solver.branch: lipschitz branch requires a finite L_C");
            else if (!(s.gamma < 2.0 * mu_b / (l_c * l_c)))
                findings.push_back("solver.gamma: lipschitz branch needs gamma0 < 2*mu_B/L_C^2");
        } else {
            findings.push_back("solver.branch: must be cocoercive|lipschitz");
        }
    }
    if (s.variant == "linesearch" && !built.problem.objective &&
        built.family == BuiltProblem::Family::splitting)
        findings.push_back("solver.variant: linesearch needs a problem kind with an objective (h)");
    if (s.variant == "primal_dual") {
        if (!(s.tau > 0.0)) findings.push_back("solver.tau: must be positive");
        if (!(s.sigma > 0.0)) findings.push_back("solver.sigma: must be positive");
        if (s.pd_variant == "equivalent_form" && std::abs(s.sigma * s.tau - 1.0) > 1e-12)
            findings.push_back("solver.sigma: equivalent_form requires sigma = 1/tau");
        else if (s.pd_variant != "fbs_pd" && s.pd_variant != "equivalent_form")
            findings.push_back("solver.pd_variant: must be fbs_pd|equivalent_form");
    }
    if (kind == "slow_example" && s.gamma != 1.0)
        findings.push_back("solver.gamma: slow_example is calibrated for gamma = 1");
}

std::string csv_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

void write_trace(const fs::path& path, const std::vector<TraceRecord>& trace) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("output.trace_path: cannot open '" + path.string() + "'");
    f << "k,fpr_sq,objective,dist_ref,gamma_k,lambda_k,elapsed_s\n";
    for (const auto& r : trace) {
        // elapsed_s stays empty so identical runs produce identical bytes;
        // wall time is reported in the summary
        f << r.k << ',' << format_double(r.fpr_sq) << ',' << csv_field(r.objective) << ','
          << csv_field(r.dist_ref) << ',' << format_double(r.gamma_k) << ','
          << format_double(r.lambda_k) << ',' << "\n";
    }
}

}  // namespace

std::vector<std::string> validate_config(const json& config) {
    std::vector<std::string> findings;
    try {
        const std::uint64_t seed = config.value("seed", std::uint64_t{0});
        CounterRng rng(seed);
        BuiltProblem built = build_problem(config, rng);
        SolverSpec solver = parse_solver(config);
        collect_solver_findings(built, solver, config, findings);
    } catch (const ConfigError& e) {
        findings.push_back(e.what());
    } catch (const std::exception& e) {
        findings.push_back(std::string("config: ") + e.what());
    }
    return findings;
}

int run_config(const json& config, const CliOverrides& overrides, std::ostream& err) {
    try {
        json cfg = config;
        if (overrides.seed) cfg["seed"] = *overrides.seed;
        if (overrides.max_iter) cfg["solver"]["max_iter"] = *overrides.max_iter;
        if (overrides.tol) cfg["solver"]["tol"] = *overrides.tol;

        auto findings = validate_config(cfg);
        if (!findings.empty()) {
            for (const auto& f : findings) err << f << "\n";
            return kConfigError;
        }

        const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
        CounterRng rng(seed);
        BuiltProblem built = build_problem(cfg, rng);
        SolverSpec solver = parse_solver(cfg);

        const json& outspec = need(cfg, "output", "");
        fs::path trace_path = need(outspec, "trace_path", "output").get<std::string>();
        fs::path summary_path = need(outspec, "summary_path", "output").get<std::string>();
        if (!overrides.out_dir.empty()) {
            fs::create_directories(overrides.out_dir);
            trace_path = fs::path(overrides.out_dir) / trace_path;
            summary_path = fs::path(overrides.out_dir) / summary_path;
        }

        const auto t0 = std::chrono::steady_clock::now();
        std::vector<TraceRecord> trace;
        bool converged = false;
        json results;
        std::string reference_kind = "none";

        if (built.family == BuiltProblem::Family::admm) {
            AdmmResult r = built.admm.blocks.size() == 3
                               ? solve_admm3({built.admm.blocks, built.admm.b, built.admm.mu1,
                                              solver.gamma},
                                             built.w0, built.xm0, solver.max_iter, solver.tol)
                               : solve_admm_m({built.admm.blocks, built.admm.b, built.admm.mu1,
                                               solver.gamma},
                                              built.w0, built.xm0, solver.max_iter, solver.tol);
            trace = std::move(r.trace);
            converged = r.converged;
            results["final_fpr_sq"] = trace.empty() ? 0.0 : trace.back().fpr_sq;
            if (trace.back().objective) results["objective"] = *trace.back().objective;
        } else if (built.family == BuiltProblem::Family::matrix_completion) {
            AppControls ctl;
            ctl.gamma = solver.gamma;
            ctl.max_iter = solver.max_iter;
            ctl.tol = solver.tol;
            MatrixCompletionResult r = solve_matrix_completion(
                built.mc_x0, built.mc_mask, built.mc_mu, built.mc_lo, built.mc_hi, built.z0, ctl);
            trace = std::move(r.trace);
            converged = r.converged;
            results["final_fpr_sq"] = trace.empty() ? 0.0 : trace.back().fpr_sq;
            results["final_rmse"] = r.rmse.empty() ? 0.0 : r.rmse.back();
        } else {
            ThreeOperatorProblem problem = built.problem;
            const double beta = problem.c.beta;
            auto make_sched = [&]() {
                return solver.epsilon
                           ? make_schedule_eps(solver.gamma, *solver.epsilon, solver.lambda)
                           : make_schedule(solver.gamma, beta, solver.lambda);
            };
            if (solver.reference == "self") {
                SolveOptions lo;
                lo.max_iter = solver.max_iter * 10;
                lo.tol = 1e-14;
                const double ref_gamma =
                    beta == kInf || solver.gamma < 2.0 * beta ? solver.gamma : default_gamma(beta);
                problem.reference_solution =
                    solve_basic(problem, make_schedule(ref_gamma, beta), built.z0, lo).state.x_b;
                reference_kind = "self";
            } else if (cfg["solver"].contains("reference_solution")) {
                problem.reference_solution = parse_vec(cfg["solver"]["reference_solution"],
                                                       "solver.reference_solution");
                reference_kind = "user";
            }

            SolveOptions opts;
            opts.max_iter = solver.max_iter;
            opts.tol = solver.tol;

            std::optional<ErgodicAccumulator> acc;
            if (solver.averaging != "none")
                acc.emplace(solver.averaging == "uniform" ? ErgodicAccumulator::Mode::uniform
                                                          : ErgodicAccumulator::Mode::weighted);

            if (solver.variant == "basic") {
                RelaxationSchedule sched = make_sched();
                opts.record_states = acc.has_value();
                SolveResult r = solve_basic(problem, sched, built.z0, opts);
                if (acc)
                    for (const auto& st : r.states) acc->update(st, sched.lambda(st.k));
                trace = std::move(r.trace);
                converged = r.converged;
                results["final_fpr_sq"] = r.state.fpr_sq;
                results["solution_norm"] = norm2(r.state.x_b);
                if (problem.objective)
                    results["objective"] = problem.objective_value(r.state.x_a, r.state.x_b);
                if (problem.reference_solution)
                    results["dist_ref"] = dist2(r.state.x_b, *problem.reference_solution);
                if (acc && problem.objective) {
                    const Vec xb = acc->average_x_b();
                    results["averaged_objective"] = problem.objective_value(acc->average_x_a(), xb);
                }
            } else if (solver.variant == "accelerated") {
                AccelConfig ac;
                ac.gamma0 = solver.gamma;
                ac.eta = solver.eta;
                ac.branch = solver.branch == "cocoercive" ? AccelConfig::Branch::cocoercive
                                                          : AccelConfig::Branch::lipschitz;
                AccelOptions ao;
                ao.max_iter = solver.max_iter;
                ao.tol = solver.tol;
                AccelResult r = solve_accelerated(problem, ac, built.z0, ao);
                trace = std::move(r.trace);
                converged = r.converged;
                results["final_fpr_sq"] = r.state.fpr_sq;
                results["final_gamma"] = r.state.gamma;
            } else if (solver.variant == "linesearch") {
                SolveResult r = solve_linesearch(problem, solver.gamma, built.z0, opts);
                trace = std::move(r.trace);
                converged = r.converged;
                results["final_fpr_sq"] = r.state.fpr_sq;
            } else {  // primal_dual
                PrimalDualResult r = solve_primal_dual(
                    problem, solver.tau, solver.sigma, built.z0, zeros(built.z0.size()),
                    solver.pd_variant == "fbs_pd" ? PrimalDualVariant::fbs_pd
                                                  : PrimalDualVariant::equivalent_form,
                    solver.max_iter, solver.tol);
                trace = std::move(r.trace);
                converged = r.converged;
                results["final_fpr_sq"] = trace.empty() ? 0.0 : trace.back().fpr_sq;
            }
        }

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_trace(trace_path, trace);

        json summary;
        summary["config"] = cfg;
        summary["results"] = results;
        summary["results"]["iterations"] = trace.empty() ? 0 : trace.back().k;
        summary["results"]["converged"] = converged;
        summary["results"]["wall_time_s"] = wall;
        summary["results"]["reference_kind"] = reference_kind;
        summary["results"]["exit_status"] = converged ? kOk : kMaxIter;
        std::ofstream sf(summary_path, std::ios::binary);
        if (!sf) throw ConfigError("output.summary_path: cannot open '" + summary_path.string() + "'");
        sf << summary.dump(2) << "\n";

        return converged ? kOk : kMaxIter;
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return kConfigError;
    } catch (const DivergenceError& e) {
        err << e.what() << "\n";
        return kDiverged;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace tos::runner
