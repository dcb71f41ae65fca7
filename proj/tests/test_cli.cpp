#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "runner.hpp"

using namespace tos::runner;
namespace fs = std::filesystem;

namespace {

json minimal_config() {
    return json{
        {"seed", 42},
        {"problem",
         {{"kind", "three_objective"},
          {"params",
           {{"dim", 1},
            {"f", {{"type", "zero"}}},
            {"g", {{"type", "quadratic"}, {"p", {{"diag", {1.0}}}}}},
            {"h", {{"p", {{"diag", {1.0}}}}, {"c", {-1.0}}}},
            {"z0", {4.0}}}}}},
        {"solver", {{"variant", "basic"}, {"gamma", 0.9}, {"tol", 1e-10}, {"max_iter", 10000}}},
        {"output", {{"trace_path", "trace.csv"}, {"summary_path", "summary.json"}}}};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("tos_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("minimal run converges with status 0 and a bounded trace") {
    fs::path dir = fresh_dir("run");
    CliOverrides ov;
    ov.out_dir = dir.string();
    std::ostringstream err;
    const int status = run_config(minimal_config(), ov, err);
    CHECK(status == 0);
    CHECK(fs::exists(dir / "trace.csv"));
    CHECK(fs::exists(dir / "summary.json"));

    std::ifstream tf(dir / "trace.csv");
    std::string header;
    std::getline(tf, header);
    CHECK(header == "k,fpr_sq,objective,dist_ref,gamma_k,lambda_k,elapsed_s");
    int rows = 0;
    std::string line;
    while (std::getline(tf, line))
        if (!line.empty()) ++rows;
    CHECK(rows >= 1);
    CHECK(rows <= 10001);

    json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["results"]["converged"].get<bool>());
    CHECK(summary["results"]["exit_status"].get<int>() == 0);
}

TEST_CASE("missing gamma is a config error naming solver.gamma") {
    json cfg = minimal_config();
    cfg["solver"].erase("gamma");
    auto findings = validate_config(cfg);
    REQUIRE(!findings.empty());
    bool named = false;
    for (const auto& f : findings)
        if (f.find("solver.gamma") != std::string::npos) named = true;
    CHECK(named);

    fs::path dir = fresh_dir("nogamma");
    CliOverrides ov;
    ov.out_dir = dir.string();
    std::ostringstream err;
    CHECK(run_config(cfg, ov, err) == kConfigError);
    CHECK(err.str().find("solver.gamma") != std::string::npos);
}

TEST_CASE("identical config and seed produce byte-identical traces") {
    fs::path d1 = fresh_dir("det1");
    fs::path d2 = fresh_dir("det2");
    json cfg = minimal_config();
    cfg["problem"]["params"]["dim"] = 6;
    cfg["problem"]["params"]["g"] = {{"type", "quadratic"}, {"p", {{"random_spd", {{"dim", 6}}}}}};
    cfg["problem"]["params"]["h"] = {{"p", {{"random_spd", {{"dim", 6}}}}}};
    cfg["problem"]["params"].erase("z0");
    cfg["solver"]["gamma"] = 0.2;
    std::ostringstream err;
    CliOverrides o1, o2;
    o1.out_dir = d1.string();
    o2.out_dir = d2.string();
    CHECK(run_config(cfg, o1, err) == 0);
    CHECK(run_config(cfg, o2, err) == 0);
    CHECK(slurp(d1 / "trace.csv") == slurp(d2 / "trace.csv"));
    CHECK(!slurp(d1 / "trace.csv").empty());
}

TEST_CASE("different seeds change the generated instance") {
    fs::path d1 = fresh_dir("seedA");
    fs::path d2 = fresh_dir("seedB");
    json cfg = minimal_config();
    cfg["problem"]["params"]["dim"] = 6;
    cfg["problem"]["params"]["g"] = {{"type", "quadratic"}, {"p", {{"random_spd", {{"dim", 6}}}}}};
    cfg["problem"]["params"]["h"] = {{"p", {{"random_spd", {{"dim", 6}}}}}};
    cfg["problem"]["params"].erase("z0");
    cfg["solver"]["gamma"] = 0.2;
    std::ostringstream err;
    CliOverrides o1, o2;
    o1.out_dir = d1.string();
    o2.out_dir = d2.string();
    o2.seed = 777;
    CHECK(run_config(cfg, o1, err) == 0);
    CHECK(run_config(cfg, o2, err) == 0);
    CHECK(slurp(d1 / "trace.csv") != slurp(d2 / "trace.csv"));
}

TEST_CASE("validate catches each constructed violation") {
    // boundary stepsize: gamma = 2*beta exactly (beta = 1 here)
    json cfg = minimal_config();
    cfg["solver"]["gamma"] = 2.0;
    auto f1 = validate_config(cfg);
    REQUIRE(!f1.empty());
    CHECK(f1[0].find("gamma must be < 2*beta*epsilon") != std::string::npos);

    // lambda outside (0, 1/alpha)
    json cfg2 = minimal_config();
    cfg2["solver"]["lambda"] = 5.0;
    auto f2 = validate_config(cfg2);
    REQUIRE(!f2.empty());
    CHECK(f2[0].find("solver.lambda") != std::string::npos);

    // accelerated lipschitz branch without strong monotonicity of B
    json cfg3 = minimal_config();
    cfg3["problem"]["params"]["g"] = {{"type", "zero"}};
    cfg3["solver"]["variant"] = "accelerated";
    cfg3["solver"]["branch"] = "lipschitz";
    auto f3 = validate_config(cfg3);
    REQUIRE(!f3.empty());
    CHECK(f3[0].find("mu_B > 0") != std::string::npos);

    // accelerated cocoercive branch with gamma0 too large
    json cfg4 = minimal_config();
    cfg4["solver"]["variant"] = "accelerated";
    cfg4["solver"]["eta"] = 0.5;
    cfg4["solver"]["gamma"] = 1.5;  // >= 2*beta*(1-eta) = 1
    auto f4 = validate_config(cfg4);
    REQUIRE(!f4.empty());
    CHECK(f4[0].find("2*beta*(1-eta)") != std::string::npos);

    // primal-dual equivalent form with mismatched sigma
    json cfg5 = minimal_config();
    cfg5["solver"]["variant"] = "primal_dual";
    cfg5["solver"]["pd_variant"] = "equivalent_form";
    cfg5["solver"]["tau"] = 0.5;
    cfg5["solver"]["sigma"] = 1.0;
    auto f5 = validate_config(cfg5);
    REQUIRE(!f5.empty());
    CHECK(f5[0].find("sigma") != std::string::npos);

    // unknown problem kind
    json cfg6 = minimal_config();
    cfg6["problem"]["kind"] = "mystery";
    auto f6 = validate_config(cfg6);
    REQUIRE(!f6.empty());
    CHECK(f6[0].find("problem.kind") != std::string::npos);

    // epsilon outside (0,1)
    json cfg7 = minimal_config();
    cfg7["solver"]["epsilon"] = 1.2;
    auto f7 = validate_config(cfg7);
    REQUIRE(!f7.empty());
    CHECK(f7[0].find("solver.epsilon") != std::string::npos);

    // valid config: no findings
    CHECK(validate_config(minimal_config()).empty());
}

TEST_CASE("max-iter exhaustion returns status 2") {
    json cfg = minimal_config();
    cfg["solver"]["max_iter"] = 0;
    cfg["solver"]["tol"] = 0.0;
    cfg["problem"]["params"]["z0"] = {4.0};
    fs::path dir = fresh_dir("maxiter");
    CliOverrides ov;
    ov.out_dir = dir.string();
    std::ostringstream err;
    CHECK(run_config(cfg, ov, err) == kMaxIter);
}

TEST_CASE("flag overrides replace config fields") {
    json cfg = minimal_config();
    cfg["solver"]["max_iter"] = 0;
    cfg["solver"]["tol"] = 0.0;
    fs::path dir = fresh_dir("override");
    CliOverrides ov;
    ov.out_dir = dir.string();
    ov.max_iter = 10000;
    ov.tol = 1e-10;
    std::ostringstream err;
    CHECK(run_config(cfg, ov, err) == 0);
}

TEST_CASE("other problem kinds build and run through the config path") {
    std::ostringstream err;

    json qp = {{"seed", 5},
               {"problem",
                {{"kind", "qp"},
                 {"params",
                  {{"dim", 2},
                   {"q", {{"identity", 2}}},
                   {"c", {-1.0, -1.0}},
                   {"c1", {{"type", "simplex"}}},
                   {"c2", {{"type", "halfspace"}, {"normal", {1.0, 1.0}}, {"offset", 1.0}}},
                   {"z0", {0.2, 0.1}}}}}},
               {"solver", {{"variant", "basic"}, {"gamma", 0.9}, {"tol", 1e-11}}},
               {"output", {{"trace_path", "t.csv"}, {"summary_path", "s.json"}}}};
    fs::path d1 = fresh_dir("qp");
    CliOverrides o1;
    o1.out_dir = d1.string();
    REQUIRE(run_config(qp, o1, err) == 0);
    json summary = json::parse(slurp(d1 / "s.json"));
    CHECK(summary["results"]["objective"].get<double>() ==
          doctest::Approx(0.5 * 0.25 + 0.5 * 0.25 - 1.0).epsilon(1e-6));

    json sf = {{"seed", 6},
               {"problem",
                {{"kind", "split_feasibility"},
                 {"params",
                  {{"dim", 1},
                   {"c1", {{"type", "box"}, {"lower", 0.0}, {"upper", 2.0}}},
                   {"c2", {{"type", "box"}, {"lower", 1.0}, {"upper", 3.0}}},
                   {"c3", {{"type", "zero"}}},
                   {"z0", {5.0}}}}}},
               {"solver", {{"variant", "basic"}, {"gamma", 1.0}, {"tol", 1e-11}}},
               {"output", {{"trace_path", "t.csv"}, {"summary_path", "s.json"}}}};
    fs::path d2 = fresh_dir("sf");
    CliOverrides o2;
    o2.out_dir = d2.string();
    CHECK(run_config(sf, o2, err) == 0);

    json admm = {{"seed", 7},
                 {"problem", {{"kind", "admm3"}, {"params", {{"range_dim", 2}, {"block_dim", 2}}}}},
                 {"solver", {{"variant", "basic"}, {"gamma", 0.1}, {"tol", 1e-9}, {"max_iter", 60000}}},
                 {"output", {{"trace_path", "t.csv"}, {"summary_path", "s.json"}}}};
    fs::path d3 = fresh_dir("admm");
    CliOverrides o3;
    o3.out_dir = d3.string();
    CHECK(run_config(admm, o3, err) == 0);

    json slow = {{"seed", 8},
                 {"problem", {{"kind", "slow_example"}, {"params", {{"n_blocks", 50}, {"k_max", 200}}}}},
                 {"solver", {{"variant", "basic"}, {"gamma", 1.0}, {"epsilon", 0.6}, {"tol", 0.0}, {"max_iter", 200}}},
                 {"output", {{"trace_path", "t.csv"}, {"summary_path", "s.json"}}}};
    fs::path d4 = fresh_dir("slow");
    CliOverrides o4;
    o4.out_dir = d4.string();
    CHECK(run_config(slow, o4, err) == kMaxIter);  // tol 0 never converges

    json mc = {{"seed", 9},
               {"problem",
                {{"kind", "matrix_completion"},
                 {"params", {{"rows", 8}, {"cols", 6}, {"rank", 2}, {"mu", 0.05}}}}},
               {"solver", {{"variant", "basic"}, {"gamma", 1.0}, {"tol", 1e-8}, {"max_iter", 50000}}},
               {"output", {{"trace_path", "t.csv"}, {"summary_path", "s.json"}}}};
    fs::path d5 = fresh_dir("mc");
    CliOverrides o5;
    o5.out_dir = d5.string();
    CHECK(run_config(mc, o5, err) == 0);

    json accel = minimal_config();
    accel["solver"]["variant"] = "accelerated";
    accel["solver"]["gamma"] = 0.45;
    accel["solver"]["eta"] = 0.5;
    fs::path d6 = fresh_dir("accel");
    CliOverrides o6;
    o6.out_dir = d6.string();
    CHECK(run_config(accel, o6, err) == 0);

    json ls = minimal_config();
    ls["solver"]["variant"] = "linesearch";
    ls["solver"]["gamma"] = 1.5;
    fs::path d7 = fresh_dir("ls");
    CliOverrides o7;
    o7.out_dir = d7.string();
    CHECK(run_config(ls, o7, err) == 0);

    json pd = minimal_config();
    pd["solver"]["variant"] = "primal_dual";
    pd["solver"]["tau"] = 0.5;
    pd["solver"]["sigma"] = 2.0;
    pd["solver"]["pd_variant"] = "equivalent_form";
    fs::path d8 = fresh_dir("pd");
    CliOverrides o8;
    o8.out_dir = d8.string();
    CHECK(run_config(pd, o8, err) == 0);

    json mr = {{"seed", 10},
               {"problem",
                {{"kind", "multi_reg"},
                 {"params",
                  {{"dim", 3},
                   {"regs",
                    {{{"type", "l1"}, {"weight", 0.1}},
                     {{"type", "box"}, {"lower", -1.0}, {"upper", 1.0}}}},
                   {"h", {{"p", {{"random_spd", {{"dim", 3}}}}}}}}}}},
               {"solver", {{"variant", "basic"}, {"gamma", 1.0}, {"tol", 1e-10}, {"max_iter", 100000}}},
               {"output", {{"trace_path", "t.csv"}, {"summary_path", "s.json"}}}};
    fs::path d9 = fresh_dir("mr");
    CliOverrides o9;
    o9.out_dir = d9.string();
    CHECK(run_config(mr, o9, err) == 0);

    // line search accepts stepsizes beyond the basic 2*beta*epsilon bound
    json big = minimal_config();
    big["solver"]["variant"] = "linesearch";
    big["solver"]["gamma"] = 6.0;
    CHECK(validate_config(big).empty());
    fs::path d10 = fresh_dir("ls_big");
    CliOverrides o10;
    o10.out_dir = d10.string();
    CHECK(run_config(big, o10, err) == 0);
}

TEST_CASE("the installed binary handles run and validate subcommands") {
    fs::path dir = fresh_dir("binary");
    fs::path cfg_path = dir / "config.json";
    {
        std::ofstream f(cfg_path);
        f << minimal_config().dump(2);
    }
    const std::string bin = TOS_CLI_BIN;
    auto sh = [](const std::string& cmd) { return std::system(cmd.c_str()); };

    int rc = sh(bin + " run " + cfg_path.string() + " --out " + (dir / "out").string() +
                " > /dev/null 2>&1");
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(dir / "out" / "trace.csv"));

    rc = sh(bin + " validate " + cfg_path.string() + " > " + (dir / "v.txt").string() + " 2>&1");
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(slurp(dir / "v.txt").find("ok") != std::string::npos);

    // seed override through the flag changes the instance deterministically
    rc = sh(bin + " run " + cfg_path.string() + " --out " + (dir / "out2").string() +
            " --seed 99 --max-iter 500 --tol 1e-8 > /dev/null 2>&1");
    CHECK(WEXITSTATUS(rc) == 0);

    json bad = minimal_config();
    bad["solver"].erase("gamma");
    fs::path bad_path = dir / "bad.json";
    {
        std::ofstream f(bad_path);
        f << bad.dump(2);
    }
    rc = sh(bin + " validate " + bad_path.string() + " > " + (dir / "vb.txt").string() + " 2>&1");
    CHECK(WEXITSTATUS(rc) == 1);
    CHECK(slurp(dir / "vb.txt").find("solver.gamma") != std::string::npos);
    rc = sh(bin + " run " + bad_path.string() + " > /dev/null 2>&1");
    CHECK(WEXITSTATUS(rc) == 1);
}

TEST_CASE("shortest round-trip double formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(1e-10) == "1e-10");
    const double v = 1.0 / 3.0;
    double back = std::stod(format_double(v));
    CHECK(back == v);
}
