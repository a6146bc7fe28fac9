#include "doctest.h"
#include "cli_runner.hpp"
#include "support.hpp"

#include "proxlab/config.hpp"
#include "proxlab/errors.hpp"
#include "proxlab/trace_io.hpp"

#include <cstdlib>

using namespace proxlab;
namespace fs = std::filesystem;

namespace {

std::string eckstein_config(const std::string& out) {
    return R"({
  "space_dim": 2,
  "legendre": "quadratic:identity",
  "operator": "grad:quadratic:identity;shift=1,2",
  "scheme": "eckstein",
  "scheme_params": {"lambda": {"kind": "constant", "value": 1.0}},
  "x0": [0, 0],
  "known_zero": [1, 2],
  "policy": {"kind": "zero"},
  "stop": {"max_iters": 200, "zero_detect": 1e-8},
  "seed": 1,
  "output_path": ")" + out + R"("
})";
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("config parsing") {
    const ExperimentConfig cfg = config_from_text(eckstein_config("out.csv"));
    CHECK(cfg.space_dim == 2);
    CHECK(cfg.scheme == Scheme::Eckstein);
    CHECK(cfg.operators.size() == 1);
    CHECK(cfg.stop.max_iters == 200);
    CHECK((cfg.x0 - Vector::Zero(2)).norm() == 0.0);
    CHECK(cfg.known_zero.has_value());
}

TEST_CASE("config diagnostics name the field") {
    auto expect = [](const std::string& text, const std::string& needle) {
        try {
            config_from_text(text);
            FAIL("accepted: " << text);
        } catch (const ConfigError& e) {
            CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
        }
    };
    const std::string base = eckstein_config("o.csv");
    auto with = [&](const std::string& from, const std::string& to) {
        std::string s = base;
        s.replace(s.find(from), from.size(), to);
        return s;
    };
    expect(with(R"({"kind": "zero"})", R"({"kind": "summable_geometric", "c": 0.1, "q": 1.0})"), "policy");
    expect(with(R"("value": 1.0)", R"("value": -1.0)"), "lambda");
    expect(with(R"("x0": [0, 0])", R"("x0": [0, 0, 0])"), "x0");
    expect(with(R"("seed": 1)", R"("sede": 1)"), "sede");
    expect(with(R"("scheme": "eckstein")", R"("scheme": "newton")"), "scheme");
    expect(with(R"(shift=1,2)", R"(shift=1,2,3)"), "operators");
    expect(with(R"("quadratic:identity",)", R"("entropy",)"), "legendre");
    expect(with(R"({"lambda")", R"({"sigma": 0.5, "lambda")"), "sigma");
    expect(with(R"("space_dim": 2,)", R"("space_dim": 2,,)"), "line 2");
}

TEST_CASE("scheme specific keys") {
    std::string ips = eckstein_config("o.csv");
    ips.replace(ips.find("\"eckstein\""), 10, "\"ips\"");
    CHECK_THROWS_AS(config_from_text(ips), ConfigError);  // nu missing
    ips.replace(ips.find("\"scheme_params\": {"), 18, "\"scheme_params\": {\"nu_from\": {\"sigma\": 0.25, \"rho\": 0, \"lambda_hat\": 1}, ");
    const ExperimentConfig cfg = config_from_text(ips);
    CHECK(cfg.scheme_params.resolved_nu() == doctest::Approx(0.5));
}

TEST_CASE("resolved config round trips") {
    ExperimentConfig cfg = config_from_text(eckstein_config("o.csv"));
    cfg.policy = PerturbationPolicy::summable_geometric(0.1, 0.5, cfg.seed);
    const ExperimentConfig again = config_from_json(config_to_json(cfg));
    CHECK(again == cfg);
    CHECK(config_to_json(again) == config_to_json(cfg));

    std::string pls = R"({"space_dim": 3, "operator": "affine:identity,b=-1", "scheme": "pls",
      "scheme_params": {"c": {"kind": "geometric", "c": 1, "q": 1}, "sigma": 0.3, "tau": 1.5,
                        "metric": {"kind": "random_spd", "min": 0.5, "max": 2}},
      "x0": [0, 0, 0], "policy": {"kind": "radius_fraction", "fraction": 0.25}, "seed": 9,
      "output_path": "p.csv"})";
    const ExperimentConfig p = config_from_text(pls);
    CHECK(config_from_json(config_to_json(p)) == p);
}

TEST_CASE("environment seed override") {
    ExperimentConfig cfg = config_from_text(eckstein_config("o.csv"));
    ::setenv("PROXLAB_SEED", "77", 1);
    apply_env_overrides(cfg);
    CHECK(cfg.seed == 77);
    CHECK(cfg.policy.seed == 77);
    ::setenv("PROXLAB_SEED", "x7", 1);
    CHECK_THROWS_AS(apply_env_overrides(cfg), ConfigError);
    ::unsetenv("PROXLAB_SEED");
}

TEST_CASE("trace CSV layout") {
    CHECK(trace_header(2) == "n,x_1,x_2,eta_norm,step_param,zero_residual,notes");
    IterateTrace t;
    t.dim = 1;
    IterateRecord r;
    r.n = 0;
    r.x = scalar(0.5);
    r.note = "rejected 2, eta = 0";
    t.records.push_back(r);
    CHECK(trace_csv(t) == "n,x_1,eta_norm,step_param,zero_residual,notes\n0,0.5,0,0,0,\"rejected 2, eta = 0\"\n");
}

TEST_CASE("cli catalog") {
    const CliResult r = run_cli("catalog");
    CHECK(r.code == 0);
    CHECK(r.out.find("cosh") != std::string::npos);
    CHECK(r.out.find("abs:w=1") != std::string::npos);
}

TEST_CASE("cli prox") {
    CliResult r = run_cli("prox --f quadratic:identity --A abs:w=1 --lambda 1 --x 2 --eta 0");
    CHECK(r.code == 0);
    CHECK(r.out.find("y = 1\n") != std::string::npos);
    CHECK(r.out.find("xi = 1\n") != std::string::npos);
    CHECK(r.out.find("pass") != std::string::npos);
    r = run_cli("prox --A abs:w=1 --x 2 --eta 0.25");
    CHECK(r.code == 0);
    CHECK(r.out.find("y = 1.25\n") != std::string::npos);
    CHECK(run_cli("prox --lambda -1 --x 2").code == 1);
    CHECK(run_cli("prox --A nope --x 2").code == 1);
    CHECK(run_cli("prox --f cosh --A 'affine:m=1,1,-1,1&abs' --x 1,2").code == 2);
    CHECK(run_cli("frobnicate").code == 1);
}

TEST_CASE("cli radius") {
    CliResult r = run_cli("radius --A abs:w=1 --lambda 1 --x 2 --form ss --sigma 0.5");
    CHECK(r.code == 0);
    const auto pos = r.out.find("radius = ");
    REQUIRE(pos != std::string::npos);
    const double rad = std::stod(r.out.substr(pos + 9));
    CHECK(rad >= 0.45);
    CHECK(rad <= 0.55);
    r = run_cli("radius --A abs:w=1 --x 0 --form ss --sigma 0.5");
    CHECK(r.code == 3);
    CHECK(r.out.find("strong implicitness fails at 0") != std::string::npos);
    CHECK(run_cli("radius --A abs:w=1 --x 2 --form ss --sigma 0").code == 3);
    CHECK(run_cli("radius --x 2 --form bogus").code == 1);
}

TEST_CASE("cli run writes trace and sidecar") {
    const fs::path dir = scratch_dir("run");
    const fs::path out = dir / "eck.csv";
    write_file(dir / "eck.json", eckstein_config(out.string()));
    const CliResult r = run_cli((dir / "eck.json").string());
    CHECK(r.code == 1);  // missing subcommand
    const CliResult ok = run_cli("run " + (dir / "eck.json").string());
    CHECK(ok.code == 0);
    const std::string csv = read_file(out);
    CHECK(csv.rfind("n,x_1,x_2,eta_norm,step_param,zero_residual,notes\n", 0) == 0);
    CHECK(count_lines(csv) - 1 <= 60);
    const ExperimentConfig side = read_sidecar_config(out.string() + ".json");
    CHECK(side == config_from_text(eckstein_config(out.string())));
    const std::string side_text = read_file(out.string() + ".json");
    CHECK(side_text.find("\"termination\": \"zero detected\"") != std::string::npos);
    for (const auto& e : fs::directory_iterator(dir)) {
        CHECK(e.path().string().find(".tmp.") == std::string::npos);
    }

    const std::string ss_cfg = R"({"space_dim": 1, "operator": "abs:w=1,shift=1", "scheme": "ss",
      "scheme_params": {"mu": 1, "sigma": 0.5}, "x0": [1], "policy": {"kind": "zero"},
      "output_path": ")" + (dir / "ss.csv").string() + "\"}";
    write_file(dir / "ss.json", ss_cfg);
    CHECK(run_cli("run " + (dir / "ss.json").string()).code == 0);
    CHECK(count_lines(read_file(dir / "ss.csv")) == 2);
    CHECK(read_file(dir / "ss.csv.json").find("zero detected") != std::string::npos);

    std::string budget = eckstein_config((dir / "b.csv").string());
    budget.replace(budget.find("\"max_iters\": 200"), 16, "\"max_iters\": 3");
    write_file(dir / "b.json", budget);
    CHECK(run_cli("run " + (dir / "b.json").string()).code == 4);

    std::string bad = eckstein_config((dir / "bad.csv").string());
    bad.replace(bad.find(R"({"kind": "zero"})"), 16, R"({"kind": "summable_geometric", "c": 0.1, "q": 1.5})");
    write_file(dir / "bad.json", bad);
    const CliResult br = run_cli("run " + (dir / "bad.json").string());
    CHECK(br.code == 1);
    CHECK(br.out.find("policy") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "bad.csv"));
    CHECK(run_cli("run " + (dir / "missing.json").string()).code == 1);
    fs::remove_all(dir);
}

TEST_CASE("cli check") {
    CliResult r = run_cli("check legendre --seed 1");
    CHECK(r.code == 0);
    CHECK(r.out.find("Fenchel-Young") != std::string::npos);
    r = run_cli("check resolvent --seed 2");
    CHECK(r.code == 0);
    CHECK(r.out.find("Holder certification") != std::string::npos);
    CHECK(run_cli("check nonsense").code == 1);
}
