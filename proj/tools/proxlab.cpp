#include "proxlab/algorithms.hpp"
#include "proxlab/check.hpp"
#include "proxlab/config.hpp"
#include "proxlab/errors.hpp"
#include "proxlab/resolvent.hpp"
#include "proxlab/trace_io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

using namespace proxlab;

namespace {

enum Exit { kOk = 0, kUsage = 1, kSolver = 2, kImplicit = 3, kBudget = 4 };

Vector parse_vector(const std::string& text, const std::string& flag) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
            throw ConfigError("--" + flag + ": '" + item + "' is not a number");
        vals.push_back(v);
    }
    if (vals.empty()) throw ConfigError("--" + flag + ": empty vector");
    return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// Pads a length-1 vector to dim; anything else must already match.
Vector fit(Vector v, int dim, const std::string& flag) {
    if (v.size() == dim) return v;
    if (v.size() == 1) return Vector::Constant(dim, v(0));
    throw ConfigError("--" + flag + ": expected " + std::to_string(dim) + " entries, got " +
                      std::to_string(v.size()));
}

struct InclusionFlags {
    std::string f = "quadratic:identity";
    std::string a = "abs:w=1";
    double lambda = 1.0;
    std::string x = "0";
    int dim = 0;

    void add(CLI::App* cmd) {
        cmd->add_option("--f", f, "Legendre function spec")->capture_default_str();
        cmd->add_option("--A", a, "operator spec")->capture_default_str();
        cmd->add_option("--lambda", lambda, "step parameter (> 0)")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--x", x, "base point, comma separated")->capture_default_str();
        cmd->add_option("--dim", dim, "space dimension (default: length of --x)")->check(CLI::Range(1, kMaxDim));
    }

    int resolved_dim() const {
        const int n = static_cast<int>(parse_vector(x, "x").size());
        return dim > 0 ? dim : n;
    }
};

int cmd_catalog() {
    std::cout << "legendre functions\n"
                 "  quadratic:identity           1/2 ||x||^2\n"
                 "  quadratic:diag=d1,...,dn     1/2 <Dx, x>\n"
                 "  quadratic:m=m11,...,mnn      1/2 <Mx, x>, M symmetric positive definite\n"
                 "  cosh                         sum of cosh(x_i)\n"
                 "  power:rho=R                  (1/R) ||x||^R, R > 1\n"
                 "  powerp:p=P,rho=R             (1/R) ||x||_P^R, P > 1, R > 1\n"
                 "operators\n"
                 "  abs:w=1,shift=s              w * subdifferential of ||. - s||_1\n"
                 "  affine:diag=d,b=b            y -> Dy + b (also m=..., identity)\n"
                 "  identity                     y -> y\n"
                 "  box:lo,hi                    normal cone of [lo, hi]^n (also lower=...,upper=...)\n"
                 "  grad:F;shift=s,w=1           w * gradient of a catalog function F at y - s\n"
                 "  scale:c:OP                   c * OP\n"
                 "  OP1&OP2                      sum of operators\n"
                 "schemes\n"
                 "  eckstein ss ips pls rs\n";
    return kOk;
}

int cmd_prox(const InclusionFlags& in, const std::string& eta_text) {
    const int dim = in.resolved_dim();
    InclusionInstance inst{parse_legendre(in.f, dim), parse_operator(in.a, dim), in.lambda,
                           fit(parse_vector(in.x, "x"), dim, "x"), fit(parse_vector(eta_text, "eta"), dim, "eta")};
    inst.validate();
    const InclusionSolution sol = solve_inclusion(inst);
    const VerificationReport rep = verify_solution(inst, sol.y, sol.xi);
    std::cout << "y = " << format_vector(sol.y) << "\n"
              << "xi = " << format_vector(sol.xi) << "\n"
              << "strategy = " << to_string(sol.strategy) << "\n"
              << "inner_residual = " << format_number(sol.inner_residual) << "\n"
              << "membership_residual = " << format_number(rep.membership_residual)
              << (rep.membership_ok ? "  ok" : "  FAIL") << "\n"
              << "identity_residual = " << format_number(rep.identity_residual)
              << (rep.identity_ok ? "  ok" : "  FAIL") << "\n"
              << (rep.passed() ? "pass" : "fail") << "\n";
    return rep.passed() ? kOk : kSolver;
}

struct RadiusFlags {
    std::string form = "ss";
    double sigma = 0.5;
    double nu = 0.5;
    double bound = 1.0;
    std::string metric;
    int probes = 64;
    std::uint64_t seed = 1;
};

int cmd_radius(const InclusionFlags& in, const RadiusFlags& rf) {
    const int dim = in.resolved_dim();
    const LegendreFn f = parse_legendre(in.f, dim);
    const MonotoneOp a = parse_operator(in.a, dim);
    const Vector x = fit(parse_vector(in.x, "x"), dim, "x");

    std::optional<StronglyImplicitSpec> spec;
    if (rf.form == "ss") {
        spec = StronglyImplicitSpec::solodov_svaiter(rf.sigma);
    } else if (rf.form == "ips") {
        spec = StronglyImplicitSpec::iusem_pennanen_svaiter(rf.nu);
    } else if (rf.form == "pls") {
        const SpdMetric m = rf.metric.empty() ? SpdMetric::identity(dim)
                                              : SpdMetric::diagonal(fit(parse_vector(rf.metric, "metric"), dim, "metric"));
        spec = StronglyImplicitSpec::parente_lotito_solodov(rf.sigma, m);
    } else if (rf.form == "norm") {
        spec = StronglyImplicitSpec::norm_bound(rf.bound);
    } else {
        throw ConfigError("--form: expected ss, ips, pls or norm, got '" + rf.form + "'");
    }

    RadiusOptions opt;
    opt.probes = rf.probes;
    opt.seed = rf.seed;
    const RadiusReport rep = radius_search(f, a, in.lambda, x, *spec, opt);
    std::cout << "form = " << spec->name() << "\n"
              << "radius = " << format_number(rep.radius) << "\n"
              << "theta0 = " << format_number(rep.theta0) << "\n"
              << "probes_evaluated = " << rep.probes_evaluated << "\n"
              << "halvings = " << rep.halvings_used << "\n";
    return kOk;
}

int exit_for(Termination t) {
    switch (t) {
        case Termination::ZeroDetected:
        case Termination::SchemeTerminated:
            return kOk;
        case Termination::IterationBudget:
            return kBudget;
        case Termination::SolverFailure:
            return kSolver;
        case Termination::StrongImplicitness:
            return kImplicit;
    }
    return kSolver;
}

int cmd_run(const std::string& path) {
    ExperimentConfig cfg = load_config(path);
    apply_env_overrides(cfg);
    const IterateTrace trace = run(cfg.scheme, cfg.problem(), cfg.scheme_params, cfg.policy, cfg.stop);
    write_run_outputs(cfg, trace);
    std::cout << trace_summary(trace).dump(2) << "\n";
    if (!trace.error.empty()) std::cerr << "proxlab: " << trace.error << "\n";
    return exit_for(trace.termination);
}

int cmd_check(const std::string& name, std::uint64_t seed) {
    const auto suite = suite_from_string(name);
    if (!suite) throw ConfigError("check: unknown suite '" + name + "'");
    const CheckReport rep =
        run_checks(*suite, seed, [](const CheckLine& line) { std::cout << format_line(line) << std::endl; });
    std::cout << rep.passed() << " passed, " << rep.failed() << " failed\n";
    return rep.ok() ? kOk : kUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inexact resolvents and perturbed proximal point schemes"};
    app.require_subcommand(1);

    CLI::App* catalog = app.add_subcommand("catalog", "list function and operator specs");

    InclusionFlags prox_in;
    std::string eta = "0";
    CLI::App* prox = app.add_subcommand("prox", "solve one inexact resolvent inclusion");
    prox_in.add(prox);
    prox->add_option("--eta", eta, "error vector, comma separated")->capture_default_str();

    InclusionFlags rad_in;
    RadiusFlags rf;
    CLI::App* radius = app.add_subcommand("radius", "sample the strongly implicit radius at x");
    rad_in.add(radius);
    radius->add_option("--form", rf.form, "ss, ips, pls or norm")->capture_default_str();
    radius->add_option("--sigma", rf.sigma, "sigma for ss and pls")->capture_default_str();
    radius->add_option("--nu", rf.nu, "nu for ips")->capture_default_str();
    radius->add_option("--bound", rf.bound, "bound for norm")->capture_default_str();
    radius->add_option("--metric", rf.metric, "diagonal metric for pls, comma separated");
    radius->add_option("--probes", rf.probes, "directions per radius")->capture_default_str()->check(CLI::Range(1, 100000));
    radius->add_option("--seed", rf.seed, "direction seed")->capture_default_str();

    std::string config_path;
    CLI::App* runc = app.add_subcommand("run", "run one experiment from a JSON config");
    runc->add_option("config", config_path, "config file")->required();

    std::string suite = "all";
    std::uint64_t seed = 1;
    CLI::App* check = app.add_subcommand("check", "run the property suites");
    check->add_option("suite", suite, "numerics, legendre, operators, resolvent, algorithms or all")
        ->capture_default_str();
    check->add_option("--seed", seed, "suite seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*catalog) return cmd_catalog();
        if (*prox) return cmd_prox(prox_in, eta);
        if (*radius) return cmd_radius(rad_in, rf);
        if (*runc) return cmd_run(config_path);
        if (*check) return cmd_check(suite, seed);
    } catch (const StrongImplicitnessError& e) {
        std::cerr << "proxlab: " << e.what() << "\n";
        return kImplicit;
    } catch (const SolverError& e) {
        std::cerr << "proxlab: " << e.what() << "\n";
        return kSolver;
    } catch (const UnsupportedError& e) {
        std::cerr << "proxlab: " << e.what() << "\n";
        return kSolver;
    } catch (const Error& e) {
        std::cerr << "proxlab: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
