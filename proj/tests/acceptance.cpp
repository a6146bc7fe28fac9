// One PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.

#include "cli_runner.hpp"

#include "proxlab/algorithms.hpp"
#include "proxlab/check.hpp"
#include "proxlab/errors.hpp"
#include "proxlab/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace proxlab;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Collects sub-claims of one criterion.
struct Verdict {
    bool ok = true;
    std::vector<std::string> parts;

    void claim(bool pass, const std::string& what) {
        ok = ok && pass;
        parts.push_back((pass ? "" : "FAILED ") + what);
    }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<void(Verdict&)>& body) {
    Verdict v;
    try {
        body(v);
    } catch (const std::exception& e) {
        v.claim(false, std::string("exception: ") + e.what());
    }
    std::string line = std::string(v.ok ? "PASS" : "FAIL") + "  criterion " + std::to_string(id) + "  " + title;
    for (std::size_t i = 0; i < v.parts.size(); ++i) line += (i == 0 ? ": " : "; ") + v.parts[i];
    std::puts(line.c_str());
    std::fflush(stdout);
    if (!v.ok) ++failures;
}

double dist(const Vector& a, const Vector& b) { return (a - b).norm(); }

void inclusion_round_trip(Verdict& v) {
    Rng rng(20240601);
    double worst_mem = 0, worst_id = 0, worst_agree = 0;
    int one_d = 0;
    for (int k = 0; k < 10000; ++k) {
        const InclusionInstance inst = random_instance(rng, 1 + k % 5);
        const InclusionSolution sol = solve_inclusion(inst);
        const VerificationReport rep = verify_solution(inst, sol.y, sol.xi);
        worst_mem = std::max(worst_mem, rep.membership_residual);
        worst_id = std::max(worst_id, rep.identity_residual);
        if (inst.f.dim() == 1) {
            ++one_d;
            const Vector w = inst.lambda * inst.eta + inst.f.gradient(inst.x);
            worst_agree = std::max(worst_agree, dist(sol.y, protoresolvent_grid(inst.f, inst.a, inst.lambda, w)));
        }
    }
    v.claim(worst_mem <= 1e-8, "10000 instances, max membership residual " + num(worst_mem) + " <= 1e-8");
    v.claim(worst_id <= 1e-10, "max identity residual " + num(worst_id) + " <= 1e-10");
    v.claim(one_d > 0 && worst_agree <= 1e-6,
            std::to_string(one_d) + " 1-D instances, max |y_main - y_grid| " + num(worst_agree) + " <= 1e-6");
}

void conjugacy(Verdict& v) {
    Rng rng(7);
    double fy = 0, rt = 0;
    long n = 0;
    for (int d = 1; d <= 4; ++d) {
        for (const LegendreFn& f : legendre_samples(d, rng)) {
            for (int k = 0; k < 1000; ++k, ++n) {
                const Vector x = rng.uniform_vector(d, -3, 3);
                const Vector g = f.gradient(x);
                const double fx = f.value(x);
                fy = std::max(fy, std::abs(fx + f.conjugate_value(g) - pairing(g, x)) / (1 + std::abs(fx)));
                rt = std::max(rt, dist(f.grad_inverse(g), x) / (1 + x.norm()));
            }
        }
    }
    double grid = 0;
    const LegendreFn c = LegendreFn::cosh_sum(1);
    for (int k = -50; k <= 50; ++k) {
        const double u = k * 0.1;
        grid = std::max(grid, std::abs(c.conjugate_value(scalar(u)) - (u * std::asinh(u) - std::sqrt(1 + u * u))));
    }
    v.claim(fy <= 1e-8, std::to_string(n) + " points, Fenchel-Young gap " + num(fy) + " <= 1e-8");
    v.claim(rt <= 1e-8, "gradient inverse round trip " + num(rt) + " <= 1e-8");
    v.claim(grid <= 1e-10, "cosh conjugate on [-5, 5] step 0.1, error " + num(grid) + " <= 1e-10");
}

void holder(Verdict& v) {
    Rng rng(11);
    long pairs = 0;
    int violations = 0;
    double worst = -INFINITY;
    for (int d = 1; d <= 3; ++d) {
        for (const MonotoneOp& a : operator_samples(d, rng)) {
            const HolderReport h = holder_certify(LegendreFn::half_squared_norm(d), a, rng.uniform(0.2, 3.0), 2.0, 1.0,
                                                  1000, rng.uniform_int(1, 1 << 30));
            pairs += h.samples;
            violations += h.violations;
            worst = std::max(worst, h.max_violation);
        }
    }
    const HolderReport abs_only = holder_certify(LegendreFn::half_squared_norm(1),
                                                 MonotoneOp::subdiff_abs(Vector::Zero(1)), 1.0, 2.0, 1.0, 10000, 3);
    v.claim(violations == 0 && abs_only.violations == 0,
            "Euclidean (rho 2, beta 1): " + std::to_string(pairs + abs_only.samples) + " pairs over the catalog, " +
                std::to_string(violations + abs_only.violations) + " violations, max(lhs - bound) " +
                num(std::max(worst, abs_only.max_violation)));
    const HolderReport q = holder_certify(LegendreFn::power_euclidean(1, 4.0), MonotoneOp::subdiff_abs(Vector::Zero(1)),
                                          1.0, 4.0, 0.25, 10000, 5);
    v.claim(q.violations == 0 && q.samples == 10000 && std::abs(q.exponent - 1.0 / 3.0) < 1e-15,
            "quartic (rho 4, beta 1/4, exponent " + num(q.exponent) + "): " + std::to_string(q.samples) + " pairs, " +
                std::to_string(q.violations) + " violations, max(lhs - bound) " + num(q.max_violation));
}

void eckstein(Verdict& v) {
    const Vector z = (Vector(2) << 1.0, 2.0).finished();
    const Problem p{LegendreFn::half_squared_norm(2),
                    {MonotoneOp::gradient_of_convex(LegendreFn::half_squared_norm(2), z)},
                    Vector::Zero(2),
                    z};
    const PerturbationPolicy pol = PerturbationPolicy::summable_geometric(0.1, 0.5, 4);
    const IterateTrace t = run(Scheme::Eckstein, p, {}, pol, {200, 1e-8});
    const double d = dist(t.last().x, z);
    v.claim(t.error.empty() && t.iterations() <= 200 && d <= 1e-6,
            "stopped after " + std::to_string(t.iterations()) + " iterations (" + to_string(t.termination) +
                ") at distance " + num(d) + " <= 1e-6");

    // Same seed, run the full budget to observe the partial sums settle.
    const IterateTrace full = run(Scheme::Eckstein, p, {}, pol, {200, 1e-300});
    bool prefix = full.records.size() >= t.records.size();
    for (std::size_t i = 0; prefix && i < t.records.size(); ++i) prefix = full.records[i].x == t.records[i].x;
    std::vector<double> s;
    for (const auto& r : full.records) s.push_back(r.eckstein_partial_sum);
    // Smallest n0 with sup_{m, k >= n0} |S_m - S_k| <= 1e-8.
    std::size_t n0 = s.size();
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = s.size(); i-- > 0;) {
        lo = std::min(lo, s[i]);
        hi = std::max(hi, s[i]);
        if (hi - lo > 1e-8) break;
        n0 = i;
    }
    const double tail = s.empty() ? INFINITY : s.back();
    v.claim(prefix && n0 + 20 <= s.size(),
            "partial sums of <eta_n, x_n> within 1e-8 of each other from n = " + std::to_string(n0) + " to " +
                std::to_string(s.size() - 1) + " (limit " + num(tail) + ")");
    v.claim(audit_conditions(Scheme::Eckstein, p, {}, t).passed(), "every step re-verifies its inclusion");
}

void solodov_svaiter(Verdict& v) {
    const Vector one = scalar(1);
    const Problem p{LegendreFn::half_squared_norm(1), {MonotoneOp::subdiff_abs(one)}, scalar(5), one};
    SchemeParams sp;
    sp.sigma = 0.5;
    const IterateTrace t = run(Scheme::SolodovSvaiter, p, sp, PerturbationPolicy::radius_fraction(0.5, 5), {500, 1e-6});
    int perturbed = 0;
    for (const auto& r : t.records) perturbed += r.eta_norm > 0;
    v.claim(t.error.empty() && t.last().zero_residual <= 1e-6 && t.iterations() <= 500,
            "zero residual " + num(t.last().zero_residual) + " <= 1e-6 after " + std::to_string(t.iterations()) +
                " iterations, " + std::to_string(perturbed) + " with eta != 0");
    const AuditReport a = audit_conditions(Scheme::SolodovSvaiter, p, sp, t);
    v.claim(a.passed(), std::to_string(a.checked) + " checks on accepted iterates: membership, identity, relative error, update");
    const AuditReport f = audit_fejer(t, one);
    v.claim(f.passed(), "Fejer toward 1 at " + std::to_string(f.checked) + " steps (worst increase " + num(f.worst) + ")");
    const double r = radius_search(LegendreFn::half_squared_norm(1), MonotoneOp::subdiff_abs(Vector::Zero(1)), 1.0,
                                   scalar(2), StronglyImplicitSpec::solodov_svaiter(0.5))
                         .radius;
    v.claim(r >= 0.4 && r <= 0.55, "radius at x = 2 is " + num(r) + " in [0.4, 0.55]");
}

void ips(Verdict& v) {
    const double a = ips_nu(0, 0.25, 1), b = ips_nu(0.25, 0, 1);
    v.claim(std::abs(a) <= 1e-12 && std::abs(b - 0.5) <= 1e-12,
            "nu(0, 0.25, 1) = " + num(a) + ", nu(0.25, 0, 1) = " + num(b));
    const Vector one = scalar(1);
    const Problem p{LegendreFn::half_squared_norm(1), {MonotoneOp::subdiff_abs(one)}, scalar(5), one};
    SchemeParams sp;
    sp.nu = 0.3;
    const IterateTrace t =
        run(Scheme::IusemPennanenSvaiter, p, sp, PerturbationPolicy::radius_fraction(0.5, 6), {500, 1e-6});
    int perturbed = 0;
    for (const auto& r : t.records) perturbed += r.eta_norm > 0;
    v.claim(t.error.empty() && t.last().zero_residual <= 1e-6 && t.iterations() <= 500,
            "zero residual " + num(t.last().zero_residual) + " <= 1e-6 after " + std::to_string(t.iterations()) +
                " iterations, " + std::to_string(perturbed) + " with eta != 0");
    const AuditReport au = audit_conditions(Scheme::IusemPennanenSvaiter, p, sp, t);
    v.claim(au.passed(), std::to_string(au.checked) + " checks on accepted iterates: inclusion, relative error, update");
}

void pls(Verdict& v) {
    const Vector z = (Vector(3) << 1.0, -1.0, 2.0).finished();
    const Problem p{LegendreFn::half_squared_norm(3), {MonotoneOp::affine(Matrix::Identity(3, 3), -z)}, Vector::Zero(3), z};
    SchemeParams sp;
    sp.sigma = 0.3;
    sp.tau = 1.0;
    sp.metric.kind = MetricSchedule::Kind::RandomSpd;
    sp.metric.min_eigenvalue = 0.5;
    sp.metric.max_eigenvalue = 2.0;
    const IterateTrace t =
        run(Scheme::ParenteLotitoSolodov, p, sp, PerturbationPolicy::radius_fraction(0.5, 7), {1000, 1e-6});
    double lo = INFINITY, hi = 0;
    for (const auto& r : t.records) {
        if (!r.metric) continue;
        const SpdMetric m(*r.metric);
        lo = std::min(lo, m.min_eigenvalue());
        hi = std::max(hi, m.max_eigenvalue());
    }
    v.claim(t.error.empty() && t.last().zero_residual <= 1e-6 && t.iterations() <= 1000,
            "zero residual " + num(t.last().zero_residual) + " <= 1e-6 after " + std::to_string(t.iterations()) +
                " iterations");
    v.claim(lo >= 0.5 - 1e-12 && hi <= 2.0 + 1e-12, "metric spectra within [" + num(lo) + ", " + num(hi) + "]");
    const AuditReport au = audit_conditions(Scheme::ParenteLotitoSolodov, p, sp, t);
    v.claim(au.passed(), std::to_string(au.checked) + " checks on accepted iterates under the drawn metrics");
    const SchemeStep s =
        pls_step(MonotoneOp::identity(1), 1.0, SpdMetric::identity(1), 0.3, 1.0, scalar(1), scalar(0));
    const double e = std::max({std::abs(s.y(0) - 0.5), std::abs(s.xi(0) - 0.5), std::abs(s.x_next(0) - 0.5)});
    v.claim(e <= 1e-12, "1-D step y = " + num(s.y(0)) + ", xi = " + num(s.xi(0)) + ", x1 = " + num(s.x_next(0)));
}

void halfspace_projection(Verdict& v) {
    const MonotoneOp abs1 = MonotoneOp::subdiff_abs(Vector::Zero(1));
    const Problem p{LegendreFn::half_squared_norm(1), {abs1, MonotoneOp::identity(1)}, scalar(1), Vector::Zero(1)};
    for (const auto& [label, pol] : {std::pair{"eta = 0", PerturbationPolicy::zero()},
                                     std::pair{"eta geometric(0.05, 0.5)",
                                               PerturbationPolicy::summable_geometric(0.05, 0.5, 8)}}) {
        const IterateTrace t = run(Scheme::HalfspaceProjection, p, {}, pol, {2000, 1e-8});
        const double d = std::abs(t.last().x(0));
        v.claim(t.error.empty() && d <= 1e-4 && t.iterations() <= 2000,
                std::string(label) + ": |x_n - 0| = " + num(d) + " after " + std::to_string(t.iterations()));
        const AuditReport c = audit_rs_containment(t, Vector::Zero(1));
        v.claim(c.passed(), "0 in C_n and Q_n at " + std::to_string(c.checked) + " halfspaces");
        v.claim(audit_conditions(Scheme::HalfspaceProjection, p, {}, t).passed(), "conditions re-verified");
    }
    const RsIterate r = rs_step(LegendreFn::half_squared_norm(1), {MonotoneOp::identity(1)}, {1.0}, {scalar(0)},
                                scalar(1), scalar(1));
    v.claim(std::abs(r.x_next(0) - 0.75) <= 1e-10, "N = 1 first step x1 = " + num(r.x_next(0)));
}

void degenerate_starts(Verdict& v) {
    const Vector z2 = (Vector(2) << 0.5, -1.0).finished();
    struct Start {
        const char* name;
        Problem problem;
    };
    const std::vector<Start> starts{
        {"abs shift 1", {LegendreFn::half_squared_norm(1), {MonotoneOp::subdiff_abs(scalar(1))}, scalar(1), scalar(1)}},
        {"abs plus shifted identity, zero at the kink",
         {LegendreFn::half_squared_norm(1),
          {MonotoneOp::sum({MonotoneOp::subdiff_abs(Vector::Zero(1)), MonotoneOp::affine(Matrix::Identity(1, 1), scalar(-0.3))})},
          scalar(0),
          scalar(0)}},
        {"affine zero in R^2",
         {LegendreFn::half_squared_norm(2), {MonotoneOp::affine(Matrix::Identity(2, 2), -z2)}, z2, z2}},
        {"box interior in R^2",
         {LegendreFn::half_squared_norm(2),
          {MonotoneOp::normal_cone_box(Vector::Constant(2, -1), Vector::Constant(2, 1))},
          z2 / 2,
          z2 / 2}},
    };
    int runs = 0, ok = 0;
    std::string bad;
    for (const Start& s : starts) {
        for (Scheme scheme : {Scheme::Eckstein, Scheme::SolodovSvaiter, Scheme::IusemPennanenSvaiter,
                              Scheme::ParenteLotitoSolodov, Scheme::HalfspaceProjection}) {
            SchemeParams sp;
            if (scheme == Scheme::IusemPennanenSvaiter) sp.nu = 0.3;
            const IterateTrace t = run(scheme, s.problem, sp, PerturbationPolicy::zero(), {100, 1e-8});
            ++runs;
            const bool pass = t.termination == Termination::ZeroDetected && t.iterations() == 0 &&
                              t.last().zero_residual <= 1e-8;
            ok += pass;
            if (!pass && bad.empty()) bad = std::string(" first failure: ") + to_string(scheme) + " on " + s.name;
        }
    }
    v.claim(ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " runs stop at n = 0 with the zero certified" + bad);
    const SchemeStep ss = ss_step(MonotoneOp::subdiff_abs(scalar(1)), 1.0, 0.5, scalar(1), scalar(0));
    const SchemeStep pl =
        pls_step(MonotoneOp::subdiff_abs(scalar(1)), 1.0, SpdMetric::diagonal(scalar(2)), 0.3, 1.0, scalar(1), scalar(0));
    v.claim(ss.status == StepStatus::Terminate && pl.status == StepStatus::Terminate,
            "ss and pls steps report terminate at the zero");
}

void determinism(Verdict& v) {
    const auto dir = scratch_dir("acceptance");
    const std::vector<std::pair<std::string, std::string>> configs{
        {"ss", R"({"space_dim": 1, "operator": "abs:w=1,shift=1", "scheme": "ss",
          "scheme_params": {"mu": 1, "sigma": 0.5}, "x0": [5],
          "policy": {"kind": "radius_fraction", "fraction": 0.5}, "seed": 42, "output_path": "OUT"})"},
        {"pls", R"({"space_dim": 3, "operator": "affine:identity,b=-1,1,-2", "scheme": "pls",
          "scheme_params": {"c": 1, "sigma": 0.3, "metric": {"kind": "random_spd", "min": 0.5, "max": 2}},
          "x0": [0, 0, 0], "policy": {"kind": "radius_fraction", "fraction": 0.5}, "seed": 42,
          "output_path": "OUT"})"},
        {"rs", R"({"space_dim": 2, "operators": ["abs:w=1", "identity"], "scheme": "rs",
          "x0": [1, -2], "policy": {"kind": "summable_geometric", "c": 0.05, "q": 0.5}, "seed": 42,
          "output_path": "OUT"})"},
    };
    for (const auto& [name, text] : configs) {
        std::string bodies[2];
        int codes[2];
        for (int k = 0; k < 2; ++k) {
            const auto out = dir / (name + std::to_string(k) + ".csv");
            std::string cfg = text;
            cfg.replace(cfg.find("OUT"), 3, out.string());
            const auto path = dir / (name + std::to_string(k) + ".json");
            write_file(path, cfg);
            codes[k] = run_cli("run " + path.string()).code;
            bodies[k] = read_file(out);
        }
        int rows = 0;
        for (char c : bodies[0]) rows += c == '\n';
        // A budget stop (exit 4) is fine here; only the bytes matter.
        v.claim(codes[0] == codes[1] && (codes[0] == 0 || codes[0] == 4) && rows > 2 && bodies[0] == bodies[1],
                name + ": two runs, exit " + std::to_string(codes[0]) + ", " + std::to_string(rows - 1) +
                    " rows, bodies identical");
    }
    // The environment seed changes the draw but stays reproducible.
    std::string cfg = configs[0].second;
    cfg.replace(cfg.find("OUT"), 3, (dir / "env.csv").string());
    write_file(dir / "env.json", cfg);
    const int c1 = run_cli("run " + (dir / "env.json").string(), "PROXLAB_SEED=9").code;
    const std::string e1 = read_file(dir / "env.csv");
    const int c2 = run_cli("run " + (dir / "env.json").string(), "PROXLAB_SEED=9").code;
    const std::string e2 = read_file(dir / "env.csv");
    v.claim(c1 == 0 && c2 == 0 && e1 == e2, "PROXLAB_SEED=9: two runs identical");
    std::filesystem::remove_all(dir);
}

}  // namespace

int main() {
    report(1, "inexact inclusion round trip", inclusion_round_trip);
    report(2, "conjugacy", conjugacy);
    report(3, "Holder certification", holder);
    report(4, "Eckstein convergence", eckstein);
    report(5, "Solodov-Svaiter", solodov_svaiter);
    report(6, "Iusem-Pennanen-Svaiter", ips);
    report(7, "Parente-Lotito-Solodov", pls);
    report(8, "rs halfspace projection", halfspace_projection);
    report(9, "degenerate starts", degenerate_starts);
    report(10, "determinism", determinism);
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
