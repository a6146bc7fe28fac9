#include "proxlab/check.hpp"

#include "proxlab/algorithms.hpp"
#include "proxlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace proxlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Accumulates one suite line: a sample count, the worst observed value and
// the first failure.
class Line {
public:
    Line(std::string suite, std::string name) {
        line_.suite = std::move(suite);
        line_.name = std::move(name);
        line_.passed = true;
    }

    void record(double value, bool ok, const std::string& why = {}) {
        ++line_.samples;
        if (std::isfinite(value)) line_.worst = std::max(line_.worst, value);
        if (!ok && line_.passed) {
            line_.passed = false;
            line_.detail = why.empty() ? "value " + format_number(value) : why;
        }
    }

    void fail(const std::string& why) {
        ++line_.samples;
        if (line_.passed) line_.detail = why;
        line_.passed = false;
    }

    void note(const std::string& detail) {
        if (line_.passed) line_.detail = detail;
    }

    CheckLine done() const { return line_; }

private:
    CheckLine line_;
};

class Runner {
public:
    Runner(std::uint64_t seed, const std::function<void(const CheckLine&)>& cb) : seed_(seed), cb_(cb) {}

    template <class F>
    void run(const std::string& suite, const std::string& name, F&& body) {
        Line line(suite, name);
        try {
            body(line);
        } catch (const std::exception& e) {
            line.fail(std::string("exception: ") + e.what());
        }
        report_.lines.push_back(line.done());
        if (cb_) cb_(report_.lines.back());
    }

    Rng rng(std::uint64_t salt) const { return Rng(seed_ * 0x9e3779b97f4a7c15ULL + salt); }
    CheckReport take() { return std::move(report_); }

private:
    std::uint64_t seed_;
    const std::function<void(const CheckLine&)>& cb_;
    CheckReport report_;
};

Vector central_difference(const LegendreFn& f, const Vector& x) {
    const double h = 1e-5 * (1.0 + x.norm());
    Vector g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        Vector p = x, m = x;
        p(i) += h;
        m(i) -= h;
        g(i) = (f.value(p) - f.value(m)) / (2.0 * h);
    }
    return g;
}

// ---------------------------------------------------------------------------

void numerics_suite(Runner& r) {
    r.run("numerics", "pairing symmetry", [&](Line& line) {
        Rng rng = r.rng(11);
        for (int k = 0; k < 1000; ++k) {
            const int d = rng.uniform_int(1, 8);
            const Vector a = rng.normal_vector(d), b = rng.normal_vector(d);
            const double gap = std::abs(pairing(a, b) - pairing(b, a));
            line.record(gap, gap <= 1e-15 * (1.0 + a.norm() * b.norm()));
        }
    });
    r.run("numerics", "metric norm squared equals <Mw, w>", [&](Line& line) {
        Rng rng = r.rng(12);
        for (int k = 0; k < 1000; ++k) {
            const int d = rng.uniform_int(1, 8);
            const SpdMetric m(rng.spd_matrix(d, 0.1, 10.0));
            const Vector w = rng.normal_vector(d);
            const double lhs = std::pow(metric_norm(m, w), 2), rhs = pairing(m.apply(w), w);
            const double rel = std::abs(lhs - rhs) / std::max(1e-300, std::abs(rhs));
            line.record(rel, rel <= 1e-12);
        }
    });
    r.run("numerics", "spd_solve round trip", [&](Line& line) {
        Rng rng = r.rng(13);
        for (int k = 0; k < 1000; ++k) {
            const int d = rng.uniform_int(1, 8);
            const SpdMetric m(rng.spd_matrix(d, 0.1, 10.0));
            const Vector b = rng.normal_vector(d);
            const double res = (m.apply(spd_solve(m, b)) - b).norm() / (1.0 + b.norm());
            line.record(res, res <= 1e-10);
        }
    });
}

void legendre_suite(Runner& r) {
    auto each_function = [&](std::uint64_t salt, const auto& body) {
        Rng rng = r.rng(salt);
        for (int d = 1; d <= 4; ++d) {
            for (const LegendreFn& f : legendre_samples(d, rng)) body(f, rng);
        }
    };
    r.run("legendre", "Fenchel-Young equality", [&](Line& line) {
        each_function(21, [&](const LegendreFn& f, Rng& rng) {
            for (int k = 0; k < 1000; ++k) {
                const Vector x = rng.uniform_vector(f.dim(), -3.0, 3.0);
                const Vector g = f.gradient(x);
                const double fx = f.value(x);
                const double gap = std::abs(fx + f.conjugate_value(g) - pairing(g, x)) / (1.0 + std::abs(fx));
                line.record(gap, gap <= 1e-8, f.spec() + " gap " + format_number(gap));
            }
        });
    });
    r.run("legendre", "gradient inverse round trip", [&](Line& line) {
        each_function(22, [&](const LegendreFn& f, Rng& rng) {
            for (int k = 0; k < 1000; ++k) {
                const Vector x = rng.uniform_vector(f.dim(), -3.0, 3.0);
                const double res = (f.grad_inverse(f.gradient(x)) - x).norm() / (1.0 + x.norm());
                line.record(res, res <= 1e-8, f.spec() + " residual " + format_number(res));
            }
        });
    });
    r.run("legendre", "conjugate formula vs cosh closed form", [&](Line& line) {
        const LegendreFn f = LegendreFn::cosh_sum(1);
        for (int k = -50; k <= 50; ++k) {
            const double u = k / 10.0;
            const double closed = u * std::asinh(u) - std::sqrt(1.0 + u * u);
            const double gap = std::abs(f.conjugate_value(Vector::Constant(1, u)) - closed);
            line.record(gap, gap <= 1e-10);
        }
    });
    r.run("legendre", "conjugate formula vs catalog closed forms", [&](Line& line) {
        each_function(23, [&](const LegendreFn& f, Rng& rng) {
            for (int k = 0; k < 200; ++k) {
                const Vector u = rng.uniform_vector(f.dim(), -3.0, 3.0);
                const double a = f.conjugate_value(u), b = f.conjugate_closed_form(u);
                const double gap = std::abs(a - b) / (1.0 + std::abs(b));
                line.record(gap, gap <= 1e-8, f.spec());
            }
        });
    });
    r.run("legendre", "Bregman nonnegativity and definiteness", [&](Line& line) {
        each_function(24, [&](const LegendreFn& f, Rng& rng) {
            for (int k = 0; k < 500; ++k) {
                const Vector x = rng.uniform_vector(f.dim(), -3.0, 3.0);
                const Vector y = k % 5 == 0 ? Vector(x) : Vector(rng.uniform_vector(f.dim(), -3.0, 3.0));
                const double dv = bregman_distance(f, y, x);
                line.record(-dv, dv >= -1e-12, f.spec() + " negative distance");
                if (dv <= 1e-12) line.record(0.0, (y - x).norm() <= 1e-6, f.spec() + " D = 0 with y != x");
            }
        });
    });
    r.run("legendre", "gradient vs central differences", [&](Line& line) {
        each_function(25, [&](const LegendreFn& f, Rng& rng) {
            for (int k = 0; k < 200; ++k) {
                const Vector x = rng.uniform_vector(f.dim(), -3.0, 3.0);
                const Vector g = f.gradient(x);
                const double rel = (g - central_difference(f, x)).norm() / std::max(1.0, g.norm());
                line.record(rel, rel <= 1e-6, f.spec() + " at " + format_vector(x));
            }
        });
    });
    r.run("legendre", "diagnostics accept the catalog", [&](Line& line) {
        each_function(26, [&](const LegendreFn& f, Rng&) {
            const DiagnosticsReport rep = diagnostics(f, 200, 7);
            line.record(rep.max_round_trip_residual, rep.all_passed(), f.spec() + " flagged");
        });
    });
    r.run("legendre", "diagnostics flag sqrt(1 + x^2)", [&](Line& line) {
        ProbeFunction p;
        p.dim = 1;
        p.value = [](const Vector& x) { return std::sqrt(1.0 + x(0) * x(0)); };
        p.gradient = [](const Vector& x) { return Vector::Constant(1, x(0) / std::sqrt(1.0 + x(0) * x(0))); };
        const DiagnosticsReport rep = diagnostics(p, 200, 7);
        line.record(rep.coercivity_failures, !rep.super_coercive(), "not flagged");
    });
}

void operators_suite(Runner& r) {
    r.run("operators", "monotonicity of sampled graph pairs", [&](Line& line) {
        Rng rng = r.rng(31);
        for (int d = 1; d <= 3; ++d) {
            for (const MonotoneOp& a : operator_samples(d, rng)) {
                for (int k = 0; k < 10000 / d; ++k) {
                    const GraphPoint p = a.sample_graph(rng), q = a.sample_graph(rng);
                    const double s = pairing(p.xi - q.xi, p.y - q.y);
                    const double floor = -1e-10 * (1.0 + (p.xi - q.xi).norm() * (p.y - q.y).norm());
                    line.record(-s, s >= floor, a.spec() + " slack " + format_number(s));
                }
            }
        }
    });
    r.run("operators", "scaling law of membership residuals", [&](Line& line) {
        Rng rng = r.rng(32);
        for (int d = 1; d <= 3; ++d) {
            for (const MonotoneOp& a : operator_samples(d, rng)) {
                for (int k = 0; k < 200; ++k) {
                    const double lam = rng.uniform(0.1, 5.0);
                    const GraphPoint p = a.sample_graph(rng);
                    const Vector xi = p.xi + rng.normal_vector(d);
                    const double lhs = MonotoneOp::scaled(lam, a).membership_residual(p.y, xi);
                    const double rhs = lam * a.membership_residual(p.y, xi / lam);
                    const double gap = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
                    line.record(gap, gap <= 1e-12, a.spec());
                }
            }
        }
    });
    r.run("operators", "enlargement residual nonincreasing in eps", [&](Line& line) {
        Rng rng = r.rng(33);
        for (int d = 1; d <= 2; ++d) {
            for (const MonotoneOp& a : operator_samples(d, rng)) {
                for (int k = 0; k < 10; ++k) {
                    const GraphPoint p = a.sample_graph(rng);
                    const Vector xi = p.xi + rng.normal_vector(d);
                    double prev = kInf;
                    for (double eps : {0.0, 0.1, 0.5, 1.0, 2.0}) {
                        const double v = enlargement_residual(a, eps, p.y, xi, 256);
                        line.record(v - prev, v <= prev, a.spec());
                        prev = v;
                    }
                }
            }
        }
    });
    r.run("operators", "zero residual vanishes exactly on zero sets", [&](Line& line) {
        const LegendreFn euclid1 = LegendreFn::half_squared_norm(1);
        const MonotoneOp shifted = MonotoneOp::subdiff_abs(Vector::Constant(1, 1.0));
        for (double lam : {0.5, 1.0, 2.0}) {
            line.record(zero_residual(shifted, euclid1, lam, Vector::Constant(1, 1.0)),
                        zero_residual(shifted, euclid1, lam, Vector::Constant(1, 1.0)) <= 1e-8, "at the zero");
            for (double x : {-2.0, 0.0, 0.5, 0.999, 1.001, 3.0}) {
                const double v = zero_residual(shifted, euclid1, lam, Vector::Constant(1, x));
                line.record(0.0, v > 1e-8, "positive off the zero set at " + format_number(x));
            }
        }
        const LegendreFn euclid2 = LegendreFn::half_squared_norm(2);
        const MonotoneOp box = MonotoneOp::normal_cone_box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
        Rng rng = r.rng(34);
        for (int k = 0; k < 200; ++k) {
            const Vector x = rng.uniform_vector(2, -1.0, 1.0);
            line.record(zero_residual(box, euclid2, 1.0, x), zero_residual(box, euclid2, 1.0, x) <= 1e-8,
                        "box interior");
        }
        const Vector z = (Vector(2) << 1.0, -2.0).finished();
        const MonotoneOp aff = MonotoneOp::affine(Matrix::Identity(2, 2), -z);
        line.record(zero_residual(aff, euclid2, 1.0, z), zero_residual(aff, euclid2, 1.0, z) <= 1e-8, "affine zero");
        line.record(0.0, zero_residual(aff, euclid2, 1.0, z + Vector::Constant(2, 0.01)) > 1e-8, "affine off-zero");
    });
}

void resolvent_suite(Runner& r) {
    r.run("resolvent", "inclusion round trip", [&](Line& line) {
        Rng rng = r.rng(41);
        for (int k = 0; k < 10000; ++k) {
            const InclusionInstance inst = random_instance(rng, 1 + k % 5);
            const InclusionSolution sol = solve_inclusion(inst);
            const VerificationReport v = verify_solution(inst, sol.y, sol.xi);
            line.record(std::max(v.membership_residual, v.identity_residual), v.passed(),
                        inst.f.spec() + " / " + inst.a.spec());
        }
    });
    r.run("resolvent", "independent 1-D strategies agree", [&](Line& line) {
        Rng rng = r.rng(42);
        for (int k = 0; k < 2000; ++k) {
            const InclusionInstance inst = random_instance(rng, 1);
            const Vector w = inst.lambda * inst.eta + inst.f.gradient(inst.x);
            const double gap = (protoresolvent(inst.f, inst.a, inst.lambda, w) -
                                protoresolvent_grid(inst.f, inst.a, inst.lambda, w))
                                   .norm();
            line.record(gap, gap <= 1e-6, inst.f.spec() + " / " + inst.a.spec());
        }
    });
    r.run("resolvent", "zero error reproduces the resolvent", [&](Line& line) {
        Rng rng = r.rng(43);
        for (int k = 0; k < 1000; ++k) {
            InclusionInstance inst = random_instance(rng, 1 + k % 4);
            inst.eta.setZero();
            const double gap = (solve_inclusion(inst).y - resolvent(inst.f, inst.a, inst.lambda, inst.x)).norm();
            line.record(gap, gap <= 1e-10);
        }
    });
    r.run("resolvent", "continuous dependence on (x, eta)", [&](Line& line) {
        Rng rng = r.rng(44);
        for (int k = 0; k < 200; ++k) {
            const InclusionInstance inst = random_instance(rng, 1 + k % 3);
            const InclusionSolution base = solve_inclusion(inst);
            const Vector dx = rng.unit_vector(inst.f.dim()), de = rng.unit_vector(inst.f.dim());
            double prev = kInf;
            for (double delta : {1e-2, 1e-3, 1e-4}) {
                InclusionInstance moved = inst;
                moved.x += delta * dx;
                moved.eta += delta * de;
                const InclusionSolution s = solve_inclusion(moved);
                const double change = std::max((s.y - base.y).norm(), (s.xi - base.xi).norm());
                line.record(change, change <= prev + 1e-9, "change grew as delta shrank");
                prev = change;
            }
        }
    });
    r.run("resolvent", "Holder certification", [&](Line& line) {
        Rng rng = r.rng(45);
        int violations = 0;
        double worst = -kInf;
        for (int d = 1; d <= 3; ++d) {
            for (const MonotoneOp& a : operator_samples(d, rng)) {
                const HolderReport h = holder_certify(LegendreFn::half_squared_norm(d), a, rng.uniform(0.2, 3.0), 2.0,
                                                      1.0, 400, rng.uniform_int(1, 1 << 30));
                violations += h.violations;
                worst = std::max(worst, h.max_violation);
                line.record(std::max(0.0, h.max_violation), h.violations == 0, "nonexpansive fails for " + a.spec());
            }
        }
        const HolderReport quartic = holder_certify(LegendreFn::power_euclidean(1, 4.0),
                                                    MonotoneOp::subdiff_abs(Vector::Zero(1)), 1.0, 4.0, 0.25, 10000,
                                                    rng.uniform_int(1, 1 << 30));
        line.record(std::max(0.0, quartic.max_violation), quartic.violations == 0, "quartic exponent 1/3 fails");
        line.note("violations=" + std::to_string(violations + quartic.violations) +
                  " max(lhs - bound)=" + format_number(std::max(worst, quartic.max_violation)));
    });
    r.run("resolvent", "strongly implicit radius", [&](Line& line) {
        const LegendreFn f = LegendreFn::half_squared_norm(1);
        const MonotoneOp a = MonotoneOp::subdiff_abs(Vector::Zero(1));
        const auto ss = StronglyImplicitSpec::solodov_svaiter(0.5);
        const double rad = radius_search(f, a, 1.0, Vector::Constant(1, 2.0), ss).radius;
        line.record(std::abs(rad - 0.5), rad >= 0.4 && rad <= 0.55, "radius " + format_number(rad));
        for (auto [x, sigma] : {std::pair{0.0, 0.5}, std::pair{2.0, 0.0}}) {
            try {
                radius_search(f, a, 1.0, Vector::Constant(1, x), StronglyImplicitSpec::solodov_svaiter(sigma));
                line.fail("theta(0) failure not reported");
            } catch (const StrongImplicitnessError& e) {
                line.record(e.theta0(), e.theta0() <= 1e-12);
            }
        }
    });
}

void algorithms_suite(Runner& r) {
    struct Case {
        std::string name;
        Scheme scheme;
        Problem problem;
        SchemeParams params;
        PerturbationPolicy policy;
        int iters;
    };
    auto cases = [&] {
        std::vector<Case> out;
        const Vector one = Vector::Constant(1, 1.0);
        const Vector zs = (Vector(2) << 1.0, 2.0).finished();
        {
            Problem p{LegendreFn::half_squared_norm(2),
                      {MonotoneOp::gradient_of_convex(LegendreFn::half_squared_norm(2), zs)},
                      Vector::Zero(2),
                      zs};
            out.push_back({"eckstein", Scheme::Eckstein, p, {}, PerturbationPolicy::summable_geometric(0.1, 0.5, 3), 200});
        }
        {
            Problem p{LegendreFn::cosh_sum(2),
                      {MonotoneOp::subdiff_abs(Vector::Constant(2, 0.5))},
                      Vector::Constant(2, 3.0),
                      Vector::Constant(2, 0.5)};
            out.push_back({"eckstein cosh", Scheme::Eckstein, p, {}, PerturbationPolicy::summable_geometric(0.1, 0.5, 4), 300});
        }
        {
            Problem p{LegendreFn::half_squared_norm(1), {MonotoneOp::subdiff_abs(one)}, Vector::Constant(1, 5.0), one};
            SchemeParams sp;
            sp.sigma = 0.5;
            out.push_back({"ss", Scheme::SolodovSvaiter, p, sp, PerturbationPolicy::radius_fraction(0.5, 5), 500});
        }
        {
            Problem p{LegendreFn::half_squared_norm(1), {MonotoneOp::subdiff_abs(one)}, Vector::Constant(1, 5.0), one};
            SchemeParams sp;
            sp.nu = 0.3;
            out.push_back({"ips", Scheme::IusemPennanenSvaiter, p, sp, PerturbationPolicy::radius_fraction(0.5, 6), 500});
        }
        {
            const Vector z3 = (Vector(3) << 1.0, -1.0, 2.0).finished();
            Problem p{LegendreFn::half_squared_norm(3), {MonotoneOp::affine(Matrix::Identity(3, 3), -z3)},
                      Vector::Zero(3), z3};
            SchemeParams sp;
            sp.sigma = 0.3;
            sp.metric.kind = MetricSchedule::Kind::RandomSpd;
            out.push_back({"pls", Scheme::ParenteLotitoSolodov, p, sp, PerturbationPolicy::radius_fraction(0.5, 7), 300});
        }
        {
            Problem p{LegendreFn::half_squared_norm(1),
                      {MonotoneOp::subdiff_abs(Vector::Zero(1)), MonotoneOp::identity(1)},
                      one,
                      Vector::Zero(1)};
            out.push_back({"rs", Scheme::HalfspaceProjection, p, {}, PerturbationPolicy::summable_geometric(0.05, 0.5, 8), 300});
        }
        return out;
    }();

    std::vector<IterateTrace> traces;
    for (const Case& c : cases) {
        traces.push_back(run(c.scheme, c.problem, c.params, c.policy, {c.iters, 1e-8}));
    }

    r.run("algorithms", "scheme conditions on every accepted iterate", [&](Line& line) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const Case& c = cases[i];
            if (!traces[i].error.empty()) {
                line.fail(c.name + ": " + traces[i].error);
                continue;
            }
            const AuditReport a = audit_conditions(c.scheme, c.problem, c.params, traces[i]);
            line.record(a.worst, a.passed(), c.name + ": " + a.first_failure);
        }
    });
    r.run("algorithms", "reference runs reach the zero", [&](Line& line) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const double dist = (traces[i].last().x - *cases[i].problem.known_zero).norm();
            line.record(dist, dist <= 1e-4, cases[i].name + " ended at distance " + format_number(dist));
        }
    });
    r.run("algorithms", "zero error matches the classical resolvent", [&](Line& line) {
        Rng rng = r.rng(51);
        for (int k = 0; k < 1000; ++k) {
            const double lam = rng.uniform(0.2, 4.0);
            const double x = rng.uniform(-5.0, 5.0);
            const double s = rng.uniform(-1.0, 1.0);
            const MonotoneOp a = MonotoneOp::subdiff_abs(Vector::Constant(1, s));
            const double z = x - s;
            const double classical = s + (z > lam ? z - lam : (z < -lam ? z + lam : 0.0));
            const Vector xv = Vector::Constant(1, x);
            const SchemeStep ssr = ss_step(a, 1.0 / lam, 0.5, xv, Vector::Zero(1));
            const EcksteinStep ek = eckstein_step(LegendreFn::half_squared_norm(1), a, lam, xv, Vector::Zero(1));
            line.record(std::abs(ssr.y(0) - classical), std::abs(ssr.y(0) - classical) <= 1e-10, "ss");
            line.record(std::abs(ek.x_next(0) - classical), std::abs(ek.x_next(0) - classical) <= 1e-10, "eckstein");
        }
    });
    r.run("algorithms", "projection update lands on the hyperplane", [&](Line& line) {
        Rng rng = r.rng(52);
        for (int k = 0; k < 1000; ++k) {
            const int d = 1 + k % 3;
            const MonotoneOp a = operator_samples(d, rng)[static_cast<std::size_t>(k % 4)];
            const Vector x = rng.uniform_vector(d, -4.0, 4.0);
            const Vector eta = 1e-3 * rng.normal_vector(d);
            const SchemeStep s = ss_step(a, rng.uniform(0.3, 3.0), 0.9, x, eta);
            if (s.status != StepStatus::Advance) continue;
            const double v = std::abs(pairing(s.xi, s.x_next - s.y)) / (1.0 + s.xi.norm() * (x - s.y).norm());
            line.record(v, v <= 1e-10);
        }
    });
    r.run("algorithms", "termination certifies a zero", [&](Line& line) {
        Rng rng = r.rng(53);
        const LegendreFn e1 = LegendreFn::half_squared_norm(1);
        for (int k = 0; k < 500; ++k) {
            const double s = rng.uniform(-2.0, 2.0);
            const MonotoneOp a = MonotoneOp::subdiff_abs(Vector::Constant(1, s));
            const double mu = rng.uniform(0.3, 3.0);
            const Vector x = Vector::Constant(1, k % 2 == 0 ? s : rng.uniform(-4.0, 4.0));
            const SchemeStep st = ss_step(a, mu, 0.5, x, Vector::Zero(1));
            if (st.status != StepStatus::Terminate) continue;
            const double zr = zero_residual(a, e1, 1.0 / mu, x);
            line.record(zr, zr <= 1e-8);
        }
    });
    r.run("algorithms", "common zero inside every C_n and Q_n", [&](Line& line) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            if (cases[i].scheme != Scheme::HalfspaceProjection) continue;
            const AuditReport a = audit_rs_containment(traces[i], *cases[i].problem.known_zero);
            line.record(a.worst, a.passed(), a.first_failure);
        }
    });
    r.run("algorithms", "Fejer monotonicity for ss", [&](Line& line) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            if (cases[i].scheme != Scheme::SolodovSvaiter) continue;
            const AuditReport a = audit_fejer(traces[i], *cases[i].problem.known_zero);
            line.record(a.worst, a.passed(), a.first_failure);
        }
    });
}

}  // namespace

std::optional<Suite> suite_from_string(const std::string& name) {
    for (Suite s : {Suite::Numerics, Suite::Legendre, Suite::Operators, Suite::Resolvent, Suite::Algorithms, Suite::All}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

std::string to_string(Suite s) {
    switch (s) {
        case Suite::Numerics:
            return "numerics";
        case Suite::Legendre:
            return "legendre";
        case Suite::Operators:
            return "operators";
        case Suite::Resolvent:
            return "resolvent";
        case Suite::Algorithms:
            return "algorithms";
        case Suite::All:
            return "all";
    }
    return "unknown";
}

int CheckReport::passed() const {
    return static_cast<int>(std::count_if(lines.begin(), lines.end(), [](const CheckLine& l) { return l.passed; }));
}

int CheckReport::failed() const { return static_cast<int>(lines.size()) - passed(); }

std::string format_line(const CheckLine& line) {
    char head[160];
    std::snprintf(head, sizeof head, "%s  %-10s %-46s samples=%ld worst=%s", line.passed ? "PASS" : "FAIL",
                  line.suite.c_str(), line.name.c_str(), line.samples, format_number(line.worst).c_str());
    std::string out = head;
    if (!line.detail.empty()) out += "  " + line.detail;
    return out;
}

CheckReport run_checks(Suite suite, std::uint64_t seed, const std::function<void(const CheckLine&)>& on_line) {
    Runner r(seed, on_line);
    const bool all = suite == Suite::All;
    if (all || suite == Suite::Numerics) numerics_suite(r);
    if (all || suite == Suite::Legendre) legendre_suite(r);
    if (all || suite == Suite::Operators) operators_suite(r);
    if (all || suite == Suite::Resolvent) resolvent_suite(r);
    if (all || suite == Suite::Algorithms) algorithms_suite(r);
    return r.take();
}

std::vector<LegendreFn> legendre_samples(int dim, Rng& rng) {
    std::vector<LegendreFn> out{
        LegendreFn::half_squared_norm(dim),
        LegendreFn::quadratic(SpdMetric::diagonal(rng.uniform_vector(dim, 0.5, 3.0))),
        LegendreFn::cosh_sum(dim),
        LegendreFn::power_euclidean(dim, 4.0),
        LegendreFn::power_euclidean(dim, 1.5),
        LegendreFn::power_p(dim, 4.0, 4.0),
        LegendreFn::power_p(dim, 1.5, 3.0),
    };
    if (dim > 1) out.push_back(LegendreFn::quadratic(SpdMetric(rng.spd_matrix(dim, 0.5, 3.0))));
    return out;
}

std::vector<MonotoneOp> operator_samples(int dim, Rng& rng) {
    const Matrix b = rng.normal_vector(dim * dim).reshaped(dim, dim);
    const Matrix psd = b * b.transpose() / dim;
    Matrix skew = Matrix::Zero(dim, dim);
    if (dim > 1) {
        const Matrix c = rng.normal_vector(dim * dim).reshaped(dim, dim);
        skew = c - c.transpose();
    }
    const Vector lo = rng.uniform_vector(dim, -2.0, -0.5);
    const Vector hi = rng.uniform_vector(dim, 0.5, 2.0);
    return {
        MonotoneOp::subdiff_abs(rng.uniform_vector(dim, -1.0, 1.0), rng.uniform(0.2, 2.0)),
        MonotoneOp::affine(psd, rng.uniform_vector(dim, -1.0, 1.0)),
        MonotoneOp::affine(psd + Matrix::Identity(dim, dim) * 0.1 + skew, rng.uniform_vector(dim, -1.0, 1.0)),
        MonotoneOp::identity(dim),
        MonotoneOp::normal_cone_box(lo, hi),
        MonotoneOp::gradient_of_convex(LegendreFn::cosh_sum(dim), rng.uniform_vector(dim, -1.0, 1.0), 0.5),
        MonotoneOp::gradient_of_convex(LegendreFn::power_euclidean(dim, 4.0), rng.uniform_vector(dim, -1.0, 1.0)),
        MonotoneOp::scaled(2.0, MonotoneOp::subdiff_abs(Vector::Zero(dim))),
        MonotoneOp::sum({MonotoneOp::subdiff_abs(Vector::Zero(dim), 0.5), MonotoneOp::affine(psd, Vector::Zero(dim))}),
        MonotoneOp::sum({MonotoneOp::normal_cone_box(lo, hi),
                         MonotoneOp::gradient_of_convex(LegendreFn::half_squared_norm(dim),
                                                        rng.uniform_vector(dim, -3.0, 3.0))}),
    };
}

InclusionInstance random_instance(Rng& rng, int dim) {
    const auto fs = legendre_samples(dim, rng);
    const auto ops = operator_samples(dim, rng);
    const LegendreFn& f = fs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(fs.size()) - 1))];
    const MonotoneOp& a = ops[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(ops.size()) - 1))];
    return {f, a, rng.uniform(0.2, 5.0), rng.uniform_vector(dim, -2.0, 2.0), rng.uniform_vector(dim, -2.0, 2.0)};
}

}  // namespace proxlab
