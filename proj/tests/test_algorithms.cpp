#include "doctest.h"
#include "support.hpp"

#include "proxlab/algorithms.hpp"
#include "proxlab/errors.hpp"

#include <cmath>

using namespace proxlab;

namespace {

const LegendreFn e1 = LegendreFn::half_squared_norm(1);
const MonotoneOp abs1 = MonotoneOp::subdiff_abs(Vector::Zero(1));
const MonotoneOp id1 = MonotoneOp::identity(1);

}  // namespace

TEST_CASE("eckstein step") {
    CHECK(eckstein_step(e1, id1, 1.0, scalar(1), scalar(0)).x_next(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(eckstein_step(e1, id1, 1.0, scalar(1), scalar(0.5)).x_next(0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(eckstein_step(e1, abs1, 1.0, scalar(0), scalar(0)).x_next(0) == 0.0);
}

TEST_CASE("ss step") {
    SchemeStep s = ss_step(abs1, 1.0, 0.5, scalar(2), scalar(0));
    CHECK(s.status == StepStatus::Advance);
    CHECK(s.y(0) == doctest::Approx(1.0));
    CHECK(s.xi(0) == doctest::Approx(1.0));
    CHECK(s.x_next(0) == doctest::Approx(1.0));

    CHECK(ss_step(abs1, 1.0, 0.5, scalar(0), scalar(0)).status == StepStatus::Terminate);

    s = ss_step(abs1, 1.0, 0.5, scalar(2), scalar(0.25));
    CHECK(s.status == StepStatus::Advance);
    CHECK(s.y(0) == doctest::Approx(0.75));
    CHECK(s.xi(0) == doctest::Approx(1.0));
    CHECK(s.condition_lhs == doctest::Approx(0.25));
    CHECK(s.condition_rhs == doctest::Approx(0.625));
    CHECK(s.x_next(0) == doctest::Approx(0.75));

    // 0.8 > 0.5 max(1, 1.8)
    CHECK(ss_step(abs1, 1.0, 0.5, scalar(2), scalar(-0.8)).status == StepStatus::Reject);

    // eta = 2 at x = 2: y = 0, xi = 0 while y != x; allowed only when sigma >= 1.
    CHECK_THROWS_WITH_AS(ss_step(abs1, 1.0, 1.0, scalar(2), scalar(2)), doctest::Contains("update undefined"),
                         SolverError);
    CHECK(ss_step(abs1, 1.0, 0.5, scalar(2), scalar(2)).status == StepStatus::Reject);
}

TEST_CASE("ips nu") {
    CHECK(std::abs(ips_nu(0, 0.25, 1)) <= 1e-12);
    CHECK(ips_nu(0.25, 0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ips_nu(0, 0, 1) == 0.0);
    // t = 1: (sqrt(0.5 + 0.5) - 1) / 2 = 0
    CHECK(std::abs(ips_nu(0.5, 0.5, 1)) <= 1e-15);
    CHECK_THROWS_AS(ips_nu(3.0, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(ips_nu(0.5, 0.5, 0.0), InvalidArgument);
}

TEST_CASE("ips step") {
    const Subspace whole = Subspace::whole(1);
    SchemeStep s = ips_step(abs1, 1.0, 0.3, whole, scalar(2), scalar(0));
    CHECK(s.status == StepStatus::Advance);
    CHECK(s.y(0) == doctest::Approx(1.0));
    CHECK(s.x_next(0) == doctest::Approx(1.0));

    s = ips_step(abs1, 1.0, 0.3, whole, scalar(0), scalar(0));
    CHECK(s.status == StepStatus::Advance);
    CHECK(s.x_next(0) == 0.0);

    // y = 1.1 / 2 = 0.55 and 0.1 <= 0.5 * 0.45, so this draw is accepted.
    s = ips_step(id1, 1.0, 0.5, whole, scalar(1), scalar(0.1));
    CHECK(s.status == StepStatus::Advance);
    CHECK(s.y(0) == doctest::Approx(0.55));
    CHECK(s.x_next(0) == doctest::Approx(0.45));
    // y = 0.65, 0.3 > 0.5 * 0.35
    CHECK(ips_step(id1, 1.0, 0.5, whole, scalar(1), scalar(0.3)).status == StepStatus::Reject);

    const Subspace line = Subspace::spanned_by(Matrix{{1}, {1}});
    CHECK_THROWS_AS(ips_step(MonotoneOp::identity(2), 1.0, 0.5, line, vec({1, 1}), vec({0.1, 0})), InvalidArgument);
    CHECK_NOTHROW(ips_step(MonotoneOp::identity(2), 1.0, 0.5, line, vec({1, 1}), vec({0.1, 0.1})));
    CHECK((line.project(vec({1, 0})) - vec({0.5, 0.5})).norm() <= 1e-15);
}

TEST_CASE("pls step") {
    SchemeStep s = pls_step(id1, 1.0, SpdMetric::identity(1), 0.3, 1.0, scalar(1), scalar(0));
    CHECK(s.status == StepStatus::Advance);
    CHECK(std::abs(s.y(0) - 0.5) <= 1e-12);
    CHECK(std::abs(s.xi(0) - 0.5) <= 1e-12);
    CHECK(std::abs(s.x_next(0) - 0.5) <= 1e-12);

    CHECK(pls_step(id1, 1.0, SpdMetric::identity(1), 0.3, 1.0, scalar(0), scalar(0)).status == StepStatus::Terminate);

    s = pls_step(id1, 1.0, SpdMetric::diagonal(scalar(2)), 0.3, 1.0, scalar(1), scalar(0));
    CHECK(s.y(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(s.xi(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("bregman projection") {
    const Halfspace neg{scalar(1), 0.0};
    CHECK(bregman_project(e1, {neg}, scalar(1)).z(0) == doctest::Approx(0.0));
    const Halfspace h{scalar(1), 0.75};
    CHECK(bregman_project(e1, {h}, scalar(1)).z(0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(bregman_project(e1, {}, vec({3})).z(0) == 3.0);
    CHECK(bregman_project(e1, {Halfspace::whole_space(1)}, scalar(3)).z(0) == 3.0);

    // Euclidean projection of (2, 2) onto {z1 <= 0} ∩ {z1 + z2 <= 1} is (0, 1).
    const auto p = bregman_project(LegendreFn::half_squared_norm(2), {{vec({1, 0}), 0.0}, {vec({1, 1}), 1.0}},
                                   vec({2, 2}));
    CHECK((p.z - vec({0, 1})).norm() <= 1e-12);
    CHECK(p.kkt_residual <= 1e-8);

    // Non-Euclidean: argmin D_cosh(z, 2) over z <= 1 sits on the boundary.
    const auto c = bregman_project(LegendreFn::cosh_sum(1), {h}, scalar(2));
    CHECK(c.z(0) == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(c.multipliers[0] == doctest::Approx(std::sinh(2.0) - std::sinh(0.75)).epsilon(1e-8));

    CHECK_THROWS_AS(bregman_project(e1, {{scalar(1), -1.0}, {scalar(-1), -1.0}}, scalar(0)), SolverError);
}

TEST_CASE("rs step") {
    const RsIterate r = rs_step(e1, {id1}, {1.0}, {scalar(0)}, scalar(1), scalar(1));
    CHECK(r.w[0](0) == doctest::Approx(1.0));
    CHECK(r.y[0](0) == doctest::Approx(0.5));
    CHECK(r.xi[0](0) == doctest::Approx(0.5));
    CHECK(r.c[0].normal(0) > 0);
    CHECK(r.c[0].offset / r.c[0].normal(0) == doctest::Approx(0.75));
    CHECK(r.q.is_whole());
    CHECK(std::abs(r.x_next(0) - 0.75) <= 1e-10);

    const RsIterate z = rs_step(e1, {abs1}, {1.0}, {scalar(0)}, scalar(1), scalar(0));
    CHECK(z.c[0].is_whole());
    CHECK(z.y[0](0) == 0.0);
    CHECK(std::abs(z.x_next(0)) <= 1e-12);
}

TEST_CASE("schedules and policies") {
    CHECK(Schedule::geometric(2.0, 0.5).at(3) == 0.25);
    CHECK(Schedule::constant(1.5).at(10) == 1.5);
    CHECK_THROWS_AS(Schedule::constant(0).validate("step"), InvalidArgument);
    CHECK(PerturbationPolicy::summable_geometric(0.1, 0.5).norm_at(2) == doctest::Approx(0.025));
    CHECK(PerturbationPolicy::zero().norm_at(5) == 0.0);
    CHECK_THROWS_AS(PerturbationPolicy::summable_geometric(0.1, 1.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(PerturbationPolicy::radius_fraction(1.0).validate(), InvalidArgument);
}

TEST_CASE("eckstein run converges on the shifted quadratic") {
    const Vector z = vec({1, 2});
    Problem p{LegendreFn::half_squared_norm(2),
              {MonotoneOp::gradient_of_convex(LegendreFn::half_squared_norm(2), z)},
              Vector::Zero(2),
              z};
    const IterateTrace t = run(Scheme::Eckstein, p, {}, PerturbationPolicy::zero(), {1000, 1e-8});
    CHECK(t.termination == Termination::ZeroDetected);
    CHECK(t.records.size() <= 60);
    CHECK((t.last().x - z).norm() <= 1e-6);
    // contraction by 1/2 per step
    for (std::size_t i = 1; i < t.records.size(); ++i) {
        CHECK((t.records[i].x - z).norm() == doctest::Approx(0.5 * (t.records[i - 1].x - z).norm()).epsilon(1e-9));
    }
    CHECK(audit_conditions(Scheme::Eckstein, p, {}, t).passed());
}

TEST_CASE("degenerate starts terminate at n = 0") {
    const Vector one = scalar(1);
    for (Scheme s : {Scheme::Eckstein, Scheme::SolodovSvaiter, Scheme::IusemPennanenSvaiter,
                     Scheme::ParenteLotitoSolodov, Scheme::HalfspaceProjection}) {
        Problem p{e1, {MonotoneOp::subdiff_abs(one)}, one, one};
        SchemeParams sp;
        if (s == Scheme::IusemPennanenSvaiter) sp.nu = 0.3;
        const IterateTrace t = run(s, p, sp, PerturbationPolicy::zero(), {100, 1e-8});
        CHECK(t.termination == Termination::ZeroDetected);
        CHECK(t.iterations() == 0);
        CHECK(t.records.size() == 1);
    }
}

TEST_CASE("ss run with relative errors") {
    const Vector one = scalar(1);
    Problem p{e1, {MonotoneOp::subdiff_abs(one)}, scalar(5), one};
    SchemeParams sp;
    sp.sigma = 0.5;
    const IterateTrace t = run(Scheme::SolodovSvaiter, p, sp, PerturbationPolicy::radius_fraction(0.5, 3), {500, 1e-8});
    CHECK(t.error == "");
    CHECK(t.last().zero_residual <= 1e-6);
    CHECK(audit_conditions(Scheme::SolodovSvaiter, p, sp, t).passed());
    CHECK(audit_fejer(t, one).passed());
    bool some_eta = false;
    for (const auto& r : t.records) some_eta = some_eta || r.eta_norm > 0;
    CHECK(some_eta);
}

TEST_CASE("iteration budget and validation") {
    Problem p{e1, {abs1}, scalar(100), scalar(0)};
    const IterateTrace t = run(Scheme::Eckstein, p, {}, PerturbationPolicy::zero(), {3, 1e-8});
    CHECK(t.termination == Termination::IterationBudget);
    CHECK(t.records.size() == 4);

    CHECK_THROWS_AS(validate_scheme(Scheme::HalfspaceProjection, p, {}, PerturbationPolicy::radius_fraction(0.5)), ConfigError);
    Problem cosh_p{LegendreFn::cosh_sum(1), {abs1}, scalar(1), std::nullopt};
    CHECK_THROWS_AS(validate_scheme(Scheme::SolodovSvaiter, cosh_p, {}, PerturbationPolicy::zero()), ConfigError);
    SchemeParams bad_tau;
    bad_tau.tau = 2.0;
    CHECK_THROWS_AS(validate_scheme(Scheme::ParenteLotitoSolodov, p, bad_tau, PerturbationPolicy::zero()), ConfigError);
    CHECK_THROWS_AS(validate_scheme(Scheme::IusemPennanenSvaiter, p, {}, PerturbationPolicy::zero()), ConfigError);
}

TEST_CASE("scheme names") {
    for (Scheme s : {Scheme::Eckstein, Scheme::SolodovSvaiter, Scheme::IusemPennanenSvaiter,
                     Scheme::ParenteLotitoSolodov, Scheme::HalfspaceProjection}) {
        CHECK(scheme_from_string(to_string(s)) == s);
    }
    CHECK_FALSE(scheme_from_string("newton").has_value());
}
