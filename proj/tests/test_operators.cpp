#include "doctest.h"
#include "support.hpp"

#include "proxlab/errors.hpp"
#include "proxlab/operators.hpp"
#include "proxlab/resolvent.hpp"

#include <algorithm>
#include <cmath>

using namespace proxlab;

namespace {

// sup over a dense witness grid of -eps - (y' - xi)(x' - y) for a 1-D
// operator whose value at x' is the interval [lo(x'), hi(x')].
template <class Lo, class Hi>
double grid_enlargement(double eps, double y, double xi, double a, double b, Lo lo, Hi hi) {
    double worst = 0.0;
    for (int k = 0; k <= 40000; ++k) {
        const double xp = a + (b - a) * k / 40000.0;
        for (double yp : {lo(xp), hi(xp)}) worst = std::max(worst, -eps - (yp - xi) * (xp - y));
    }
    return worst;
}

}  // namespace

TEST_CASE("membership residual") {
    const MonotoneOp abs1 = MonotoneOp::subdiff_abs(Vector::Zero(1));
    CHECK(abs1.membership_residual(scalar(0), scalar(0.3)) == 0.0);
    CHECK(abs1.membership_residual(scalar(2), scalar(0.5)) == doctest::Approx(0.5));
    CHECK(abs1.membership_residual(scalar(0), scalar(-1.5)) == doctest::Approx(0.5));
    const MonotoneOp id = MonotoneOp::affine(Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK(id.membership_residual(vec({1, 2}), vec({1, 2})) == 0.0);

    const MonotoneOp box = MonotoneOp::normal_cone_box(vec({-1, -1}), vec({1, 1}));
    CHECK(box.membership_residual(vec({0, 0}), vec({3, 4})) == doctest::Approx(5.0));
    CHECK(box.membership_residual(vec({1, 0}), vec({3, 4})) == doctest::Approx(4.0));
    CHECK(box.membership_residual(vec({1, 0}), vec({-3, 0})) == doctest::Approx(3.0));
    CHECK_THROWS_WITH_AS(box.membership_residual(vec({2, 0}), vec({0, 0})), doctest::Contains("empty operator value"),
                         DomainError);

    const MonotoneOp g = MonotoneOp::gradient_of_convex(LegendreFn::cosh_sum(1), Vector::Zero(1));
    CHECK(g.membership_residual(scalar(1), scalar(0)) == doctest::Approx(std::sinh(1.0)));
}

TEST_CASE("sums and scaling") {
    const MonotoneOp a = MonotoneOp::sum({MonotoneOp::subdiff_abs(Vector::Zero(1)), MonotoneOp::identity(1)});
    // A(0) = [-1, 1], A(2) = {3}
    CHECK(a.membership_residual(scalar(0), scalar(1)) == 0.0);
    CHECK(a.membership_residual(scalar(2), scalar(3)) == 0.0);
    CHECK(a.membership_residual(scalar(2), scalar(1)) == doctest::Approx(2.0));
    const MonotoneOp s = MonotoneOp::scaled(0.5, MonotoneOp::subdiff_abs(Vector::Zero(1)));
    CHECK(s.membership_residual(scalar(0), scalar(0.5)) == 0.0);
    CHECK(s.membership_residual(scalar(0), scalar(0.75)) == doctest::Approx(0.25));
}

TEST_CASE("enlargement residual") {
    const MonotoneOp abs1 = MonotoneOp::subdiff_abs(Vector::Zero(1));
    CHECK(enlargement_residual(abs1, 0.0, scalar(0), scalar(0.5), 512) == 0.0);
    CHECK(enlargement_residual(abs1, 0.0, scalar(1), scalar(1), 512) == 0.0);

    auto sgn_lo = [](double t) { return t > 0 ? 1.0 : -1.0; };
    auto sgn_hi = [](double t) { return t < 0 ? -1.0 : 1.0; };
    const double oracle = grid_enlargement(0.5, 0.0, 1.2, -2.0, 2.0, sgn_lo, sgn_hi);
    CHECK(oracle == 0.0);
    CHECK(enlargement_residual(abs1, 0.5, scalar(0), scalar(1.2), 512) == doctest::Approx(oracle));

    // Wider region: witnesses reach x' = 5 where -0.5 - (1 - 1.2) * 5 = 0.5.
    const double wide = grid_enlargement(0.5, 0.0, 1.2, -5.0, 5.0, sgn_lo, sgn_hi);
    CHECK(wide == doctest::Approx(0.5));
    WitnessRegion region;
    region.half_width = 5.0;
    CHECK(enlargement_residual(abs1, 0.5, scalar(0), scalar(1.2), 1024, region) == doctest::Approx(wide).epsilon(1e-2));

    const MonotoneOp id = MonotoneOp::affine(Matrix::Identity(1, 1), Vector::Zero(1));
    auto ident = [](double t) { return t; };
    const double affine_oracle = grid_enlargement(0.0, 0.0, 1.0, -2.0, 2.0, ident, ident);
    CHECK(affine_oracle == doctest::Approx(0.25).epsilon(1e-6));
    const double sampled = enlargement_residual(id, 0.0, scalar(0), scalar(1), 1024);
    CHECK(sampled > 0.0);
    CHECK(sampled == doctest::Approx(affine_oracle).epsilon(1e-3));
    CHECK(enlargement_residual(id, 0.3, scalar(0), scalar(1), 1024) <= sampled);
}

TEST_CASE("zero residual") {
    const LegendreFn e = LegendreFn::half_squared_norm(1);
    const MonotoneOp abs1 = MonotoneOp::subdiff_abs(Vector::Zero(1));
    CHECK(zero_residual(abs1, e, 1.0, scalar(0)) == 0.0);
    CHECK(zero_residual(abs1, e, 1.0, scalar(2)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(zero_residual(MonotoneOp::affine(Matrix::Identity(1, 1), Vector::Zero(1)), e, 1.0, scalar(4)) ==
          doctest::Approx(2.0).epsilon(1e-12));
    const MonotoneOp shifted = MonotoneOp::subdiff_abs(scalar(1));
    CHECK(zero_residual(shifted, e, 1.0, scalar(1)) <= 1e-8);
    CHECK(zero_residual(shifted, e, 1.0, scalar(1.1)) > 1e-8);
}

TEST_CASE("graph samples lie in the graph") {
    Rng rng(5);
    const MonotoneOp ops[] = {MonotoneOp::subdiff_abs(vec({0.5, -1}), 2.0),
                              MonotoneOp::normal_cone_box(vec({-1, 0}), vec({1, 2})),
                              MonotoneOp::gradient_of_convex(LegendreFn::cosh_sum(2), vec({0, 1})),
                              MonotoneOp::affine(Matrix{{1, 2}, {-2, 1}}, vec({1, 1}))};
    for (const MonotoneOp& a : ops) {
        for (int k = 0; k < 200; ++k) {
            const GraphPoint p = a.sample_graph(rng);
            CHECK(a.membership_residual(p.y, p.xi) <= 1e-12 * (1 + p.xi.norm()));
        }
    }
}

TEST_CASE("operator spec strings") {
    CHECK(parse_operator("abs:w=1,shift=1", 1).membership_residual(scalar(1), scalar(0.9)) == 0.0);
    CHECK(parse_operator("affine:diag=1,b=0", 2).membership_residual(vec({1, 2}), vec({1, 2})) == 0.0);
    CHECK(parse_operator("box:-1,1", 2).membership_residual(vec({1, 1}), vec({3, 3})) == 0.0);
    CHECK(parse_operator("scale:0.5:abs:w=1", 1).membership_residual(scalar(0), scalar(0.5)) == 0.0);
    CHECK(parse_operator("identity", 1).membership_residual(scalar(2), scalar(2)) == 0.0);
    CHECK(parse_operator("grad:cosh;shift=1", 1).membership_residual(scalar(1), scalar(0)) == 0.0);
    CHECK(parse_operator("abs:w=1&identity", 1).membership_residual(scalar(0), scalar(0.5)) == 0.0);
    CHECK_THROWS_AS(parse_operator("box:1,-1", 1), ConfigError);
    CHECK_THROWS_AS(parse_operator("abs:w=-1", 1), ConfigError);
    CHECK_THROWS_AS(parse_operator("affine:m=0,1,0,0", 2), ConfigError);
    CHECK_THROWS_AS(parse_operator("scale:-1:abs", 1), ConfigError);
    CHECK_THROWS_AS(parse_operator("nope", 1), ConfigError);
}
