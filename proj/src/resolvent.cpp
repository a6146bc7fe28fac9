#include "proxlab/resolvent.hpp"

#include "proxlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace proxlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_problem(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w, const char* where) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InvalidArgument(std::string(where) + ": lambda must be positive and finite");
    }
    if (f.dim() != a.dim()) throw DimensionError(std::string(where) + ": function and operator dimensions differ");
    if (w.size() != f.dim()) throw DimensionError(std::string(where) + ": argument has the wrong dimension");
    require_valid(w, where);
}

bool contains_zero(const Interval& g) { return g.lo <= 0.0 && g.hi >= 0.0; }

// Coordinate i of grad f(y) + lambda A(y) - w as an interval.
Interval coordinate_gap(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w, const Vector& y,
                        int i) {
    const double g = f.gradient(y)(i) - w(i);
    const ValueBox box = a.value(y);
    Interval out{g + lambda * box.lo(i), g + lambda * box.hi(i)};
    if (std::isnan(out.lo)) out.lo = -kInf;
    if (std::isnan(out.hi)) out.hi = kInf;
    return out;
}

// Root of a strictly increasing set-valued scalar map restricted to dom.
double solve_scalar(const std::function<Interval(double)>& gap, Interval dom, const std::vector<double>& kinks,
                    double guess, double step) {
    double c = std::isfinite(guess) ? guess : 0.0;
    c = std::clamp(c, dom.lo, dom.hi);
    const Interval gc = gap(c);
    if (contains_zero(gc)) return c;

    double a = c, b = c;
    const bool go_left = gc.lo > 0.0;
    double h = std::max(step, 1e-12);
    for (;;) {
        if (h > 1e300) throw SolverError("protoresolvent: bracket expansion did not change sign", kInf);
        const double t = go_left ? std::max(c - h, dom.lo) : std::min(c + h, dom.hi);
        const Interval gt = gap(t);
        if (contains_zero(gt)) return t;
        if (go_left) {
            if (gt.hi < 0.0) {
                a = t;
                break;
            }
            b = t;
            if (t == dom.lo) throw SolverError("protoresolvent: no sign change inside the domain", gt.lo);
        } else {
            if (gt.lo > 0.0) {
                b = t;
                break;
            }
            a = t;
            if (t == dom.hi) throw SolverError("protoresolvent: no sign change inside the domain", -gt.hi);
        }
        h *= 2.0;
    }

    for (int it = 0; it < 4000; ++it) {
        const double m = a + 0.5 * (b - a);
        if (!(m > a && m < b)) break;
        const Interval gm = gap(m);
        if (contains_zero(gm)) return m;
        if (gm.lo > 0.0) {
            b = m;
        } else {
            a = m;
        }
    }
    for (double k : kinks) {
        if (k >= a && k <= b && contains_zero(gap(k))) return k;
    }
    const double miss_a = -gap(a).hi;
    const double miss_b = gap(b).lo;
    return miss_a <= miss_b ? a : b;
}

double solve_coordinate(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w, Vector& y, int i,
                        double step) {
    Vector probe = y;
    auto gap = [&](double t) {
        probe(i) = t;
        return coordinate_gap(f, a, lambda, w, probe, i);
    };
    return solve_scalar(gap, a.coordinate_domain(i), a.coordinate_kinks(i), y(i), step);
}

Vector domain_start(const LegendreFn& f, const MonotoneOp& a, const Vector& w) {
    Vector y = f.grad_inverse(w);
    for (int i = 0; i < y.size(); ++i) {
        const Interval dom = a.coordinate_domain(i);
        if (!std::isfinite(y(i))) y(i) = 0.0;
        y(i) = std::clamp(y(i), dom.lo, dom.hi);
    }
    return y;
}

double certificate(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w, const Vector& y) {
    if (!y.allFinite()) return kInf;
    try {
        const Vector g = f.gradient(y);
        const Vector xi = a.nearest_element(y, (w - g) / lambda);
        const double r = (g + lambda * xi - w).norm();
        return std::isfinite(r) ? r : kInf;
    } catch (const DomainError&) {
        return kInf;
    }
}

// True when A is the subdifferential of a convex function, so a nonlinear
// Gauss-Seidel sweep minimizes a convex objective with separable nonsmooth part.
bool potential_form(const MonotoneOp& a) {
    return std::visit(overloaded{
                          [](const op_kind::Affine& m) {
                              const Matrix& q = m.matrix;
                              return (q - q.transpose()).norm() <= 1e-12 * (1.0 + q.norm());
                          },
                          [](const op_kind::Scaled& s) { return potential_form(*s.inner); },
                          [](const op_kind::Sum& s) {
                              return std::all_of(s.terms.begin(), s.terms.end(),
                                                 [](const MonotoneOp& t) { return potential_form(t); });
                          },
                          [](const auto&) { return true; },
                      },
                      a.kind());
}

Vector linear_closed_form(const LegendreFn& f, const Matrix& m, const Vector& b, double lambda, const Vector& w) {
    const Matrix lhs = f.quadratic_metric().matrix() + lambda * m;
    return Eigen::PartialPivLU<Matrix>(lhs).solve(w - lambda * b);
}

Vector soft_threshold(const LegendreFn& f, const Vector& shift, double weight, double lambda, const Vector& w) {
    const Vector q = f.quadratic_metric().matrix().diagonal();
    Vector y(w.size());
    for (int i = 0; i < w.size(); ++i) {
        const double z = w(i) / q(i) - shift(i);
        const double t = lambda * weight / q(i);
        const double mag = std::max(std::abs(z) - t, 0.0);
        y(i) = shift(i) + (z < 0 ? -mag : mag);
    }
    return y;
}

Vector separable_sweep(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w) {
    Vector y = domain_start(f, a, w);
    for (int i = 0; i < y.size(); ++i) y(i) = solve_coordinate(f, a, lambda, w, y, i, 1.0 + std::abs(y(i)));
    return y;
}

Vector smooth_newton(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w, double target) {
    const int n = static_cast<int>(w.size());
    auto residual = [&](const Vector& y) -> Vector { return f.gradient(y) + lambda * a.value(y).lo - w; };
    Vector y = f.grad_inverse(w);
    Vector r = residual(y);
    double rn = r.norm();
    double damping = 1e-12;
    for (int it = 0; it < 500 && rn > target; ++it) {
        const Matrix jac = f.hessian(y) + lambda * a.jacobian(y);
        const Matrix jtj = jac.transpose() * jac;
        const Vector jtr = jac.transpose() * r;
        const double scale = std::max(1.0, jtj.diagonal().maxCoeff());
        bool improved = false;
        for (int tries = 0; tries < 60; ++tries) {
            const Matrix lhs = jtj + damping * scale * Matrix::Identity(n, n);
            const Vector d = lhs.ldlt().solve(-jtr);
            const Vector cand = y + d;
            const Vector rc = residual(cand);
            const double rcn = rc.norm();
            if (std::isfinite(rcn) && rcn < rn) {
                y = cand;
                r = rc;
                rn = rcn;
                damping = std::max(damping / 3.0, 1e-15);
                improved = true;
                break;
            }
            damping *= 4.0;
        }
        if (!improved) break;
    }
    return y;
}

Vector coordinate_sweep(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w, double target) {
    Vector y = domain_start(f, a, w);
    std::vector<double> moved(static_cast<std::size_t>(y.size()), 1.0 + y.norm());
    for (int sweep = 0; sweep < 5000; ++sweep) {
        for (int i = 0; i < y.size(); ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double prev = y(i);
            y(i) = solve_coordinate(f, a, lambda, w, y, i, std::max(2.0 * moved[k], 1e-9 * (1.0 + std::abs(prev))));
            moved[k] = std::abs(y(i) - prev);
        }
        if (certificate(f, a, lambda, w, y) <= target) break;
    }
    return y;
}

}  // namespace

std::string to_string(SolverStrategy s) {
    switch (s) {
        case SolverStrategy::LinearClosedForm:
            return "linear_closed_form";
        case SolverStrategy::SoftThreshold:
            return "soft_threshold";
        case SolverStrategy::Separable:
            return "separable_bisection";
        case SolverStrategy::SmoothNewton:
            return "smooth_newton";
        case SolverStrategy::CoordinateSweep:
            return "coordinate_sweep";
        case SolverStrategy::GridSearch:
            return "grid_search";
    }
    return "unknown";
}

ProtoresolventResult protoresolvent_solve(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w,
                                          const Tolerances& tol) {
    check_problem(f, a, lambda, w, "protoresolvent");
    const double limit = tol.inner_residual * (1.0 + w.norm());

    std::vector<SolverStrategy> plan;
    const auto affine = a.as_affine();
    const auto abs = a.as_abs();
    if (f.is_quadratic() && affine) plan.push_back(SolverStrategy::LinearClosedForm);
    if (f.is_quadratic() && f.quadratic_metric().is_diagonal() && abs) plan.push_back(SolverStrategy::SoftThreshold);
    if (f.separable() && a.separable()) plan.push_back(SolverStrategy::Separable);
    if (a.single_valued()) plan.push_back(SolverStrategy::SmoothNewton);
    if (w.size() > 1 && potential_form(a)) plan.push_back(SolverStrategy::CoordinateSweep);
    if (plan.empty()) {
        throw UnsupportedError("protoresolvent: no solver strategy for f = " + f.spec() + ", A = " + a.spec());
    }

    ProtoresolventResult best;
    best.residual = kInf;
    std::string failures;
    for (SolverStrategy s : plan) {
        Vector y;
        try {
            switch (s) {
                case SolverStrategy::LinearClosedForm:
                    y = linear_closed_form(f, affine->first, affine->second, lambda, w);
                    break;
                case SolverStrategy::SoftThreshold:
                    y = soft_threshold(f, abs->first, abs->second, lambda, w);
                    break;
                case SolverStrategy::Separable:
                    y = separable_sweep(f, a, lambda, w);
                    break;
                case SolverStrategy::SmoothNewton:
                    y = smooth_newton(f, a, lambda, w, 0.01 * limit);
                    break;
                case SolverStrategy::CoordinateSweep:
                    y = coordinate_sweep(f, a, lambda, w, 0.1 * limit);
                    break;
                case SolverStrategy::GridSearch:
                    break;
            }
        } catch (const SolverError& e) {
            failures += std::string(failures.empty() ? "" : "; ") + to_string(s) + ": " + e.what();
            continue;
        }
        const double r = certificate(f, a, lambda, w, y);
        if (r <= limit) return {std::move(y), r, s};
        if (r < best.residual) best = {std::move(y), r, s};
    }
    throw SolverError("protoresolvent: certification failed (best strategy " + to_string(best.strategy) +
                          (failures.empty() ? "" : "; " + failures) + ")",
                      best.residual);
}

Vector protoresolvent(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w, const Tolerances& tol) {
    return protoresolvent_solve(f, a, lambda, w, tol).y;
}

Vector protoresolvent_grid(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w) {
    check_problem(f, a, lambda, w, "protoresolvent_grid");
    if (f.dim() != 1) throw UnsupportedError("protoresolvent_grid: only dimension 1 is supported");
    const Interval dom = a.coordinate_domain(0);
    auto gap = [&](double t) {
        const Vector y = Vector::Constant(1, t);
        return coordinate_gap(f, a, lambda, w, y, 0);
    };

    double lo = std::max(-1.0, dom.lo);
    double hi = std::min(1.0, dom.hi);
    for (int k = 0; k < 1100; ++k) {
        const bool lo_ok = lo == dom.lo || gap(lo).hi < 0.0;
        const bool hi_ok = hi == dom.hi || gap(hi).lo > 0.0;
        if (lo_ok && hi_ok) break;
        if (!lo_ok) lo = std::max(2.0 * lo, dom.lo);
        if (!hi_ok) hi = std::min(2.0 * hi, dom.hi);
    }

    constexpr int kCells = 64;
    for (int round = 0; round < 200; ++round) {
        if (hi - lo <= 1e-15 * (1.0 + std::abs(lo) + std::abs(hi))) break;
        // First grid node where the upper selection is nonnegative.
        int hit = kCells;
        for (int k = 0; k <= kCells; ++k) {
            const double t = k == kCells ? hi : lo + (hi - lo) * k / kCells;
            if (gap(t).hi >= 0.0) {
                hit = k;
                break;
            }
        }
        if (hit == 0) {
            hi = lo;
            break;
        }
        const double new_lo = lo + (hi - lo) * (hit - 1) / kCells;
        const double new_hi = hit == kCells ? hi : lo + (hi - lo) * hit / kCells;
        lo = new_lo;
        hi = new_hi;
    }
    return Vector::Constant(1, 0.5 * (lo + hi));
}

Vector resolvent(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& x, const Tolerances& tol) {
    return protoresolvent(f, a, lambda, f.gradient(x), tol);
}

double zero_residual(const MonotoneOp& a, const LegendreFn& f, double lambda, const Vector& x, const Tolerances& tol) {
    return (x - resolvent(f, a, lambda, x, tol)).norm();
}

void InclusionInstance::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("inclusion: lambda must be positive");
    if (f.dim() != a.dim()) throw DimensionError("inclusion: function and operator dimensions differ");
    if (x.size() != f.dim() || eta.size() != f.dim()) throw DimensionError("inclusion: x and eta need dim entries");
    require_valid(x, "inclusion x");
    require_valid(eta, "inclusion eta");
}

InclusionSolution solve_inclusion(const InclusionInstance& inst, const Tolerances& tol) {
    inst.validate();
    const Vector gx = inst.f.gradient(inst.x);
    ProtoresolventResult pr = protoresolvent_solve(inst.f, inst.a, inst.lambda, inst.lambda * inst.eta + gx, tol);
    InclusionSolution sol;
    sol.xi = inst.eta - (inst.f.gradient(pr.y) - gx) / inst.lambda;
    sol.y = std::move(pr.y);
    sol.inner_residual = pr.residual;
    sol.strategy = pr.strategy;
    return sol;
}

VerificationReport verify_solution(const InclusionInstance& inst, const Vector& y, const Vector& xi,
                                   const Tolerances& tol) {
    inst.validate();
    require_same_dim(y, inst.x, "verify_solution");
    require_same_dim(xi, inst.x, "verify_solution");
    VerificationReport rep;
    try {
        rep.membership_residual = inst.a.membership_residual(y, xi);
    } catch (const DomainError&) {
        rep.membership_residual = kInf;
    }
    rep.identity_residual =
        (inst.eta - xi - (inst.f.gradient(y) - inst.f.gradient(inst.x)) / inst.lambda).norm();
    rep.membership_ok = rep.membership_residual <= tol.membership;
    rep.identity_ok = rep.identity_residual <= tol.inner_residual * (1.0 + inst.eta.norm());
    return rep;
}

HolderReport holder_certify(const LegendreFn& f, const MonotoneOp& a, double lambda, double rho, double beta,
                            int samples, std::uint64_t seed, double sample_radius) {
    if (!(rho > 1.0)) throw InvalidArgument("holder_certify: rho must exceed 1");
    if (!(beta > 0.0)) throw InvalidArgument("holder_certify: beta must be positive");
    if (samples < 1) throw InvalidArgument("holder_certify: samples must be positive");
    const int d = f.dim();
    Rng rng(seed);
    HolderReport rep;
    rep.exponent = 1.0 / (rho - 1.0);
    rep.max_violation = -kInf;
    for (int k = 0; k < samples; ++k) {
        const Vector w1 = rng.uniform_vector(d, -sample_radius, sample_radius);
        Vector w2;
        if (k == 0) {
            w2 = w1;
        } else if (k % 4 == 0) {
            // Close pairs probe the small-distance regime where the exponent bites.
            w2 = w1 + std::pow(10.0, -rng.uniform(1.0, 6.0)) * rng.unit_vector(d);
        } else {
            w2 = rng.uniform_vector(d, -sample_radius, sample_radius);
        }
        const double lhs = (protoresolvent(f, a, lambda, w1) - protoresolvent(f, a, lambda, w2)).norm();
        const double bound = std::pow((w1 - w2).norm() / beta, rep.exponent);
        const double gap = lhs - bound;
        rep.max_violation = std::max(rep.max_violation, gap);
        if (gap > 1e-8) ++rep.violations;
        ++rep.samples;
    }
    return rep;
}

std::string StronglyImplicitSpec::name() const {
    return std::visit(overloaded{
                          [](const NormBound&) { return std::string("norm_bound"); },
                          [](const SolodovSvaiter&) { return std::string("ss"); },
                          [](const IusemPennanenSvaiter&) { return std::string("ips"); },
                          [](const ParenteLotitoSolodov&) { return std::string("pls"); },
                      },
                      form_);
}

StronglyImplicitSpec::Scores StronglyImplicitSpec::evaluate(const Vector& eta, const Vector& xi, const Vector& x,
                                                            const Vector& y, double lambda) const {
    return std::visit(overloaded{
                          [&](const NormBound& b) { return Scores{eta.norm(), b.bound}; },
                          [&](const SolodovSvaiter& s) {
                              return Scores{eta.norm(), s.sigma * std::max(xi.norm(), (y - x).norm() / lambda)};
                          },
                          [&](const IusemPennanenSvaiter& s) {
                              return Scores{lambda * eta.norm(), s.nu * (y - x).norm()};
                          },
                          [&](const ParenteLotitoSolodov& s) {
                              const double e = inverse_metric_norm(s.metric, lambda * s.metric.apply(eta));
                              const double u = inverse_metric_norm(s.metric, lambda * s.metric.apply(xi));
                              const double v = inverse_metric_norm(s.metric, y - x);
                              return Scores{e * e, s.sigma * s.sigma * (u * u + v * v)};
                          },
                      },
                      form_);
}

RadiusReport radius_search(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& x,
                           const StronglyImplicitSpec& spec, const RadiusOptions& options, const Tolerances& tol) {
    if (options.probes < 1 || options.halvings < 0 || options.refinements < 0) {
        throw InvalidArgument("radius_search: probes must be positive and depths nonnegative");
    }
    const int d = f.dim();
    InclusionInstance inst{f, a, lambda, x, Vector::Zero(d)};
    inst.validate();

    RadiusReport rep;
    {
        const InclusionSolution s0 = solve_inclusion(inst, tol);
        const auto sc = spec.evaluate(inst.eta, s0.xi, x, s0.y, lambda);
        rep.theta0 = sc.psi - sc.phi;
        if (!(rep.theta0 > 1e-12)) {
            throw StrongImplicitnessError("strong implicitness fails at 0 (theta(0) = " + format_number(rep.theta0) + ")",
                                          rep.theta0);
        }
    }

    std::vector<Vector> dirs;
    if (d == 1) {
        dirs = {Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)};
    } else {
        Rng rng(options.seed);
        for (int k = 0; k < options.probes; ++k) {
            if (k < 2 * d) {
                Vector e = Vector::Zero(d);
                e(k / 2) = k % 2 == 0 ? 1.0 : -1.0;
                dirs.push_back(std::move(e));
            } else {
                dirs.push_back(rng.unit_vector(d));
            }
        }
    }
    std::vector<double> fractions;
    for (int k = 1; k < 8; ++k) fractions.push_back(k / 8.0);
    for (int m = 4; m <= 24; m += 4) fractions.push_back(1.0 - std::ldexp(1.0, -m));

    auto passes = [&](double r) {
        for (const Vector& dir : dirs) {
            for (double t : fractions) {
                ++rep.probes_evaluated;
                inst.eta = (t * r) * dir;
                try {
                    const InclusionSolution s = solve_inclusion(inst, tol);
                    if (!verify_solution(inst, s.y, s.xi, tol).passed()) return false;
                    const auto sc = spec.evaluate(inst.eta, s.xi, x, s.y, lambda);
                    if (!(sc.phi < sc.psi)) return false;
                } catch (const SolverError&) {
                    return false;
                }
            }
        }
        return true;
    };

    const double r0 = options.initial_radius > 0.0 ? options.initial_radius : 1.0 + x.norm();
    double r = r0;
    bool found = false;
    for (int h = 0; h <= options.halvings; ++h) {
        rep.halvings_used = h;
        if (passes(r)) {
            found = true;
            break;
        }
        r *= 0.5;
    }
    if (!found) {
        rep.radius = 0.0;
        return rep;
    }
    if (rep.halvings_used > 0) {
        double lo = r, hi = 2.0 * r;
        for (int k = 0; k < options.refinements && hi - lo > 1e-6 * hi; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (passes(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        r = lo;
    }
    rep.radius = r;
    return rep;
}

}  // namespace proxlab
