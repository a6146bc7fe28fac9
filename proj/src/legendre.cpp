#include "proxlab/legendre.hpp"

#include "proxlab/errors.hpp"

#include <cmath>
#include <limits>

namespace proxlab {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sign(double t) { return (t > 0) - (t < 0); }

// ||x||_p with max-scaling to avoid overflow in |x_i|^p.
double p_norm(const Vector& x, double p) {
    const double m = x.cwiseAbs().maxCoeff();
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)) / m, p);
    return m * std::pow(s, 1.0 / p);
}

// Gradient of (1/rho)||x||_p^rho: ||x||^{rho-1} (|x_i|/||x||)^{p-1} sgn(x_i).
Vector power_gradient(const Vector& x, double p, double rho) {
    const double n = (p == 2.0) ? x.norm() : p_norm(x, p);
    if (n == 0.0) return Vector::Zero(x.size());
    const double radial = std::pow(n, rho - 1.0);
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        g(i) = radial * std::pow(std::abs(x(i)) / n, p - 1.0) * sign(x(i));
    }
    return g;
}

double conjugate_exponent(double e) { return e / (e - 1.0); }

void check_exponent(double e, const char* name) {
    if (!(e > 1.0) || !std::isfinite(e)) {
        throw InvalidArgument(std::string("LegendreFn: ") + name + " must be a finite number > 1");
    }
}

}  // namespace

LegendreFn LegendreFn::quadratic(SpdMetric metric) {
    const int d = metric.dim();
    return LegendreFn(d, Quadratic{std::move(metric)});
}

LegendreFn LegendreFn::half_squared_norm(int dim) { return quadratic(SpdMetric::identity(dim)); }

LegendreFn LegendreFn::cosh_sum(int dim) {
    if (dim < 1) throw InvalidArgument("LegendreFn: dim must be positive");
    return LegendreFn(dim, CoshSum{});
}

LegendreFn LegendreFn::power_euclidean(int dim, double rho) {
    if (dim < 1) throw InvalidArgument("LegendreFn: dim must be positive");
    check_exponent(rho, "rho");
    return LegendreFn(dim, PowerEuclidean{rho});
}

LegendreFn LegendreFn::power_p(int dim, double p, double rho) {
    if (dim < 1) throw InvalidArgument("LegendreFn: dim must be positive");
    check_exponent(p, "p");
    check_exponent(rho, "rho");
    return LegendreFn(dim, PowerP{p, rho});
}

void LegendreFn::check(const Vector& x, const char* where) const {
    if (x.size() != dim_) {
        throw DimensionError(std::string(where) + ": expected dimension " + std::to_string(dim_) + ", got " +
                             std::to_string(x.size()));
    }
}

double LegendreFn::value(const Vector& x) const {
    check(x, "LegendreFn::value");
    return std::visit(overloaded{
                          [&](const Quadratic& q) { return 0.5 * q.metric.apply(x).dot(x); },
                          [&](const CoshSum&) { return x.array().cosh().sum(); },
                          [&](const PowerEuclidean& pe) { return std::pow(x.norm(), pe.rho) / pe.rho; },
                          [&](const PowerP& pp) { return std::pow(p_norm(x, pp.p), pp.rho) / pp.rho; },
                      },
                      kind_);
}

Vector LegendreFn::gradient(const Vector& x) const {
    check(x, "LegendreFn::gradient");
    return std::visit(overloaded{
                          [&](const Quadratic& q) -> Vector { return q.metric.apply(x); },
                          [&](const CoshSum&) -> Vector { return x.array().sinh().matrix(); },
                          [&](const PowerEuclidean& pe) -> Vector { return power_gradient(x, 2.0, pe.rho); },
                          [&](const PowerP& pp) -> Vector { return power_gradient(x, pp.p, pp.rho); },
                      },
                      kind_);
}

Matrix LegendreFn::hessian(const Vector& x) const {
    check(x, "LegendreFn::hessian");
    return std::visit(
        overloaded{
            [&](const Quadratic& q) -> Matrix { return q.metric.matrix(); },
            [&](const CoshSum&) -> Matrix { return Matrix(x.array().cosh().matrix().asDiagonal()); },
            [&](const PowerEuclidean& pe) -> Matrix {
                const double n = x.norm();
                const int d = dim_;
                if (n == 0.0) {
                    // Radial limit; rho < 2 is singular at the origin.
                    if (pe.rho == 2.0) return Matrix::Identity(d, d);
                    if (pe.rho > 2.0) return Matrix::Zero(d, d);
                    return Matrix::Identity(d, d) * 1e12;
                }
                const Vector u = x / n;
                return std::pow(n, pe.rho - 2.0) *
                       (Matrix::Identity(d, d) + (pe.rho - 2.0) * u * u.transpose());
            },
            [&](const PowerP&) -> Matrix {
                const double h = 1e-6 * (1.0 + x.norm());
                Matrix hess(dim_, dim_);
                for (int j = 0; j < dim_; ++j) {
                    Vector xp = x, xm = x;
                    xp(j) += h;
                    xm(j) -= h;
                    hess.col(j) = (gradient(xp) - gradient(xm)) / (2.0 * h);
                }
                return 0.5 * (hess + hess.transpose());
            },
        },
        kind_);
}

Vector LegendreFn::grad_inverse(const Vector& u) const {
    check(u, "LegendreFn::grad_inverse");
    return std::visit(overloaded{
                          [&](const Quadratic& q) -> Vector { return q.metric.solve(u); },
                          [&](const CoshSum&) -> Vector { return u.array().asinh().matrix(); },
                          [&](const PowerEuclidean& pe) -> Vector {
                              return power_gradient(u, 2.0, conjugate_exponent(pe.rho));
                          },
                          [&](const PowerP& pp) -> Vector {
                              return power_gradient(u, conjugate_exponent(pp.p), conjugate_exponent(pp.rho));
                          },
                      },
                      kind_);
}

double LegendreFn::conjugate_value(const Vector& u) const {
    const Vector x = grad_inverse(u);
    return u.dot(x) - value(x);
}

double LegendreFn::conjugate_closed_form(const Vector& u) const {
    check(u, "LegendreFn::conjugate_closed_form");
    return std::visit(
        overloaded{
            [&](const Quadratic& q) { return 0.5 * q.metric.solve(u).dot(u); },
            [&](const CoshSum&) {
                double s = 0.0;
                for (Eigen::Index i = 0; i < u.size(); ++i) s += u(i) * std::asinh(u(i)) - std::sqrt(1.0 + u(i) * u(i));
                return s;
            },
            [&](const PowerEuclidean& pe) {
                const double rs = conjugate_exponent(pe.rho);
                return std::pow(u.norm(), rs) / rs;
            },
            [&](const PowerP& pp) {
                const double rs = conjugate_exponent(pp.rho);
                return std::pow(p_norm(u, conjugate_exponent(pp.p)), rs) / rs;
            },
        },
        kind_);
}

bool LegendreFn::separable() const {
    if (dim_ == 1) return true;
    return std::visit(overloaded{
                          [](const Quadratic& q) { return q.metric.is_diagonal(); },
                          [](const CoshSum&) { return true; },
                          [](const PowerEuclidean& pe) { return pe.rho == 2.0; },
                          [](const PowerP& pp) { return pp.p == pp.rho; },
                      },
                      kind_);
}

const SpdMetric& LegendreFn::quadratic_metric() const {
    if (const auto* q = std::get_if<Quadratic>(&kind_)) return q->metric;
    throw InvalidArgument("LegendreFn: not a quadratic entry");
}

bool LegendreFn::is_half_squared_norm() const {
    return std::visit(overloaded{
                          [](const Quadratic& q) { return q.metric.is_identity(); },
                          [](const CoshSum&) { return false; },
                          [](const PowerEuclidean& pe) { return pe.rho == 2.0; },
                          [](const PowerP& pp) { return pp.p == 2.0 && pp.rho == 2.0; },
                      },
                      kind_);
}

std::string LegendreFn::spec() const {
    return std::visit(overloaded{
                          [&](const Quadratic& q) -> std::string {
                              if (q.metric.is_identity()) return "quadratic:identity";
                              if (q.metric.is_diagonal()) {
                                  return "quadratic:diag=" + format_vector(q.metric.matrix().diagonal());
                              }
                              const Matrix& m = q.metric.matrix();
                              Vector flat(m.size());
                              for (int i = 0; i < m.rows(); ++i)
                                  for (int j = 0; j < m.cols(); ++j) flat(i * m.cols() + j) = m(i, j);
                              return "quadratic:m=" + format_vector(flat);
                          },
                          [](const CoshSum&) -> std::string { return "cosh"; },
                          [](const PowerEuclidean& pe) -> std::string { return "power:rho=" + format_number(pe.rho); },
                          [](const PowerP& pp) -> std::string {
                              return "powerp:p=" + format_number(pp.p) + ",rho=" + format_number(pp.rho);
                          },
                      },
                      kind_);
}

double bregman_distance(const LegendreFn& f, const Vector& y, const Vector& x) {
    require_same_dim(y, x, "bregman_distance");
    return f.value(y) - f.value(x) - f.gradient(x).dot(y - x);
}

ProbeFunction as_probe(const LegendreFn& f) {
    ProbeFunction p;
    p.dim = f.dim();
    p.value = [f](const Vector& x) { return f.value(x); };
    p.gradient = [f](const Vector& x) { return f.gradient(x); };
    p.grad_inverse = [f](const Vector& u) { return f.grad_inverse(u); };
    return p;
}

DiagnosticsReport diagnostics(const ProbeFunction& f, int probe_budget, std::uint64_t seed) {
    if (probe_budget < 10) throw InvalidArgument("diagnostics: probe_budget must be at least 10");
    Rng rng(seed);
    DiagnosticsReport report;
    const int d = f.dim;

    // Midpoint inequality on segments of length >= 0.1.
    for (int k = 0; k < probe_budget; ++k) {
        Vector a = rng.uniform_vector(d, -3.0, 3.0);
        Vector b = rng.uniform_vector(d, -3.0, 3.0);
        if ((a - b).norm() < 0.1) b = a + 0.1 * rng.unit_vector(d);
        const double mid = f.value(0.5 * (a + b));
        const double chord = 0.5 * (f.value(a) + f.value(b));
        ++report.segments_probed;
        if (!(mid < chord)) ++report.convexity_failures;
    }

    // Ratios f(t v)/t for t = 10..1e4 must increase, and the increments must not
    // collapse the way they do for functions with a finite asymptotic slope.
    const int directions = std::max(1, probe_budget / 10);
    const double ts[] = {10.0, 100.0, 1000.0, 10000.0};
    for (int k = 0; k < directions; ++k) {
        const Vector v = rng.unit_vector(d);
        double ratio[4];
        for (int j = 0; j < 4; ++j) ratio[j] = f.value(ts[j] * v) / ts[j];
        bool ok = true;
        for (int j = 1; j < 4 && ok; ++j) {
            if (std::isinf(ratio[j]) && ratio[j] > 0) continue;
            if (!(ratio[j] > ratio[j - 1])) ok = false;
        }
        if (ok && std::isfinite(ratio[3])) {
            const double last = ratio[3] - ratio[2];
            const double prev = ratio[2] - ratio[1];
            if (!(last >= 0.5 * prev)) ok = false;
        }
        ++report.directions_probed;
        if (!ok) ++report.coercivity_failures;
    }

    if (f.grad_inverse) {
        double sum = 0.0;
        for (int k = 0; k < probe_budget; ++k) {
            const Vector x = rng.uniform_vector(d, -3.0, 3.0);
            const double r = (f.grad_inverse(f.gradient(x)) - x).norm() / (1.0 + x.norm());
            report.max_round_trip_residual = std::max(report.max_round_trip_residual, r);
            sum += r;
            ++report.round_trips;
        }
        report.mean_round_trip_residual = sum / report.round_trips;
    }
    return report;
}

DiagnosticsReport diagnostics(const LegendreFn& f, int probe_budget, std::uint64_t seed) {
    return diagnostics(as_probe(f), probe_budget, seed);
}

}  // namespace proxlab
