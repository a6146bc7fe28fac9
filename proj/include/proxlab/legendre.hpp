#pragma once

#include "proxlab/numerics.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace proxlab {

// Catalog of fully Legendre functions on R^dim. Every entry carries a
// closed-form gradient inverse, which the protoresolvent solvers rely on.
class LegendreFn {
public:
    /// f(x) = 1/2 <Mx, x>.
    struct Quadratic {
        SpdMetric metric;
    };
    /// f(x) = sum_i cosh(x_i).
    struct CoshSum {};
    /// f(x) = (1/rho) ||x||_2^rho.
    struct PowerEuclidean {
        double rho;
    };
    /// f(x) = (1/rho) ||x||_p^rho.
    struct PowerP {
        double p;
        double rho;
    };
    using Kind = std::variant<Quadratic, CoshSum, PowerEuclidean, PowerP>;

    static LegendreFn quadratic(SpdMetric metric);
    static LegendreFn half_squared_norm(int dim);
    static LegendreFn cosh_sum(int dim);
    static LegendreFn power_euclidean(int dim, double rho);
    static LegendreFn power_p(int dim, double p, double rho);

    int dim() const { return dim_; }
    const Kind& kind() const { return kind_; }

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
    /// Hessian; central differences of the gradient for power_p.
    Matrix hessian(const Vector& x) const;
    /// (grad f)^{-1}(u) = grad f*(u), closed form for every catalog entry.
    Vector grad_inverse(const Vector& u) const;
    /// f*(u) through <u, (grad f)^{-1}(u)> - f((grad f)^{-1}(u)).
    double conjugate_value(const Vector& u) const;
    /// Catalog closed form of f*, independent of grad_inverse.
    double conjugate_closed_form(const Vector& u) const;

    /// True when f(x) = sum_i g_i(x_i); every entry is separable in dim 1.
    bool separable() const;
    bool is_quadratic() const { return std::holds_alternative<Quadratic>(kind_); }
    /// The metric of a quadratic entry; throws otherwise.
    const SpdMetric& quadratic_metric() const;
    /// True for 1/2||x||^2 written as quadratic(identity) or power(rho=2).
    bool is_half_squared_norm() const;

    /// Catalog string, e.g. "quadratic:diag=2,3" or "powerp:p=4,rho=4".
    std::string spec() const;

private:
    LegendreFn(int dim, Kind kind) : dim_(dim), kind_(std::move(kind)) {}
    void check(const Vector& x, const char* where) const;

    int dim_;
    Kind kind_;
};

/// D_f(y, x) = f(y) - f(x) - <grad f(x), y - x>.
double bregman_distance(const LegendreFn& f, const Vector& y, const Vector& x);

/// Black-box view of a function for the finite-dimensional diagnostics;
/// grad_inverse may be empty.
struct ProbeFunction {
    int dim = 1;
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Vector(const Vector&)> grad_inverse;
};

ProbeFunction as_probe(const LegendreFn& f);

struct DiagnosticsReport {
    int segments_probed = 0;
    int convexity_failures = 0;
    int directions_probed = 0;
    int coercivity_failures = 0;
    int round_trips = 0;
    double max_round_trip_residual = 0.0;
    double mean_round_trip_residual = 0.0;
    bool strictly_convex() const { return segments_probed > 0 && convexity_failures == 0; }
    bool super_coercive() const { return directions_probed > 0 && coercivity_failures == 0; }
    bool round_trip_ok(double tol = 1e-8) const { return max_round_trip_residual <= tol; }
    bool all_passed() const { return strictly_convex() && super_coercive() && round_trip_ok(); }
};

// Sampling probes for strict convexity, super-coercivity and gradient
// round trips. A passing report is evidence, not a proof.
DiagnosticsReport diagnostics(const ProbeFunction& f, int probe_budget, std::uint64_t seed = 1);
DiagnosticsReport diagnostics(const LegendreFn& f, int probe_budget, std::uint64_t seed = 1);

/// Parses a catalog string for functions on R^dim. Throws ConfigError.
LegendreFn parse_legendre(const std::string& spec, int dim);

}  // namespace proxlab
