#pragma once

#include "proxlab/legendre.hpp"
#include "proxlab/numerics.hpp"
#include "proxlab/operators.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace proxlab {

enum class SolverStrategy {
    LinearClosedForm,  // quadratic f, affine A
    SoftThreshold,     // diagonal quadratic f, subdiff_abs A
    Separable,         // coordinatewise monotone bracketing + bisection
    SmoothNewton,      // single-valued A, Levenberg-Marquardt damped Newton
    CoordinateSweep,   // nonseparable fallback: Gauss-Seidel over 1-D brackets
    GridSearch,        // 1-D grid refinement, used as an independent check
};

std::string to_string(SolverStrategy s);

struct ProtoresolventResult {
    Vector y;
    /// ||grad f(y) + lambda xi_hat - w|| with xi_hat the nearest element of A(y).
    double residual = 0.0;
    SolverStrategy strategy = SolverStrategy::LinearClosedForm;
};

/// The unique y with w in grad f(y) + lambda A(y). Throws SolverError when the
/// result misses inner_residual * (1 + ||w||), UnsupportedError when no
/// strategy applies.
ProtoresolventResult protoresolvent_solve(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w,
                                          const Tolerances& tol = {});

Vector protoresolvent(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w,
                      const Tolerances& tol = {});

/// Grid-refinement brute force for dim 1; shares no code path with the
/// bracketing solver beyond the operator's value oracle.
Vector protoresolvent_grid(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& w);

/// Res^f_{lambda A}(x) = (grad f + lambda A)^{-1}(grad f(x)).
Vector resolvent(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& x, const Tolerances& tol = {});

/// ||x - Res^f_{lambda A}(x)||; zero exactly on the zero set of A.
double zero_residual(const MonotoneOp& a, const LegendreFn& f, double lambda, const Vector& x,
                     const Tolerances& tol = {});

// Find y with eta in A(y) + (1/lambda)(grad f(y) - grad f(x)).
struct InclusionInstance {
    LegendreFn f;
    MonotoneOp a;
    double lambda;
    Vector x;
    Vector eta;

    void validate() const;
};

struct InclusionSolution {
    Vector y;
    Vector xi;
    double inner_residual = 0.0;
    SolverStrategy strategy = SolverStrategy::LinearClosedForm;
};

/// y = (grad f + lambda A)^{-1}(lambda eta + grad f(x)),
/// xi = eta - (grad f(y) - grad f(x)) / lambda.
InclusionSolution solve_inclusion(const InclusionInstance& inst, const Tolerances& tol = {});

struct VerificationReport {
    double membership_residual = 0.0;  // dist(xi, A(y))
    double identity_residual = 0.0;    // ||eta - xi - (grad f(y) - grad f(x))/lambda||
    bool membership_ok = false;
    bool identity_ok = false;

    bool passed() const { return membership_ok && identity_ok; }
};

VerificationReport verify_solution(const InclusionInstance& inst, const Vector& y, const Vector& xi,
                                   const Tolerances& tol = {});

struct HolderReport {
    int samples = 0;
    int violations = 0;
    double max_violation = 0.0;  // max of lhs - bound
    double exponent = 0.0;       // 1 / (rho - 1)
};

/// Samples pairs (w1, w2) and checks
/// ||P(w1) - P(w2)|| <= (||w1 - w2|| / beta)^{1/(rho-1)} + 1e-8 for
/// P = (grad f + lambda A)^{-1}. The caller asserts that grad f is uniformly
/// monotone of power type rho with constant beta.
HolderReport holder_certify(const LegendreFn& f, const MonotoneOp& a, double lambda, double rho, double beta,
                            int samples, std::uint64_t seed = 1, double sample_radius = 3.0);

/// Closed catalog of (Phi, Psi) score pairs for the strongly implicit system.
/// Scores take the inclusion's own eta; the scheme-specific error vector is
/// reconstructed inside each form.
class StronglyImplicitSpec {
public:
    /// Phi = ||eta||, Psi = bound.
    struct NormBound {
        double bound;
    };
    /// Phi = ||eta||, Psi = sigma max{||xi||, mu ||y - x||} with mu = 1/lambda.
    struct SolodovSvaiter {
        double sigma;
    };
    /// Phi = ||lambda eta||, Psi = nu ||y - x||.
    struct IusemPennanenSvaiter {
        double nu;
    };
    /// With e = lambda M eta: Phi = ||e||^2_{M^-1},
    /// Psi = sigma^2 (||lambda M xi||^2_{M^-1} + ||y - x||^2_{M^-1}).
    struct ParenteLotitoSolodov {
        double sigma;
        SpdMetric metric;
    };
    using Form = std::variant<NormBound, SolodovSvaiter, IusemPennanenSvaiter, ParenteLotitoSolodov>;

    explicit StronglyImplicitSpec(Form form) : form_(std::move(form)) {}

    static StronglyImplicitSpec norm_bound(double bound) { return StronglyImplicitSpec(NormBound{bound}); }
    static StronglyImplicitSpec solodov_svaiter(double sigma) { return StronglyImplicitSpec(SolodovSvaiter{sigma}); }
    static StronglyImplicitSpec iusem_pennanen_svaiter(double nu) {
        return StronglyImplicitSpec(IusemPennanenSvaiter{nu});
    }
    static StronglyImplicitSpec parente_lotito_solodov(double sigma, SpdMetric metric) {
        return StronglyImplicitSpec(ParenteLotitoSolodov{sigma, std::move(metric)});
    }

    const Form& form() const { return form_; }
    std::string name() const;

    struct Scores {
        double phi;
        double psi;
    };
    Scores evaluate(const Vector& eta, const Vector& xi, const Vector& x, const Vector& y, double lambda) const;

private:
    Form form_;
};

struct RadiusOptions {
    double initial_radius = 0.0;  // <= 0 means 1 + ||x||
    int halvings = 40;
    int refinements = 40;
    int probes = 64;
    std::uint64_t seed = 1;
};

struct RadiusReport {
    double radius = 0.0;
    double theta0 = 0.0;
    long probes_evaluated = 0;
    int halvings_used = 0;
};

/// Largest sampled radius r such that every probed eta with ||eta|| < r
/// satisfies Phi < Psi and solves the inclusion system. Halving from the
/// initial radius, then bisection between the last failing and first passing
/// radius. Throws StrongImplicitnessError when theta(0) <= 0.
RadiusReport radius_search(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& x,
                           const StronglyImplicitSpec& spec, const RadiusOptions& options = {},
                           const Tolerances& tol = {});

}  // namespace proxlab
