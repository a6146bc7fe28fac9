#pragma once

#include "proxlab/legendre.hpp"
#include "proxlab/numerics.hpp"
#include "proxlab/operators.hpp"
#include "proxlab/resolvent.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace proxlab {

enum class Scheme { Eckstein, SolodovSvaiter, IusemPennanenSvaiter, ParenteLotitoSolodov, HalfspaceProjection };

std::string to_string(Scheme s);
/// "eckstein", "ss", "ips", "pls", "rs".
std::optional<Scheme> scheme_from_string(const std::string& name);

enum class StepStatus { Advance, Terminate, Reject };

std::string to_string(StepStatus s);

// ---------------------------------------------------------------------------
// Single steps

struct EcksteinStep {
    Vector x_next;
    /// Induced inclusion data: eta_inc = eta / lambda, y = x_next.
    Vector xi;
    double inner_residual = 0.0;
};

/// x_{n+1} = (grad f + lambda A)^{-1}(eta_{n+1} + grad f(x_n)).
EcksteinStep eckstein_step(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& x,
                           const Vector& eta, const Tolerances& tol = {});

struct SchemeStep {
    StepStatus status = StepStatus::Advance;
    Vector y;
    Vector xi;
    Vector x_next;  // empty unless status == Advance
    /// The two sides of the relative error condition (lhs <= rhs accepts).
    double condition_lhs = 0.0;
    double condition_rhs = 0.0;
};

/// Hybrid projection-proximal step in Euclidean geometry:
/// y = (I + A/mu)^{-1}(x - eta/mu), xi = -eta - mu (y - x), accept when
/// ||eta|| <= sigma max{||xi||, mu ||y - x||}, then project x onto the
/// hyperplane {z : <xi, z - y> = 0}.
SchemeStep ss_step(const MonotoneOp& a, double mu, double sigma, const Vector& x, const Vector& eta,
                   const Tolerances& tol = {});

/// nu = (sqrt(sigma + (1 - sigma) t^2) - t) / (1 + t) with t = 2 rho / lambda_hat.
double ips_nu(double sigma, double rho, double lambda_hat);

/// Linear subspace Z of R^dim; empty basis means the whole space.
class Subspace {
public:
    static Subspace whole(int dim);
    /// Columns of basis span Z; throws InvalidArgument if rank deficient.
    static Subspace spanned_by(const Matrix& basis);

    int dim() const { return dim_; }
    bool is_whole() const { return !q_.has_value(); }
    Vector project(const Vector& v) const;
    /// ||v - P_Z v||.
    double distance(const Vector& v) const;
    /// Orthonormal basis columns, empty for the whole space.
    Matrix basis() const;

private:
    int dim_ = 1;
    std::optional<Matrix> q_;
};

/// y = (I + lambda A)^{-1}(x + eta), accept when ||eta|| <= nu ||y - x||,
/// then x_{n+1} = y - eta. eta must lie in Z.
SchemeStep ips_step(const MonotoneOp& a, double lambda, double nu, const Subspace& z, const Vector& x,
                    const Vector& eta, const Tolerances& tol = {});

/// Variable metric step with zero enlargement: y = (I + c M A)^{-1}(x + eta),
/// xi = (c M)^{-1}(eta - (y - x)), accept when
/// ||eta||^2_{M^-1} <= sigma^2 (||c M xi||^2_{M^-1} + ||y - x||^2_{M^-1}),
/// then x_{n+1} = x - tau a M xi with a = <xi, x - y> / <M xi, xi>.
SchemeStep pls_step(const MonotoneOp& a, double c, const SpdMetric& metric, double sigma, double tau,
                    const Vector& x, const Vector& eta, const Tolerances& tol = {});

/// {z : <normal, z> <= offset}, or the whole space when normal == 0 and offset >= 0.
struct Halfspace {
    Vector normal;
    double offset = 0.0;

    static Halfspace whole_space(int dim);
    bool is_whole() const { return normal.squaredNorm() == 0.0; }
    /// (<normal, z> - offset) / ||normal||; -inf for the whole space.
    double signed_distance(const Vector& z) const;
};

struct BregmanProjection {
    Vector z;
    std::vector<double> multipliers;  // one per input halfspace
    double kkt_residual = 0.0;
};

/// argmin D_f(., x) over the intersection of halfspaces, by active-set
/// enumeration of the KKT system. Throws SolverError when no active set
/// certifies (infeasible system).
BregmanProjection bregman_project(const LegendreFn& f, const std::vector<Halfspace>& halfspaces, const Vector& x);

struct RsIterate {
    std::vector<Vector> w;
    std::vector<Vector> y;
    std::vector<Vector> xi;
    std::vector<Halfspace> c;  // C_n^i
    Halfspace q;               // Q_n
    Vector x_next;
    double kkt_residual = 0.0;
};

/// One step of the multi-operator Bregman projection scheme: w^i, (y^i, xi^i),
/// halfspaces C^i = {z : <grad f(w^i) - grad f(y^i), z - y^i> <= D_f(y^i, w^i)},
/// Q = {z : <grad f(x0) - grad f(x), z - x> <= 0}, x_{n+1} = proj^f(x0).
RsIterate rs_step(const LegendreFn& f, const std::vector<MonotoneOp>& ops, const std::vector<double>& lambdas,
                  const std::vector<Vector>& etas, const Vector& x0, const Vector& x, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Drivers

/// Strictly positive parameter sequence: constant value, or c q^n.
struct Schedule {
    enum class Kind { Constant, Geometric };
    Kind kind = Kind::Constant;
    double value = 1.0;
    double c = 1.0;
    double q = 1.0;

    static Schedule constant(double v) { return {Kind::Constant, v, 1.0, 1.0}; }
    static Schedule geometric(double c, double q) { return {Kind::Geometric, 1.0, c, q}; }
    double at(int n) const;
    void validate(const std::string& what) const;
    bool operator==(const Schedule&) const = default;
};

struct MetricSchedule {
    enum class Kind { Identity, Diagonal, RandomSpd };
    Kind kind = Kind::Identity;
    Vector diagonal;  // Diagonal
    double min_eigenvalue = 0.5;
    double max_eigenvalue = 2.0;

    /// The metric for one iteration; RandomSpd draws from rng.
    SpdMetric draw(int dim, Rng& rng) const;
    void validate(int dim) const;
    bool operator==(const MetricSchedule& o) const;
};

struct PerturbationPolicy {
    enum class Kind { Zero, SummableGeometric, ConstantNorm, RadiusFraction };
    Kind kind = Kind::Zero;
    double c = 0.0;
    double q = 0.5;
    double fraction = 0.5;
    std::uint64_t seed = 1;

    static PerturbationPolicy zero() { return {}; }
    static PerturbationPolicy summable_geometric(double c, double q, std::uint64_t seed = 1) {
        return {Kind::SummableGeometric, c, q, 0.5, seed};
    }
    static PerturbationPolicy constant_norm(double c, std::uint64_t seed = 1) {
        return {Kind::ConstantNorm, c, 0.5, 0.5, seed};
    }
    static PerturbationPolicy radius_fraction(double fraction, std::uint64_t seed = 1) {
        return {Kind::RadiusFraction, 0.0, 0.5, fraction, seed};
    }
    /// Norm for iteration n when it does not depend on a radius.
    double norm_at(int n) const;
    void validate() const;
    bool operator==(const PerturbationPolicy&) const = default;
};

struct SchemeParams {
    Schedule step = Schedule::constant(1.0);  // lambda_n, mu_n or c_n
    double sigma = 0.5;                       // ss, pls
    std::optional<double> nu;                 // ips, given directly
    struct NuFrom {
        double sigma;
        double rho;
        double lambda_hat;
        bool operator==(const NuFrom&) const = default;
    };
    std::optional<NuFrom> nu_from;  // ips, through ips_nu
    double tau = 1.0;               // pls relaxation
    MetricSchedule metric;          // pls
    std::optional<Matrix> z_basis;  // ips, columns

    /// nu for ips after resolving nu_from.
    double resolved_nu() const;
    bool operator==(const SchemeParams& o) const;
};

struct Problem {
    LegendreFn f;
    std::vector<MonotoneOp> ops;
    Vector x0;
    std::optional<Vector> known_zero;

    int dim() const { return f.dim(); }
    /// Sum of all operators, for the single-operator schemes.
    MonotoneOp combined() const;
    /// known_zero, else a catalog zero hint common to every operator.
    std::optional<Vector> zero() const;
};

struct StopRule {
    int max_iters = 1000;
    double zero_detect = 1e-8;
    bool operator==(const StopRule&) const = default;
};

struct IterateRecord {
    int n = 0;
    Vector x;
    /// Per-operator data of the step that produced x (empty for n = 0).
    std::vector<Vector> y;
    std::vector<Vector> xi;
    std::vector<Vector> eta;
    double eta_norm = 0.0;
    double step_param = 0.0;
    double zero_residual = 0.0;
    double radius = -1.0;  // < 0 when no radius search ran
    int rejects = 0;
    std::optional<Matrix> metric;          // pls
    std::vector<Halfspace> halfspaces;     // rs: C^1..C^N, Q
    double eckstein_partial_sum = 0.0;     // sum_k <eta_k, x_k>, eckstein
    std::string note;
    double wall_seconds = 0.0;             // in memory only
};

enum class Termination { ZeroDetected, SchemeTerminated, IterationBudget, SolverFailure, StrongImplicitness };

std::string to_string(Termination t);

struct IterateTrace {
    Scheme scheme = Scheme::Eckstein;
    int dim = 1;
    std::vector<IterateRecord> records;
    Termination termination = Termination::IterationBudget;
    std::string error;

    int iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
    const IterateRecord& last() const { return records.back(); }
};

/// Runs a scheme from problem.x0. Per-step errors end the run with the
/// partial trace and termination SolverFailure (or StrongImplicitness).
IterateTrace run(Scheme scheme, const Problem& problem, const SchemeParams& params, const PerturbationPolicy& policy,
                 const StopRule& stop, const Tolerances& tol = {});

/// Throws ConfigError when a parameter set is unusable for the scheme.
void validate_scheme(Scheme scheme, const Problem& problem, const SchemeParams& params,
                     const PerturbationPolicy& policy);

// ---------------------------------------------------------------------------
// Audits

struct AuditReport {
    int checked = 0;
    int failures = 0;
    double worst = 0.0;
    std::string first_failure;

    bool passed() const { return checked > 0 && failures == 0; }
};

/// Re-checks every accepted record against its scheme's defining conditions.
AuditReport audit_conditions(Scheme scheme, const Problem& problem, const SchemeParams& params,
                             const IterateTrace& trace, const Tolerances& tol = {});

/// ||x_{n+1} - z|| <= ||x_n - z|| + slack at every step.
AuditReport audit_fejer(const IterateTrace& trace, const Vector& z, double slack = 1e-10);

/// z lies in every recorded C_n^i and Q_n (signed distance <= slack).
AuditReport audit_rs_containment(const IterateTrace& trace, const Vector& z, double slack = 1e-10);

}  // namespace proxlab
