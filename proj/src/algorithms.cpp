#include "proxlab/algorithms.hpp"

#include "proxlab/errors.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace proxlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxShrinks = 60;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be positive and finite");
}

void require_point(const Vector& v, int dim, const char* where) {
    if (v.size() != dim) throw DimensionError(std::string(where) + ": expected " + std::to_string(dim) + " entries");
    require_valid(v, where);
}

bool equal_vectors(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }

bool equal_matrices(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
}

}  // namespace

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::Eckstein:
            return "eckstein";
        case Scheme::SolodovSvaiter:
            return "ss";
        case Scheme::IusemPennanenSvaiter:
            return "ips";
        case Scheme::ParenteLotitoSolodov:
            return "pls";
        case Scheme::HalfspaceProjection:
            return "rs";
    }
    return "unknown";
}

std::optional<Scheme> scheme_from_string(const std::string& name) {
    for (Scheme s : {Scheme::Eckstein, Scheme::SolodovSvaiter, Scheme::IusemPennanenSvaiter,
                     Scheme::ParenteLotitoSolodov, Scheme::HalfspaceProjection}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

std::string to_string(StepStatus s) {
    switch (s) {
        case StepStatus::Advance:
            return "advance";
        case StepStatus::Terminate:
            return "terminate";
        case StepStatus::Reject:
            return "reject";
    }
    return "unknown";
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::ZeroDetected:
            return "zero detected";
        case Termination::SchemeTerminated:
            return "scheme terminated";
        case Termination::IterationBudget:
            return "max_iters";
        case Termination::SolverFailure:
            return "solver failure";
        case Termination::StrongImplicitness:
            return "strong implicitness failure";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Steps

EcksteinStep eckstein_step(const LegendreFn& f, const MonotoneOp& a, double lambda, const Vector& x,
                           const Vector& eta, const Tolerances& tol) {
    require_positive(lambda, "eckstein_step: lambda");
    require_point(x, f.dim(), "eckstein_step x");
    require_point(eta, f.dim(), "eckstein_step eta");
    const Vector gx = f.gradient(x);
    ProtoresolventResult pr = protoresolvent_solve(f, a, lambda, eta + gx, tol);
    EcksteinStep out;
    out.xi = (eta - (f.gradient(pr.y) - gx)) / lambda;
    out.x_next = std::move(pr.y);
    out.inner_residual = pr.residual;
    return out;
}

SchemeStep ss_step(const MonotoneOp& a, double mu, double sigma, const Vector& x, const Vector& eta,
                   const Tolerances& tol) {
    require_positive(mu, "ss_step: mu");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("ss_step: sigma must be nonnegative");
    const int d = a.dim();
    require_point(x, d, "ss_step x");
    require_point(eta, d, "ss_step eta");

    SchemeStep out;
    out.y = protoresolvent(LegendreFn::half_squared_norm(d), a, 1.0 / mu, x - eta / mu, tol);
    out.xi = -eta - mu * (out.y - x);
    const double gap = (out.y - x).norm();
    out.condition_lhs = eta.norm();
    out.condition_rhs = sigma * std::max(out.xi.norm(), mu * gap);
    if (out.condition_lhs > out.condition_rhs) {
        out.status = StepStatus::Reject;
        return out;
    }
    if (gap <= tol.zero_detect) {
        out.status = StepStatus::Terminate;
        return out;
    }
    const double xi2 = out.xi.squaredNorm();
    if (std::sqrt(xi2) <= tol.zero_detect) {
        if (sigma >= 1.0 || xi2 == 0.0) {
            throw SolverError("ss_step: update undefined (xi = 0 while y != x)", std::sqrt(xi2));
        }
        out.status = StepStatus::Terminate;
        return out;
    }
    out.x_next = x - (pairing(out.xi, x - out.y) / xi2) * out.xi;
    out.status = StepStatus::Advance;
    return out;
}

double ips_nu(double sigma, double rho, double lambda_hat) {
    if (!(sigma >= 0.0) || !(rho >= 0.0)) throw InvalidArgument("ips_nu: sigma and rho must be nonnegative");
    require_positive(lambda_hat, "ips_nu: lambda_hat");
    const double t = 2.0 * rho / lambda_hat;
    const double radicand = sigma + (1.0 - sigma) * t * t;
    if (radicand < 0.0) throw InvalidArgument("ips_nu: negative radicand " + format_number(radicand));
    return (std::sqrt(radicand) - t) / (1.0 + t);
}

Subspace Subspace::whole(int dim) {
    Subspace s;
    s.dim_ = dim;
    return s;
}

Subspace Subspace::spanned_by(const Matrix& basis) {
    if (basis.rows() < 1 || basis.cols() < 1) throw InvalidArgument("subspace: empty basis");
    Eigen::ColPivHouseholderQR<Matrix> qr(basis);
    qr.setThreshold(1e-12);
    if (qr.rank() != basis.cols()) throw InvalidArgument("subspace: basis columns are linearly dependent");
    Subspace s;
    s.dim_ = static_cast<int>(basis.rows());
    if (basis.cols() < basis.rows()) {
        const Matrix full = qr.householderQ();
        s.q_ = full.leftCols(basis.cols());
    }
    return s;
}

Vector Subspace::project(const Vector& v) const {
    if (v.size() != dim_) throw DimensionError("subspace: dimension mismatch");
    if (!q_) return v;
    return *q_ * (q_->transpose() * v);
}

double Subspace::distance(const Vector& v) const { return (v - project(v)).norm(); }

Matrix Subspace::basis() const { return q_ ? *q_ : Matrix(dim_, 0); }

SchemeStep ips_step(const MonotoneOp& a, double lambda, double nu, const Subspace& z, const Vector& x,
                    const Vector& eta, const Tolerances& tol) {
    require_positive(lambda, "ips_step: lambda");
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw InvalidArgument("ips_step: nu must be nonnegative");
    const int d = a.dim();
    require_point(x, d, "ips_step x");
    require_point(eta, d, "ips_step eta");
    if (z.dim() != d) throw DimensionError("ips_step: subspace dimension mismatch");
    if (z.distance(eta) > 1e-12 * (1.0 + eta.norm())) throw InvalidArgument("ips_step: eta is not in Z");

    SchemeStep out;
    out.y = protoresolvent(LegendreFn::half_squared_norm(d), a, lambda, x + eta, tol);
    out.xi = (eta - (out.y - x)) / lambda;
    out.condition_lhs = eta.norm();
    out.condition_rhs = nu * (out.y - x).norm();
    if (out.condition_lhs > out.condition_rhs) {
        out.status = StepStatus::Reject;
        return out;
    }
    out.x_next = out.y - eta;
    out.status = StepStatus::Advance;
    return out;
}

SchemeStep pls_step(const MonotoneOp& a, double c, const SpdMetric& metric, double sigma, double tau,
                    const Vector& x, const Vector& eta, const Tolerances& tol) {
    require_positive(c, "pls_step: c");
    require_positive(tau, "pls_step: tau");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("pls_step: sigma must be nonnegative");
    const int d = a.dim();
    if (metric.dim() != d) throw DimensionError("pls_step: metric dimension mismatch");
    require_point(x, d, "pls_step x");
    require_point(eta, d, "pls_step eta");

    // y + c M A(y) ∋ x + eta  <=>  M^{-1} y + c A(y) ∋ M^{-1}(x + eta).
    const LegendreFn geometry = LegendreFn::quadratic(metric.inverse());
    SchemeStep out;
    out.y = protoresolvent(geometry, a, c, metric.solve(x + eta), tol);
    out.xi = metric.solve(eta - (out.y - x)) / c;
    const double e = inverse_metric_norm(metric, eta);
    const double u = inverse_metric_norm(metric, c * metric.apply(out.xi));
    const double v = inverse_metric_norm(metric, out.y - x);
    out.condition_lhs = e * e;
    out.condition_rhs = sigma * sigma * (u * u + v * v);
    if (out.condition_lhs > out.condition_rhs) {
        out.status = StepStatus::Reject;
        return out;
    }
    if ((out.y - x).norm() <= tol.zero_detect) {
        out.status = StepStatus::Terminate;
        return out;
    }
    const Vector mxi = metric.apply(out.xi);
    const double denom = pairing(mxi, out.xi);
    if (denom == 0.0 || (sigma >= 1.0 && out.xi.norm() <= tol.zero_detect)) {
        throw SolverError("pls_step: update undefined (xi = 0 while y != x)", out.xi.norm());
    }
    const double step = pairing(out.xi, x - out.y) / denom;
    out.x_next = x - (tau * step) * mxi;
    out.status = StepStatus::Advance;
    return out;
}

Halfspace Halfspace::whole_space(int dim) { return {Vector::Zero(dim), 0.0}; }

double Halfspace::signed_distance(const Vector& z) const {
    if (is_whole()) return -kInf;
    return (pairing(normal, z) - offset) / normal.norm();
}

BregmanProjection bregman_project(const LegendreFn& f, const std::vector<Halfspace>& halfspaces, const Vector& x) {
    const int d = f.dim();
    require_point(x, d, "bregman_project x");

    // Normalized active constraints; whole-space entries keep multiplier 0.
    std::vector<int> index;
    std::vector<Vector> normals;
    std::vector<double> offsets;
    for (std::size_t k = 0; k < halfspaces.size(); ++k) {
        const Halfspace& h = halfspaces[k];
        if (h.normal.size() != d) throw DimensionError("bregman_project: halfspace dimension mismatch");
        const double len = h.normal.norm();
        if (len == 0.0) {
            if (h.offset < 0.0) throw SolverError("bregman_project: empty halfspace (0 <= negative offset)", -h.offset);
            continue;
        }
        index.push_back(static_cast<int>(k));
        normals.push_back(h.normal / len);
        offsets.push_back(h.offset / len);
    }
    const int m = static_cast<int>(normals.size());
    if (m > 16) throw UnsupportedError("bregman_project: more than 16 halfspaces");

    const Vector gx = f.gradient(x);
    const double scale = 1.0 + gx.norm();
    std::vector<unsigned> masks(1u << m);
    std::iota(masks.begin(), masks.end(), 0u);
    std::stable_sort(masks.begin(), masks.end(),
                     [](unsigned p, unsigned q) { return std::popcount(p) < std::popcount(q); });

    for (unsigned mask : masks) {
        const int k = std::popcount(mask);
        if (k > d) continue;
        Matrix as(k, d);
        Vector bs(k);
        std::vector<int> members;
        for (int j = 0, r = 0; j < m; ++j) {
            if (mask & (1u << j)) {
                as.row(r) = normals[static_cast<std::size_t>(j)].transpose();
                bs(r) = offsets[static_cast<std::size_t>(j)];
                members.push_back(j);
                ++r;
            }
        }
        if (k > 0) {
            Eigen::ColPivHouseholderQR<Matrix> qr(as.transpose());
            qr.setThreshold(1e-12);
            if (qr.rank() != k) continue;
        }

        Vector mu = Vector::Zero(k);
        Vector z = x;
        bool solved = true;
        if (k > 0 && f.is_quadratic()) {
            const SpdMetric& q = f.quadratic_metric();
            Matrix qinv_at(d, k);
            for (int r = 0; r < k; ++r) qinv_at.col(r) = q.solve(as.row(r).transpose());
            const Matrix g = as * qinv_at;
            mu = g.ldlt().solve(as * x - bs);
            z = x - qinv_at * mu;
        } else if (k > 0) {
            auto primal = [&](const Vector& mult) { return f.grad_inverse(gx - as.transpose() * mult); };
            z = primal(mu);
            Vector phi = as * z - bs;
            solved = false;
            for (int it = 0; it < 200; ++it) {
                if (phi.norm() <= 1e-13 * (1.0 + bs.norm() + z.norm())) {
                    solved = true;
                    break;
                }
                const Matrix h = f.hessian(z) + 1e-14 * Matrix::Identity(d, d);
                const Matrix hinv_at = h.ldlt().solve(as.transpose());
                const Matrix jac = -(as * hinv_at);
                const Vector step = jac.fullPivLu().solve(phi);
                double t = 1.0;
                bool moved = false;
                for (int ls = 0; ls < 50; ++ls) {
                    const Vector cand = mu - t * step;
                    const Vector zc = primal(cand);
                    const Vector pc = as * zc - bs;
                    if (zc.allFinite() && pc.norm() < phi.norm()) {
                        mu = cand;
                        z = zc;
                        phi = pc;
                        moved = true;
                        break;
                    }
                    t *= 0.5;
                }
                if (!moved) break;
            }
            if (!solved && phi.norm() <= 1e-10 * (1.0 + bs.norm() + z.norm())) solved = true;
        }
        if (!solved) continue;
        if ((mu.array() < -1e-12 * scale).any()) continue;

        double violation = 0.0;
        double complementarity = 0.0;
        for (int j = 0; j < m; ++j) {
            const double slack = pairing(normals[static_cast<std::size_t>(j)], z) - offsets[static_cast<std::size_t>(j)];
            violation = std::max(violation, slack);
        }
        if (violation > 1e-10 * (1.0 + z.norm())) continue;

        BregmanProjection out;
        out.multipliers.assign(halfspaces.size(), 0.0);
        Vector station = f.gradient(z) - gx;
        for (int r = 0; r < k; ++r) {
            const int j = members[static_cast<std::size_t>(r)];
            const double mult = std::max(mu(r), 0.0);
            station += mult * normals[static_cast<std::size_t>(j)];
            const double len = halfspaces[static_cast<std::size_t>(index[static_cast<std::size_t>(j)])].normal.norm();
            out.multipliers[static_cast<std::size_t>(index[static_cast<std::size_t>(j)])] = mult / len;
            const double slack = pairing(normals[static_cast<std::size_t>(j)], z) - offsets[static_cast<std::size_t>(j)];
            complementarity = std::max(complementarity, std::abs(mult * slack));
        }
        out.kkt_residual = std::max({station.norm(), violation, complementarity});
        if (out.kkt_residual > 1e-8 * scale) continue;
        out.z = std::move(z);
        return out;
    }
    throw SolverError("bregman_project: no active set satisfies the KKT conditions (infeasible system?)", kInf);
}

RsIterate rs_step(const LegendreFn& f, const std::vector<MonotoneOp>& ops, const std::vector<double>& lambdas,
                  const std::vector<Vector>& etas, const Vector& x0, const Vector& x, const Tolerances& tol) {
    const int d = f.dim();
    if (ops.empty()) throw InvalidArgument("rs_step: at least one operator is required");
    if (lambdas.size() != ops.size() || etas.size() != ops.size()) {
        throw DimensionError("rs_step: one lambda and one eta per operator");
    }
    require_point(x0, d, "rs_step x0");
    require_point(x, d, "rs_step x");

    RsIterate out;
    const Vector gx = f.gradient(x);
    std::vector<Halfspace> constraints;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        require_positive(lambdas[i], "rs_step: lambda");
        const Vector w = f.grad_inverse(lambdas[i] * etas[i] + gx);
        const InclusionSolution sol = solve_inclusion({f, ops[i], lambdas[i], x, etas[i]}, tol);

        Halfspace c;
        c.normal = f.gradient(w) - f.gradient(sol.y);
        if (c.is_whole()) {
            c = Halfspace::whole_space(d);
        } else {
            // D_f(z, y) <= D_f(z, w)  <=>  <grad f(w) - grad f(y), z - y> <= D_f(y, w).
            const double gap = f.is_quadratic() ? 0.5 * std::pow(metric_norm(f.quadratic_metric(), sol.y - w), 2)
                                                : bregman_distance(f, sol.y, w);
            c.offset = pairing(c.normal, sol.y) + gap;
        }
        out.w.push_back(w);
        out.y.push_back(sol.y);
        out.xi.push_back(sol.xi);
        out.c.push_back(c);
        constraints.push_back(c);
    }
    out.q.normal = f.gradient(x0) - gx;
    out.q.offset = out.q.is_whole() ? 0.0 : pairing(out.q.normal, x);
    constraints.push_back(out.q);

    BregmanProjection proj = bregman_project(f, constraints, x0);
    out.x_next = std::move(proj.z);
    out.kkt_residual = proj.kkt_residual;
    return out;
}

// ---------------------------------------------------------------------------
// Schedules and policies

double Schedule::at(int n) const { return kind == Kind::Constant ? value : c * std::pow(q, n); }

void Schedule::validate(const std::string& what) const {
    if (kind == Kind::Constant) {
        if (!(value > 0.0) || !std::isfinite(value)) throw InvalidArgument(what + ": constant value must be positive");
    } else {
        if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument(what + ": geometric c must be positive");
        if (!(q > 0.0) || !std::isfinite(q)) throw InvalidArgument(what + ": geometric q must be positive");
    }
}

SpdMetric MetricSchedule::draw(int dim, Rng& rng) const {
    switch (kind) {
        case Kind::Identity:
            return SpdMetric::identity(dim);
        case Kind::Diagonal:
            return SpdMetric::diagonal(diagonal);
        case Kind::RandomSpd:
            return SpdMetric(rng.spd_matrix(dim, min_eigenvalue, max_eigenvalue));
    }
    return SpdMetric::identity(dim);
}

void MetricSchedule::validate(int dim) const {
    if (kind == Kind::Diagonal) {
        if (diagonal.size() != dim) throw InvalidArgument("metric: diagonal needs one entry per coordinate");
        if (!diagonal.allFinite() || (diagonal.array() <= 0.0).any()) {
            throw InvalidArgument("metric: diagonal entries must be positive");
        }
    }
    if (kind == Kind::RandomSpd) {
        if (!(min_eigenvalue > 0.0) || !(max_eigenvalue >= min_eigenvalue) || !std::isfinite(max_eigenvalue)) {
            throw InvalidArgument("metric: need 0 < min_eigenvalue <= max_eigenvalue");
        }
    }
}

bool MetricSchedule::operator==(const MetricSchedule& o) const {
    return kind == o.kind && equal_vectors(diagonal, o.diagonal) && min_eigenvalue == o.min_eigenvalue &&
           max_eigenvalue == o.max_eigenvalue;
}

double PerturbationPolicy::norm_at(int n) const {
    switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::SummableGeometric:
            return c * std::pow(q, n);
        case Kind::ConstantNorm:
            return c;
        case Kind::RadiusFraction:
            break;
    }
    throw InvalidArgument("policy: radius_fraction norms depend on the iterate");
}

void PerturbationPolicy::validate() const {
    switch (kind) {
        case Kind::Zero:
            return;
        case Kind::SummableGeometric:
            if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("policy: c must be nonnegative");
            if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("policy: summable_geometric needs q in (0, 1)");
            return;
        case Kind::ConstantNorm:
            if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("policy: c must be nonnegative");
            return;
        case Kind::RadiusFraction:
            if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("policy: fraction must lie in (0, 1)");
            return;
    }
}

double SchemeParams::resolved_nu() const {
    if (nu) return *nu;
    if (nu_from) return ips_nu(nu_from->sigma, nu_from->rho, nu_from->lambda_hat);
    throw InvalidArgument("ips: nu or nu_from is required");
}

bool SchemeParams::operator==(const SchemeParams& o) const {
    return step == o.step && sigma == o.sigma && nu == o.nu && nu_from == o.nu_from && tau == o.tau &&
           metric == o.metric && equal_matrices(z_basis, o.z_basis);
}

MonotoneOp Problem::combined() const {
    if (ops.empty()) throw InvalidArgument("problem: no operators");
    return ops.size() == 1 ? ops.front() : MonotoneOp::sum(ops);
}

std::optional<Vector> Problem::zero() const {
    if (known_zero) return known_zero;
    for (const auto& candidate_op : ops) {
        const auto z = candidate_op.zero_hint();
        if (!z) continue;
        bool common = true;
        for (const auto& op : ops) {
            try {
                if (op.membership_residual(*z, Vector::Zero(dim())) > 1e-10) common = false;
            } catch (const DomainError&) {
                common = false;
            }
        }
        if (common) return z;
    }
    return std::nullopt;
}

void validate_scheme(Scheme scheme, const Problem& problem, const SchemeParams& params,
                     const PerturbationPolicy& policy) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    const int d = problem.dim();
    if (problem.ops.empty()) fail("operators: at least one operator is required");
    for (const auto& op : problem.ops) {
        if (op.dim() != d) fail("operators: dimension differs from space_dim");
    }
    if (problem.x0.size() != d) fail("x0: expected " + std::to_string(d) + " entries");
    if (!problem.x0.allFinite()) fail("x0: entries must be finite");
    if (problem.known_zero && problem.known_zero->size() != d) fail("known_zero: wrong dimension");
    try {
        params.step.validate("scheme_params step schedule");
        policy.validate();
    } catch (const InvalidArgument& e) {
        fail(e.what());
    }
    const bool radius = policy.kind == PerturbationPolicy::Kind::RadiusFraction;
    switch (scheme) {
        case Scheme::Eckstein:
        case Scheme::HalfspaceProjection:
            if (radius) fail("policy: radius_fraction applies only to ss, ips and pls");
            break;
        case Scheme::SolodovSvaiter:
        case Scheme::IusemPennanenSvaiter:
        case Scheme::ParenteLotitoSolodov:
            if (!problem.f.is_half_squared_norm()) {
                fail("legendre: scheme " + to_string(scheme) + " works in Euclidean geometry (quadratic:identity)");
            }
            break;
    }
    if (scheme == Scheme::SolodovSvaiter || scheme == Scheme::ParenteLotitoSolodov) {
        if (!(params.sigma >= 0.0) || !std::isfinite(params.sigma)) fail("scheme_params.sigma: must be nonnegative");
    }
    if (scheme == Scheme::IusemPennanenSvaiter) {
        double nu = 0.0;
        try {
            nu = params.resolved_nu();
        } catch (const InvalidArgument& e) {
            fail(std::string("scheme_params.nu: ") + e.what());
        }
        if (!(nu >= 0.0) || !std::isfinite(nu)) fail("scheme_params.nu: resolved nu must be nonnegative");
        if (params.z_basis) {
            if (params.z_basis->rows() != d) fail("scheme_params.z_basis: vectors need space_dim entries");
            try {
                (void)Subspace::spanned_by(*params.z_basis);
            } catch (const InvalidArgument& e) {
                fail(std::string("scheme_params.z_basis: ") + e.what());
            }
        }
    }
    if (scheme == Scheme::ParenteLotitoSolodov) {
        if (!(params.tau > 0.0 && params.tau < 2.0)) fail("scheme_params.tau: must lie in (0, 2)");
        try {
            params.metric.validate(d);
        } catch (const InvalidArgument& e) {
            fail(std::string("scheme_params.metric: ") + e.what());
        }
    }
}

// ---------------------------------------------------------------------------
// Driver

namespace {

struct Driver {
    Scheme scheme;
    const Problem& problem;
    const SchemeParams& params;
    const PerturbationPolicy& policy;
    const Tolerances& tol;
    int d;
    LegendreFn euclid;
    MonotoneOp op;
    Subspace z_space;
    double nu = 0.0;

    Driver(Scheme s, const Problem& p, const SchemeParams& sp, const PerturbationPolicy& pol, const Tolerances& t)
        : scheme(s),
          problem(p),
          params(sp),
          policy(pol),
          tol(t),
          d(p.dim()),
          euclid(LegendreFn::half_squared_norm(p.dim())),
          op(p.combined()),
          z_space(sp.z_basis ? Subspace::spanned_by(*sp.z_basis) : Subspace::whole(p.dim())) {
        if (s == Scheme::IusemPennanenSvaiter) nu = sp.resolved_nu();
    }

    double residual_at(const Vector& x, double step) const {
        switch (scheme) {
            case Scheme::Eckstein:
                return zero_residual(op, problem.f, step, x, tol);
            case Scheme::SolodovSvaiter:
                return zero_residual(op, euclid, 1.0 / step, x, tol);
            case Scheme::IusemPennanenSvaiter:
            case Scheme::ParenteLotitoSolodov:
                return zero_residual(op, euclid, step, x, tol);
            case Scheme::HalfspaceProjection: {
                double r = 0.0;
                for (const auto& a : problem.ops) r = std::max(r, zero_residual(a, problem.f, step, x, tol));
                return r;
            }
        }
        return kInf;
    }

    // Radius in the scheme's own error variable.
    double scheme_radius(const Vector& x, double step, const std::optional<SpdMetric>& metric) const {
        RadiusOptions opts;
        opts.probes = 16;
        opts.refinements = 12;
        opts.seed = policy.seed;
        switch (scheme) {
            case Scheme::SolodovSvaiter:
                return radius_search(euclid, op, 1.0 / step, x, StronglyImplicitSpec::solodov_svaiter(params.sigma),
                                     opts, tol)
                    .radius;
            case Scheme::IusemPennanenSvaiter:
                return step *
                       radius_search(euclid, op, step, x, StronglyImplicitSpec::iusem_pennanen_svaiter(nu), opts, tol)
                           .radius;
            case Scheme::ParenteLotitoSolodov:
                return step * metric->min_eigenvalue() *
                       radius_search(LegendreFn::quadratic(metric->inverse()), op, step, x,
                                     StronglyImplicitSpec::parente_lotito_solodov(params.sigma, *metric), opts, tol)
                           .radius;
            default:
                break;
        }
        throw InvalidArgument("radius_fraction: unsupported scheme");
    }
};

}  // namespace

IterateTrace run(Scheme scheme, const Problem& problem, const SchemeParams& params, const PerturbationPolicy& policy,
                 const StopRule& stop, const Tolerances& tol) {
    validate_scheme(scheme, problem, params, policy);
    if (stop.max_iters < 0) throw ConfigError("stop.max_iters: must be nonnegative");
    if (!(stop.zero_detect > 0.0)) throw ConfigError("stop.zero_detect: must be positive");
    Tolerances local = tol;
    local.zero_detect = stop.zero_detect;

    const auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

    Driver drv(scheme, problem, params, policy, local);
    const int d = drv.d;
    const std::size_t n_ops = scheme == Scheme::HalfspaceProjection ? problem.ops.size() : 1;
    Rng direction_rng(policy.seed);
    Rng metric_rng(policy.seed ^ 0x6a09e667f3bcc909ULL);

    IterateTrace trace;
    trace.scheme = scheme;
    trace.dim = d;

    Vector x = problem.x0;
    try {
        IterateRecord init;
        init.n = 0;
        init.x = x;
        init.step_param = 0.0;
        init.note = "init";
        init.zero_residual = drv.residual_at(x, params.step.at(0));
        init.wall_seconds = elapsed();
        trace.records.push_back(std::move(init));
    } catch (const Error& e) {
        trace.termination = Termination::SolverFailure;
        trace.error = e.what();
        return trace;
    }

    double eckstein_sum = 0.0;
    for (int n = 0;; ++n) {
        if (trace.records.back().zero_residual <= stop.zero_detect) {
            trace.termination = Termination::ZeroDetected;
            break;
        }
        if (n >= stop.max_iters) {
            trace.termination = Termination::IterationBudget;
            break;
        }
        const double step = params.step.at(n);
        IterateRecord rec;
        rec.n = n + 1;
        rec.step_param = step;
        try {
            std::optional<SpdMetric> metric;
            if (scheme == Scheme::ParenteLotitoSolodov) {
                metric = params.metric.draw(d, metric_rng);
                rec.metric = metric->matrix();
            }
            std::vector<Vector> dirs;
            for (std::size_t i = 0; i < n_ops; ++i) dirs.push_back(direction_rng.unit_vector(d));

            double norm = 0.0;
            if (policy.kind == PerturbationPolicy::Kind::RadiusFraction) {
                try {
                    rec.radius = drv.scheme_radius(x, step, metric);
                    norm = policy.fraction * rec.radius;
                } catch (const StrongImplicitnessError&) {
                    rec.radius = 0.0;
                    rec.note = "radius: theta(0) <= 0, eta = 0";
                }
            } else {
                norm = policy.norm_at(n);
            }
            std::vector<Vector> etas;
            for (const Vector& u : dirs) {
                Vector eta = norm * u;
                if (scheme == Scheme::IusemPennanenSvaiter) eta = drv.z_space.project(eta);
                etas.push_back(std::move(eta));
            }

            bool terminated = false;
            Vector next;
            for (int attempt = 0;; ++attempt) {
                if (attempt == kMaxShrinks) {
                    for (auto& e : etas) e.setZero();
                }
                StepStatus status = StepStatus::Advance;
                switch (scheme) {
                    case Scheme::Eckstein: {
                        const EcksteinStep s = eckstein_step(problem.f, drv.op, step, x, etas[0], local);
                        next = s.x_next;
                        rec.y = {s.x_next};
                        rec.xi = {s.xi};
                        break;
                    }
                    case Scheme::SolodovSvaiter:
                    case Scheme::IusemPennanenSvaiter:
                    case Scheme::ParenteLotitoSolodov: {
                        SchemeStep s;
                        if (scheme == Scheme::SolodovSvaiter) {
                            s = ss_step(drv.op, step, params.sigma, x, etas[0], local);
                        } else if (scheme == Scheme::IusemPennanenSvaiter) {
                            s = ips_step(drv.op, step, drv.nu, drv.z_space, x, etas[0], local);
                        } else {
                            s = pls_step(drv.op, step, *metric, params.sigma, params.tau, x, etas[0], local);
                        }
                        status = s.status;
                        next = s.x_next;
                        rec.y = {s.y};
                        rec.xi = {s.xi};
                        break;
                    }
                    case Scheme::HalfspaceProjection: {
                        const std::vector<double> lambdas(n_ops, step);
                        RsIterate s = rs_step(problem.f, problem.ops, lambdas, etas, problem.x0, x, local);
                        next = s.x_next;
                        rec.y = s.y;
                        rec.xi = s.xi;
                        rec.halfspaces = s.c;
                        rec.halfspaces.push_back(s.q);
                        break;
                    }
                }
                if (status == StepStatus::Reject && attempt < kMaxShrinks) {
                    for (auto& e : etas) e *= 0.5;
                    ++rec.rejects;
                    continue;
                }
                terminated = status == StepStatus::Terminate;
                break;
            }
            if (terminated) {
                auto& last = trace.records.back();
                last.note += last.note.empty() ? "" : "; ";
                last.note += "terminate";
                trace.termination = Termination::SchemeTerminated;
                break;
            }

            rec.eta = etas;
            double norm2 = 0.0;
            for (const auto& e : etas) norm2 += e.squaredNorm();
            rec.eta_norm = std::sqrt(norm2);
            if (rec.rejects > 0) {
                rec.note += rec.note.empty() ? "" : "; ";
                rec.note += rec.rejects >= kMaxShrinks ? "rejected " + std::to_string(rec.rejects) + ", eta = 0"
                                                       : "rejected " + std::to_string(rec.rejects);
            }
            x = next;
            rec.x = x;
            if (scheme == Scheme::Eckstein) {
                eckstein_sum += pairing(etas[0], x);
                rec.eckstein_partial_sum = eckstein_sum;
            }
            rec.zero_residual = drv.residual_at(x, step);
            rec.wall_seconds = elapsed();
            trace.records.push_back(std::move(rec));
        } catch (const StrongImplicitnessError& e) {
            trace.termination = Termination::StrongImplicitness;
            trace.error = e.what();
            break;
        } catch (const Error& e) {
            trace.termination = Termination::SolverFailure;
            trace.error = e.what();
            break;
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Audits

namespace {

struct Auditor {
    AuditReport rep;
    void check(bool ok, double residual, int n, const std::string& what) {
        ++rep.checked;
        if (std::isfinite(residual)) rep.worst = std::max(rep.worst, residual);
        if (!ok) {
            if (rep.failures == 0) rep.first_failure = "n = " + std::to_string(n) + ": " + what;
            ++rep.failures;
        }
    }
};

double membership(const MonotoneOp& a, const Vector& y, const Vector& xi) {
    try {
        return a.membership_residual(y, xi);
    } catch (const DomainError&) {
        return kInf;
    }
}

}  // namespace

AuditReport audit_conditions(Scheme scheme, const Problem& problem, const SchemeParams& params,
                             const IterateTrace& trace, const Tolerances& tol) {
    Auditor au;
    const MonotoneOp op = problem.combined();
    const double rel = 1e-10;
    for (std::size_t k = 1; k < trace.records.size(); ++k) {
        const IterateRecord& r = trace.records[k];
        const Vector& xp = trace.records[k - 1].x;
        const double step = r.step_param;
        const int n = r.n;
        if (r.y.empty() || r.eta.empty()) {
            au.check(false, kInf, n, "record without step data");
            continue;
        }
        const Vector& y = r.y[0];
        const Vector& xi = r.xi[0];
        const Vector& eta = r.eta[0];
        switch (scheme) {
            case Scheme::Eckstein: {
                const InclusionInstance inst{problem.f, op, step, xp, eta / step};
                const VerificationReport v = verify_solution(inst, r.x, xi, tol);
                au.check(v.passed(), std::max(v.membership_residual, v.identity_residual), n,
                         "inclusion residuals " + format_number(v.membership_residual) + ", " +
                             format_number(v.identity_residual));
                break;
            }
            case Scheme::SolodovSvaiter: {
                const double mem = membership(op, y, xi);
                au.check(mem <= tol.membership, mem, n, "xi not in A(y)");
                const double ident = (xi + eta + step * (y - xp)).norm();
                au.check(ident <= rel * (1.0 + eta.norm() + step * (y - xp).norm()), ident, n, "error identity");
                const double rhs = params.sigma * std::max(xi.norm(), step * (y - xp).norm());
                au.check(eta.norm() <= rhs * (1.0 + 1e-12) + 1e-300, eta.norm() - rhs, n, "relative error condition");
                const Vector expect = xp - (pairing(xi, xp - y) / xi.squaredNorm()) * xi;
                const double upd = (r.x - expect).norm();
                au.check(upd <= rel * (1.0 + xp.norm()), upd, n, "projection update");
                break;
            }
            case Scheme::IusemPennanenSvaiter: {
                const double mem = membership(op, y, xi);
                au.check(mem <= tol.membership, mem, n, "(eta - y + x)/lambda not in A(y)");
                const double ident = (step * xi + y - xp - eta).norm();
                au.check(ident <= rel * (1.0 + eta.norm() + xp.norm()), ident, n, "error identity");
                const Subspace z = params.z_basis ? Subspace::spanned_by(*params.z_basis) : Subspace::whole(trace.dim);
                const double dz = z.distance(eta);
                au.check(dz <= 1e-12 * (1.0 + eta.norm()), dz, n, "eta outside Z");
                const double rhs = params.resolved_nu() * (y - xp).norm();
                au.check(eta.norm() <= rhs * (1.0 + 1e-12) + 1e-300, eta.norm() - rhs, n, "relative error condition");
                const double upd = (r.x - (y - eta)).norm();
                au.check(upd <= rel * (1.0 + xp.norm()), upd, n, "extragradient update");
                break;
            }
            case Scheme::ParenteLotitoSolodov: {
                if (!r.metric) {
                    au.check(false, kInf, n, "missing metric");
                    break;
                }
                const SpdMetric m(*r.metric);
                const double mem = membership(op, y, xi);
                au.check(mem <= tol.membership, mem, n, "xi not in A(y)");
                const Vector cmxi = step * m.apply(xi);
                const double ident = (cmxi + y - xp - eta).norm();
                au.check(ident <= rel * (1.0 + eta.norm() + xp.norm()), ident, n, "error identity");
                const double e = inverse_metric_norm(m, eta);
                const double u = inverse_metric_norm(m, cmxi);
                const double v = inverse_metric_norm(m, y - xp);
                const double rhs = params.sigma * params.sigma * (u * u + v * v);
                au.check(e * e <= rhs * (1.0 + 1e-12) + 1e-300, e * e - rhs, n, "relative error condition");
                const Vector mxi = m.apply(xi);
                const Vector expect = xp - (params.tau * pairing(xi, xp - y) / pairing(mxi, xi)) * mxi;
                const double upd = (r.x - expect).norm();
                au.check(upd <= rel * (1.0 + xp.norm()), upd, n, "metric projection update");
                break;
            }
            case Scheme::HalfspaceProjection: {
                if (r.y.size() != problem.ops.size()) {
                    au.check(false, kInf, n, "operator count mismatch");
                    break;
                }
                for (std::size_t i = 0; i < problem.ops.size(); ++i) {
                    const InclusionInstance inst{problem.f, problem.ops[i], step, xp, r.eta[i]};
                    const VerificationReport v = verify_solution(inst, r.y[i], r.xi[i], tol);
                    au.check(v.passed(), std::max(v.membership_residual, v.identity_residual), n,
                             "inclusion " + std::to_string(i + 1));
                }
                for (const Halfspace& h : r.halfspaces) {
                    const double sd = h.signed_distance(r.x);
                    au.check(sd <= 1e-9 * (1.0 + r.x.norm()), sd, n, "x_{n+1} outside C_n or Q_n");
                }
                break;
            }
        }
    }
    return au.rep;
}

AuditReport audit_fejer(const IterateTrace& trace, const Vector& z, double slack) {
    Auditor au;
    for (std::size_t k = 1; k < trace.records.size(); ++k) {
        const double before = (trace.records[k - 1].x - z).norm();
        const double after = (trace.records[k].x - z).norm();
        au.check(after <= before + slack, after - before, trace.records[k].n, "distance to the zero increased");
    }
    return au.rep;
}

AuditReport audit_rs_containment(const IterateTrace& trace, const Vector& z, double slack) {
    Auditor au;
    for (const IterateRecord& r : trace.records) {
        for (const Halfspace& h : r.halfspaces) {
            if (h.is_whole()) {
                au.check(true, 0.0, r.n, "");
                continue;
            }
            const double sd = h.signed_distance(z);
            au.check(sd <= slack, sd, r.n, "common zero outside a halfspace (signed distance " + format_number(sd) + ")");
        }
    }
    return au.rep;
}

}  // namespace proxlab
