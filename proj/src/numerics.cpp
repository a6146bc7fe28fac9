#include "proxlab/numerics.hpp"

#include "proxlab/errors.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace proxlab {

void require_same_dim(const Vector& a, const Vector& b, std::string_view where) {
    if (a.size() != b.size()) {
        throw DimensionError(std::string(where) + ": dimension mismatch (" + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()) + ")");
    }
}

void require_valid(const Vector& v, std::string_view where) {
    if (v.size() < 1 || v.size() > kMaxDim) {
        throw InvalidArgument(std::string(where) + ": dimension " + std::to_string(v.size()) +
                              " outside [1, " + std::to_string(kMaxDim) + "]");
    }
    if (!v.allFinite()) throw InvalidArgument(std::string(where) + ": non-finite entry");
}

double pairing(const Vector& a, const Vector& b) {
    require_same_dim(a, b, "pairing");
    return a.dot(b);
}

SpdMetric::SpdMetric(Matrix m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1) {
        throw InvalidArgument("SpdMetric: matrix must be square and nonempty");
    }
    if (!matrix_.allFinite()) throw InvalidArgument("SpdMetric: non-finite entry");
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidArgument("SpdMetric: matrix is not symmetric");
    }
    matrix_ = 0.5 * (matrix_ + matrix_.transpose());
    llt_.compute(matrix_);
    if (llt_.info() != Eigen::Success) throw InvalidArgument("SpdMetric: matrix is not positive definite");
    Matrix off = matrix_;
    off.diagonal().setZero();
    diagonal_ = off.isZero(0.0);
}

SpdMetric SpdMetric::identity(int dim) { return SpdMetric(Matrix::Identity(dim, dim)); }

SpdMetric SpdMetric::diagonal(const Vector& d) { return SpdMetric(Matrix(d.asDiagonal())); }

bool SpdMetric::is_identity() const { return matrix_.isIdentity(0.0); }

Vector SpdMetric::apply(const Vector& w) const {
    if (w.size() != matrix_.rows()) throw DimensionError("SpdMetric::apply: dimension mismatch");
    return matrix_ * w;
}

Vector SpdMetric::solve(const Vector& b) const {
    if (b.size() != matrix_.rows()) throw DimensionError("spd_solve: dimension mismatch");
    if (diagonal_) return b.cwiseQuotient(matrix_.diagonal());
    return llt_.solve(b);
}

SpdMetric SpdMetric::inverse() const {
    if (diagonal_) return diagonal(matrix_.diagonal().cwiseInverse());
    Matrix inv = llt_.solve(Matrix::Identity(dim(), dim()));
    return SpdMetric(0.5 * (inv + inv.transpose()));
}

double SpdMetric::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double SpdMetric::max_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double metric_norm(const SpdMetric& m, const Vector& w) {
    return std::sqrt(std::max(0.0, m.apply(w).dot(w)));
}

double inverse_metric_norm(const SpdMetric& m, const Vector& w) {
    return std::sqrt(std::max(0.0, m.solve(w).dot(w)));
}

Vector spd_solve(const SpdMetric& m, const Vector& b) { return m.solve(b); }

void Tolerances::validate() const {
    if (!(inner_residual > 0) || !(membership > 0) || !(zero_detect > 0)) {
        throw InvalidArgument("Tolerances: all tolerances must be strictly positive");
    }
}

double Rng::uniform() {
    // 53 random mantissa bits.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

int Rng::uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
}

Vector Rng::normal_vector(int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = normal();
    return v;
}

Vector Rng::uniform_vector(int dim, double lo, double hi) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = uniform(lo, hi);
    return v;
}

Vector Rng::unit_vector(int dim) {
    for (;;) {
        Vector v = normal_vector(dim);
        const double n = v.norm();
        if (n > 1e-12) return v / n;
    }
}

Matrix Rng::spd_matrix(int dim, double lo, double hi) {
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix q = qr.householderQ();
    Vector eig = uniform_vector(dim, lo, hi);
    Matrix m = q * eig.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_vector(const Vector& v, char sep) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out += sep;
        out += format_number(v(i));
    }
    return out;
}

double radical_inverse(std::uint64_t i, std::uint32_t base) {
    double inv_base = 1.0 / base;
    double factor = inv_base;
    double result = 0.0;
    while (i > 0) {
        result += static_cast<double>(i % base) * factor;
        i /= base;
        factor *= inv_base;
    }
    return result;
}

}  // namespace proxlab
