#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace proxlab {

// One representation serves both primal points and dual (gradient-like)
// vectors; finite-dimensional Euclidean identification.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr int kMaxDim = 64;

/// Throws DimensionError unless a and b have the same length.
void require_same_dim(const Vector& a, const Vector& b, std::string_view where);

/// Throws InvalidArgument if any entry is NaN or infinite, or dim is outside [1, kMaxDim].
void require_valid(const Vector& v, std::string_view where);

/// Euclidean pairing <a, b>.
double pairing(const Vector& a, const Vector& b);

/// Symmetric positive-definite matrix with a cached Cholesky factor.
class SpdMetric {
public:
    /// Throws InvalidArgument if the matrix is not square, not symmetric to
    /// 1e-12 relative, or the Cholesky factorization fails.
    explicit SpdMetric(Matrix m);

    static SpdMetric identity(int dim);
    static SpdMetric diagonal(const Vector& d);

    int dim() const { return static_cast<int>(matrix_.rows()); }
    const Matrix& matrix() const { return matrix_; }
    bool is_diagonal() const { return diagonal_; }
    bool is_identity() const;

    Vector apply(const Vector& w) const;
    Vector solve(const Vector& b) const;
    /// The metric with matrix M^{-1}.
    SpdMetric inverse() const;
    double min_eigenvalue() const;
    double max_eigenvalue() const;

private:
    Matrix matrix_;
    Eigen::LLT<Matrix> llt_;
    bool diagonal_ = false;
};

/// ||w||_M = sqrt(<Mw, w>).
double metric_norm(const SpdMetric& m, const Vector& w);

/// ||w||_{M^{-1}} = sqrt(<M^{-1}w, w>).
double inverse_metric_norm(const SpdMetric& m, const Vector& w);

/// Solves Mx = b using the cached factorization.
Vector spd_solve(const SpdMetric& m, const Vector& b);

struct Tolerances {
    double inner_residual = 1e-10;
    double membership = 1e-8;
    double zero_detect = 1e-8;

    void validate() const;
    bool operator==(const Tolerances&) const = default;
};

// Seeded generator with hand-rolled distributions so that streams are
// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi);
    double normal();
    int uniform_int(int lo, int hi);  // inclusive
    Vector normal_vector(int dim);
    Vector uniform_vector(int dim, double lo, double hi);
    /// Uniform on the unit sphere in R^dim.
    Vector unit_vector(int dim);
    /// Random SPD matrix Q diag(e) Q^T with eigenvalues e uniform in [lo, hi].
    Matrix spd_matrix(int dim, double lo, double hi);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Shortest decimal string that round-trips to the same double.
std::string format_number(double v);

/// Comma-separated shortest round-trip rendering of the entries.
std::string format_vector(const Vector& v, char sep = ',');

/// Element i of the base-b radical-inverse (Halton) sequence.
double radical_inverse(std::uint64_t i, std::uint32_t base);

}  // namespace proxlab
