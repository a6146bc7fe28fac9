#pragma once

#include "proxlab/legendre.hpp"
#include "proxlab/numerics.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace proxlab {

/// A(y) for every catalog operator is a product of closed intervals
/// [lo_i, hi_i] (degenerate for single-valued parts, possibly unbounded).
struct ValueBox {
    Vector lo;
    Vector hi;

    /// Nearest element of the box to xi.
    Vector clamp(const Vector& xi) const;
    double distance(const Vector& xi) const;
};

struct GraphPoint {
    Vector y;
    Vector xi;
};

struct Interval {
    double lo;
    double hi;
};

class MonotoneOp;

namespace op_kind {

/// w * subdifferential of ||. - shift||_1.
struct SubdiffAbs {
    Vector shift;
    double weight;
};
/// y -> M y + b with M monotone (symmetric part PSD).
struct Affine {
    Matrix matrix;
    Vector offset;
};
/// Normal cone of the box [lower, upper].
struct NormalConeBox {
    Vector lower;
    Vector upper;
};
/// y -> weight * grad F(y - shift) for a catalog convex F.
struct GradientOfConvex {
    LegendreFn potential;
    Vector shift;
    double weight;
};
struct Scaled {
    double factor;
    std::shared_ptr<const MonotoneOp> inner;
};
struct Sum {
    std::vector<MonotoneOp> terms;
};

}  // namespace op_kind

// Immutable descriptor of a maximally monotone operator on R^dim. Values are
// never materialized as sets; interaction goes through the box oracle.
class MonotoneOp {
public:
    using Kind = std::variant<op_kind::SubdiffAbs, op_kind::Affine, op_kind::NormalConeBox,
                              op_kind::GradientOfConvex, op_kind::Scaled, op_kind::Sum>;

    static MonotoneOp subdiff_abs(Vector shift, double weight = 1.0);
    static MonotoneOp affine(Matrix matrix, Vector offset);
    static MonotoneOp identity(int dim);
    static MonotoneOp normal_cone_box(Vector lower, Vector upper);
    static MonotoneOp gradient_of_convex(LegendreFn potential, Vector shift, double weight = 1.0);
    static MonotoneOp scaled(double factor, MonotoneOp inner);
    static MonotoneOp sum(std::vector<MonotoneOp> terms);

    int dim() const { return dim_; }
    const Kind& kind() const { return *kind_; }

    /// A(y) as a box. Throws DomainError where A(y) is empty.
    ValueBox value(const Vector& y) const;
    /// Distance from xi to A(y).
    double membership_residual(const Vector& y, const Vector& xi) const;
    Vector nearest_element(const Vector& y, const Vector& xi) const;

    bool single_valued() const;
    /// (M, b) when A(y) = My + b.
    std::optional<std::pair<Matrix, Vector>> as_affine() const;
    /// Jacobian of a single-valued operator.
    Matrix jacobian(const Vector& y) const;
    /// (shift, weight) when A is a positive multiple of a subdiff_abs.
    std::optional<std::pair<Vector, double>> as_abs() const;

    /// Coordinate i of A(y) depends on y_i only.
    bool separable() const;
    /// Projection of dom A on coordinate i.
    Interval coordinate_domain(int i) const;
    /// Points where coordinate i of A is multivalued.
    std::vector<double> coordinate_kinks(int i) const;

    /// A point of the graph; y is drawn around the origin and sometimes
    /// snapped to kinks so that multivalued points are exercised.
    GraphPoint sample_graph(Rng& rng, double radius = 3.0) const;
    /// A known zero of A, when the catalog kind exposes one.
    std::optional<Vector> zero_hint() const;

    std::string spec() const;

private:
    MonotoneOp(int dim, Kind kind);

    int dim_;
    std::shared_ptr<const Kind> kind_;
};

/// Cube of witnesses for the enlargement oracle.
struct WitnessRegion {
    std::optional<Vector> center;  // defaults to y
    double half_width = 2.0;
};

/// max(0, sup over sampled (x', y') in graph A of -eps - <y' - xi, x' - y>).
/// Witness points x' come from a Halton sequence over the region; for each
/// x' the worst y' in A(x') is selected exactly from the value box.
double enlargement_residual(const MonotoneOp& a, double eps, const Vector& y, const Vector& xi,
                            int witness_budget, const WitnessRegion& region = {});

/// Parses an operator catalog string for R^dim. Throws ConfigError.
MonotoneOp parse_operator(const std::string& spec, int dim);

}  // namespace proxlab
