#include "proxlab/operators.hpp"

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

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(const Vector& v, int dim, const char* where) {
    if (v.size() != dim) {
        throw DimensionError(std::string(where) + ": expected dimension " + std::to_string(dim) + ", got " +
                             std::to_string(v.size()));
    }
}

const std::vector<std::uint32_t>& primes() {
    static const std::vector<std::uint32_t> table = [] {
        std::vector<std::uint32_t> p;
        for (std::uint32_t n = 2; p.size() < static_cast<std::size_t>(kMaxDim); ++n) {
            bool is_prime = true;
            for (auto q : p) {
                if (q * q > n) break;
                if (n % q == 0) {
                    is_prime = false;
                    break;
                }
            }
            if (is_prime) p.push_back(n);
        }
        return p;
    }();
    return table;
}

}  // namespace

Vector ValueBox::clamp(const Vector& xi) const { return xi.cwiseMax(lo).cwiseMin(hi); }

double ValueBox::distance(const Vector& xi) const { return (xi - clamp(xi)).norm(); }

MonotoneOp::MonotoneOp(int dim, Kind kind) : dim_(dim), kind_(std::make_shared<const Kind>(std::move(kind))) {}

MonotoneOp MonotoneOp::subdiff_abs(Vector shift, double weight) {
    require_valid(shift, "subdiff_abs");
    if (!(weight >= 0) || !std::isfinite(weight)) throw InvalidArgument("subdiff_abs: weight must be >= 0");
    const int d = static_cast<int>(shift.size());
    return MonotoneOp(d, op_kind::SubdiffAbs{std::move(shift), weight});
}

MonotoneOp MonotoneOp::affine(Matrix matrix, Vector offset) {
    require_valid(offset, "affine");
    if (matrix.rows() != offset.size() || matrix.cols() != offset.size()) {
        throw DimensionError("affine: matrix and offset dimensions disagree");
    }
    if (!matrix.allFinite()) throw InvalidArgument("affine: non-finite matrix entry");
    const Matrix sym = 0.5 * (matrix + matrix.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-12 * scale) {
        throw InvalidArgument("affine: symmetric part of the matrix is not positive semidefinite");
    }
    const int d = static_cast<int>(offset.size());
    return MonotoneOp(d, op_kind::Affine{std::move(matrix), std::move(offset)});
}

MonotoneOp MonotoneOp::identity(int dim) { return affine(Matrix::Identity(dim, dim), Vector::Zero(dim)); }

MonotoneOp MonotoneOp::normal_cone_box(Vector lower, Vector upper) {
    require_valid(lower, "normal_cone_box");
    require_valid(upper, "normal_cone_box");
    require_same_dim(lower, upper, "normal_cone_box");
    if ((lower.array() > upper.array()).any()) throw InvalidArgument("normal_cone_box: lower > upper");
    const int d = static_cast<int>(lower.size());
    return MonotoneOp(d, op_kind::NormalConeBox{std::move(lower), std::move(upper)});
}

MonotoneOp MonotoneOp::gradient_of_convex(LegendreFn potential, Vector shift, double weight) {
    require_valid(shift, "gradient_of_convex");
    require_dim(shift, potential.dim(), "gradient_of_convex");
    if (!(weight >= 0) || !std::isfinite(weight)) throw InvalidArgument("gradient_of_convex: weight must be >= 0");
    const int d = potential.dim();
    return MonotoneOp(d, op_kind::GradientOfConvex{std::move(potential), std::move(shift), weight});
}

MonotoneOp MonotoneOp::scaled(double factor, MonotoneOp inner) {
    if (!(factor > 0) || !std::isfinite(factor)) throw InvalidArgument("scaled: factor must be > 0");
    const int d = inner.dim();
    return MonotoneOp(d, op_kind::Scaled{factor, std::make_shared<const MonotoneOp>(std::move(inner))});
}

MonotoneOp MonotoneOp::sum(std::vector<MonotoneOp> terms) {
    if (terms.empty()) throw InvalidArgument("sum: needs at least one term");
    const int d = terms.front().dim();
    for (const auto& t : terms) {
        if (t.dim() != d) throw DimensionError("sum: terms have different dimensions");
    }
    if (terms.size() == 1) return terms.front();
    return MonotoneOp(d, op_kind::Sum{std::move(terms)});
}

ValueBox MonotoneOp::value(const Vector& y) const {
    require_dim(y, dim_, "MonotoneOp::value");
    return std::visit(
        overloaded{
            [&](const op_kind::SubdiffAbs& a) {
                ValueBox box{Vector(dim_), Vector(dim_)};
                for (int i = 0; i < dim_; ++i) {
                    if (y(i) > a.shift(i)) {
                        box.lo(i) = box.hi(i) = a.weight;
                    } else if (y(i) < a.shift(i)) {
                        box.lo(i) = box.hi(i) = -a.weight;
                    } else {
                        box.lo(i) = -a.weight;
                        box.hi(i) = a.weight;
                    }
                }
                return box;
            },
            [&](const op_kind::Affine& a) {
                Vector v = a.matrix * y + a.offset;
                return ValueBox{v, v};
            },
            [&](const op_kind::NormalConeBox& b) {
                ValueBox box{Vector::Zero(dim_), Vector::Zero(dim_)};
                for (int i = 0; i < dim_; ++i) {
                    if (y(i) < b.lower(i) || y(i) > b.upper(i)) {
                        throw DomainError("normal_cone_box: empty operator value (point outside the box)");
                    }
                    if (y(i) == b.lower(i)) box.lo(i) = -kInf;
                    if (y(i) == b.upper(i)) box.hi(i) = kInf;
                }
                return box;
            },
            [&](const op_kind::GradientOfConvex& g) {
                Vector v = g.weight * g.potential.gradient(y - g.shift);
                return ValueBox{v, v};
            },
            [&](const op_kind::Scaled& s) {
                ValueBox box = s.inner->value(y);
                box.lo *= s.factor;
                box.hi *= s.factor;
                return box;
            },
            [&](const op_kind::Sum& s) {
                ValueBox box{Vector::Zero(dim_), Vector::Zero(dim_)};
                for (const auto& t : s.terms) {
                    const ValueBox part = t.value(y);
                    box.lo += part.lo;
                    box.hi += part.hi;
                }
                return box;
            },
        },
        *kind_);
}

double MonotoneOp::membership_residual(const Vector& y, const Vector& xi) const {
    require_dim(xi, dim_, "membership_residual");
    return value(y).distance(xi);
}

Vector MonotoneOp::nearest_element(const Vector& y, const Vector& xi) const {
    require_dim(xi, dim_, "nearest_element");
    return value(y).clamp(xi);
}

bool MonotoneOp::single_valued() const {
    return std::visit(overloaded{
                          [](const op_kind::SubdiffAbs& a) { return a.weight == 0.0; },
                          [](const op_kind::Affine&) { return true; },
                          [](const op_kind::NormalConeBox&) { return false; },
                          [](const op_kind::GradientOfConvex&) { return true; },
                          [](const op_kind::Scaled& s) { return s.inner->single_valued(); },
                          [](const op_kind::Sum& s) {
                              for (const auto& t : s.terms)
                                  if (!t.single_valued()) return false;
                              return true;
                          },
                      },
                      *kind_);
}

std::optional<std::pair<Matrix, Vector>> MonotoneOp::as_affine() const {
    using Result = std::optional<std::pair<Matrix, Vector>>;
    return std::visit(
        overloaded{
            [&](const op_kind::SubdiffAbs& a) -> Result {
                if (a.weight != 0.0) return std::nullopt;
                return std::pair{Matrix(Matrix::Zero(dim_, dim_)), Vector(Vector::Zero(dim_))};
            },
            [](const op_kind::Affine& a) -> Result { return std::pair{a.matrix, a.offset}; },
            [](const op_kind::NormalConeBox&) -> Result { return std::nullopt; },
            [](const op_kind::GradientOfConvex& g) -> Result {
                if (!g.potential.is_quadratic()) return std::nullopt;
                Matrix m = g.weight * g.potential.quadratic_metric().matrix();
                Vector b = -(m * g.shift);
                return std::pair{std::move(m), std::move(b)};
            },
            [](const op_kind::Scaled& s) -> Result {
                auto inner = s.inner->as_affine();
                if (!inner) return std::nullopt;
                return std::pair{Matrix(s.factor * inner->first), Vector(s.factor * inner->second)};
            },
            [&](const op_kind::Sum& s) -> Result {
                Matrix m = Matrix::Zero(dim_, dim_);
                Vector b = Vector::Zero(dim_);
                for (const auto& t : s.terms) {
                    auto part = t.as_affine();
                    if (!part) return std::nullopt;
                    m += part->first;
                    b += part->second;
                }
                return std::pair{std::move(m), std::move(b)};
            },
        },
        *kind_);
}

Matrix MonotoneOp::jacobian(const Vector& y) const {
    require_dim(y, dim_, "jacobian");
    return std::visit(overloaded{
                          [&](const op_kind::SubdiffAbs& a) -> Matrix {
                              if (a.weight != 0.0) throw UnsupportedError("jacobian: subdiff_abs is multivalued");
                              return Matrix::Zero(dim_, dim_);
                          },
                          [](const op_kind::Affine& a) -> Matrix { return a.matrix; },
                          [](const op_kind::NormalConeBox&) -> Matrix {
                              throw UnsupportedError("jacobian: normal_cone_box is multivalued");
                          },
                          [&](const op_kind::GradientOfConvex& g) -> Matrix {
                              return g.weight * g.potential.hessian(y - g.shift);
                          },
                          [&](const op_kind::Scaled& s) -> Matrix { return s.factor * s.inner->jacobian(y); },
                          [&](const op_kind::Sum& s) -> Matrix {
                              Matrix j = Matrix::Zero(dim_, dim_);
                              for (const auto& t : s.terms) j += t.jacobian(y);
                              return j;
                          },
                      },
                      *kind_);
}

std::optional<std::pair<Vector, double>> MonotoneOp::as_abs() const {
    using Result = std::optional<std::pair<Vector, double>>;
    if (const auto* a = std::get_if<op_kind::SubdiffAbs>(kind_.get())) return std::pair{a->shift, a->weight};
    if (const auto* s = std::get_if<op_kind::Scaled>(kind_.get())) {
        auto inner = s->inner->as_abs();
        if (!inner) return std::nullopt;
        return Result(std::pair{inner->first, s->factor * inner->second});
    }
    return std::nullopt;
}

bool MonotoneOp::separable() const {
    if (dim_ == 1) return true;
    return std::visit(overloaded{
                          [](const op_kind::SubdiffAbs&) { return true; },
                          [](const op_kind::Affine& a) {
                              Matrix off = a.matrix;
                              off.diagonal().setZero();
                              return off.isZero(0.0);
                          },
                          [](const op_kind::NormalConeBox&) { return true; },
                          [](const op_kind::GradientOfConvex& g) { return g.potential.separable(); },
                          [](const op_kind::Scaled& s) { return s.inner->separable(); },
                          [](const op_kind::Sum& s) {
                              for (const auto& t : s.terms)
                                  if (!t.separable()) return false;
                              return true;
                          },
                      },
                      *kind_);
}

Interval MonotoneOp::coordinate_domain(int i) const {
    return std::visit(overloaded{
                          [&](const op_kind::NormalConeBox& b) { return Interval{b.lower(i), b.upper(i)}; },
                          [&](const op_kind::Scaled& s) { return s.inner->coordinate_domain(i); },
                          [&](const op_kind::Sum& s) {
                              Interval dom{-kInf, kInf};
                              for (const auto& t : s.terms) {
                                  const Interval part = t.coordinate_domain(i);
                                  dom.lo = std::max(dom.lo, part.lo);
                                  dom.hi = std::min(dom.hi, part.hi);
                              }
                              return dom;
                          },
                          [](const auto&) { return Interval{-kInf, kInf}; },
                      },
                      *kind_);
}

std::vector<double> MonotoneOp::coordinate_kinks(int i) const {
    return std::visit(overloaded{
                          [&](const op_kind::SubdiffAbs& a) {
                              return a.weight > 0 ? std::vector<double>{a.shift(i)} : std::vector<double>{};
                          },
                          [&](const op_kind::NormalConeBox& b) { return std::vector<double>{b.lower(i), b.upper(i)}; },
                          [&](const op_kind::Scaled& s) { return s.inner->coordinate_kinks(i); },
                          [&](const op_kind::Sum& s) {
                              std::vector<double> k;
                              for (const auto& t : s.terms) {
                                  auto part = t.coordinate_kinks(i);
                                  k.insert(k.end(), part.begin(), part.end());
                              }
                              return k;
                          },
                          [](const auto&) { return std::vector<double>{}; },
                      },
                      *kind_);
}

GraphPoint MonotoneOp::sample_graph(Rng& rng, double radius) const {
    Vector y(dim_);
    for (int i = 0; i < dim_; ++i) {
        const Interval dom = coordinate_domain(i);
        if (std::isfinite(dom.lo) && std::isfinite(dom.hi)) {
            y(i) = rng.uniform(dom.lo, dom.hi);
        } else {
            y(i) = std::clamp(rng.uniform(-radius, radius), dom.lo, dom.hi);
        }
        const auto kinks = coordinate_kinks(i);
        if (!kinks.empty() && rng.uniform() < 0.3) {
            const double k = kinks[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kinks.size()) - 1))];
            if (k >= dom.lo && k <= dom.hi) y(i) = k;
        }
    }
    const ValueBox box = value(y);
    Vector xi(dim_);
    for (int i = 0; i < dim_; ++i) {
        if (box.lo(i) == box.hi(i)) {
            xi(i) = box.lo(i);
            continue;
        }
        double lo = box.lo(i), hi = box.hi(i);
        if (std::isinf(lo) && std::isinf(hi)) {
            lo = -radius;
            hi = radius;
        } else if (std::isinf(lo)) {
            lo = hi - radius;
        } else if (std::isinf(hi)) {
            hi = lo + radius;
        }
        xi(i) = rng.uniform(lo, hi);
    }
    return {std::move(y), std::move(xi)};
}

std::optional<Vector> MonotoneOp::zero_hint() const {
    std::optional<Vector> candidate = std::visit(
        overloaded{
            [](const op_kind::SubdiffAbs& a) -> std::optional<Vector> { return a.shift; },
            [](const op_kind::Affine& a) -> std::optional<Vector> {
                Eigen::FullPivLU<Matrix> lu(a.matrix);
                if (!lu.isInvertible()) return std::nullopt;
                return Vector(lu.solve(-a.offset));
            },
            [](const op_kind::NormalConeBox& b) -> std::optional<Vector> {
                return Vector(Vector::Zero(b.lower.size()).cwiseMax(b.lower).cwiseMin(b.upper));
            },
            [](const op_kind::GradientOfConvex& g) -> std::optional<Vector> { return g.shift; },
            [](const op_kind::Scaled& s) -> std::optional<Vector> { return s.inner->zero_hint(); },
            [this](const op_kind::Sum& s) -> std::optional<Vector> {
                for (const auto& t : s.terms) {
                    auto z = t.zero_hint();
                    if (!z) continue;
                    try {
                        if (membership_residual(*z, Vector::Zero(dim_)) <= 1e-10) return z;
                    } catch (const DomainError&) {
                    }
                }
                return std::nullopt;
            },
        },
        *kind_);
    if (!candidate) return std::nullopt;
    try {
        if (membership_residual(*candidate, Vector::Zero(dim_)) <= 1e-10) return candidate;
    } catch (const DomainError&) {
    }
    return std::nullopt;
}

std::string MonotoneOp::spec() const {
    return std::visit(overloaded{
                          [](const op_kind::SubdiffAbs& a) {
                              return "abs:w=" + format_number(a.weight) + ",shift=" + format_vector(a.shift);
                          },
                          [](const op_kind::Affine& a) {
                              Matrix off = a.matrix;
                              off.diagonal().setZero();
                              if (off.isZero(0.0)) {
                                  return "affine:diag=" + format_vector(a.matrix.diagonal()) +
                                         ",b=" + format_vector(a.offset);
                              }
                              Vector flat(a.matrix.size());
                              for (int i = 0; i < a.matrix.rows(); ++i)
                                  for (int j = 0; j < a.matrix.cols(); ++j) flat(i * a.matrix.cols() + j) = a.matrix(i, j);
                              return "affine:m=" + format_vector(flat) + ",b=" + format_vector(a.offset);
                          },
                          [](const op_kind::NormalConeBox& b) {
                              return "box:lower=" + format_vector(b.lower) + ",upper=" + format_vector(b.upper);
                          },
                          [](const op_kind::GradientOfConvex& g) {
                              return "grad:" + g.potential.spec() + ";shift=" + format_vector(g.shift) +
                                     ",w=" + format_number(g.weight);
                          },
                          [](const op_kind::Scaled& s) {
                              return "scale:" + format_number(s.factor) + ":" + s.inner->spec();
                          },
                          [](const op_kind::Sum& s) {
                              std::string out;
                              for (std::size_t k = 0; k < s.terms.size(); ++k) {
                                  if (k > 0) out += "&";
                                  out += s.terms[k].spec();
                              }
                              return out;
                          },
                      },
                      *kind_);
}

double enlargement_residual(const MonotoneOp& a, double eps, const Vector& y, const Vector& xi,
                            int witness_budget, const WitnessRegion& region) {
    if (!(eps >= 0)) throw InvalidArgument("enlargement_residual: eps must be >= 0");
    require_dim(y, a.dim(), "enlargement_residual");
    require_dim(xi, a.dim(), "enlargement_residual");
    const int d = a.dim();
    const Vector center = region.center.value_or(y);
    require_dim(center, d, "enlargement_residual");

    std::vector<Interval> domain(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) domain[static_cast<std::size_t>(i)] = a.coordinate_domain(i);

    double worst = 0.0;
    Vector witness(d);
    for (int j = 1; j <= witness_budget; ++j) {
        for (int i = 0; i < d; ++i) {
            const double h = radical_inverse(static_cast<std::uint64_t>(j), primes()[static_cast<std::size_t>(i)]);
            const Interval dom = domain[static_cast<std::size_t>(i)];
            witness(i) = std::clamp(center(i) + region.half_width * (2.0 * h - 1.0), dom.lo, dom.hi);
        }
        const ValueBox box = a.value(witness);
        // Minimize <y' - xi, x' - y> over y' in the box, coordinatewise.
        double inner = 0.0;
        for (int i = 0; i < d; ++i) {
            const double dx = witness(i) - y(i);
            if (dx > 0) {
                inner += (box.lo(i) - xi(i)) * dx;
            } else if (dx < 0) {
                inner += (box.hi(i) - xi(i)) * dx;
            }
        }
        worst = std::max(worst, -eps - inner);
    }
    return worst;
}

}  // namespace proxlab
