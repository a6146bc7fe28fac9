// Catalog string specs, e.g. "quadratic:diag=2,3", "powerp:p=4,rho=4",
// "abs:w=1,shift=1", "box:-1,1", "scale:0.5:abs:w=1",
// "grad:quadratic:identity;shift=1,2" and sums joined by '&'.
#include "proxlab/errors.hpp"
#include "proxlab/legendre.hpp"
#include "proxlab/operators.hpp"

#include <charconv>
#include <map>
#include <set>
#include <string_view>

namespace proxlab {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> to_number(const std::string& token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && token[0] == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
    return v;
}

// "k=1,2,k2=3,flag" -> keyed lists; bare numbers before any key are positional.
struct Params {
    std::map<std::string, std::vector<double>> keyed;
    std::vector<double> positional;
    std::set<std::string> flags;
    std::set<std::string> used;

    bool has(const std::string& key) const { return keyed.count(key) > 0; }

    const std::vector<double>& list(const std::string& key) {
        used.insert(key);
        return keyed.at(key);
    }
};

Params parse_params(const std::string& body, const std::string& spec) {
    Params params;
    std::string current;
    std::size_t start = 0;
    while (start <= body.size()) {
        auto comma = body.find(',', start);
        if (comma == std::string::npos) comma = body.size();
        const std::string token = trim(std::string_view(body).substr(start, comma - start));
        start = comma + 1;
        if (token.empty()) {
            if (comma == body.size()) break;
            throw ConfigError("spec '" + spec + "': empty list element");
        }
        const auto eq = token.find('=');
        if (eq != std::string::npos) {
            current = trim(token.substr(0, eq));
            const std::string rhs = trim(token.substr(eq + 1));
            auto v = to_number(rhs);
            if (!v) throw ConfigError("spec '" + spec + "': '" + rhs + "' is not a number");
            if (params.keyed.count(current)) throw ConfigError("spec '" + spec + "': duplicate key '" + current + "'");
            params.keyed[current].push_back(*v);
        } else if (auto v = to_number(token)) {
            if (current.empty()) {
                params.positional.push_back(*v);
            } else {
                params.keyed[current].push_back(*v);
            }
        } else {
            params.flags.insert(token);
            current.clear();
        }
        if (comma == body.size()) break;
    }
    return params;
}

Vector broadcast(const std::vector<double>& values, int dim, const std::string& what, const std::string& spec) {
    if (values.size() == 1) return Vector::Constant(dim, values[0]);
    if (static_cast<int>(values.size()) != dim) {
        throw ConfigError("spec '" + spec + "': " + what + " needs 1 or " + std::to_string(dim) + " values, got " +
                          std::to_string(values.size()));
    }
    return Eigen::Map<const Vector>(values.data(), dim);
}

Matrix square(const std::vector<double>& values, int dim, const std::string& spec) {
    if (static_cast<int>(values.size()) != dim * dim) {
        throw ConfigError("spec '" + spec + "': m needs " + std::to_string(dim * dim) + " row-major values");
    }
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = values[static_cast<std::size_t>(i * dim + j)];
    return m;
}

double scalar(Params& p, const std::string& key, double fallback, const std::string& spec) {
    if (!p.has(key)) return fallback;
    const auto& v = p.list(key);
    if (v.size() != 1) throw ConfigError("spec '" + spec + "': " + key + " takes a single value");
    return v[0];
}

void reject_unused(const Params& p, const std::string& spec, const std::set<std::string>& allowed_flags = {},
                   bool allow_positional = false) {
    for (const auto& [key, _] : p.keyed) {
        if (!p.used.count(key)) throw ConfigError("spec '" + spec + "': unknown parameter '" + key + "'");
    }
    for (const auto& flag : p.flags) {
        if (!allowed_flags.count(flag)) throw ConfigError("spec '" + spec + "': unknown parameter '" + flag + "'");
    }
    if (!allow_positional && !p.positional.empty()) {
        throw ConfigError("spec '" + spec + "': unexpected positional values");
    }
}

std::pair<std::string, std::string> split_head(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) return {trim(spec), {}};
    return {trim(spec.substr(0, colon)), spec.substr(colon + 1)};
}

template <class F>
auto wrap(const std::string& spec, F&& build) {
    try {
        return build();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("spec '" + spec + "': " + e.what());
    }
}

}  // namespace

LegendreFn parse_legendre(const std::string& raw, int dim) {
    const std::string spec = trim(raw);
    if (dim < 1 || dim > kMaxDim) throw ConfigError("parse_legendre: dimension out of range");
    return wrap(spec, [&]() -> LegendreFn {
        auto [head, body] = split_head(spec);
        Params p = parse_params(body, spec);
        if (head == "cosh") {
            reject_unused(p, spec);
            return LegendreFn::cosh_sum(dim);
        }
        if (head == "quadratic") {
            if (p.has("diag")) {
                Vector d = broadcast(p.list("diag"), dim, "diag", spec);
                reject_unused(p, spec);
                return LegendreFn::quadratic(SpdMetric::diagonal(d));
            }
            if (p.has("m")) {
                Matrix m = square(p.list("m"), dim, spec);
                reject_unused(p, spec);
                return LegendreFn::quadratic(SpdMetric(m));
            }
            reject_unused(p, spec, {"identity"});
            return LegendreFn::half_squared_norm(dim);
        }
        if (head == "power") {
            const double rho = scalar(p, "rho", 2.0, spec);
            reject_unused(p, spec);
            return LegendreFn::power_euclidean(dim, rho);
        }
        if (head == "powerp") {
            if (!p.has("p") || !p.has("rho")) throw ConfigError("spec '" + spec + "': powerp needs p and rho");
            const double pp = scalar(p, "p", 2.0, spec);
            const double rho = scalar(p, "rho", 2.0, spec);
            reject_unused(p, spec);
            return LegendreFn::power_p(dim, pp, rho);
        }
        throw ConfigError("spec '" + spec + "': unknown Legendre function '" + head + "'");
    });
}

MonotoneOp parse_operator(const std::string& raw, int dim) {
    const std::string spec = trim(raw);
    if (dim < 1 || dim > kMaxDim) throw ConfigError("parse_operator: dimension out of range");
    if (spec.find('&') != std::string::npos) {
        std::vector<MonotoneOp> terms;
        std::size_t start = 0;
        for (;;) {
            const auto amp = spec.find('&', start);
            terms.push_back(parse_operator(spec.substr(start, amp - start), dim));
            if (amp == std::string::npos) break;
            start = amp + 1;
        }
        return MonotoneOp::sum(std::move(terms));
    }
    return wrap(spec, [&]() -> MonotoneOp {
        auto [head, body] = split_head(spec);
        if (head == "scale") {
            const auto colon = body.find(':');
            if (colon == std::string::npos) throw ConfigError("spec '" + spec + "': expected scale:<factor>:<operator>");
            auto factor = to_number(trim(body.substr(0, colon)));
            if (!factor) throw ConfigError("spec '" + spec + "': scale factor is not a number");
            return MonotoneOp::scaled(*factor, parse_operator(body.substr(colon + 1), dim));
        }
        if (head == "grad") {
            const auto semi = body.find(';');
            LegendreFn potential = parse_legendre(body.substr(0, semi), dim);
            Params p = parse_params(semi == std::string::npos ? std::string() : body.substr(semi + 1), spec);
            Vector shift = p.has("shift") ? broadcast(p.list("shift"), dim, "shift", spec) : Vector::Zero(dim);
            const double w = scalar(p, "w", 1.0, spec);
            reject_unused(p, spec);
            return MonotoneOp::gradient_of_convex(std::move(potential), std::move(shift), w);
        }
        Params p = parse_params(body, spec);
        if (head == "abs") {
            const double w = scalar(p, "w", 1.0, spec);
            Vector shift = p.has("shift") ? broadcast(p.list("shift"), dim, "shift", spec) : Vector::Zero(dim);
            reject_unused(p, spec);
            return MonotoneOp::subdiff_abs(std::move(shift), w);
        }
        if (head == "identity") {
            reject_unused(p, spec);
            return MonotoneOp::identity(dim);
        }
        if (head == "affine") {
            Matrix m;
            if (p.has("diag")) {
                m = broadcast(p.list("diag"), dim, "diag", spec).asDiagonal();
            } else if (p.has("m")) {
                m = square(p.list("m"), dim, spec);
            } else {
                m = Matrix::Identity(dim, dim);
            }
            Vector b = p.has("b") ? broadcast(p.list("b"), dim, "b", spec) : Vector::Zero(dim);
            reject_unused(p, spec, {"identity"});
            return MonotoneOp::affine(std::move(m), std::move(b));
        }
        if (head == "box") {
            Vector lower, upper;
            if (p.positional.size() == 2) {
                lower = Vector::Constant(dim, p.positional[0]);
                upper = Vector::Constant(dim, p.positional[1]);
            } else if (p.has("lower") && p.has("upper")) {
                lower = broadcast(p.list("lower"), dim, "lower", spec);
                upper = broadcast(p.list("upper"), dim, "upper", spec);
            } else {
                throw ConfigError("spec '" + spec + "': expected box:<lo>,<hi> or box:lower=...,upper=...");
            }
            reject_unused(p, spec, {}, true);
            return MonotoneOp::normal_cone_box(std::move(lower), std::move(upper));
        }
        throw ConfigError("spec '" + spec + "': unknown operator '" + head + "'");
    });
}

}  // namespace proxlab
