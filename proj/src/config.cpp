#include "proxlab/config.hpp"

#include "proxlab/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace proxlab {
namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& field, const std::string& msg) {
    throw ConfigError("config field '" + field + "': " + msg);
}

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) field_error(where.empty() ? key : where + "." + key, "unknown field");
    }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) field_error(where.empty() ? key : where + "." + key, "missing");
    return *it;
}

double number(const json& v, const std::string& field) {
    if (!v.is_number()) field_error(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) field_error(field, "must be finite");
    return d;
}

std::string text(const json& v, const std::string& field) {
    if (!v.is_string()) field_error(field, "expected a string");
    return v.get<std::string>();
}

Vector vector_of(const json& v, const std::string& field, int dim) {
    if (!v.is_array()) field_error(field, "expected an array of numbers");
    if (static_cast<int>(v.size()) != dim) {
        field_error(field, "expected " + std::to_string(dim) + " entries, got " + std::to_string(v.size()));
    }
    Vector out(dim);
    for (int i = 0; i < dim; ++i) out(i) = number(v[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]");
    return out;
}

Schedule schedule_of(const json& v, const std::string& field) {
    if (v.is_number()) return Schedule::constant(number(v, field));
    if (!v.is_object()) field_error(field, "expected a schedule object");
    const std::string kind = text(require(v, "kind", field), field + ".kind");
    Schedule s;
    if (kind == "constant") {
        reject_unknown(v, field, {"kind", "value"});
        s = Schedule::constant(number(require(v, "value", field), field + ".value"));
    } else if (kind == "geometric") {
        reject_unknown(v, field, {"kind", "c", "q"});
        s = Schedule::geometric(number(require(v, "c", field), field + ".c"),
                                number(require(v, "q", field), field + ".q"));
    } else {
        field_error(field + ".kind", "expected constant or geometric, got '" + kind + "'");
    }
    try {
        s.validate(field);
    } catch (const InvalidArgument& e) {
        field_error(field, e.what());
    }
    return s;
}

json schedule_json(const Schedule& s) {
    if (s.kind == Schedule::Kind::Constant) return {{"kind", "constant"}, {"value", s.value}};
    return {{"kind", "geometric"}, {"c", s.c}, {"q", s.q}};
}

MetricSchedule metric_of(const json& v, const std::string& field, int dim) {
    if (!v.is_object()) field_error(field, "expected a metric object");
    const std::string kind = text(require(v, "kind", field), field + ".kind");
    MetricSchedule m;
    if (kind == "identity") {
        reject_unknown(v, field, {"kind"});
        m.kind = MetricSchedule::Kind::Identity;
    } else if (kind == "diag") {
        reject_unknown(v, field, {"kind", "values"});
        m.kind = MetricSchedule::Kind::Diagonal;
        m.diagonal = vector_of(require(v, "values", field), field + ".values", dim);
    } else if (kind == "random_spd") {
        reject_unknown(v, field, {"kind", "min", "max"});
        m.kind = MetricSchedule::Kind::RandomSpd;
        m.min_eigenvalue = number(require(v, "min", field), field + ".min");
        m.max_eigenvalue = number(require(v, "max", field), field + ".max");
    } else {
        field_error(field + ".kind", "expected identity, diag or random_spd, got '" + kind + "'");
    }
    try {
        m.validate(dim);
    } catch (const InvalidArgument& e) {
        field_error(field, e.what());
    }
    return m;
}

json metric_json(const MetricSchedule& m) {
    switch (m.kind) {
        case MetricSchedule::Kind::Identity:
            return {{"kind", "identity"}};
        case MetricSchedule::Kind::Diagonal:
            return {{"kind", "diag"}, {"values", std::vector<double>(m.diagonal.data(), m.diagonal.data() + m.diagonal.size())}};
        case MetricSchedule::Kind::RandomSpd:
            return {{"kind", "random_spd"}, {"min", m.min_eigenvalue}, {"max", m.max_eigenvalue}};
    }
    return {};
}

PerturbationPolicy policy_of(const json& v, const std::string& field) {
    if (!v.is_object()) field_error(field, "expected a policy object");
    const std::string kind = text(require(v, "kind", field), field + ".kind");
    PerturbationPolicy p;
    if (kind == "zero") {
        reject_unknown(v, field, {"kind"});
    } else if (kind == "summable_geometric") {
        reject_unknown(v, field, {"kind", "c", "q"});
        p = PerturbationPolicy::summable_geometric(number(require(v, "c", field), field + ".c"),
                                                   number(require(v, "q", field), field + ".q"));
    } else if (kind == "constant_norm") {
        reject_unknown(v, field, {"kind", "c"});
        p = PerturbationPolicy::constant_norm(number(require(v, "c", field), field + ".c"));
    } else if (kind == "radius_fraction") {
        reject_unknown(v, field, {"kind", "fraction"});
        p = PerturbationPolicy::radius_fraction(number(require(v, "fraction", field), field + ".fraction"));
    } else {
        field_error(field + ".kind",
                    "expected zero, summable_geometric, constant_norm or radius_fraction, got '" + kind + "'");
    }
    try {
        p.validate();
    } catch (const InvalidArgument& e) {
        field_error(field, e.what());
    }
    return p;
}

json policy_json(const PerturbationPolicy& p) {
    switch (p.kind) {
        case PerturbationPolicy::Kind::Zero:
            return {{"kind", "zero"}};
        case PerturbationPolicy::Kind::SummableGeometric:
            return {{"kind", "summable_geometric"}, {"c", p.c}, {"q", p.q}};
        case PerturbationPolicy::Kind::ConstantNorm:
            return {{"kind", "constant_norm"}, {"c", p.c}};
        case PerturbationPolicy::Kind::RadiusFraction:
            return {{"kind", "radius_fraction"}, {"fraction", p.fraction}};
    }
    return {};
}

std::vector<double> entries(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

bool same(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }

bool same(const std::optional<Vector>& a, const std::optional<Vector>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || same(*a, *b);
}

std::uint64_t seed_of(const json& v, const std::string& field) {
    if (!v.is_number_integer()) field_error(field, "expected a nonnegative integer");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const auto s = v.get<std::int64_t>();
    if (s < 0) field_error(field, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(s);
}

}  // namespace

std::string step_key(Scheme scheme) {
    switch (scheme) {
        case Scheme::SolodovSvaiter:
            return "mu";
        case Scheme::ParenteLotitoSolodov:
            return "c";
        default:
            return "lambda";
    }
}

Problem ExperimentConfig::problem() const {
    Problem p{parse_legendre(legendre, space_dim), {}, x0, known_zero};
    for (std::size_t i = 0; i < operators.size(); ++i) {
        try {
            p.ops.push_back(parse_operator(operators[i], space_dim));
        } catch (const ConfigError& e) {
            field_error("operators[" + std::to_string(i) + "]", e.what());
        }
    }
    return p;
}

void ExperimentConfig::validate() const {
    if (space_dim < 1 || space_dim > kMaxDim) field_error("space_dim", "must lie in [1, 64]");
    if (operators.empty()) field_error("operators", "at least one operator is required");
    if (x0.size() != space_dim) field_error("x0", "expected " + std::to_string(space_dim) + " entries");
    if (output_path.empty()) field_error("output_path", "must be a nonempty path");
    if (stop.max_iters < 0) field_error("stop.max_iters", "must be nonnegative");
    if (!(stop.zero_detect > 0.0)) field_error("stop.zero_detect", "must be positive");
    Problem p = [&] {
        try {
            return problem();
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            if (what.rfind("config field", 0) == 0) throw;
            field_error("legendre", what);
        }
    }();
    validate_scheme(scheme, p, scheme_params, policy);
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return space_dim == o.space_dim && legendre == o.legendre && operators == o.operators && scheme == o.scheme &&
           scheme_params == o.scheme_params && same(x0, o.x0) && same(known_zero, o.known_zero) &&
           policy == o.policy && stop == o.stop && seed == o.seed && output_path == o.output_path;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(j, "", {"space_dim", "legendre", "operators", "operator", "scheme", "scheme_params", "x0",
                           "known_zero", "policy", "stop", "seed", "output_path"});
    ExperimentConfig cfg;
    const json& dim = require(j, "space_dim", "");
    if (!dim.is_number_integer()) field_error("space_dim", "expected an integer");
    cfg.space_dim = dim.get<int>();
    if (cfg.space_dim < 1 || cfg.space_dim > kMaxDim) field_error("space_dim", "must lie in [1, 64]");
    const int d = cfg.space_dim;

    if (j.contains("legendre")) cfg.legendre = text(j["legendre"], "legendre");
    if (j.contains("operators") && j.contains("operator")) field_error("operator", "give operator or operators, not both");
    if (j.contains("operator")) {
        cfg.operators.push_back(text(j["operator"], "operator"));
    } else {
        const json& ops = require(j, "operators", "");
        if (!ops.is_array() || ops.empty()) field_error("operators", "expected a nonempty array of specs");
        for (std::size_t i = 0; i < ops.size(); ++i) cfg.operators.push_back(text(ops[i], "operators[" + std::to_string(i) + "]"));
    }

    const std::string scheme = text(require(j, "scheme", ""), "scheme");
    const auto parsed = scheme_from_string(scheme);
    if (!parsed) field_error("scheme", "expected eckstein, ss, ips, pls or rs, got '" + scheme + "'");
    cfg.scheme = *parsed;

    if (j.contains("scheme_params")) {
        const json& sp = j["scheme_params"];
        if (!sp.is_object()) field_error("scheme_params", "expected an object");
        std::set<std::string> allowed{step_key(cfg.scheme)};
        switch (cfg.scheme) {
            case Scheme::SolodovSvaiter:
                allowed.insert("sigma");
                break;
            case Scheme::IusemPennanenSvaiter:
                allowed.insert({"nu", "nu_from", "z_basis"});
                break;
            case Scheme::ParenteLotitoSolodov:
                allowed.insert({"sigma", "tau", "metric"});
                break;
            default:
                break;
        }
        for (const auto& [key, _] : sp.items()) {
            if (!allowed.count(key)) field_error("scheme_params." + key, "not used by scheme " + scheme);
        }
        SchemeParams& p = cfg.scheme_params;
        const std::string sk = step_key(cfg.scheme);
        if (sp.contains(sk)) p.step = schedule_of(sp[sk], "scheme_params." + sk);
        if (sp.contains("sigma")) p.sigma = number(sp["sigma"], "scheme_params.sigma");
        if (sp.contains("nu") && sp.contains("nu_from")) field_error("scheme_params.nu", "give nu or nu_from, not both");
        if (sp.contains("nu")) p.nu = number(sp["nu"], "scheme_params.nu");
        if (sp.contains("nu_from")) {
            const json& nf = sp["nu_from"];
            const std::string f = "scheme_params.nu_from";
            if (!nf.is_object()) field_error(f, "expected {sigma, rho, lambda_hat}");
            reject_unknown(nf, f, {"sigma", "rho", "lambda_hat"});
            p.nu_from = SchemeParams::NuFrom{number(require(nf, "sigma", f), f + ".sigma"),
                                             number(require(nf, "rho", f), f + ".rho"),
                                             number(require(nf, "lambda_hat", f), f + ".lambda_hat")};
        }
        if (sp.contains("tau")) p.tau = number(sp["tau"], "scheme_params.tau");
        if (sp.contains("metric")) p.metric = metric_of(sp["metric"], "scheme_params.metric", d);
        if (sp.contains("z_basis")) {
            const json& zb = sp["z_basis"];
            if (!zb.is_array() || zb.empty()) field_error("scheme_params.z_basis", "expected a nonempty list of vectors");
            Matrix basis(d, static_cast<int>(zb.size()));
            for (std::size_t k = 0; k < zb.size(); ++k) {
                basis.col(static_cast<int>(k)) = vector_of(zb[k], "scheme_params.z_basis[" + std::to_string(k) + "]", d);
            }
            p.z_basis = basis;
        }
    }
    if (cfg.scheme == Scheme::IusemPennanenSvaiter && !cfg.scheme_params.nu && !cfg.scheme_params.nu_from) {
        field_error("scheme_params.nu", "ips needs nu or nu_from");
    }

    cfg.x0 = vector_of(require(j, "x0", ""), "x0", d);
    if (j.contains("known_zero")) cfg.known_zero = vector_of(j["known_zero"], "known_zero", d);
    if (j.contains("seed")) cfg.seed = seed_of(j["seed"], "seed");
    if (j.contains("policy")) cfg.policy = policy_of(j["policy"], "policy");
    cfg.policy.seed = cfg.seed;
    if (j.contains("stop")) {
        const json& st = j["stop"];
        if (!st.is_object()) field_error("stop", "expected an object");
        reject_unknown(st, "stop", {"max_iters", "zero_detect"});
        if (st.contains("max_iters")) {
            if (!st["max_iters"].is_number_integer()) field_error("stop.max_iters", "expected an integer");
            cfg.stop.max_iters = st["max_iters"].get<int>();
        }
        if (st.contains("zero_detect")) cfg.stop.zero_detect = number(st["zero_detect"], "stop.zero_detect");
    }
    cfg.output_path = text(require(j, "output_path", ""), "output_path");
    cfg.validate();
    return cfg;
}

ExperimentConfig config_from_text(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < content.size(); ++i) {
            if (content[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config: JSON syntax error at line " + std::to_string(line) + ", column " +
                          std::to_string(col));
    }
    return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_text(buf.str());
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["space_dim"] = cfg.space_dim;
    j["legendre"] = cfg.legendre;
    j["operators"] = cfg.operators;
    j["scheme"] = to_string(cfg.scheme);
    json sp;
    const SchemeParams& p = cfg.scheme_params;
    sp[step_key(cfg.scheme)] = schedule_json(p.step);
    switch (cfg.scheme) {
        case Scheme::SolodovSvaiter:
            sp["sigma"] = p.sigma;
            break;
        case Scheme::IusemPennanenSvaiter:
            if (p.nu) sp["nu"] = *p.nu;
            if (p.nu_from) {
                sp["nu_from"] = {{"sigma", p.nu_from->sigma}, {"rho", p.nu_from->rho},
                                 {"lambda_hat", p.nu_from->lambda_hat}};
            }
            if (p.z_basis) {
                json zb = json::array();
                for (int k = 0; k < p.z_basis->cols(); ++k) zb.push_back(entries(p.z_basis->col(k)));
                sp["z_basis"] = zb;
            }
            break;
        case Scheme::ParenteLotitoSolodov:
            sp["sigma"] = p.sigma;
            sp["tau"] = p.tau;
            sp["metric"] = metric_json(p.metric);
            break;
        default:
            break;
    }
    j["scheme_params"] = sp;
    j["x0"] = entries(cfg.x0);
    if (cfg.known_zero) j["known_zero"] = entries(*cfg.known_zero);
    j["policy"] = policy_json(cfg.policy);
    j["stop"] = {{"max_iters", cfg.stop.max_iters}, {"zero_detect", cfg.stop.zero_detect}};
    j["seed"] = cfg.seed;
    j["output_path"] = cfg.output_path;
    return j;
}

void apply_env_overrides(ExperimentConfig& cfg) {
    const char* env = std::getenv("PROXLAB_SEED");
    if (!env || !*env) return;
    const std::string s(env);
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        if (s.find('-') != std::string::npos) throw std::invalid_argument("negative");
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("PROXLAB_SEED: expected a nonnegative integer, got '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError("PROXLAB_SEED: expected a nonnegative integer, got '" + s + "'");
    cfg.seed = v;
    cfg.policy.seed = v;
}

}  // namespace proxlab
