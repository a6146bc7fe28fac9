#include "proxlab/trace_io.hpp"

#include "proxlab/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace proxlab {
namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string trace_header(int dim) {
    std::string h = "n";
    for (int i = 1; i <= dim; ++i) h += ",x_" + std::to_string(i);
    return h + ",eta_norm,step_param,zero_residual,notes";
}

std::string trace_csv(const IterateTrace& trace) {
    std::string out = trace_header(trace.dim) + "\n";
    for (const IterateRecord& r : trace.records) {
        out += std::to_string(r.n);
        out += ',';
        out += format_vector(r.x);
        out += ',' + format_number(r.eta_norm);
        out += ',' + format_number(r.step_param);
        out += ',' + format_number(r.zero_residual);
        out += ',' + csv_field(r.note);
        out += '\n';
    }
    return out;
}

nlohmann::json trace_summary(const IterateTrace& trace) {
    nlohmann::json s;
    s["scheme"] = to_string(trace.scheme);
    s["iterations"] = trace.iterations();
    s["termination"] = to_string(trace.termination);
    if (!trace.records.empty()) {
        const IterateRecord& last = trace.last();
        s["final_residual"] = last.zero_residual;
        s["final_x"] = std::vector<double>(last.x.data(), last.x.data() + last.x.size());
        if (trace.scheme == Scheme::Eckstein) s["eckstein_partial_sum"] = last.eckstein_partial_sum;
        int rejects = 0;
        for (const auto& r : trace.records) rejects += r.rejects;
        s["rejected_draws"] = rejects;
    }
    if (!trace.error.empty()) s["error"] = trace.error;
    return s;
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move output into place at '" + path + "'");
    }
}

void write_run_outputs(const ExperimentConfig& cfg, const IterateTrace& trace) {
    nlohmann::json side;
    side["config"] = config_to_json(cfg);
    side["summary"] = trace_summary(trace);
    write_atomic(cfg.output_path, trace_csv(trace));
    write_atomic(cfg.output_path + ".json", side.dump(2) + "\n");
}

ExperimentConfig read_sidecar_config(const std::string& sidecar_path) {
    std::ifstream in(sidecar_path);
    if (!in) throw ConfigError("sidecar: cannot open '" + sidecar_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error&) {
        throw ConfigError("sidecar: not valid JSON");
    }
    if (!j.contains("config")) throw ConfigError("sidecar: missing config");
    return config_from_json(j["config"]);
}

}  // namespace proxlab
