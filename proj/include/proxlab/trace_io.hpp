#pragma once

#include "proxlab/algorithms.hpp"
#include "proxlab/config.hpp"

#include "json.hpp"

#include <string>

namespace proxlab {

/// "n,x_1,...,x_d,eta_norm,step_param,zero_residual,notes".
std::string trace_header(int dim);

/// Header plus one row per record; numbers in shortest round-trip form.
std::string trace_csv(const IterateTrace& trace);

/// iterations, final residual, termination reason, final iterate.
nlohmann::json trace_summary(const IterateTrace& trace);

/// Writes content to a sibling temporary file, then renames it over path,
/// so readers never observe a partial file.
void write_atomic(const std::string& path, const std::string& content);

/// CSV at cfg.output_path, sidecar {config, summary} at output_path + ".json".
void write_run_outputs(const ExperimentConfig& cfg, const IterateTrace& trace);

/// The config stored in a sidecar file.
ExperimentConfig read_sidecar_config(const std::string& sidecar_path);

}  // namespace proxlab
