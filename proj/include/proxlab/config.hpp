#pragma once

#include "proxlab/algorithms.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace proxlab {

// One experiment, as read from a JSON file.
struct ExperimentConfig {
    int space_dim = 1;
    std::string legendre = "quadratic:identity";
    std::vector<std::string> operators;
    Scheme scheme = Scheme::Eckstein;
    SchemeParams scheme_params;
    Vector x0;
    std::optional<Vector> known_zero;
    PerturbationPolicy policy;
    StopRule stop;
    std::uint64_t seed = 1;
    std::string output_path;

    /// Builds the problem from the catalog specs. Throws ConfigError.
    Problem problem() const;
    /// Full validation, including scheme-specific parameters. Throws ConfigError.
    void validate() const;

    bool operator==(const ExperimentConfig& o) const;
};

/// Parses and validates. Diagnostics name the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Parses text; JSON syntax errors report line and column.
ExperimentConfig config_from_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// The resolved configuration, every default spelled out.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Replaces cfg.seed (and the policy seed) with PROXLAB_SEED when set.
void apply_env_overrides(ExperimentConfig& cfg);

/// The key under which the step schedule lives: lambda, mu or c.
std::string step_key(Scheme scheme);

}  // namespace proxlab
