#pragma once

#include "proxlab/legendre.hpp"
#include "proxlab/operators.hpp"
#include "proxlab/resolvent.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace proxlab {

enum class Suite { Numerics, Legendre, Operators, Resolvent, Algorithms, All };

std::optional<Suite> suite_from_string(const std::string& name);
std::string to_string(Suite s);

struct CheckLine {
    std::string suite;
    std::string name;
    bool passed = false;
    long samples = 0;
    double worst = 0.0;
    std::string detail;
};

struct CheckReport {
    std::vector<CheckLine> lines;

    int passed() const;
    int failed() const;
    bool ok() const { return !lines.empty() && failed() == 0; }
};

/// "PASS  suite  name  samples=N worst=W  detail".
std::string format_line(const CheckLine& line);

/// Runs the property suites; on_line is called as each line completes.
CheckReport run_checks(Suite suite, std::uint64_t seed, const std::function<void(const CheckLine&)>& on_line = {});

/// Representative catalog functions on R^dim.
std::vector<LegendreFn> legendre_samples(int dim, Rng& rng);

/// Representative catalog operators on R^dim.
std::vector<MonotoneOp> operator_samples(int dim, Rng& rng);

/// A random (f, A, lambda, x, eta) with a supported solver strategy.
InclusionInstance random_instance(Rng& rng, int dim);

}  // namespace proxlab
