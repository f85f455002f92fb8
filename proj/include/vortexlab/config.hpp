#ifndef VORTEXLAB_CONFIG_HPP
#define VORTEXLAB_CONFIG_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortexlab/core.hpp"
#include "vortexlab/euler_vpm.hpp"
#include "vortexlab/experiments.hpp"

namespace vortexlab {

enum class RunMode { pointvortex, simulate, sweep, metrics };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

/// Inputs of the `metrics` mode: exported clouds and measures to re-evaluate.
struct MetricsConfig {
  std::optional<std::string> cloud;   ///< CSV k,x,y,gamma,tag
  std::vector<std::string> measures;  ///< two CSV files x,y,mass
  std::vector<Vec2d> targets;         ///< one Dirac location per component
  std::optional<double> rho;          ///< outer-mass radius; defaults to R
  std::optional<double> delta_r;      ///< cutoff band; defaults to R/8
  double blob_radius = 0.0;           ///< kernel core for center velocities

  bool operator==(const MetricsConfig&) const = default;
};

struct RunConfig {
  RunMode mode = RunMode::simulate;
  InitialDataSpec spec;
  std::vector<double> epsilons;
  NumericsConfig numerics;
  std::string output = "out";
  MetricsConfig metrics;

  /// Mode-dependent checks against every module precondition.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Malformed JSON; `byte` is the offset where the parser gave up.
struct ConfigParseError : std::invalid_argument {
  ConfigParseError(std::size_t offset, const std::string& what)
      : std::invalid_argument("config parse error at byte " + std::to_string(offset) + ": " + what),
        byte(offset) {}
  std::size_t byte;
};

/// Strict parse: unknown keys and wrongly typed values are rejected with a
/// ValidationError naming the field; defaults fill everything omitted.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// JSON text that parses back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

}  // namespace vortexlab

#endif  // VORTEXLAB_CONFIG_HPP
