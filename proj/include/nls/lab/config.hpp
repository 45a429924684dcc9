#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nls/dynamics.hpp"
#include "nls/params.hpp"

namespace nls::lab {

enum class Scenario { GroundOrbit, ThresholdKneg, ThresholdKpos, Subcritical, Supercritical, Custom };
std::string to_string(Scenario s);
/// Accepts snake_case ("threshold_kneg") or CamelCase ("ThresholdKneg").
Scenario parse_scenario(std::string_view s);

struct ExperimentConfig {
  int d = 1;
  double p = 7.0;
  double L = 32.0;
  int n = 1024;
  Scenario scenario = Scenario::GroundOrbit;

  double b = 1.3;
  int phase_sign = -1;
  std::optional<double> amplitude;  ///< default 0.5 (Subcritical) or 1.1 (Supercritical)
  double boost = 0.0;
  std::string seed_file;            ///< checkpoint for Custom

  IntegratorConfig integrator;
  std::vector<double> probe_radii;  ///< empty selects L/8, L/4, 5L/16
  std::vector<double> eps = {1e-2, 1e-4};
  double mu0_fraction = 0.2;

  std::string output_dir = "run";
  bool backward = true;
  bool modulation = true;
  int checkpoint_every = 10;        ///< samples between snapshots; 0 keeps only the final state

  PhysParams params() const;
  GridSpec grid() const;
  double effective_amplitude() const;
  std::vector<double> radii() const;

  /// Throws ConfigError (or InvalidParams) on any inconsistency.
  void validate() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` lines; '#' starts a comment; blank lines ignored.
/// Duplicate keys and malformed lines raise ConfigError naming the line.
KeyValues parse_key_values(std::string_view text, const std::string& source = "<config>");
KeyValues read_config_file(const std::filesystem::path& path);

/// Documented keys in canonical order.
const std::vector<std::string>& config_keys();

/// Applies the key/values on top of `base`. Unknown keys raise ConfigError.
ExperimentConfig apply(ExperimentConfig base, const KeyValues& kv);
/// Every key with its current value, numbers at 17 significant digits.
KeyValues to_key_values(const ExperimentConfig& cfg);
std::string render(const ExperimentConfig& cfg);

/// Directory that receives run outputs: $NLSLAB_OUTPUT_ROOT, else the
/// current directory.
std::filesystem::path output_root();
inline constexpr const char* kOutputRootEnv = "NLSLAB_OUTPUT_ROOT";

}  // namespace nls::lab
