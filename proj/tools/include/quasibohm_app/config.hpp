#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "quasibohm/eigenbasis.hpp"
#include "quasibohm/trajectory.hpp"

namespace quasibohm::app {

/// Fully expanded physical setup: potential, constants, coefficients, start point.
struct Scenario {
  std::string name;  // preset name or "custom"
  PotentialSpec potential = InfiniteWell{1.0};
  Units units;
  std::size_t grid_points = 4001;
  std::vector<std::complex<double>> coefficients;
  double x0 = 0.0;
};

struct Tolerances {
  double ode_rtol = 1e-9;
  double ode_atol = 1e-11;
  /// Largest accepted |H_t(x(t)) - H_0(x0)| for CDF transport.
  double cdf_tol = 1e-10;
  double node_epsilon = 1e-12;
  std::size_t cdf_panels = std::size_t{1} << 14;
};

struct EnsembleSettings {
  std::size_t size = 1000;
  std::string init = "quantiles";  // quantiles | uniform
  std::uint64_t seed = 1;
  bool dump_positions = false;
};

struct SpectrumSettings {
  int k_max = 4;
  double threshold = 0.01;
  /// Match tolerance in units of the resolution 2 pi / T_obs.
  double tolerance_bins = 2.0;
};

struct LyapunovSettings {
  double d0 = 1e-8;
  double renorm_every = 1.0;
  double fit_lo = 100.0;
};

struct RunConfig {
  Scenario scenario;
  Tolerances tolerances;
  /// Unset horizons take subcommand defaults; the manifest records resolved values.
  std::optional<double> t_max;
  std::optional<double> sample_dt;
  Method method = Method::Cdf;
  EnsembleSettings ensemble;
  SpectrumSettings spectrum;
  LyapunovSettings lyapunov;
  std::size_t basis_samples = 1001;
  std::string out_dir = ".";
  unsigned threads = 1;
};

std::vector<std::string> preset_names();

/// Throws InvalidParameter naming the valid presets when `name` is unknown.
Scenario preset(std::string_view name);

/// Applies one `key = value` setting. Unknown keys and malformed values throw
/// InvalidParameter.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Flat key-value text: one `key = value` per line, `#` starts a comment.
/// A `scenario` line is applied before every other key.
RunConfig parse_key_value(std::string_view text, RunConfig base = {});

/// Reads either a key-value file or a JSON run manifest (first non-blank
/// character `{`).
RunConfig load_config(const std::string& path, RunConfig base = {});

nlohmann::json to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// Checks tolerances, horizons and the scenario; throws InvalidParameter.
void validate(const RunConfig& config);

/// Threads from the QUASIBOHM_THREADS environment variable, if set.
std::optional<unsigned> threads_from_environment();

}  // namespace quasibohm::app
