#pragma once

#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quasibohm/state.hpp"
#include "quasibohm_app/config.hpp"

namespace quasibohm::app {

enum class Command { Basis, Evolve, Lyapunov, Spectrum, Ensemble, Audit };

std::string_view to_string(Command c) noexcept;
std::optional<Command> command_from_string(std::string_view name) noexcept;

/// Scenario used when neither --scenario nor a config file names one.
std::string_view default_scenario(Command c) noexcept;

/// Fills unset horizons with the defaults of the subcommand.
RunConfig resolve_horizons(Command c, RunConfig config);

/// Basis and state for the scenario; checks that x0 lies in the domain.
SuperpositionState build_state(const RunConfig& config);

struct RunResult {
  nlohmann::json manifest;
  std::vector<std::string> files;
  /// One human-readable line for stdout.
  std::string summary;
};

/// Runs one subcommand, writes its CSV files and manifest.json into
/// config.out_dir and returns the manifest. Library errors propagate.
RunResult run(Command command, const RunConfig& config);

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericFailure = 3, kNodeSingularity = 4 };

int exit_code_for(const std::exception& e) noexcept;

/// {"error": {"kind", "message", "exit_code", ...}}
nlohmann::json error_object(const std::exception& e);

/// Full command-line entry point; never throws.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace quasibohm::app
