#include <ostream>

#include "CLI11.hpp"
#include "quasibohm/errors.hpp"
#include "quasibohm_app/app.hpp"

namespace quasibohm::app {
namespace {

struct Flags {
  std::string positional_scenario;
  std::string scenario;
  std::string config;
  std::optional<double> t_max;
  std::optional<double> sample_dt;
  std::string out_dir;
  std::optional<unsigned> threads;
  std::optional<double> ode_rtol;
  std::optional<double> cdf_tol;
  std::string method;
  std::vector<std::string> settings;
};

void add_common(CLI::App& sub, Flags& f) {
  sub.add_option("scenario_name", f.positional_scenario, "Preset name (same as --scenario)");
  sub.add_option("--scenario", f.scenario, "Preset: two-mode-box, harmonic-three, doublewell-five");
  sub.add_option("--config", f.config, "Key-value config file or a JSON manifest from an earlier run");
  sub.add_option("--t-max", f.t_max, "Time horizon");
  sub.add_option("--sample-dt", f.sample_dt, "Output sampling interval");
  sub.add_option("--out-dir", f.out_dir, "Directory for CSV files and manifest.json");
  sub.add_option("--threads", f.threads, "Worker threads (fallback: QUASIBOHM_THREADS)");
  sub.add_option("--ode-rtol", f.ode_rtol, "ODE relative tolerance");
  sub.add_option("--cdf-tol", f.cdf_tol, "Largest accepted CDF transport drift");
  sub.add_option("--method", f.method, "Trajectory method for spectrum and ensemble: cdf or ode");
  sub.add_option("--set", f.settings, "Extra key=value config override (repeatable)");
}

RunConfig build_config(Command command, const Flags& f) {
  RunConfig c;
  c.scenario = preset(default_scenario(command));
  if (!f.config.empty()) c = load_config(f.config, std::move(c));
  if (!f.scenario.empty() && !f.positional_scenario.empty() && f.scenario != f.positional_scenario) {
    throw InvalidParameter("conflicting scenarios '" + f.positional_scenario + "' and '" + f.scenario + "'");
  }
  const std::string& name = f.scenario.empty() ? f.positional_scenario : f.scenario;
  if (!name.empty()) c.scenario = preset(name);
  for (const std::string& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidParameter("--set expects key=value, got '" + s + "'");
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.t_max) c.t_max = *f.t_max;
  if (f.sample_dt) c.sample_dt = *f.sample_dt;
  if (!f.out_dir.empty()) c.out_dir = f.out_dir;
  if (f.ode_rtol) c.tolerances.ode_rtol = *f.ode_rtol;
  if (f.cdf_tol) c.tolerances.cdf_tol = *f.cdf_tol;
  if (!f.method.empty()) apply_setting(c, "method", f.method);
  if (f.threads) {
    if (*f.threads == 0) throw InvalidParameter("--threads must be at least 1");
    c.threads = *f.threads;
  } else if (const auto env = threads_from_environment()) {
    c.threads = *env;
  }
  return c;
}

}  // namespace

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Bohmian trajectories for superpositions of bound states", "quasibohm"};
  cli.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<Command, const char*>> commands{
      {Command::Basis, "Write energies and sampled eigenfunctions"},
      {Command::Evolve, "Trajectory by ODE integration and by CDF transport"},
      {Command::Lyapunov, "Finite-time Lyapunov estimates by three methods"},
      {Command::Spectrum, "Spectral peaks of x(t) matched to frequency combinations"},
      {Command::Ensemble, "Evolve an ordered ensemble and its Kolmogorov distance"},
      {Command::Audit, "Evolve, Lyapunov and spectrum in one run with a verdict"}};
  for (const auto& [c, help] : commands) add_common(*cli.add_subcommand(std::string(to_string(c)), help), flags);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << cli.help();
      if (auto subs = cli.get_subcommands(); !subs.empty()) out << subs.front()->help();
      return kOk;
    }
    err << nlohmann::json{{"error", {{"kind", "usage"}, {"message", e.what()}, {"exit_code", int(kConfigError)}}}}.dump()
        << '\n';
    return kConfigError;
  }

  const Command command = *command_from_string(cli.get_subcommands().front()->get_name());
  try {
    const RunConfig config = build_config(command, flags);
    const RunResult result = run(command, config);
    out << result.summary << '\n';
    return kOk;
  } catch (const std::exception& e) {
    err << error_object(e).dump() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace quasibohm::app
