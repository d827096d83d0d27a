#include "quasibohm_app/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "quasibohm/ensemble.hpp"
#include "quasibohm/errors.hpp"
#include "quasibohm/lyapunov.hpp"
#include "quasibohm/spectrum.hpp"
#include "quasibohm/trajectory.hpp"

#ifndef QUASIBOHM_VERSION
#define QUASIBOHM_VERSION "unknown"
#endif

namespace quasibohm::app {
namespace {

using nlohmann::json;

// Verdict thresholds for `audit`.
constexpr double kAuditLambda = 1e-2;
constexpr double kAuditDrift = 1e-6;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw InvalidParameter("cannot write '" + path.string() + "'");
    row_strings(header);
  }
  void row(const std::vector<double>& values) {
    std::vector<std::string> s;
    s.reserve(values.size());
    for (double v : values) s.push_back(fmt(v));
    row_strings(s);
  }
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

struct Context {
  const RunConfig& config;
  std::filesystem::path dir;
  std::vector<std::string> files;
  json diagnostics = json::object();
  std::string summary;

  std::filesystem::path file(const std::string& name) {
    files.push_back(name);
    return dir / name;
  }
  OdeTolerances ode() const { return {config.tolerances.ode_rtol, config.tolerances.ode_atol}; }
  double t_max() const { return *config.t_max; }
  double dt() const { return *config.sample_dt; }
};

json steps_json(const StepStatistics& s) {
  return {{"accepted", s.accepted},         {"rejected", s.rejected},
          {"singular_retries", s.singular_retries}, {"rhs_evaluations", s.rhs_evaluations},
          {"min_step", s.accepted ? json(s.min_step) : json(nullptr)},
          {"max_step", s.accepted ? json(s.max_step) : json(nullptr)}};
}

// Samples t_k = k dt, k < floor(t_max / dt), so that T_obs = N dt.
std::vector<double> spectral_times(double t_max, double dt) {
  const auto n = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

void check_cdf_drift(const Trajectory& traj, double tol) {
  if (traj.diagnostics.max_cdf_drift > tol) {
    throw NumericError("CDF transport drift " + fmt(traj.diagnostics.max_cdf_drift) + " exceeds cdf_tol " +
                       fmt(tol));
  }
}

void run_basis(Context& ctx, const SuperpositionState& state) {
  const EigenBasis& b = state.basis();
  {
    CsvWriter csv(ctx.file("energies.csv"), {"index", "E"});
    for (std::size_t i = 0; i < b.size(); ++i) csv.row_strings({std::to_string(i), fmt(b.energy(i))});
  }
  std::vector<std::string> header{"x"};
  for (std::size_t i = 0; i < b.size(); ++i) header.push_back("phi_" + std::to_string(i));
  CsvWriter csv(ctx.file("eigenfunctions.csv"), header);
  const std::size_t n = ctx.config.basis_samples;
  const Interval dom = b.domain();
  std::vector<double> phi(b.size()), dphi(b.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double x = k + 1 == n ? dom.hi : dom.lo + dom.width() * static_cast<double>(k) / static_cast<double>(n - 1);
    b.evaluate(x, phi, dphi);
    std::vector<double> row{x};
    row.insert(row.end(), phi.begin(), phi.end());
    csv.row(row);
  }
  const std::vector<double> gram = overlap_matrix(b);
  double err = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      err = std::max(err, std::abs(gram[i * b.size() + j] - (i == j ? 1.0 : 0.0)));
    }
  }
  bool nodes_ok = true;
  for (std::size_t i = 0; i < b.size(); ++i) nodes_ok = nodes_ok && count_nodes(b, i) == i;
  ctx.diagnostics = {{"orthonormality_error", err}, {"node_counts_ok", nodes_ok}};
  ctx.summary = "basis: " + std::to_string(b.size()) + " states, orthonormality error " + fmt(err);
}

void run_evolve(Context& ctx, const SuperpositionState& state) {
  const std::vector<double> grid = uniform_times(ctx.t_max(), ctx.dt());
  const Trajectory ode = evolve_ode(state, ctx.config.scenario.x0, grid, ctx.ode());
  const Trajectory cdf = evolve_cdf(state, ctx.config.scenario.x0, grid);
  check_cdf_drift(cdf, ctx.config.tolerances.cdf_tol);
  const double p0 = state.cdf(ctx.config.scenario.x0, grid.front());
  CsvWriter csv(ctx.file("evolve.csv"), {"t", "x_ode", "x_cdf", "cdf_drift", "min_density"});
  double sup = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Snapshot snap = state.at(grid[k]);
    const double drift = std::abs(snap.cdf(ode.positions[k]) - p0);
    const double rho = std::min(snap.density(ode.positions[k]), snap.density(cdf.positions[k]));
    csv.row({grid[k], ode.positions[k], cdf.positions[k], drift, rho});
    sup = std::max(sup, std::abs(ode.positions[k] - cdf.positions[k]));
  }
  ctx.diagnostics = {{"ode_max_cdf_drift", ode.diagnostics.max_cdf_drift},
                     {"cdf_max_cdf_drift", cdf.diagnostics.max_cdf_drift},
                     {"sup_ode_minus_cdf", sup},
                     {"min_density", std::min(ode.diagnostics.min_density, cdf.diagnostics.min_density)},
                     {"ode_steps", steps_json(ode.diagnostics.steps)}};
  ctx.summary = "evolve: sup|x_ode - x_cdf| = " + fmt(sup) + ", CDF drift " + fmt(ode.diagnostics.max_cdf_drift);
}

struct LyapunovTriple {
  LyapunovEstimate ratio, variational, two;
};

LyapunovTriple lyapunov_all(const Context& ctx, const SuperpositionState& state, std::span<const double> grid,
                            const Trajectory& cdf) {
  TwoTrajectoryOptions two;
  two.d0 = ctx.config.lyapunov.d0;
  two.renorm_every = ctx.config.lyapunov.renorm_every;
  two.tolerances = ctx.ode();
  return {lyapunov_ratio(state, cdf), lyapunov_variational(state, ctx.config.scenario.x0, grid, ctx.ode()),
          lyapunov_two_trajectory(state, ctx.config.scenario.x0, grid, two)};
}

json fit_json(const LyapunovEstimate& e, double lo, double hi) {
  std::size_t inside = 0;
  for (double t : e.horizons) inside += (t >= lo && t <= hi) ? 1 : 0;
  if (inside < 2) return nullptr;
  const InverseHorizonFit f = fit_inverse_horizon(e, lo, hi);
  return {{"intercept", f.intercept}, {"slope", f.slope}, {"samples", f.samples}};
}

void run_lyapunov(Context& ctx, const SuperpositionState& state) {
  const std::vector<double> grid = uniform_times(ctx.t_max(), ctx.dt());
  const Trajectory cdf = evolve_cdf(state, ctx.config.scenario.x0, grid);
  check_cdf_drift(cdf, ctx.config.tolerances.cdf_tol);
  const LyapunovTriple l = lyapunov_all(ctx, state, grid, cdf);
  CsvWriter csv(ctx.file("lyapunov.csv"), {"T", "lambda_ratio", "lambda_variational", "lambda_twotraj", "log_stretch"});
  double identity = 0.0;
  for (std::size_t k = 0; k < l.ratio.horizons.size(); ++k) {
    csv.row({l.ratio.horizons[k], l.ratio.lambda_hat[k], l.variational.lambda_hat[k], l.two.lambda_hat[k],
             l.ratio.log_stretch[k]});
    identity = std::max(identity, std::abs(l.ratio.log_stretch[k] - l.variational.log_stretch[k]));
  }
  const double lo = ctx.config.lyapunov.fit_lo;
  ctx.diagnostics = {
      {"lambda_ratio", l.ratio.lambda_hat.back()},
      {"lambda_variational", l.variational.lambda_hat.back()},
      {"lambda_twotraj", l.two.lambda_hat.back()},
      {"sup_log_stretch", l.ratio.sup_log_stretch()},
      {"max_ratio_variational_gap", identity},
      {"separation_collapses", l.two.separation_collapses},
      {"fit", {{"t_lo", lo},
               {"t_hi", ctx.t_max()},
               {"ratio", fit_json(l.ratio, lo, ctx.t_max())},
               {"variational", fit_json(l.variational, lo, ctx.t_max())},
               {"two_trajectory", fit_json(l.two, lo, ctx.t_max())}}},
      {"variational_steps", steps_json(l.variational.steps)},
      {"two_trajectory_steps", steps_json(l.two.steps)}};
  ctx.summary = "lyapunov: lambda_hat(" + fmt(ctx.t_max()) + ") = " + fmt(l.ratio.lambda_hat.back()) + " (ratio), " +
                fmt(l.variational.lambda_hat.back()) + " (variational), " + fmt(l.two.lambda_hat.back()) +
                " (two-trajectory)";
}

SpectrumReport spectrum_of(const Context& ctx, const SuperpositionState& state, std::span<const double> series) {
  const auto omega = state.frequencies();
  const double combos = std::pow(2.0 * ctx.config.spectrum.k_max + 1.0, static_cast<double>(omega.size()));
  if (combos > 2e7) throw InvalidParameter("spectrum.k_max too large for " + std::to_string(omega.size()) + " frequencies");
  const PowerSpectrum ps = power_spectrum(series, ctx.dt());
  return match_combinations(ps.peaks, omega, ctx.config.spectrum.k_max,
                            ctx.config.spectrum.tolerance_bins * ps.resolution, ctx.config.spectrum.threshold,
                            ps.resolution);
}

std::vector<double> spectral_series(const Context& ctx, const SuperpositionState& state) {
  const std::vector<double> times = spectral_times(ctx.t_max(), ctx.dt());
  if (times.size() < 2) throw InvalidParameter("t_max / sample_dt leaves fewer than two samples");
  Trajectory traj = ctx.config.method == Method::Ode ? evolve_ode(state, ctx.config.scenario.x0, times, ctx.ode())
                                                     : evolve_cdf(state, ctx.config.scenario.x0, times);
  if (ctx.config.method == Method::Cdf) check_cdf_drift(traj, ctx.config.tolerances.cdf_tol);
  return std::move(traj.positions);
}

void write_spectrum(Context& ctx, const SpectrumReport& rep, std::size_t n) {
  std::vector<std::string> header{"frequency", "amplitude"};
  for (std::size_t i = 1; i <= n; ++i) header.push_back("k_" + std::to_string(i));
  header.insert(header.end(), {"residual", "matched"});
  CsvWriter csv(ctx.file("spectrum.csv"), header);
  for (const MatchedPeak& p : rep.peaks) {
    std::vector<std::string> row{fmt(p.frequency), fmt(p.amplitude)};
    for (int k : p.combination) row.push_back(std::to_string(k));
    row.push_back(fmt(p.residual));
    row.push_back(p.matched ? "1" : "0");
    csv.row_strings(row);
  }
}

void run_spectrum(Context& ctx, const SuperpositionState& state) {
  const std::vector<double> series = spectral_series(ctx, state);
  const SpectrumReport rep = spectrum_of(ctx, state, series);
  write_spectrum(ctx, rep, state.frequency_count());
  ctx.diagnostics = {{"observation_time", static_cast<double>(series.size()) * ctx.dt()},
                     {"resolution", rep.resolution},
                     {"tolerance", rep.tolerance},
                     {"peaks_above_threshold", rep.peaks.size()},
                     {"unmatched", rep.unmatched_count()},
                     {"max_unmatched_amplitude", rep.max_unmatched_amplitude()},
                     {"max_matched_residual", rep.max_matched_residual()}};
  ctx.summary = "spectrum: " + std::to_string(rep.peaks.size()) + " peaks above threshold, " +
                std::to_string(rep.unmatched_count()) + " unmatched";
}

void run_ensemble(Context& ctx, const SuperpositionState& state) {
  const EnsembleSettings& e = ctx.config.ensemble;
  const std::vector<double> init = e.init == "uniform" ? stratified_uniform(state.domain(), e.size, e.seed)
                                                       : equilibrium_quantiles(state, e.size, 0.0);
  const std::vector<double> grid = uniform_times(ctx.t_max(), ctx.dt());
  const EnsembleRun run = evolve_ensemble(state, init, grid, ctx.config.method, ctx.config.threads, ctx.ode());
  {
    CsvWriter csv(ctx.file("ensemble.csv"), {"t", "ks_distance"});
    for (std::size_t k = 0; k < grid.size(); ++k) csv.row({grid[k], run.ks_distance[k]});
  }
  if (e.dump_positions) {
    std::vector<std::string> header{"t"};
    for (std::size_t j = 0; j < run.points(); ++j) header.push_back("x_" + std::to_string(j));
    CsvWriter csv(ctx.file("positions.csv"), header);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<double> row{grid[k]};
      const auto slice = run.slice(k);
      row.insert(row.end(), slice.begin(), slice.end());
      csv.row(row);
    }
  }
  const auto [lo, hi] = std::minmax_element(run.ks_distance.begin(), run.ks_distance.end());
  ctx.diagnostics = {{"points", run.points()},
                     {"order_inversions", run.order_inversions},
                     {"ks_initial", run.ks_distance.front()},
                     {"ks_final", run.ks_distance.back()},
                     {"ks_min", *lo},
                     {"ks_max", *hi},
                     {"steps", steps_json(run.steps)}};
  ctx.summary = "ensemble: " + std::to_string(run.points()) + " points, " + std::to_string(run.order_inversions) +
                " order inversions, D(0) = " + fmt(run.ks_distance.front()) + ", D(end) = " +
                fmt(run.ks_distance.back());
}

void run_audit(Context& ctx, const SuperpositionState& state) {
  const double x0 = ctx.config.scenario.x0;
  const std::vector<double> grid = uniform_times(ctx.t_max(), ctx.dt());
  const Trajectory ode = evolve_ode(state, x0, grid, ctx.ode());
  const Trajectory cdf = evolve_cdf(state, x0, grid);
  check_cdf_drift(cdf, ctx.config.tolerances.cdf_tol);
  const LyapunovTriple l = lyapunov_all(ctx, state, grid, cdf);
  const std::vector<double> series = spectral_series(ctx, state);
  const SpectrumReport rep = spectrum_of(ctx, state, series);

  const double lam = std::max({std::abs(l.ratio.lambda_hat.back()), std::abs(l.variational.lambda_hat.back()),
                               std::abs(l.two.lambda_hat.back())});
  const double drift = ode.diagnostics.max_cdf_drift;
  const double unmatched = rep.max_unmatched_amplitude();
  std::vector<std::string> problems;
  if (!(lam < kAuditLambda)) problems.push_back("lambda_hat not small");
  if (rep.unmatched_count() != 0) problems.push_back("unmatched spectral peaks");
  if (!(drift < kAuditDrift)) problems.push_back("CDF drift too large");
  std::string verdict = "no chaos: lambda ≈ 0, spectrum quasiperiodic";
  if (!problems.empty()) {
    verdict = "inconclusive:";
    for (std::size_t i = 0; i < problems.size(); ++i) verdict += (i ? ", " : " ") + problems[i];
  }
  {
    CsvWriter csv(ctx.file("audit.csv"), {"quantity", "value"});
    csv.row_strings({"lambda_ratio", fmt(l.ratio.lambda_hat.back())});
    csv.row_strings({"lambda_variational", fmt(l.variational.lambda_hat.back())});
    csv.row_strings({"lambda_twotraj", fmt(l.two.lambda_hat.back())});
    csv.row_strings({"sup_log_stretch", fmt(l.ratio.sup_log_stretch())});
    csv.row_strings({"max_unmatched_amplitude", fmt(unmatched)});
    csv.row_strings({"unmatched_peaks", std::to_string(rep.unmatched_count())});
    csv.row_strings({"cdf_drift", fmt(drift)});
  }
  write_spectrum(ctx, rep, state.frequency_count());
  ctx.diagnostics = {{"verdict", verdict},
                     {"lambda_hat_t_max", lam},
                     {"lambda_ratio", l.ratio.lambda_hat.back()},
                     {"lambda_variational", l.variational.lambda_hat.back()},
                     {"lambda_twotraj", l.two.lambda_hat.back()},
                     {"sup_log_stretch", l.ratio.sup_log_stretch()},
                     {"max_unmatched_amplitude", unmatched},
                     {"unmatched_peaks", rep.unmatched_count()},
                     {"peaks_above_threshold", rep.peaks.size()},
                     {"cdf_drift", drift}};
  ctx.summary = "verdict: " + verdict + " (lambda_hat(T_max) = " + fmt(lam) + ", max unmatched amplitude = " +
                fmt(unmatched) + ", CDF drift = " + fmt(drift) + ")";
}

json scenario_expansion(const SuperpositionState& state) {
  json coeffs = json::array();
  for (const auto& a : state.coefficients()) coeffs.push_back({a.real(), a.imag()});
  const auto e = state.basis().energies();
  const auto w = state.frequencies();
  return {{"domain", {state.domain().lo, state.domain().hi}},
          {"energies", std::vector<double>(e.begin(), e.end())},
          {"frequencies", std::vector<double>(w.begin(), w.end())},
          {"normalized_coefficients", coeffs}};
}

}  // namespace

SuperpositionState build_state(const RunConfig& c) {
  const Scenario& s = c.scenario;
  EigenBasis basis = build_basis(s.potential, s.coefficients.size(), s.units, s.grid_points);
  if (!basis.domain().contains(s.x0)) {
    throw InvalidParameter("x0 = " + fmt(s.x0) + " lies outside the domain [" + fmt(basis.domain().lo) +
                           ", " + fmt(basis.domain().hi) + "]");
  }
  StateOptions opt;
  opt.node_epsilon = c.tolerances.node_epsilon;
  opt.cdf_panels = c.tolerances.cdf_panels;
  return SuperpositionState(std::move(basis), s.coefficients, opt);
}

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::Basis: return "basis";
    case Command::Evolve: return "evolve";
    case Command::Lyapunov: return "lyapunov";
    case Command::Spectrum: return "spectrum";
    case Command::Ensemble: return "ensemble";
    case Command::Audit: return "audit";
  }
  return "unknown";
}

std::optional<Command> command_from_string(std::string_view name) noexcept {
  for (Command c : {Command::Basis, Command::Evolve, Command::Lyapunov, Command::Spectrum, Command::Ensemble,
                    Command::Audit}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view default_scenario(Command c) noexcept {
  return c == Command::Audit ? "doublewell-five" : "two-mode-box";
}

RunConfig resolve_horizons(Command c, RunConfig config) {
  double t_max = 100.0, dt = 0.1;
  switch (c) {
    case Command::Basis:
    case Command::Evolve: break;
    case Command::Lyapunov: t_max = 1000.0; dt = 1.0; break;
    case Command::Spectrum:
    case Command::Audit: t_max = 2000.0; dt = 0.05; break;
    case Command::Ensemble: dt = 1.0; break;
  }
  if (!config.t_max) config.t_max = t_max;
  if (!config.sample_dt) config.sample_dt = std::min(dt, *config.t_max);
  return config;
}

RunResult run(Command command, const RunConfig& input) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig config = resolve_horizons(command, input);
  validate(config);
  if (*config.sample_dt > *config.t_max) throw InvalidParameter("sample_dt exceeds t_max");
  const SuperpositionState state = build_state(config);

  Context ctx{config, config.out_dir, {}, json::object(), {}};
  std::filesystem::create_directories(ctx.dir);
  switch (command) {
    case Command::Basis: run_basis(ctx, state); break;
    case Command::Evolve: run_evolve(ctx, state); break;
    case Command::Lyapunov: run_lyapunov(ctx, state); break;
    case Command::Spectrum: run_spectrum(ctx, state); break;
    case Command::Ensemble: run_ensemble(ctx, state); break;
    case Command::Audit: run_audit(ctx, state); break;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunResult result;
  result.manifest = {{"tool", "quasibohm"},
                     {"version", QUASIBOHM_VERSION},
                     {"command", std::string(to_string(command))},
                     {"config", to_json(config)},
                     {"expanded", scenario_expansion(state)},
                     {"wall_clock_seconds", seconds},
                     {"diagnostics", ctx.diagnostics},
                     {"outputs", ctx.files}};
  std::ofstream(ctx.dir / "manifest.json") << result.manifest.dump(2) << '\n';
  ctx.files.push_back("manifest.json");
  result.files = ctx.files;
  result.summary = ctx.summary;
  return result;
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const NodeProximity*>(&e) || dynamic_cast<const TrajectorySingularity*>(&e)) {
    return kNodeSingularity;
  }
  if (dynamic_cast<const InvalidParameter*>(&e) || dynamic_cast<const CapabilityError*>(&e)) return kConfigError;
  return kNumericFailure;
}

json error_object(const std::exception& e) {
  json body = {{"message", e.what()}, {"exit_code", exit_code_for(e)}};
  if (const auto* q = dynamic_cast<const Error*>(&e)) {
    body["kind"] = q->kind();
  } else if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) {
    body["kind"] = "io";
  } else {
    body["kind"] = "internal";
  }
  if (const auto* n = dynamic_cast<const NodeProximity*>(&e)) {
    body["x"] = n->x();
    body["t"] = n->t();
    body["density"] = n->density();
  } else if (const auto* s = dynamic_cast<const TrajectorySingularity*>(&e)) {
    body["x"] = s->x();
    body["t"] = s->t();
  } else if (const auto* d = dynamic_cast<const DomainError*>(&e)) {
    body["x"] = d->x();
  }
  return {{"error", body}};
}

}  // namespace quasibohm::app
