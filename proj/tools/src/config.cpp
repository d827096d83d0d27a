#include "quasibohm_app/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "quasibohm/errors.hpp"

namespace quasibohm::app {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why) {
  throw InvalidParameter("config key '" + std::string(key) + "': cannot use '" + std::string(value) +
                         "' (" + std::string(why) + ")");
}

double to_double(std::string_view key, std::string_view v) {
  v = trim(v);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "expected a finite number");
  }
  return out;
}

std::uint64_t to_unsigned(std::string_view key, std::string_view v) {
  v = trim(v);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) bad_value(key, v, "expected a non-negative integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  v = trim(v);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "expected true or false");
}

Method to_method(std::string_view key, std::string_view v) {
  v = trim(v);
  if (v == "ode") return Method::Ode;
  if (v == "cdf") return Method::Cdf;
  bad_value(key, v, "expected ode or cdf");
}

// "re" or "re:im"
std::complex<double> to_complex(std::string_view key, std::string_view v) {
  const auto parts = split(v, ':');
  if (parts.size() == 1) return {to_double(key, parts[0]), 0.0};
  if (parts.size() == 2) return {to_double(key, parts[0]), to_double(key, parts[1])};
  bad_value(key, v, "expected re or re:im");
}

PiecewiseBox& box_of(Scenario& s, std::string_view key) {
  auto* box = std::get_if<PiecewiseBox>(&s.potential);
  if (!box) throw InvalidParameter("config key '" + std::string(key) + "' requires potential = piecewise_box");
  return *box;
}

std::string kind_of(const PotentialSpec& p) {
  if (std::holds_alternative<InfiniteWell>(p)) return "infinite_well";
  if (std::holds_alternative<Harmonic>(p)) return "harmonic";
  return "piecewise_box";
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

std::vector<std::string> preset_names() { return {"two-mode-box", "harmonic-three", "doublewell-five"}; }

Scenario preset(std::string_view name) {
  Scenario s;
  s.name = std::string(name);
  if (name == "two-mode-box") {
    s.potential = InfiniteWell{std::numbers::pi};
    const double a = 1.0 / std::sqrt(2.0);
    s.coefficients = {{a, 0.0}, {a, 0.0}};
    s.x0 = 1.0;
    return s;
  }
  if (name == "harmonic-three") {
    s.potential = Harmonic{1.0, 1.0};
    s.coefficients = {{0.6, 0.0}, {0.0, 0.64}, {0.48, 0.0}};
    s.x0 = 0.3;
    return s;
  }
  if (name == "doublewell-five") {
    s.potential = PiecewiseBox{{0.0, 10.0}, {{0.0, 4.5, 0.0}, {4.5, 5.5, 5.0}, {5.5, 10.0, 0.0}}};
    s.grid_points = 4001;
    for (int k = 0; k < 5; ++k) s.coefficients.push_back(std::polar(1.0 / std::sqrt(5.0), double(k)));
    s.x0 = 2.5;
    return s;
  }
  std::string valid;
  for (const std::string& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw InvalidParameter("unknown scenario '" + std::string(name) + "'; valid presets: " + valid);
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  Scenario& s = c.scenario;
  if (key == "scenario") {
    s = preset(value);
  } else if (key == "potential") {
    s.name = "custom";
    if (value == "infinite_well") {
      s.potential = InfiniteWell{std::numbers::pi};
    } else if (value == "harmonic") {
      s.potential = Harmonic{s.units.mass, 1.0};
    } else if (value == "piecewise_box") {
      s.potential = PiecewiseBox{{0.0, 1.0}, {{0.0, 1.0, 0.0}}};
    } else {
      bad_value(key, value, "expected infinite_well, harmonic or piecewise_box");
    }
  } else if (key == "width") {
    auto* w = std::get_if<InfiniteWell>(&s.potential);
    if (!w) throw InvalidParameter("config key 'width' requires potential = infinite_well");
    w->width = to_double(key, value);
  } else if (key == "omega") {
    auto* h = std::get_if<Harmonic>(&s.potential);
    if (!h) throw InvalidParameter("config key 'omega' requires potential = harmonic");
    h->angular_frequency = to_double(key, value);
  } else if (key == "box.domain") {
    const auto parts = split(value, ',');
    if (parts.size() != 2) bad_value(key, value, "expected lo, hi");
    box_of(s, key).domain = {to_double(key, parts[0]), to_double(key, parts[1])};
  } else if (key == "box.segments") {
    std::vector<Segment> segs;
    for (std::string_view item : split(value, ';')) {
      const auto f = split(item, ':');
      if (f.size() != 3) bad_value(key, item, "expected lo:hi:V");
      segs.push_back({to_double(key, f[0]), to_double(key, f[1]), to_double(key, f[2])});
    }
    box_of(s, key).segments = std::move(segs);
  } else if (key == "grid_points") {
    s.grid_points = to_unsigned(key, value);
  } else if (key == "hbar") {
    s.units.hbar = to_double(key, value);
  } else if (key == "mass") {
    s.units.mass = to_double(key, value);
    if (auto* h = std::get_if<Harmonic>(&s.potential)) h->mass = s.units.mass;
  } else if (key == "coefficients") {
    s.coefficients.clear();
    for (std::string_view item : split(value, ',')) s.coefficients.push_back(to_complex(key, item));
  } else if (key == "x0") {
    s.x0 = to_double(key, value);
  } else if (key == "t_max") {
    c.t_max = to_double(key, value);
  } else if (key == "sample_dt") {
    c.sample_dt = to_double(key, value);
  } else if (key == "method") {
    c.method = to_method(key, value);
  } else if (key == "ode_rtol") {
    c.tolerances.ode_rtol = to_double(key, value);
  } else if (key == "ode_atol") {
    c.tolerances.ode_atol = to_double(key, value);
  } else if (key == "cdf_tol") {
    c.tolerances.cdf_tol = to_double(key, value);
  } else if (key == "node_epsilon") {
    c.tolerances.node_epsilon = to_double(key, value);
  } else if (key == "cdf_panels") {
    c.tolerances.cdf_panels = to_unsigned(key, value);
  } else if (key == "threads") {
    const auto t = to_unsigned(key, value);
    if (t == 0 || t > 1024) bad_value(key, value, "expected 1..1024");
    c.threads = static_cast<unsigned>(t);
  } else if (key == "out_dir") {
    c.out_dir = std::string(value);
  } else if (key == "ensemble.size") {
    c.ensemble.size = to_unsigned(key, value);
  } else if (key == "ensemble.init") {
    if (value != "quantiles" && value != "uniform") bad_value(key, value, "expected quantiles or uniform");
    c.ensemble.init = std::string(value);
  } else if (key == "ensemble.seed") {
    c.ensemble.seed = to_unsigned(key, value);
  } else if (key == "ensemble.dump") {
    c.ensemble.dump_positions = to_bool(key, value);
  } else if (key == "spectrum.k_max") {
    c.spectrum.k_max = static_cast<int>(to_unsigned(key, value));
  } else if (key == "spectrum.threshold") {
    c.spectrum.threshold = to_double(key, value);
  } else if (key == "spectrum.tolerance_bins") {
    c.spectrum.tolerance_bins = to_double(key, value);
  } else if (key == "lyapunov.d0") {
    c.lyapunov.d0 = to_double(key, value);
  } else if (key == "lyapunov.renorm_every") {
    c.lyapunov.renorm_every = to_double(key, value);
  } else if (key == "lyapunov.fit_lo") {
    c.lyapunov.fit_lo = to_double(key, value);
  } else if (key == "basis.samples") {
    c.basis_samples = to_unsigned(key, value);
  } else {
    throw InvalidParameter("unknown config key '" + std::string(key) + "'");
  }
}

RunConfig parse_key_value(std::string_view text, RunConfig base) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidParameter("config line " + std::to_string(line_no) + ": expected key = value");
    }
    entries.emplace_back(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
  // scenario resets the physics and potential resets its parameters, so both go first.
  auto rank = [](const std::string& k) { return k == "scenario" ? 0 : k == "potential" ? 1 : 2; };
  std::stable_sort(entries.begin(), entries.end(),
                   [&](const auto& a, const auto& b) { return rank(a.first) < rank(b.first); });
  for (const auto& [k, v] : entries) apply_setting(base, k, v);
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidParameter("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
  }
  return parse_key_value(text, std::move(base));
}

nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  const Scenario& s = c.scenario;
  json pot;
  pot["kind"] = kind_of(s.potential);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, InfiniteWell>) {
          pot["width"] = p.width;
        } else if constexpr (std::is_same_v<T, Harmonic>) {
          pot["mass"] = p.mass;
          pot["angular_frequency"] = p.angular_frequency;
        } else {
          pot["domain"] = {p.domain.lo, p.domain.hi};
          json segs = json::array();
          for (const Segment& g : p.segments) segs.push_back({g.lo, g.hi, g.value});
          pot["segments"] = segs;
        }
      },
      s.potential);
  json coeffs = json::array();
  for (const auto& a : s.coefficients) coeffs.push_back({a.real(), a.imag()});

  json j;
  j["scenario"] = {{"name", s.name},     {"potential", pot},       {"hbar", s.units.hbar},
                   {"mass", s.units.mass}, {"grid_points", s.grid_points}, {"coefficients", coeffs},
                   {"x0", s.x0}};
  j["tolerances"] = {{"ode_rtol", c.tolerances.ode_rtol},
                     {"ode_atol", c.tolerances.ode_atol},
                     {"cdf_tol", c.tolerances.cdf_tol},
                     {"node_epsilon", c.tolerances.node_epsilon},
                     {"cdf_panels", c.tolerances.cdf_panels}};
  j["t_max"] = c.t_max ? json(*c.t_max) : json(nullptr);
  j["sample_dt"] = c.sample_dt ? json(*c.sample_dt) : json(nullptr);
  j["method"] = std::string(to_string(c.method));
  j["ensemble"] = {{"size", c.ensemble.size},
                   {"init", c.ensemble.init},
                   {"seed", c.ensemble.seed},
                   {"dump_positions", c.ensemble.dump_positions}};
  j["spectrum"] = {{"k_max", c.spectrum.k_max},
                   {"threshold", c.spectrum.threshold},
                   {"tolerance_bins", c.spectrum.tolerance_bins}};
  j["lyapunov"] = {{"d0", c.lyapunov.d0},
                   {"renorm_every", c.lyapunov.renorm_every},
                   {"fit_lo", c.lyapunov.fit_lo}};
  j["basis_samples"] = c.basis_samples;
  j["out_dir"] = c.out_dir;
  j["threads"] = c.threads;
  return j;
}

RunConfig config_from_json(const nlohmann::json& input) {
  const nlohmann::json& j = input.contains("config") ? input.at("config") : input;
  RunConfig c;
  try {
    const auto& sj = j.at("scenario");
    Scenario& s = c.scenario;
    s.name = sj.at("name").get<std::string>();
    const auto& pj = sj.at("potential");
    const std::string kind = pj.at("kind").get<std::string>();
    if (kind == "infinite_well") {
      s.potential = InfiniteWell{pj.at("width").get<double>()};
    } else if (kind == "harmonic") {
      s.potential = Harmonic{pj.at("mass").get<double>(), pj.at("angular_frequency").get<double>()};
    } else if (kind == "piecewise_box") {
      PiecewiseBox box;
      box.domain = {pj.at("domain").at(0).get<double>(), pj.at("domain").at(1).get<double>()};
      for (const auto& g : pj.at("segments")) {
        box.segments.push_back({g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()});
      }
      s.potential = std::move(box);
    } else {
      throw InvalidParameter("unknown potential kind '" + kind + "' in manifest");
    }
    s.units = {sj.at("hbar").get<double>(), sj.at("mass").get<double>()};
    s.grid_points = sj.at("grid_points").get<std::size_t>();
    s.coefficients.clear();
    for (const auto& a : sj.at("coefficients")) s.coefficients.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    s.x0 = sj.at("x0").get<double>();

    const auto& tj = j.at("tolerances");
    c.tolerances = {tj.at("ode_rtol").get<double>(), tj.at("ode_atol").get<double>(),
                    tj.at("cdf_tol").get<double>(), tj.at("node_epsilon").get<double>(),
                    tj.at("cdf_panels").get<std::size_t>()};
    if (!j.at("t_max").is_null()) c.t_max = j.at("t_max").get<double>();
    if (!j.at("sample_dt").is_null()) c.sample_dt = j.at("sample_dt").get<double>();
    c.method = to_method("method", j.at("method").get<std::string>());
    const auto& ej = j.at("ensemble");
    c.ensemble = {ej.at("size").get<std::size_t>(), ej.at("init").get<std::string>(),
                  ej.at("seed").get<std::uint64_t>(), ej.at("dump_positions").get<bool>()};
    const auto& spj = j.at("spectrum");
    c.spectrum = {spj.at("k_max").get<int>(), spj.at("threshold").get<double>(),
                  spj.at("tolerance_bins").get<double>()};
    const auto& lj = j.at("lyapunov");
    c.lyapunov = {lj.at("d0").get<double>(), lj.at("renorm_every").get<double>(),
                  lj.at("fit_lo").get<double>()};
    c.basis_samples = j.at("basis_samples").get<std::size_t>();
    c.out_dir = j.at("out_dir").get<std::string>();
    c.threads = j.at("threads").get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("malformed config JSON: ") + e.what());
  }
  return c;
}

void validate(const RunConfig& c) {
  const Scenario& s = c.scenario;
  if (s.coefficients.empty()) throw InvalidParameter("scenario has no coefficients");
  if (std::all_of(s.coefficients.begin(), s.coefficients.end(), [](auto a) { return a == 0.0; })) {
    throw InvalidParameter("coefficient vector must be nonzero");
  }
  if (!positive(s.units.hbar) || !positive(s.units.mass)) throw InvalidParameter("hbar and mass must be positive");
  if (!std::isfinite(s.x0)) throw InvalidParameter("x0 must be finite");
  const Tolerances& t = c.tolerances;
  if (!positive(t.ode_rtol) || !positive(t.ode_atol) || !positive(t.cdf_tol) || !positive(t.node_epsilon)) {
    throw InvalidParameter("all tolerances must be positive");
  }
  if (t.cdf_panels < 2) throw InvalidParameter("cdf_panels must be at least 2");
  if (c.t_max && !positive(*c.t_max)) throw InvalidParameter("t_max must be positive");
  if (c.sample_dt && !positive(*c.sample_dt)) throw InvalidParameter("sample_dt must be positive");
  if (c.t_max && c.sample_dt && *c.sample_dt > *c.t_max) throw InvalidParameter("sample_dt exceeds t_max");
  if (c.threads == 0) throw InvalidParameter("threads must be at least 1");
  if (c.ensemble.size == 0) throw InvalidParameter("ensemble.size must be positive");
  if (!(c.spectrum.threshold >= 0.0 && c.spectrum.threshold <= 1.0)) {
    throw InvalidParameter("spectrum.threshold must lie in [0, 1]");
  }
  if (c.spectrum.k_max < 0 || c.spectrum.k_max > 16) throw InvalidParameter("spectrum.k_max must lie in 0..16");
  if (!positive(c.spectrum.tolerance_bins)) throw InvalidParameter("spectrum.tolerance_bins must be positive");
  if (!positive(c.lyapunov.d0) || !positive(c.lyapunov.renorm_every)) {
    throw InvalidParameter("lyapunov.d0 and lyapunov.renorm_every must be positive");
  }
  if (c.basis_samples < 2) throw InvalidParameter("basis.samples must be at least 2");
}

std::optional<unsigned> threads_from_environment() {
  const char* env = std::getenv("QUASIBOHM_THREADS");
  if (!env || !*env) return std::nullopt;
  const std::string_view v(env);
  unsigned out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || out == 0 || out > 1024) {
    throw InvalidParameter("QUASIBOHM_THREADS must be an integer in 1..1024, got '" + std::string(v) + "'");
  }
  return out;
}

}  // namespace quasibohm::app
