#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>

#include "quasibohm/errors.hpp"

namespace quasibohm {

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double min_step = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
};

struct StepStatistics {
  long accepted = 0;
  long rejected = 0;
  long singular_retries = 0;  // steps halved because a stage hit a node or left the domain
  long rhs_evaluations = 0;
  double min_step = std::numeric_limits<double>::infinity();
  double max_step = 0.0;

  void merge(const StepStatistics& o) {
    accepted += o.accepted;
    rejected += o.rejected;
    singular_retries += o.singular_retries;
    rhs_evaluations += o.rhs_evaluations;
    min_step = std::min(min_step, o.min_step);
    max_step = std::max(max_step, o.max_step);
  }
};

namespace dopri {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Shampine's continuous extension.
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace dopri

/// Dormand-Prince 5(4) with dense output, for small fixed-size systems.
///
/// `rhs(t, y)` returns dy/dt. If it throws NodeProximity or DomainError the
/// step is halved and retried; below `min_step` TrajectorySingularity is
/// thrown. `observe(k, y)` receives the dense-output state at every
/// sample_times[k] (ascending, sample_times[0] is the start time).
template <std::size_t D, class Rhs, class Observer>
StepStatistics integrate_dopri5(Rhs&& rhs, std::array<double, D> y, std::span<const double> sample_times,
                                Observer&& observe, const OdeOptions& opt) {
  using State = std::array<double, D>;
  StepStatistics stats;
  if (sample_times.empty()) return stats;
  for (std::size_t k = 1; k < sample_times.size(); ++k) {
    if (!(sample_times[k] > sample_times[k - 1])) {
      throw InvalidParameter("sample times must be strictly increasing");
    }
  }
  if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0)) throw InvalidParameter("tolerances must be positive");

  auto eval = [&](double t, const State& s) {
    ++stats.rhs_evaluations;
    return rhs(t, s);
  };
  auto axpy = [](const State& base, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    State out = base;
    for (const auto& [coef, k] : terms) {
      for (std::size_t i = 0; i < D; ++i) out[i] += h * coef * (*k)[i];
    }
    return out;
  };

  double t = sample_times.front();
  const double t_end = sample_times.back();
  observe(std::size_t{0}, y);
  if (sample_times.size() == 1) return stats;
  std::size_t next_sample = 1;

  State k1 = eval(t, y);
  // Initial step from the derivative scale.
  double h;
  {
    double d0 = 0.0;
    double dd = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double sc = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      dd += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / D);
    dd = std::sqrt(dd / D);
    h = (d0 < 1e-5 || dd < 1e-5) ? 1e-6 : 0.01 * d0 / dd;
    h = std::min({h, opt.max_step, t_end - t, 0.1});
    h = std::max(h, 100.0 * opt.min_step);
  }

  long steps = 0;
  while (t < t_end) {
    if (++steps > opt.max_steps) throw NumericError("step budget exhausted at t = " + std::to_string(t));
    h = std::min({h, opt.max_step, t_end - t});
    const bool last = h >= t_end - t;

    State k2, k3, k4, k5, k6, k7, y_new;
    try {
      k2 = eval(t + dopri::c2 * h, axpy(y, h, {{dopri::a21, &k1}}));
      k3 = eval(t + dopri::c3 * h, axpy(y, h, {{dopri::a31, &k1}, {dopri::a32, &k2}}));
      k4 = eval(t + dopri::c4 * h, axpy(y, h, {{dopri::a41, &k1}, {dopri::a42, &k2}, {dopri::a43, &k3}}));
      k5 = eval(t + dopri::c5 * h,
                axpy(y, h, {{dopri::a51, &k1}, {dopri::a52, &k2}, {dopri::a53, &k3}, {dopri::a54, &k4}}));
      k6 = eval(t + h, axpy(y, h,
                            {{dopri::a61, &k1}, {dopri::a62, &k2}, {dopri::a63, &k3}, {dopri::a64, &k4},
                             {dopri::a65, &k5}}));
      y_new = axpy(y, h,
                   {{dopri::a71, &k1}, {dopri::a73, &k3}, {dopri::a74, &k4}, {dopri::a75, &k5},
                    {dopri::a76, &k6}});
      k7 = eval(last ? t_end : t + h, y_new);
    } catch (const NodeProximity&) {
      ++stats.singular_retries;
      h *= 0.5;
      if (h < opt.min_step) {
        throw TrajectorySingularity("step fell below the minimum near a node", t, y[0]);
      }
      continue;
    } catch (const DomainError&) {
      ++stats.singular_retries;
      h *= 0.5;
      if (h < opt.min_step) {
        throw TrajectorySingularity("step fell below the minimum at the domain edge", t, y[0]);
      }
      continue;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double e = h * (dopri::e1 * k1[i] + dopri::e3 * k3[i] + dopri::e4 * k4[i] +
                            dopri::e5 * k5[i] + dopri::e6 * k6[i] + dopri::e7 * k7[i]);
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / D);
    if (!std::isfinite(err)) err = 1e10;

    if (err > 1.0) {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h < opt.min_step) {
        throw NumericError("tolerance not achievable: step below minimum at t = " + std::to_string(t));
      }
      continue;
    }

    const double t_new = last ? t_end : t + h;
    const double used = t_new - t;
    ++stats.accepted;
    stats.min_step = std::min(stats.min_step, used);
    stats.max_step = std::max(stats.max_step, used);

    while (next_sample < sample_times.size() && sample_times[next_sample] <= t_new) {
      const double ts = sample_times[next_sample];
      State out;
      if (ts == t_new) {
        out = y_new;
      } else {
        const double theta = (ts - t) / used;
        const double theta1 = 1.0 - theta;
        for (std::size_t i = 0; i < D; ++i) {
          const double r1 = y[i];
          const double r2 = y_new[i] - y[i];
          const double r3 = used * k1[i] - r2;
          const double r4 = r2 - used * k7[i] - r3;
          const double r5 = used * (dopri::d1 * k1[i] + dopri::d3 * k3[i] + dopri::d4 * k4[i] +
                                    dopri::d5 * k5[i] + dopri::d6 * k6[i] + dopri::d7 * k7[i]);
          out[i] = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
        }
      }
      observe(next_sample, out);
      ++next_sample;
    }

    t = t_new;
    y = y_new;
    k1 = k7;
    const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 10.0;
    h = used * std::clamp(fac, 0.2, 10.0);
  }
  return stats;
}

}  // namespace quasibohm
