#include "quasibohm/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "quasibohm/errors.hpp"

namespace quasibohm {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

int l1(const std::vector<int>& k) {
  int s = 0;
  for (int v : k) s += std::abs(v);
  return s;
}

}  // namespace

void fft_radix2(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw InvalidParameter("FFT length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles computed directly rather than by recurrence to avoid drift.
        const std::complex<double> w(std::cos(angle * static_cast<double>(k)),
                                     std::sin(angle * static_cast<double>(k)));
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
}

PowerSpectrum power_spectrum(std::span<const double> series, double sample_dt) {
  const std::size_t n = series.size();
  if (n < 64) throw InvalidParameter("power spectrum needs at least 64 samples");
  if (!(sample_dt > 0.0)) throw InvalidParameter("sample spacing must be positive");

  double scale = 0.0;
  for (double v : series) scale = std::max(scale, std::abs(v));
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);

  const std::size_t m = next_power_of_two(n);
  std::vector<std::complex<double>> buf(m);
  double window_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(n - 1));
    window_sum += w;
    buf[i] = (series[i] - mean) * w;
  }
  fft_radix2(buf);

  const std::size_t bins = m / 2 + 1;
  std::vector<double> mag(bins);
  for (std::size_t j = 0; j < bins; ++j) {
    mag[j] = std::abs(buf[j]) * (j == 0 ? 1.0 : 2.0) / window_sum;
  }

  PowerSpectrum out;
  out.fft_length = m;
  out.observation_time = static_cast<double>(n) * sample_dt;
  out.resolution = 2.0 * std::numbers::pi / out.observation_time;
  const double bin_width = 2.0 * std::numbers::pi / (static_cast<double>(m) * sample_dt);
  const auto guard = static_cast<std::size_t>(std::ceil(4.0 * static_cast<double>(m) / static_cast<double>(n)));
  const double floor = 1e-12 * std::max(1.0, scale);

  for (std::size_t j = 0; j < bins; ++j) {
    if (mag[j] <= floor) continue;
    const std::size_t lo = j >= guard ? j - guard : 0;
    const std::size_t hi = std::min(bins - 1, j + guard);
    bool dominant = true;
    for (std::size_t q = lo; q <= hi && dominant; ++q) {
      if (q == j) continue;
      // Strict on the left so a flat top yields one peak.
      if (q < j ? mag[q] >= mag[j] : mag[q] > mag[j]) dominant = false;
    }
    if (!dominant) continue;
    double offset = 0.0;
    double amp = mag[j];
    if (j > 0 && j + 1 < bins) {
      const double a = mag[j - 1];
      const double b = mag[j];
      const double c = mag[j + 1];
      const double denom = a - 2.0 * b + c;
      if (denom < 0.0) {
        offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
        amp = b - 0.25 * (a - c) * offset;
      }
    }
    out.peaks.push_back({(static_cast<double>(j) + offset) * bin_width, amp});
  }
  std::stable_sort(out.peaks.begin(), out.peaks.end(),
                   [](const SpectralPeak& a, const SpectralPeak& b) { return a.amplitude > b.amplitude; });
  return out;
}

std::size_t SpectrumReport::unmatched_count() const {
  return static_cast<std::size_t>(
      std::count_if(peaks.begin(), peaks.end(), [](const MatchedPeak& p) { return !p.matched; }));
}

double SpectrumReport::max_unmatched_amplitude() const {
  double m = 0.0;
  for (const MatchedPeak& p : peaks) {
    if (!p.matched) m = std::max(m, p.amplitude);
  }
  return m;
}

double SpectrumReport::max_matched_residual() const {
  double m = 0.0;
  for (const MatchedPeak& p : peaks) {
    if (p.matched) m = std::max(m, p.residual);
  }
  return m;
}

SpectrumReport match_combinations(std::span<const SpectralPeak> peaks, std::span<const double> omega,
                                  int k_max, double tolerance, double threshold, double resolution) {
  if (k_max < 0) throw InvalidParameter("k_max must be non-negative");
  if (!(tolerance > 0.0)) throw InvalidParameter("match tolerance must be positive");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidParameter("threshold must lie in [0, 1]");

  SpectrumReport report;
  report.resolution = resolution;
  report.threshold = threshold;
  report.tolerance = tolerance;
  report.k_max = k_max;

  // Enumerate the lattice once; entries are visited in lexicographic order.
  const std::size_t n = omega.size();
  std::vector<std::vector<int>> combos;
  std::vector<double> freqs;
  {
    std::vector<int> k(n, -k_max);
    while (true) {
      double f = 0.0;
      for (std::size_t i = 0; i < n; ++i) f += k[i] * omega[i];
      combos.push_back(k);
      freqs.push_back(f);
      std::size_t i = n;
      while (i > 0 && k[i - 1] == k_max) {
        k[i - 1] = -k_max;
        --i;
      }
      if (i == 0) break;
      ++k[i - 1];
    }
  }

  double largest = 0.0;
  for (const SpectralPeak& p : peaks) largest = std::max(largest, p.amplitude);
  for (const SpectralPeak& p : peaks) {
    if (p.amplitude < threshold * largest || !(p.amplitude > 0.0)) continue;
    std::size_t best = 0;
    double best_res = std::abs(p.frequency - freqs[0]);
    const double tie = 1e-12 * std::max(1.0, std::abs(p.frequency));
    for (std::size_t c = 1; c < combos.size(); ++c) {
      const double r = std::abs(p.frequency - freqs[c]);
      if (r < best_res - tie) {
        best = c;
        best_res = r;
      } else if (std::abs(r - best_res) <= tie) {
        const int a = l1(combos[c]);
        const int b = l1(combos[best]);
        if (a < b || (a == b && combos[c] < combos[best])) {
          best = c;
          best_res = r;
        }
      }
    }
    MatchedPeak mp;
    mp.frequency = p.frequency;
    mp.amplitude = p.amplitude;
    mp.combination = combos[best];
    mp.residual = best_res;
    mp.matched = best_res <= tolerance;
    report.peaks.push_back(std::move(mp));
  }
  std::stable_sort(report.peaks.begin(), report.peaks.end(),
                   [](const MatchedPeak& a, const MatchedPeak& b) { return a.amplitude > b.amplitude; });
  return report;
}

}  // namespace quasibohm
