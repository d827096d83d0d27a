#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace quasibohm {

/// In-place iterative radix-2 FFT (forward, e^{-i...}). Length must be a power of two.
void fft_radix2(std::span<std::complex<double>> data);

struct SpectralPeak {
  double frequency;  // angular, rad / time
  double amplitude;  // same units as the series
};

struct PowerSpectrum {
  /// Sorted by amplitude, descending.
  std::vector<SpectralPeak> peaks;
  /// 2 pi / T_obs with T_obs = samples * dt.
  double resolution = 0.0;
  double observation_time = 0.0;
  std::size_t fft_length = 0;
};

/// Hann-windowed magnitude spectrum of a uniformly sampled real series, mean
/// removed and zero-padded to the next power of two. A local maximum is a peak
/// only if it dominates every bin within four resolution widths, which keeps
/// window sidelobes out of the list. Peak location and amplitude are refined by
/// quadratic interpolation. A pure tone A cos(w t) yields a peak of amplitude ~A.
/// Throws InvalidParameter for fewer than 64 samples.
PowerSpectrum power_spectrum(std::span<const double> series, double sample_dt);

struct MatchedPeak {
  double frequency = 0.0;
  double amplitude = 0.0;
  std::vector<int> combination;  // k_1..k_n
  bool matched = false;
  double residual = 0.0;  // |frequency - sum_i k_i omega_i|
};

struct SpectrumReport {
  std::vector<MatchedPeak> peaks;  // amplitude descending, above threshold only
  double resolution = 0.0;
  double threshold = 0.0;  // fraction of the largest amplitude
  double tolerance = 0.0;
  int k_max = 0;

  std::size_t unmatched_count() const;
  double max_unmatched_amplitude() const;
  double max_matched_residual() const;
};

/// Assigns each peak at or above threshold * (largest amplitude) the integer
/// vector k with |k_i| <= k_max minimizing |f - k.omega|; ties go to the
/// smallest sum |k_i|, then lexicographic order. Peaks whose best residual
/// exceeds `tolerance` are unmatched.
SpectrumReport match_combinations(std::span<const SpectralPeak> peaks, std::span<const double> omega,
                                  int k_max, double tolerance, double threshold, double resolution);

}  // namespace quasibohm
