#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "quasibohm/state.hpp"

namespace fixture {

using quasibohm::Complex;

inline quasibohm::PiecewiseBox double_well() {
  return {{0.0, 10.0}, {{0.0, 4.5, 0.0}, {4.5, 5.5, 5.0}, {5.5, 10.0, 0.0}}};
}

inline quasibohm::SuperpositionState two_mode_box() {
  const double a = 1.0 / std::sqrt(2.0);
  return {quasibohm::build_infinite_well(std::numbers::pi, 2), {Complex(a), Complex(a)}};
}

inline quasibohm::SuperpositionState harmonic_three() {
  return {quasibohm::build_harmonic(1.0, 1.0, 3), {Complex(0.6), Complex(0.0, 0.64), Complex(0.48)}};
}

inline const quasibohm::EigenBasis& double_well_basis() {
  static const quasibohm::EigenBasis basis = quasibohm::build_numeric(double_well(), 4001, 5);
  return basis;
}

inline quasibohm::SuperpositionState doublewell_five() {
  std::vector<Complex> a;
  for (int k = 0; k < 5; ++k) a.push_back(std::polar(1.0 / std::sqrt(5.0), double(k)));
  return {double_well_basis(), a};
}

}  // namespace fixture
