// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the unit tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "stealthrmt/error.hpp"
#include "stealthrmt/experiment.hpp"
#include "stealthrmt/grid_io.hpp"

namespace stealthrmt::testing {

/// Bus 1 is the slack; branches 1-2, 2-3, 1-3, all with x = 1.
inline constexpr const char* kRing3 = R"(function mpc = ring3
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 230 1 1.1 0.9;
  2 1 0 0 0 0 1 1 0 230 1 1.1 0.9;
  3 2 0 0 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.branch = [
  1 2 0 1 0 0 0 0 0 0 1 -360 360;
  2 3 0 1 0 0 0 0 0 0 1 -360 360;
  1 3 0 1 0 0 0 0 0 0 1 -360 360;
];
)";

inline const grid::GridCase& ieee30() {
  static const grid::GridCase g = grid::load_matpower_file(experiment::resolve_case_path("ieee30"));
  return g;
}

/// IEEE-30 at SNR 30 dB with the given Toeplitz decay.
inline experiment::AttackSetup ieee30_setup(double r = 0.1) {
  return experiment::AttackSetup::from_model(grid::build_dc_jacobian(ieee30()), r, 30.0);
}

template <class F>
ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::IoError;
}

/// Random discrete AED: n0 atoms uniform on [0, hi], n0 uniform on [1, max_n0].
inline std::vector<double> random_atoms(std::mt19937_64& gen, std::size_t max_n0, double hi) {
  std::uniform_int_distribution<std::size_t> count(1, max_n0);
  std::uniform_real_distribution<double> atom(0.0, hi);
  std::vector<double> atoms(count(gen));
  for (double& a : atoms) a = atom(gen);
  return atoms;
}

/// Log-uniform draw on [lo, hi].
inline double log_uniform(std::mt19937_64& gen, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(gen));
}

}  // namespace stealthrmt::testing
