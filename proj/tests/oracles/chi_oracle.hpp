// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

// Exhaustive-scan reference for the phase-field problem on a single 2x2 plaquette.
// The loop circulation is fixed at 2 pi wbar; the remaining freedom is three site phases
// (the fourth is the global gauge). A full grid locates the basin, then nested grids
// zoom in until the step is far below the requested accuracy.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace oracle {

// Bonds in loop order 0->1->2->3->0 with orientation +1 along the loop.
struct Plaquette {
  std::array<std::complex<double>, 4> rho;  // <c_from^dag c_to> along the loop direction, spin summed
  double t = 1.0;
  int wbar = 1;

  std::array<double, 4> deltas(const std::array<double, 3>& phi) const {
    const double base = 2.0 * std::numbers::pi * wbar / 4.0;
    const std::array<double, 4> p = {0.0, phi[0], phi[1], phi[2]};
    std::array<double, 4> d{};
    for (int k = 0; k < 4; ++k) d[static_cast<std::size_t>(k)] = base + p[static_cast<std::size_t>((k + 1) % 4)] - p[static_cast<std::size_t>(k)];
    return d;
  }

  double energy(const std::array<double, 4>& d) const {
    double e = 0.0;
    for (int k = 0; k < 4; ++k) {
      e += -2.0 * t * std::real(std::polar(1.0, -0.5 * d[static_cast<std::size_t>(k)]) * rho[static_cast<std::size_t>(k)]);
    }
    return e;
  }

  // Bond current along the loop direction, (1/t) dE/d delta by central differences.
  std::array<double, 4> currents(const std::array<double, 4>& d, double h = 1e-5) const {
    std::array<double, 4> j{};
    for (int k = 0; k < 4; ++k) {
      auto up = d, dn = d;
      up[static_cast<std::size_t>(k)] += h;
      dn[static_cast<std::size_t>(k)] -= h;
      j[static_cast<std::size_t>(k)] = (energy(up) - energy(dn)) / (2.0 * h * t);
    }
    return j;
  }
};

struct ScanResult {
  double energy = std::numeric_limits<double>::infinity();
  std::array<double, 4> deltas{};
  std::array<double, 4> currents{};
};

inline ScanResult scan(const Plaquette& p, int coarse = 48, int fine = 11, int levels = 9) {
  ScanResult best;
  std::array<double, 3> center{};
  // Site phases enter as phi/2, so the energy is 4 pi periodic in each of them.
  const double period = 4.0 * std::numbers::pi;
  for (int a = 0; a < coarse; ++a) {
    for (int b = 0; b < coarse; ++b) {
      for (int c = 0; c < coarse; ++c) {
        const std::array<double, 3> phi = {period * a / coarse, period * b / coarse, period * c / coarse};
        const double e = p.energy(p.deltas(phi));
        if (e < best.energy) {
          best.energy = e;
          center = phi;
        }
      }
    }
  }
  double step = period / coarse;
  for (int level = 0; level < levels; ++level) {
    const std::array<double, 3> c0 = center;
    for (int a = -fine; a <= fine; ++a) {
      for (int b = -fine; b <= fine; ++b) {
        for (int c = -fine; c <= fine; ++c) {
          const std::array<double, 3> phi = {c0[0] + step * a / fine, c0[1] + step * b / fine, c0[2] + step * c / fine};
          const double e = p.energy(p.deltas(phi));
          if (e < best.energy) {
            best.energy = e;
            center = phi;
          }
        }
      }
    }
    step /= 0.5 * fine;
  }
  best.deltas = p.deltas(center);
  best.currents = p.currents(best.deltas);
  return best;
}

}  // namespace oracle
