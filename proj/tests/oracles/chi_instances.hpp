// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

// Small phase-field instances shared by the unit and acceptance suites.

#pragma once

#include <numbers>
#include <random>

#include "svilc/chi_solver.hpp"

namespace oracle {

using namespace svilc;

struct Instance {
  BondGraph graph;
  LoopBasis basis;
  MeanFieldSolution mf;
};

inline Instance single_vortex_plaquette() {
  Instance in;
  LatticeSpec s;
  s.nx = 2;
  s.ny = 2;
  in.graph = build_lattice(s);
  in.basis = plaquette_loop_basis(in.graph);
  HubbardParams p;
  p.t_meV = 130.0;
  p.U_meV = 8.0 * p.t_meV;
  // Two electrons keep all four bond densities equal, so wbar = +-1 carries a finite
  // circulating current rather than slipping the whole 2 pi onto one weak bond.
  p.n_electrons = 2;
  ScfOptions opt;
  opt.pin_azimuth = true;
  opt.tol = 1e-12;
  in.mf = scf_solve(p, build_svq_texture(in.graph, {{{1.5, 1.5}, 1}}, 2, true), in.graph, opt);
  return in;
}

// Fields with random densities and azimuths; orbitals filled without self-consistency.
inline Instance random_instance(std::mt19937& rng) {
  Instance in;
  LatticeSpec s;
  s.nx = 3 + static_cast<int>(rng() % 4);
  s.ny = 3 + static_cast<int>(rng() % 4);
  if (rng() % 2 == 0) s.barrier_sites.insert({2, 2});
  in.graph = build_lattice(s);
  in.basis = plaquette_loop_basis(in.graph);
  const int m = in.graph.n_sites();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd n(m), sx(m), sy(m), sz = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < m; ++j) {
    const Site st = in.graph.sites[static_cast<std::size_t>(j)];
    const double xi = std::numbers::pi * (st.x + st.y) + 2.2 * std::numbers::pi * (u(rng) - 0.5);
    const double len = 0.1 + 0.3 * u(rng);
    n[j] = 0.8 + 0.2 * u(rng);
    sx[j] = len * std::cos(xi);
    sy[j] = len * std::sin(xi);
  }
  in.mf.params.t_meV = 130.0;
  in.mf.params.U_meV = 1040.0;
  in.mf.params.n_electrons = m - 1 - static_cast<int>(rng() % 3);
  in.mf.fields = SpinField::from_components(n, sx, sy, sz);
  in.mf.orbitals = fill_orbitals(in.mf.params, in.mf.fields, in.graph);
  return in;
}

}  // namespace oracle
