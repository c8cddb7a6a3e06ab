// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svilc/lattice.hpp"
#include "svilc/linalg.hpp"

namespace svilc {

struct HubbardParams {
  double t_meV = 130.0;
  double U_meV = 8.0 * 130.0;
  int n_electrons = 0;
  double zeta_fixed = std::numbers::pi / 2.0;

  void validate(int n_sites) const;
};

/// Per-site occupation and in-plane-projected spin. Angles in radians.
struct SpinField {
  Eigen::VectorXd n;
  Eigen::VectorXd S;
  Eigen::VectorXd xi;
  Eigen::VectorXd zeta;

  int size() const { return static_cast<int>(n.size()); }
  Eigen::VectorXd sx() const { return (S.array() * xi.array().cos() * zeta.array().sin()).matrix(); }
  Eigen::VectorXd sy() const { return (S.array() * xi.array().sin() * zeta.array().sin()).matrix(); }
  Eigen::VectorXd sz() const { return (S.array() * zeta.array().cos()).matrix(); }

  static SpinField from_components(const Eigen::VectorXd& n, const Eigen::VectorXd& sx, const Eigen::VectorXd& sy,
                                   const Eigen::VectorXd& sz);
};

/// HF orbitals. Row 2*j + sigma (sigma = 0 up, 1 down), one column per orbital, ascending
/// energy. Only the occupied block is needed downstream.
struct OrbitalSet {
  Eigen::MatrixXcd occupied;
  Eigen::VectorXd energies;
  int n_occupied = 0;
  bool degenerate_fermi_level = false;
};

struct MeanFieldSolution {
  HubbardParams params;
  SpinField fields;
  OrbitalSet orbitals;
  double total_energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_history;
  int energy_increases = 0;
};

struct Vortex {
  Point center;
  int winding = 1;
};

/// Antiferromagnetic pi (x + y) background plus one atan2 phase per vortex. Initial n is
/// uniform (n_electrons / sites) and |S| = 0.4. The winding sum must vanish unless
/// `allow_unbalanced` is set.
SpinField build_svq_texture(const BondGraph& graph, const std::vector<Vortex>& vortices, int n_electrons,
                            bool allow_unbalanced = false);

/// One-body HF matrix in the (site, spin) basis, 2|sites| square, units of meV.
Eigen::MatrixXcd hf_hamiltonian(const HubbardParams& params, const SpinField& fields, const BondGraph& graph);

struct ScfOptions {
  double tol = 1e-9;
  int max_iter = 500;
  double mixing = 0.3;
  int anderson_depth = 6;  // 0 selects plain linear mixing
  // Hold the in-plane spin direction at the seed azimuth and self-consist only n_j and the
  // spin length along it. Keeps vortex cores where the seed put them.
  bool pin_azimuth = false;
  bool verbose = false;
};

/// Self-consistent HF with the polar angle projected to pi/2 each step. Throws SolverError
/// on charge drift; non-convergence is reported through `converged` with the best iterate.
MeanFieldSolution scf_solve(const HubbardParams& params, const SpinField& initial, const BondGraph& graph,
                            const ScfOptions& options = {});

/// Diagonalizes the HF matrix for fixed fields and fills the lowest orbitals.
OrbitalSet fill_orbitals(const HubbardParams& params, const SpinField& fields, const BondGraph& graph);

/// n_j and S_j recomputed from the occupied orbitals (no projection).
SpinField fields_from_orbitals(const Eigen::MatrixXcd& occupied, int n_sites);

/// Total HF energy: sum of occupied eigenvalues minus U sum_j [(n_j/2)^2 - |S_j|^2].
double hf_total_energy(const HubbardParams& params, const SpinField& fields, const OrbitalSet& orbitals);

/// Binary checkpoint with a format-version header. Orbitals are rebuilt on load from the
/// stored fields unless `with_orbitals` was set when saving.
void save_checkpoint(const std::string& path, const MeanFieldSolution& sol, bool with_orbitals = false);
MeanFieldSolution load_checkpoint(const std::string& path, const BondGraph& graph);

}  // namespace svilc
