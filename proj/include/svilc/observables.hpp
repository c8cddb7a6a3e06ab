// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svilc/chi_solver.hpp"

namespace svilc {

// SI constants used for unit conversion.
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kHbar = 1.054571817e-34;              // J s

/// B(x, y) = cxx x^2 + cx x + cyy y^2 + cy y + c0 in tesla, x and y in lattice units.
/// The vector potential uses the gauge A = (0, A_y) with A_y(x, y) = int_0^x B dx' + gauge_offset.
struct FieldPolynomial {
  double cxx = 0.0;
  double cx = 0.0;
  double cyy = 0.0;
  double cy = 0.0;
  double gauge_offset = 0.0;  // T * a, added to A_y everywhere
  double c0 = 0.0;

  double operator()(double x, double y) const { return cxx * x * x + cx * x + cyy * y * y + cy * y + c0; }
  bool is_zero() const { return cxx == 0.0 && cx == 0.0 && cyy == 0.0 && cy == 0.0 && c0 == 0.0; }
};

/// Line integral of A along each bond, tail -> head, in T a^2.
Eigen::VectorXd vector_potential(const BondGraph& graph, const FieldPolynomial& field);

/// Exact flux of B through the unit square with lower-left corner (x, y), in T a^2.
double plaquette_flux(const FieldPolynomial& field, double x, double y);

/// Energy of one unit of bond current (2et/hbar) threading one T a^2 of flux, in meV.
double flux_current_energy_meV(double t_meV, double lattice_constant_nm);

/// Determinant-pair contraction for two chi-dressed determinants built from the same orbitals.
/// Gives <a|b> and the one-body transition density needed for any site or bond operator.
class PairContraction {
 public:
  PairContraction(const ChiContext& ctx, const CurrentState& a, const CurrentState& b);

  cplx overlap() const { return overlap_; }
  /// Overlap below the singular threshold: every element is reported as zero.
  bool singular() const { return singular_; }

  /// <a| c_{j s}^dag c_{j s'} |b>.
  cplx site(int j, int s, int s2) const;
  /// <a| c_{k s}^dag c_{j s} |b> summed over spin; j and k joined by a bond.
  cplx hop(int k, int j) const;

 private:
  const ChiContext* ctx_;
  Eigen::VectorXd half_diff_;      // (chi_a - chi_b) / 2 per site
  Eigen::VectorXd delta_b_;        // bond phases of b
  Eigen::MatrixXcd y_;             // C * adj(M)
  cplx overlap_ = 1.0;
  bool singular_ = false;
  bool identical_ = false;
};

inline constexpr double kSingularOverlap = 1e-14;

/// Pattern-basis matrices. All are Hermitian; S is the overlap.
struct CouplingMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXcd S;
  Eigen::MatrixXcd HB;   // magnetic coupling, meV
  Eigen::MatrixXcd E;    // HF energy with the double-counting constant removed, meV
  Eigen::MatrixXcd X;    // sum_j (x_j - x_c) n_j, lattice units
  Eigen::MatrixXcd Y;    // sum_j (y_j - y_c) n_j
  std::vector<std::pair<int, int>> singular_pairs;
};

/// <a|O|b> for each ordered pattern pair, with O in {1, H_B, H_HF - E_dc, x, y}.
/// Off-diagonal elements are skipped (left zero) when `offdiagonal` is false.
CouplingMatrix coupling_matrix(const ChiContext& ctx, const std::vector<CurrentState>& states,
                               const std::vector<std::string>& labels, const FieldPolynomial& field,
                               bool offdiagonal = true, int threads = 1);

/// Diagonal classical magnetic energy -flux_energy * sum_b Phi_b j_b, meV.
double classical_field_energy(const ChiContext& ctx, const CurrentState& state, const FieldPolynomial& field);

struct BasisStates {
  Eigen::MatrixXcd coefficients;  // columns: orthonormal states in the pattern basis
  Eigen::VectorXd field_eigenvalues;
  Eigen::VectorXd energies;       // <Phi|H_HF - E_dc + H_B|Phi>, ascending
  std::vector<std::string> labels;  // label of the dominant pattern per state
};

/// Eigenstates of H_B in the overlap metric. Degenerate clusters keep the basis nearest the
/// symmetrically orthogonalized patterns.
BasisStates diagonalize_basis(const CouplingMatrix& coupling);

struct DipoleMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXcd mu_x;  // 1e-30 C m
  Eigen::MatrixXcd mu_y;
};

/// mu = -|e| sum_j r_j <a|n_j|b> for the orthogonal states; r measured from the lattice center.
DipoleMatrix transition_dipoles(const CouplingMatrix& coupling, const BasisStates& basis, double lattice_constant_nm);

/// Table with |mu_y| above the diagonal and |mu_x| below it, rows and columns in `order`.
void write_dipole_table(std::ostream& os, const DipoleMatrix& dipoles, const std::vector<std::string>& order,
                        const std::string& header = {});

/// Ascending eigenpairs of a small Hermitian matrix.
void hermitian_eigen(const Eigen::MatrixXcd& h, Eigen::VectorXd& values, Eigen::MatrixXcd& vectors);

}  // namespace svilc
