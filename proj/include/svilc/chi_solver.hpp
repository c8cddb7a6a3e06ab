// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "svilc/lattice.hpp"
#include "svilc/meanfield.hpp"

namespace svilc {

/// Target circulation of the phase field per basis loop, in units of 2 pi.
struct WindingPattern {
  std::vector<int> wbar;
  std::string label;
};

/// Phase difference chi(head) - chi(tail) on every bond, radians.
struct ChiField {
  Eigen::VectorXd delta;
};

struct FeedPoint {
  Site site;
  double magnitude = 0.0;  // units of 2et/hbar
};

/// External current injected at `sources` and withdrawn at `drains`.
struct FeedSpec {
  std::string name;
  std::vector<FeedPoint> sources;
  std::vector<FeedPoint> drains;

  /// Checks site activity and current balance. `field` prefixes error messages.
  void validate(const BondGraph& graph, const std::string& field) const;
  /// Net injection per site (sources positive), multiplied by `scale`.
  Eigen::VectorXd injection(const BondGraph& graph, double scale = 1.0) const;
};

struct CurrentState {
  WindingPattern winding;
  ChiField chi;
  Eigen::VectorXd injection;      // per site, units of 2et/hbar
  Eigen::VectorXd multipliers;    // one per basis loop, meV
  Eigen::VectorXd bond_currents;  // tail -> head, units of 2et/hbar
  double energy = 0.0;            // E[grad chi] including the chi-independent part, meV
  double gradient_norm = 0.0;     // max Kirchhoff residual, units of 2et/hbar
  int iterations = 0;
  bool regularized = false;       // some bond stiffness was clipped to keep Newton steps descending
};

/// Everything the phase-field problem needs from a fixed mean-field solution. Holds a
/// reference to the solution's orbitals, which must outlive the context.
class ChiContext {
 public:
  ChiContext(const BondGraph& graph, const LoopBasis& basis, const MeanFieldSolution& mf);

  const BondGraph& graph() const { return *graph_; }
  const LoopBasis& basis() const { return *basis_; }
  const MeanFieldSolution& meanfield() const { return *mf_; }
  double t() const { return mf_->params.t_meV; }

  /// Spin-summed bond density <c_tail^dag c_head> of the undressed determinant.
  const Eigen::VectorXcd& bond_density() const { return rho_; }
  /// Loop-bond incidence (n_loops x n_bonds), entries +-1.
  const Eigen::SparseMatrix<double>& loop_incidence() const { return loops_; }
  /// Texture winding of the spin azimuth per basis loop (AF background removed).
  const std::vector<int>& texture_windings() const { return texture_; }
  /// Energy terms that do not depend on chi (on-site HF part), meV.
  double constant_energy() const { return constant_; }

  /// Minimal-norm bond one-form whose loop circulations are 2 pi wbar.
  Eigen::VectorXd base_one_form(const std::vector<int>& wbar) const;
  /// Least-squares loop amplitudes c with O^T c ~= v.
  Eigen::VectorXd loop_projection(const Eigen::VectorXd& v) const;
  /// Bond flow on a BFS spanning tree with the given per-site injection as divergence.
  Eigen::VectorXd tree_flow(const Eigen::VectorXd& injection) const;

 private:
  const BondGraph* graph_;
  const LoopBasis* basis_;
  const MeanFieldSolution* mf_;
  Eigen::VectorXcd rho_;
  Eigen::SparseMatrix<double> loops_;
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> gram_;
  std::vector<int> tree_parent_bond_;
  std::vector<int> tree_order_;
  std::vector<int> texture_;
  double constant_ = 0.0;
};

/// Spin-summed <c_tail^dag c_head> per bond from occupied orbitals.
Eigen::VectorXcd bond_density(const Eigen::MatrixXcd& occupied, const BondGraph& graph);

/// Staggered-frame winding of the azimuth around every basis loop.
std::vector<int> texture_windings(const BondGraph& graph, const LoopBasis& basis, const SpinField& fields);

/// Every assignment of +-1 to the loops with odd texture winding; all other loops get 0.
/// Patterns are ordered by the binary counter over odd loops (bit set -> -1).
std::vector<WindingPattern> enumerate_patterns(const std::vector<int>& texture_windings);

/// Number of patterns enumerate_patterns would return.
double pattern_count(const std::vector<int>& texture_windings);

/// True when wbar + texture winding is even on every loop.
bool satisfies_parity(const WindingPattern& pattern, const std::vector<int>& texture_windings);

/// chi-dependent energy -2t sum_b Re[exp(-i delta_b / 2) rho_b], meV.
double chi_energy(const ChiContext& ctx, const Eigen::VectorXd& delta);
/// d E / d delta_b, meV per radian.
Eigen::VectorXd chi_gradient(const ChiContext& ctx, const Eigen::VectorXd& delta);

struct ChiOptions {
  double tol = 1e-10;  // on the Kirchhoff residual, units of 2et/hbar
  int max_iter = 200;
  double regularization = 1e-12;
  double max_phase_step = 0.5;  // radians per bond per iteration
  bool verbose = false;
};

/// Minimizes E + t sum_n I_n phi_n over the site potential phi at fixed loop circulations.
/// Throws ValidationError for parity violations or unbalanced feeds and SolverError when
/// Newton stalls, which signals a feed beyond what the lattice can carry.
CurrentState solve_chi(const ChiContext& ctx, const WindingPattern& pattern, const Eigen::VectorXd& injection,
                       const ChiOptions& options = {});

/// Bond currents from the dressed orbitals directly, units of 2et/hbar.
Eigen::VectorXd current_distribution(const ChiContext& ctx, const ChiField& chi);

/// Bond currents rebuilt from the tree feed flow plus multiplier-weighted loop currents.
Eigen::VectorXd multiplier_currents(const ChiContext& ctx, const CurrentState& state);

/// Net outflow per site for a bond current field.
Eigen::VectorXd divergence(const BondGraph& graph, const Eigen::VectorXd& currents);

/// Text table `x1 y1 x2 y2 current` with a one-line comment header.
void write_bond_currents(std::ostream& os, const BondGraph& graph, const Eigen::VectorXd& currents,
                         const std::string& header = {});

}  // namespace svilc
