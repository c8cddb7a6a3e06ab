// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svilc/chi_solver.hpp"
#include "svilc/lattice.hpp"
#include "svilc/meanfield.hpp"
#include "svilc/observables.hpp"

namespace svilc {

/// Geometry and physics of a set of dipole-current qubits (DCQs), one spin-vortex quartet each.
///
/// A DCQ listed at site (x, y) hosts its quartet around the plaquette center (x + 1/2, y + 1/2):
/// vortices at (x + 1/2 -+ h, y + 1/2 -+ h) with h = `svq_half_spacing`, windings +1 lower left,
/// -1 lower right, -1 upper left, +1 upper right.
struct QubitLayout {
  std::string name;
  LatticeSpec lattice;
  HubbardParams params;  // n_electrons is set by assign_filling
  int holes_per_svq = 4;
  std::vector<Site> dcq_centers;
  double svq_half_spacing = 1.0;
  std::vector<FeedSpec> feeds;  // unit magnitudes; scaled by the feed value at solve time
  FieldPolynomial field;
  ScfOptions scf;
  ChiOptions chi;

  Point svq_center(std::size_t k) const;
  std::vector<Vortex> vortices() const;
  int feed_index(const std::string& name) const;  // -1 when absent

  /// Checks bounds, barrier and hole overlaps, and feed balance; messages name the field.
  void validate() const;
};

/// Preset layouts: "paper-3dcq" (three DCQs on 113 x 15 with barrier walls) and
/// "desk-1svq" (a single quartet on 8 x 8, 60 electrons).
QubitLayout assemble_layout(const std::string& preset);
std::vector<std::string> preset_names();

/// Sets n_electrons from the active site count and the hole count.
void assign_filling(QubitLayout& layout, const BondGraph& graph);

/// "U"/"D" for each DCQ, left to right.
using QubitLabel = std::string;

/// Row order of the level tables: the first qubit varies fastest (D before U), the last
/// slowest (U before D). Three qubits give DDU, UDU, DUU, UUU, DDD, UDD, DUD, UUD.
std::vector<QubitLabel> table_order(int n_qubits);

/// Label flagged as ambiguous when the column current is below this, units of 2et/hbar.
inline constexpr double kAmbiguousCurrent = 1e-8;

struct StateLabel {
  QubitLabel label;
  std::vector<double> column_currents;  // per DCQ, positive upward
  bool ambiguous = false;
};

/// Everything fixed once the mean field is known: lattice, loops, orbitals, and the DCQ patterns.
/// Holds internal references between members, so it is neither copyable nor movable.
class QubitSystem {
 public:
  QubitSystem(QubitLayout layout, MeanFieldSolution meanfield);
  QubitSystem(const QubitSystem&) = delete;
  QubitSystem& operator=(const QubitSystem&) = delete;

  const QubitLayout& layout() const { return layout_; }
  const BondGraph& graph() const { return graph_; }
  const LoopBasis& basis() const { return basis_; }
  const MeanFieldSolution& meanfield() const { return mf_; }
  const ChiContext& context() const { return ctx_; }
  int n_qubits() const { return static_cast<int>(layout_.dcq_centers.size()); }

  /// Basis loop holding each vortex of DCQ k (lower left, lower right, upper left, upper right).
  const std::vector<std::array<int, 4>>& dcq_loops() const { return dcq_loops_; }

  /// Winding pattern for a U/D assignment; throws ValidationError if it breaks parity.
  WindingPattern dcq_pattern(const QubitLabel& label) const;
  /// All 2^n DCQ patterns in table order.
  std::vector<WindingPattern> dcq_patterns() const;

  /// Per-site injection for one value per layout feed (units of 2et/hbar).
  Eigen::VectorXd injection(const Eigen::VectorXd& feed_values) const;

  /// Upward current summed over the vertical bonds of each DCQ's central column pair.
  StateLabel label_state(const Eigen::VectorXd& bond_currents) const;

 private:
  QubitLayout layout_;
  BondGraph graph_;
  LoopBasis basis_;
  MeanFieldSolution mf_;
  ChiContext ctx_;
  std::vector<std::array<int, 4>> dcq_loops_;
};

/// Runs the HF self-consistency for a layout (seeded with its quartets). The returned orbitals
/// are rebuilt from the returned fields.
MeanFieldSolution solve_layout_meanfield(const QubitLayout& layout, const BondGraph& graph);

/// Solved qubit states and their diagonalized spectrum at one feed setting.
struct SpectrumPoint {
  Eigen::VectorXd feed_values;
  std::vector<CurrentState> states;       // one per DCQ pattern, table order
  std::vector<StateLabel> state_labels;   // current-derived labels of those states
  CouplingMatrix coupling;
  BasisStates levels;                     // ascending in energy
};

/// Solves every DCQ pattern at the given feeds, builds the coupling matrices, and diagonalizes.
SpectrumPoint compute_spectrum(const QubitSystem& system, const Eigen::VectorXd& feed_values, int threads = 1);

struct SweepSpec {
  std::string name;
  std::string parameter;                  // feed name swept directly, or "scale" with ratios
  std::vector<double> grid;               // parameter values, units of 2et/hbar
  std::map<std::string, double> fixed;    // other feeds held at these values
  std::map<std::string, double> ratios;   // ratio-locked: feed = ratio * parameter
  int refine_levels = 3;

  bool ratio_locked() const { return !ratios.empty(); }
};

struct SweepPoint {
  double parameter = 0.0;
  bool ok = false;
  std::string error;
  Eigen::VectorXd energies;         // indexed like SpectrumSweep::labels
  Eigen::MatrixXcd coefficients;    // columns indexed like labels
  Eigen::MatrixXcd overlap;         // pattern overlap matrix used as metric for tracking
  double min_tracking_overlap = 1.0;
};

struct Crossing {
  std::string first;
  std::string second;
  double parameter = 0.0;
  bool refined = false;
};

struct SpectrumSweep {
  SweepSpec spec;
  std::vector<std::string> labels;  // tracked state labels, table order
  std::vector<SweepPoint> points;   // grid order
  std::vector<Crossing> crossings;
  std::vector<std::string> events;  // weak tracking overlaps and relabels
};

/// Feed values (one per layout feed) for a sweep at parameter value p.
Eigen::VectorXd sweep_feeds(const QubitLayout& layout, const SweepSpec& spec, double p);

/// Minimum tracking overlap below which an event is recorded.
inline constexpr double kTrackingOverlap = 0.5;

/// Evaluates the grid in parallel, tracks labels by eigenvector overlap, then refines every
/// detected crossing by bisection. Failed points are kept, marked not ok.
SpectrumSweep sweep_feed(const QubitSystem& system, const SweepSpec& spec, int threads = 1);

/// Sign changes of tracked energy differences, located by linear interpolation.
std::vector<Crossing> detect_crossings(const SpectrumSweep& sweep);

/// Plain tracked curves without any system, for tests and post-processing.
SpectrumSweep make_sweep(const std::vector<std::string>& labels, const std::vector<double>& grid,
                         const std::vector<Eigen::VectorXd>& energies);

/// Ising expansion of level energies over s_k = +1 (U) / -1 (D):
/// E = c0 + sum_k h_k s_k + sum_{k<l} J_kl s_k s_l + ... Returns J_kl (symmetric, zero diagonal).
struct IsingCoefficients {
  double offset = 0.0;
  Eigen::VectorXd fields;
  Eigen::MatrixXd couplings;
};
IsingCoefficients ising_decomposition(const std::vector<std::string>& labels, const Eigen::VectorXd& energies);

void write_sweep_csv(std::ostream& os, const QubitLayout& layout, const SpectrumSweep& sweep);
void write_crossings(std::ostream& os, const SpectrumSweep& sweep);

}  // namespace svilc
