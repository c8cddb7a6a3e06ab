// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <compare>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "svilc/errors.hpp"

namespace svilc {

/// Integer lattice coordinate, 1-based in both directions.
struct Site {
  int x = 0;
  int y = 0;
  constexpr auto operator<=>(const Site&) const = default;
};

std::string to_string(const Site& s);

/// A point in lattice units; vortex centers live at plaquette centers (x + 1/2, y + 1/2).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct LatticeSpec {
  int nx = 0;
  int ny = 0;
  double lattice_constant_nm = 0.4;
  std::set<Site> barrier_sites;
  std::set<Site> hole_sites;

  bool contains(const Site& s) const { return s.x >= 1 && s.x <= nx && s.y >= 1 && s.y <= ny; }
  bool is_barrier(const Site& s) const { return barrier_sites.count(s) != 0; }

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Nearest-neighbor bond between active sites, stored with tail < head.
struct Bond {
  int tail = 0;
  int head = 0;
};

/// Active-site graph of a masked square lattice. Sites are indexed row-major
/// (y outer, x inner) over the non-barrier sites.
struct BondGraph {
  LatticeSpec spec;
  std::vector<Site> sites;
  std::vector<Bond> bonds;
  std::vector<std::vector<int>> adjacency;

  int n_sites() const { return static_cast<int>(sites.size()); }
  int n_bonds() const { return static_cast<int>(bonds.size()); }

  /// Site index or -1 for barrier / out-of-range coordinates.
  int index_of(const Site& s) const;
  int index_of(int x, int y) const { return index_of(Site{x, y}); }
  int require_index(const Site& s, const std::string& what) const;

  /// Bond index and orientation (+1 if a -> b runs tail -> head), or {-1, 0}.
  std::pair<int, int> find_bond(int a, int b) const;

  std::vector<int> site_lookup_;  // (y-1)*nx + (x-1) -> index or -1
  std::vector<std::vector<std::pair<int, int>>> incident_;  // per site: (bond, +1 head / -1 tail)
};

/// Oriented edge of a loop: bond index and +1 when traversed tail -> head.
struct LoopEdge {
  int bond = 0;
  int sign = 1;
};

/// Closed lattice walk. `sites` is cyclic (the closing step back to sites[0] is implicit).
struct Loop {
  std::vector<int> sites;
  std::vector<LoopEdge> edges;
  Point centroid;
  double area = 0.0;
};

struct LoopBasis {
  std::vector<Loop> loops;
  int n_loops() const { return static_cast<int>(loops.size()); }
};

BondGraph build_lattice(const LatticeSpec& spec);

/// Bounded faces of the planar embedding. For a connected graph these form a cycle
/// basis of size |bonds| - |sites| + 1; faces are unit plaquettes wherever all four
/// corners are present and merge around missing sites.
LoopBasis plaquette_loop_basis(const BondGraph& graph);

/// Index of the basis loop whose face contains `p`, or -1.
int loop_containing(const LoopBasis& basis, const BondGraph& graph, const Point& p);

/// Wrap into (-pi, pi]; exact ties at -pi map to +pi.
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar r = std::remainder(a, two_pi);
  if (r <= -std::numbers::pi_v<Scalar>) r += two_pi;
  return r;
}

/// Winding of a per-site angle field around a cyclic site sequence. A trailing copy of the
/// first site is accepted and ignored.
int winding_number(std::span<const double> angles, std::span<const int> loop);

/// Sum of a bond one-form (tail -> head orientation) around a loop.
double circulation(const Loop& loop, std::span<const double> one_form);

/// Angle with the antiferromagnetic background pi (x + y) removed. Windings of the spin
/// azimuth are evaluated on this field, where neighboring differences are small.
std::vector<double> staggered_angles(const BondGraph& graph, std::span<const double> azimuth);

/// The eight sites surrounding the plaquette centered at `center`, counterclockwise.
std::vector<int> octagon_ring(const BondGraph& graph, const Point& center);

/// Connected components (site index -> component id).
std::vector<int> connected_components(const BondGraph& graph, int* n_components = nullptr);

}  // namespace svilc
