// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "svilc/lattice.hpp"

using namespace svilc;

namespace {

BondGraph grid(int nx, int ny, std::set<Site> barriers = {}) {
  LatticeSpec s;
  s.nx = nx;
  s.ny = ny;
  s.barrier_sites = std::move(barriers);
  return build_lattice(s);
}

// Sites of the lattice boundary, counterclockwise.
std::vector<int> boundary_ring(const BondGraph& g) {
  const int nx = g.spec.nx, ny = g.spec.ny;
  std::vector<int> ring;
  for (int x = 1; x <= nx; ++x) ring.push_back(g.index_of(x, 1));
  for (int y = 2; y <= ny; ++y) ring.push_back(g.index_of(nx, y));
  for (int x = nx - 1; x >= 1; --x) ring.push_back(g.index_of(x, ny));
  for (int y = ny - 1; y >= 2; --y) ring.push_back(g.index_of(1, y));
  return ring;
}

}  // namespace

TEST_CASE("grid sizes") {
  const BondGraph g8 = grid(8, 8);
  CHECK(g8.n_sites() == 64);
  CHECK(g8.n_bonds() == 112);
  const BondGraph g2 = grid(2, 2);
  CHECK(g2.n_sites() == 4);
  CHECK(g2.n_bonds() == 4);
  CHECK(plaquette_loop_basis(g2).n_loops() == 1);
  CHECK(plaquette_loop_basis(g2).loops[0].sites.size() == 4);
  CHECK(plaquette_loop_basis(g8).n_loops() == 49);
}

TEST_CASE("bonds are stored tail < head and adjacency is symmetric") {
  const BondGraph g = grid(5, 4, {{3, 2}});
  for (const Bond& b : g.bonds) CHECK(b.tail < b.head);
  for (int a = 0; a < g.n_sites(); ++a) {
    for (int b : g.adjacency[static_cast<std::size_t>(a)]) {
      const auto [bond, sign] = g.find_bond(b, a);
      CHECK(bond >= 0);
      CHECK(std::abs(sign) == 1);
    }
  }
}

TEST_CASE("an interior barrier merges four plaquettes into one 8-site face") {
  const BondGraph g = grid(5, 5, {{3, 3}});
  const LoopBasis basis = plaquette_loop_basis(g);
  CHECK(basis.n_loops() == g.n_bonds() - g.n_sites() + 1);
  CHECK(basis.n_loops() == 16 - 4 + 1);
  int big = 0;
  for (const Loop& l : basis.loops) {
    if (l.sites.size() == 8) {
      ++big;
      CHECK(l.centroid.x == doctest::Approx(3.0));
      CHECK(l.centroid.y == doctest::Approx(3.0));
    }
  }
  CHECK(big == 1);
}

TEST_CASE("barrier walls with and without bridging rows") {
  LatticeSpec walled;
  walled.nx = 112;
  walled.ny = 14;
  for (int x : {30, 32, 82, 84}) {
    for (int y = 1; y <= 14; ++y) walled.barrier_sites.insert({x, y});
  }
  CHECK_THROWS_AS(build_lattice(walled), ValidationError);

  LatticeSpec bridged = walled;
  bridged.barrier_sites.clear();
  for (int x : {30, 32, 82, 84}) {
    for (int y = 2; y <= 13; ++y) bridged.barrier_sites.insert({x, y});
  }
  const BondGraph g = build_lattice(bridged);
  int n = 0;
  connected_components(g, &n);
  CHECK(n == 1);
}

TEST_CASE("lattice validation names the field") {
  LatticeSpec s;
  s.nx = 4;
  s.ny = 4;
  s.barrier_sites.insert({0, 0});
  try {
    s.validate();
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("lattice.barrier_sites") != std::string::npos);
  }
}

TEST_CASE("loop basis rank over random connected masks") {
  std::mt19937 rng(7);
  int tested = 0;
  for (int trial = 0; trial < 200 && tested < 60; ++trial) {
    const int nx = 3 + static_cast<int>(rng() % 6), ny = 3 + static_cast<int>(rng() % 6);
    std::set<Site> bar;
    const int k = static_cast<int>(rng() % 5);
    for (int i = 0; i < k; ++i) bar.insert({1 + static_cast<int>(rng() % nx), 1 + static_cast<int>(rng() % ny)});
    LatticeSpec s;
    s.nx = nx;
    s.ny = ny;
    s.barrier_sites = bar;
    BondGraph g;
    try {
      g = build_lattice(s);
    } catch (const ValidationError&) {
      continue;  // disconnected mask
    }
    const LoopBasis basis = plaquette_loop_basis(g);
    CHECK(basis.n_loops() == g.n_bonds() - g.n_sites() + 1);
    // Every bond lies on at most two faces.
    std::vector<int> uses(static_cast<std::size_t>(g.n_bonds()), 0);
    for (const Loop& l : basis.loops) {
      for (const LoopEdge& e : l.edges) ++uses[static_cast<std::size_t>(e.bond)];
    }
    for (int u : uses) CHECK(u <= 2);
    ++tested;
  }
  CHECK(tested >= 30);
}

TEST_CASE("winding number basics") {
  const BondGraph g = grid(6, 6);
  const Point c{3.5, 3.5};
  const std::vector<int> ring = octagon_ring(g, c);
  REQUIRE(ring.size() == 8);
  std::vector<double> theta(static_cast<std::size_t>(g.n_sites()));
  std::vector<double> constant(static_cast<std::size_t>(g.n_sites()), 0.7);
  for (int j = 0; j < g.n_sites(); ++j) {
    const Site s = g.sites[static_cast<std::size_t>(j)];
    theta[static_cast<std::size_t>(j)] = std::atan2(s.y - c.y, s.x - c.x);
  }
  CHECK(winding_number(constant, ring) == 0);
  CHECK(winding_number(theta, ring) == 1);
  std::vector<int> reversed(ring.rbegin(), ring.rend());
  CHECK(winding_number(theta, reversed) == -1);
  std::vector<int> closed = ring;
  closed.push_back(ring.front());
  CHECK(winding_number(theta, closed) == 1);
}

TEST_CASE("plaquette windings add up to the boundary winding") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  const BondGraph g = grid(7, 6);
  const LoopBasis basis = plaquette_loop_basis(g);
  const std::vector<int> outer = boundary_ring(g);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(g.n_sites()));
    for (double& v : a) v = u(rng);
    int sum = 0;
    for (const Loop& l : basis.loops) sum += winding_number(a, l.sites);
    CHECK(sum == winding_number(a, outer));
  }
}

TEST_CASE("winding is additive under loop concatenation") {
  // Two adjacent plaquettes sharing one bond form a 6-site loop.
  const BondGraph g = grid(3, 2);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  const std::vector<int> left = {g.index_of(1, 1), g.index_of(2, 1), g.index_of(2, 2), g.index_of(1, 2)};
  const std::vector<int> right = {g.index_of(2, 1), g.index_of(3, 1), g.index_of(3, 2), g.index_of(2, 2)};
  const std::vector<int> both = {g.index_of(1, 1), g.index_of(2, 1), g.index_of(3, 1),
                                 g.index_of(3, 2), g.index_of(2, 2), g.index_of(1, 2)};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(g.n_sites()));
    for (double& v : a) v = u(rng);
    CHECK(winding_number(a, left) + winding_number(a, right) == winding_number(a, both));
  }
}

TEST_CASE("angle wrapping resolves ties to +pi") {
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(3 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
}

TEST_CASE("circulation of a gradient vanishes") {
  const BondGraph g = grid(4, 4);
  const LoopBasis basis = plaquette_loop_basis(g);
  std::vector<double> phi(static_cast<std::size_t>(g.n_sites()));
  for (int j = 0; j < g.n_sites(); ++j) phi[static_cast<std::size_t>(j)] = 0.3 * j * j - j;
  std::vector<double> form(static_cast<std::size_t>(g.n_bonds()));
  for (int b = 0; b < g.n_bonds(); ++b) {
    const Bond& bd = g.bonds[static_cast<std::size_t>(b)];
    form[static_cast<std::size_t>(b)] = phi[static_cast<std::size_t>(bd.head)] - phi[static_cast<std::size_t>(bd.tail)];
  }
  for (const Loop& l : basis.loops) CHECK(std::abs(circulation(l, form)) < 1e-12);
}
