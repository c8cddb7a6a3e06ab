// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#include "svilc/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

namespace svilc {

namespace {

constexpr std::array<int, 4> kDx = {1, 0, -1, 0};  // E N W S (counterclockwise)
constexpr std::array<int, 4> kDy = {0, 1, 0, -1};

int direction_of(const Site& from, const Site& to) {
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  for (int d = 0; d < 4; ++d) {
    if (kDx[d] == dx && kDy[d] == dy) return d;
  }
  return -1;
}

}  // namespace

std::string to_string(const Site& s) {
  return "(" + std::to_string(s.x) + "," + std::to_string(s.y) + ")";
}

void LatticeSpec::validate() const {
  if (nx <= 0) throw ValidationError("lattice.nx must be positive, got " + std::to_string(nx));
  if (ny <= 0) throw ValidationError("lattice.ny must be positive, got " + std::to_string(ny));
  if (!(lattice_constant_nm > 0.0)) throw ValidationError("lattice.lattice_constant must be positive");
  for (const auto& s : barrier_sites) {
    if (!contains(s)) throw ValidationError("lattice.barrier_sites: " + to_string(s) + " outside lattice");
  }
  for (const auto& s : hole_sites) {
    if (!contains(s)) throw ValidationError("lattice.hole_sites: " + to_string(s) + " outside lattice");
    if (is_barrier(s)) throw ValidationError("lattice.hole_sites: " + to_string(s) + " is a barrier site");
  }
}

int BondGraph::index_of(const Site& s) const {
  if (!spec.contains(s)) return -1;
  return site_lookup_[static_cast<std::size_t>((s.y - 1) * spec.nx + (s.x - 1))];
}

int BondGraph::require_index(const Site& s, const std::string& what) const {
  if (!spec.contains(s)) throw ValidationError(what + ": site " + to_string(s) + " outside lattice");
  const int i = index_of(s);
  if (i < 0) throw ValidationError(what + ": site " + to_string(s) + " is a barrier site");
  return i;
}

std::pair<int, int> BondGraph::find_bond(int a, int b) const {
  for (const auto& [bond, end] : incident_[static_cast<std::size_t>(a)]) {
    const Bond& bd = bonds[static_cast<std::size_t>(bond)];
    if (bd.tail == a && bd.head == b) return {bond, +1};
    if (bd.head == a && bd.tail == b) return {bond, -1};
  }
  return {-1, 0};
}

BondGraph build_lattice(const LatticeSpec& spec) {
  spec.validate();
  BondGraph g;
  g.spec = spec;
  g.site_lookup_.assign(static_cast<std::size_t>(spec.nx * spec.ny), -1);
  for (int y = 1; y <= spec.ny; ++y) {
    for (int x = 1; x <= spec.nx; ++x) {
      const Site s{x, y};
      if (spec.is_barrier(s)) continue;
      g.site_lookup_[static_cast<std::size_t>((y - 1) * spec.nx + (x - 1))] = g.n_sites();
      g.sites.push_back(s);
    }
  }
  if (g.sites.empty()) throw ValidationError("lattice: barrier mask covers every site");

  g.adjacency.resize(g.sites.size());
  g.incident_.resize(g.sites.size());
  for (int i = 0; i < g.n_sites(); ++i) {
    const Site s = g.sites[static_cast<std::size_t>(i)];
    // East and north neighbors have larger row-major index, so tail < head holds.
    for (const Site n : {Site{s.x + 1, s.y}, Site{s.x, s.y + 1}}) {
      const int j = g.index_of(n);
      if (j < 0) continue;
      const int b = g.n_bonds();
      g.bonds.push_back({i, j});
      g.incident_[static_cast<std::size_t>(i)].push_back({b, -1});
      g.incident_[static_cast<std::size_t>(j)].push_back({b, +1});
    }
  }
  for (const Bond& b : g.bonds) {
    g.adjacency[static_cast<std::size_t>(b.tail)].push_back(b.head);
    g.adjacency[static_cast<std::size_t>(b.head)].push_back(b.tail);
  }
  for (auto& nb : g.adjacency) std::sort(nb.begin(), nb.end());

  int n_comp = 0;
  connected_components(g, &n_comp);
  if (n_comp != 1) {
    throw ValidationError("lattice: active sites form " + std::to_string(n_comp) +
                          " disconnected regions; barrier columns must leave a Cu bridge");
  }
  return g;
}

std::vector<int> connected_components(const BondGraph& graph, int* n_components) {
  std::vector<int> comp(graph.sites.size(), -1);
  int count = 0;
  for (int start = 0; start < graph.n_sites(); ++start) {
    if (comp[static_cast<std::size_t>(start)] >= 0) continue;
    std::queue<int> q;
    q.push(start);
    comp[static_cast<std::size_t>(start)] = count;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : graph.adjacency[static_cast<std::size_t>(u)]) {
        if (comp[static_cast<std::size_t>(v)] < 0) {
          comp[static_cast<std::size_t>(v)] = count;
          q.push(v);
        }
      }
    }
    ++count;
  }
  if (n_components) *n_components = count;
  return comp;
}

LoopBasis plaquette_loop_basis(const BondGraph& graph) {
  const int n_half = 2 * graph.n_bonds();
  // Half-edge h = 2*bond + (0: tail->head, 1: head->tail).
  auto from = [&](int h) {
    const Bond& b = graph.bonds[static_cast<std::size_t>(h / 2)];
    return (h % 2 == 0) ? b.tail : b.head;
  };
  auto to = [&](int h) {
    const Bond& b = graph.bonds[static_cast<std::size_t>(h / 2)];
    return (h % 2 == 0) ? b.head : b.tail;
  };
  auto half_edge = [&](int u, int v) {
    const auto [bond, sign] = graph.find_bond(u, v);
    return 2 * bond + (sign > 0 ? 0 : 1);
  };
  // Successor keeps the face on the left: at v, take the first direction clockwise
  // from the way back to u.
  auto next = [&](int h) {
    const int u = from(h);
    const int v = to(h);
    const Site sv = graph.sites[static_cast<std::size_t>(v)];
    const int back = direction_of(sv, graph.sites[static_cast<std::size_t>(u)]);
    for (int k = 1; k <= 4; ++k) {
      const int d = (back + 4 - k) % 4;
      const int w = graph.index_of(Site{sv.x + kDx[d], sv.y + kDy[d]});
      if (w >= 0) return half_edge(v, w);
    }
    return h ^ 1;  // unreachable for connected graphs
  };

  std::vector<int> visited(static_cast<std::size_t>(n_half), 0);
  std::vector<Loop> faces;
  for (int h0 = 0; h0 < n_half; ++h0) {
    if (visited[static_cast<std::size_t>(h0)]) continue;
    Loop face;
    double twice_area = 0.0, cx = 0.0, cy = 0.0;
    int h = h0;
    do {
      visited[static_cast<std::size_t>(h)] = 1;
      const int u = from(h);
      const int v = to(h);
      face.sites.push_back(u);
      face.edges.push_back({h / 2, (h % 2 == 0) ? +1 : -1});
      const Site a = graph.sites[static_cast<std::size_t>(u)];
      const Site b = graph.sites[static_cast<std::size_t>(v)];
      const double cross = double(a.x) * b.y - double(b.x) * a.y;
      twice_area += cross;
      cx += (a.x + b.x) * cross;
      cy += (a.y + b.y) * cross;
      h = next(h);
    } while (h != h0);
    face.area = 0.5 * twice_area;
    if (std::abs(twice_area) > 0.0) {
      face.centroid = {cx / (3.0 * twice_area), cy / (3.0 * twice_area)};
    } else {
      face.centroid = {double(graph.sites[static_cast<std::size_t>(face.sites[0])].x),
                       double(graph.sites[static_cast<std::size_t>(face.sites[0])].y)};
    }
    faces.push_back(std::move(face));
  }

  // Exactly one face (the unbounded one) is traversed clockwise.
  std::size_t outer = 0;
  for (std::size_t f = 1; f < faces.size(); ++f) {
    if (faces[f].area < faces[outer].area) outer = f;
  }
  LoopBasis basis;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (f != outer) basis.loops.push_back(std::move(faces[f]));
  }
  // Deterministic order: by centroid row-major.
  std::stable_sort(basis.loops.begin(), basis.loops.end(), [](const Loop& a, const Loop& b) {
    if (a.centroid.y != b.centroid.y) return a.centroid.y < b.centroid.y;
    return a.centroid.x < b.centroid.x;
  });
  return basis;
}

int loop_containing(const LoopBasis& basis, const BondGraph& graph, const Point& p) {
  for (int l = 0; l < basis.n_loops(); ++l) {
    const Loop& loop = basis.loops[static_cast<std::size_t>(l)];
    bool inside = false;
    const std::size_t n = loop.sites.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Site a = graph.sites[static_cast<std::size_t>(loop.sites[i])];
      const Site b = graph.sites[static_cast<std::size_t>(loop.sites[(i + 1) % n])];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double xc = a.x + (p.y - a.y) * double(b.x - a.x) / double(b.y - a.y);
        if (p.x < xc) inside = !inside;
      }
    }
    if (inside) return l;
  }
  return -1;
}

int winding_number(std::span<const double> angles, std::span<const int> loop) {
  std::size_t n = loop.size();
  if (n >= 2 && loop.front() == loop.back()) --n;
  if (n < 3) throw ValidationError("winding_number: loop needs at least three sites");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<std::size_t>(loop[i]);
    const auto b = static_cast<std::size_t>(loop[(i + 1) % n]);
    if (a >= angles.size() || b >= angles.size()) throw ValidationError("winding_number: site index out of range");
    total += wrap_angle(angles[b] - angles[a]);
  }
  const double w = total / (2.0 * std::numbers::pi);
  const double r = std::round(w);
  if (std::abs(w - r) > 1e-9) throw ValidationError("winding_number: loop is not closed");
  return static_cast<int>(r);
}

double circulation(const Loop& loop, std::span<const double> one_form) {
  double s = 0.0;
  for (const auto& e : loop.edges) s += e.sign * one_form[static_cast<std::size_t>(e.bond)];
  return s;
}

std::vector<double> staggered_angles(const BondGraph& graph, std::span<const double> azimuth) {
  std::vector<double> out(azimuth.size());
  for (std::size_t i = 0; i < azimuth.size(); ++i) {
    const Site s = graph.sites[i];
    out[i] = wrap_angle(azimuth[i] - std::numbers::pi * (s.x + s.y));
  }
  return out;
}

std::vector<int> octagon_ring(const BondGraph& graph, const Point& center) {
  const int x0 = static_cast<int>(std::floor(center.x));
  const int y0 = static_cast<int>(std::floor(center.y));
  const std::array<Site, 8> ring = {Site{x0, y0 - 1},     Site{x0 + 1, y0 - 1}, Site{x0 + 2, y0},
                                    Site{x0 + 2, y0 + 1}, Site{x0 + 1, y0 + 2}, Site{x0, y0 + 2},
                                    Site{x0 - 1, y0 + 1}, Site{x0 - 1, y0}};
  std::vector<int> out;
  out.reserve(8);
  for (const Site& s : ring) out.push_back(graph.require_index(s, "vortex ring"));
  return out;
}

}  // namespace svilc
