// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#include "svilc/qubit_system.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "svilc/errors.hpp"

namespace svilc {

namespace {

FeedSpec make_feed(const std::string& name, std::vector<Site> sources, std::vector<Site> drains) {
  FeedSpec f;
  f.name = name;
  for (const Site& s : sources) f.sources.push_back({s, 1.0});
  for (const Site& s : drains) f.drains.push_back({s, 1.0});
  return f;
}

ScfOptions preset_scf() {
  ScfOptions o;
  o.tol = 1e-9;
  o.max_iter = 300;
  o.mixing = 0.5;
  o.anderson_depth = 6;
  o.pin_azimuth = true;
  return o;
}

std::string site_field(const std::string& prefix, std::size_t i) {
  return prefix + "[" + std::to_string(i) + "]";
}

}  // namespace

Point QubitLayout::svq_center(std::size_t k) const {
  const Site c = dcq_centers.at(k);
  return {c.x + 0.5, c.y + 0.5};
}

std::vector<Vortex> QubitLayout::vortices() const {
  std::vector<Vortex> v;
  const double h = svq_half_spacing;
  for (std::size_t k = 0; k < dcq_centers.size(); ++k) {
    const Point c = svq_center(k);
    v.push_back({{c.x - h, c.y - h}, +1});
    v.push_back({{c.x + h, c.y - h}, -1});
    v.push_back({{c.x - h, c.y + h}, -1});
    v.push_back({{c.x + h, c.y + h}, +1});
  }
  return v;
}

int QubitLayout::feed_index(const std::string& feed_name) const {
  for (std::size_t i = 0; i < feeds.size(); ++i) {
    if (feeds[i].name == feed_name) return static_cast<int>(i);
  }
  return -1;
}

void QubitLayout::validate() const {
  lattice.validate();
  if (dcq_centers.empty()) throw ValidationError("dcqs: at least one DCQ is required");
  if (!(svq_half_spacing > 0.0) || std::abs(svq_half_spacing - std::round(svq_half_spacing)) > 1e-12) {
    throw ValidationError("dcqs.half_spacing must be a positive integer so vortices sit on plaquette centers");
  }
  if (holes_per_svq < 0) throw ValidationError("physics.holes_per_svq must be non-negative");
  const auto active = [&](const Site& s) {
    return lattice.contains(s) && !lattice.is_barrier(s) && lattice.hole_sites.count(s) == 0;
  };
  for (std::size_t k = 0; k < dcq_centers.size(); ++k) {
    if (!lattice.contains(dcq_centers[k])) {
      throw ValidationError(site_field("dcqs", k) + ".center: " + to_string(dcq_centers[k]) + " outside lattice");
    }
  }
  const auto vs = vortices();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const int x0 = static_cast<int>(std::floor(vs[i].center.x));
    const int y0 = static_cast<int>(std::floor(vs[i].center.y));
    for (const Site s : {Site{x0, y0}, Site{x0 + 1, y0}, Site{x0, y0 + 1}, Site{x0 + 1, y0 + 1}}) {
      if (!active(s)) {
        throw ValidationError(site_field("dcqs", i / 4) + ": vortex plaquette corner " + to_string(s) +
                              " is outside the lattice or on a barrier");
      }
    }
  }
  std::set<std::string> names;
  for (std::size_t f = 0; f < feeds.size(); ++f) {
    const FeedSpec& feed = feeds[f];
    const std::string field = "feeds[" + std::to_string(f) + "]";
    if (feed.name.empty()) throw ValidationError(field + ".name must not be empty");
    if (!names.insert(feed.name).second) throw ValidationError(field + ".name: duplicate feed " + feed.name);
    std::set<Site> used;
    const auto check = [&](const std::vector<FeedPoint>& pts, const std::string& role) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Site s = pts[i].site;
        const std::string where = field + "." + role + "[" + std::to_string(i) + "]";
        if (!lattice.contains(s)) throw ValidationError(where + ": site " + to_string(s) + " outside lattice");
        if (lattice.is_barrier(s)) throw ValidationError(where + ": site " + to_string(s) + " is a barrier site");
        if (!active(s)) throw ValidationError(where + ": site " + to_string(s) + " is not an active site");
        if (!used.insert(s).second) throw ValidationError(where + ": site " + to_string(s) + " used twice");
      }
    };
    check(feed.sources, "sources");
    check(feed.drains, "drains");
    if (feed.sources.empty()) throw ValidationError(field + ".sources must not be empty");
    double in = 0.0, out = 0.0;
    for (const auto& p : feed.sources) in += p.magnitude;
    for (const auto& p : feed.drains) out += p.magnitude;
    if (std::abs(in - out) > 1e-12 * std::max(1.0, in)) {
      throw ValidationError(field + ": sources total " + std::to_string(in) + " but drains total " +
                            std::to_string(out));
    }
  }
}

std::vector<std::string> preset_names() { return {"paper-3dcq", "desk-1svq"}; }

QubitLayout assemble_layout(const std::string& preset) {
  QubitLayout l;
  l.name = preset;
  l.scf = preset_scf();
  if (preset == "paper-3dcq") {
    l.lattice.nx = 113;
    l.lattice.ny = 15;
    for (int x : {30, 32, 82, 84}) {
      for (int y = 2; y <= 14; ++y) l.lattice.barrier_sites.insert({x, y});
    }
    l.dcq_centers = {{4, 4}, {57, 8}, {110, 12}};
    l.feeds = {
        make_feed("J1", {{2, 1}, {6, 15}}, {{6, 1}, {2, 15}}),
        make_feed("J2", {{55, 1}, {59, 15}}, {{59, 1}, {55, 15}}),
        make_feed("J3", {{108, 1}, {112, 15}}, {{112, 1}, {108, 15}}),
        make_feed("J4", {{7, 1}, {31, 15}}, {{31, 1}, {37, 15}}),
        make_feed("J5", {{83, 1}, {105, 15}}, {{71, 1}, {83, 15}}),
    };
    l.field = FieldPolynomial{4.005, 540.0, 1.575, 135.0, 0.0};
  } else if (preset == "desk-1svq") {
    l.lattice.nx = 8;
    l.lattice.ny = 8;
    l.dcq_centers = {{4, 4}};
    l.feeds = {make_feed("J1", {{4, 1}, {5, 1}}, {{4, 8}, {5, 8}})};
  } else {
    throw ValidationError("preset: unknown preset '" + preset + "' (expected paper-3dcq or desk-1svq)");
  }
  l.validate();
  return l;
}

void assign_filling(QubitLayout& layout, const BondGraph& graph) {
  const int holes = layout.holes_per_svq * static_cast<int>(layout.dcq_centers.size());
  layout.params.n_electrons = graph.n_sites() - holes;
  if (layout.params.n_electrons <= 0) throw ValidationError("physics.holes_per_svq leaves no electrons");
}

std::vector<QubitLabel> table_order(int n_qubits) {
  if (n_qubits <= 0) return {};
  std::vector<QubitLabel> out;
  const int fast = n_qubits - 1;
  for (int last = 0; last < 2; ++last) {
    for (int code = 0; code < (1 << fast); ++code) {
      QubitLabel l;
      for (int q = 0; q < fast; ++q) l += (code >> q) & 1 ? 'U' : 'D';
      l += last == 0 ? 'U' : 'D';
      out.push_back(l);
    }
  }
  return out;
}

MeanFieldSolution solve_layout_meanfield(const QubitLayout& layout, const BondGraph& graph) {
  const SpinField seed = build_svq_texture(graph, layout.vortices(), layout.params.n_electrons);
  MeanFieldSolution mf = scf_solve(layout.params, seed, graph, layout.scf);
  // Rebuild the orbitals from the stored fields, exactly as a checkpoint load does, so a
  // fresh solve and a cached one feed identical orbitals downstream.
  mf.orbitals = fill_orbitals(mf.params, mf.fields, graph);
  return mf;
}

QubitSystem::QubitSystem(QubitLayout layout, MeanFieldSolution meanfield)
    : layout_(std::move(layout)),
      graph_(build_lattice(layout_.lattice)),
      basis_(plaquette_loop_basis(graph_)),
      mf_(std::move(meanfield)),
      ctx_(graph_, basis_, mf_) {
  layout_.validate();
  for (std::size_t f = 0; f < layout_.feeds.size(); ++f) {
    layout_.feeds[f].validate(graph_, "feeds[" + std::to_string(f) + "]");
  }
  const auto vs = layout_.vortices();
  for (std::size_t k = 0; k < layout_.dcq_centers.size(); ++k) {
    std::array<int, 4> loops{};
    for (int i = 0; i < 4; ++i) {
      loops[static_cast<std::size_t>(i)] = loop_containing(basis_, graph_, vs[4 * k + static_cast<std::size_t>(i)].center);
      if (loops[static_cast<std::size_t>(i)] < 0) {
        throw ValidationError("dcqs[" + std::to_string(k) + "]: vortex is not inside any lattice loop");
      }
    }
    dcq_loops_.push_back(loops);
  }
}

WindingPattern QubitSystem::dcq_pattern(const QubitLabel& label) const {
  if (static_cast<int>(label.size()) != n_qubits()) {
    throw ValidationError("qubit label '" + label + "' needs one letter per DCQ");
  }
  WindingPattern p;
  p.wbar.assign(static_cast<std::size_t>(basis_.n_loops()), 0);
  p.label = label;
  for (std::size_t k = 0; k < label.size(); ++k) {
    if (label[k] != 'U' && label[k] != 'D') throw ValidationError("qubit label '" + label + "' must use U or D");
    // U: counterclockwise around the left pair, clockwise around the right pair, so the
    // currents between the two columns of vortices run upward.
    const int left = label[k] == 'U' ? 1 : -1;
    const auto& loops = dcq_loops_[k];
    p.wbar[static_cast<std::size_t>(loops[0])] = left;
    p.wbar[static_cast<std::size_t>(loops[1])] = -left;
    p.wbar[static_cast<std::size_t>(loops[2])] = left;
    p.wbar[static_cast<std::size_t>(loops[3])] = -left;
  }
  if (!satisfies_parity(p, ctx_.texture_windings())) {
    throw ValidationError("DCQ pattern " + label +
                          " breaks the parity of the converged spin texture (vortices moved during the SCF?)");
  }
  return p;
}

std::vector<WindingPattern> QubitSystem::dcq_patterns() const {
  std::vector<WindingPattern> out;
  for (const auto& l : table_order(n_qubits())) out.push_back(dcq_pattern(l));
  return out;
}

Eigen::VectorXd QubitSystem::injection(const Eigen::VectorXd& feed_values) const {
  if (feed_values.size() != static_cast<Eigen::Index>(layout_.feeds.size())) {
    throw ValidationError("feed values: expected " + std::to_string(layout_.feeds.size()) + " entries");
  }
  Eigen::VectorXd inj = Eigen::VectorXd::Zero(graph_.n_sites());
  for (std::size_t f = 0; f < layout_.feeds.size(); ++f) {
    if (feed_values[static_cast<Eigen::Index>(f)] != 0.0) {
      inj += layout_.feeds[f].injection(graph_, feed_values[static_cast<Eigen::Index>(f)]);
    }
  }
  return inj;
}

StateLabel QubitSystem::label_state(const Eigen::VectorXd& bond_currents) const {
  StateLabel out;
  const double reach = layout_.svq_half_spacing + 1.0;
  for (std::size_t k = 0; k < layout_.dcq_centers.size(); ++k) {
    const Point c = layout_.svq_center(k);
    double up = 0.0;
    for (int b = 0; b < graph_.n_bonds(); ++b) {
      const Bond& bd = graph_.bonds[static_cast<std::size_t>(b)];
      const Site s = graph_.sites[static_cast<std::size_t>(bd.tail)];
      const Site e = graph_.sites[static_cast<std::size_t>(bd.head)];
      if (s.x != e.x || std::abs(s.x - c.x) > 0.5) continue;
      if (std::abs(0.5 * (s.y + e.y) - c.y) > reach) continue;
      up += (e.y > s.y ? 1.0 : -1.0) * bond_currents[b];
    }
    out.column_currents.push_back(up);
    if (std::abs(up) < kAmbiguousCurrent) out.ambiguous = true;
    out.label += up > 0.0 ? 'U' : 'D';
  }
  return out;
}

SpectrumPoint compute_spectrum(const QubitSystem& system, const Eigen::VectorXd& feed_values, int threads) {
  SpectrumPoint sp;
  sp.feed_values = feed_values;
  const Eigen::VectorXd inj = system.injection(feed_values);
  const auto patterns = system.dcq_patterns();
  sp.states.resize(patterns.size());
  parallel_for(patterns.size(), threads, [&](std::size_t i) {
    sp.states[i] = solve_chi(system.context(), patterns[i], inj, system.layout().chi);
  });
  std::vector<std::string> labels;
  for (const auto& st : sp.states) {
    sp.state_labels.push_back(system.label_state(st.bond_currents));
    labels.push_back(st.winding.label);
  }
  sp.coupling = coupling_matrix(system.context(), sp.states, labels, system.layout().field, true, threads);
  sp.levels = diagonalize_basis(sp.coupling);
  return sp;
}

Eigen::VectorXd sweep_feeds(const QubitLayout& layout, const SweepSpec& spec, double p) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.feeds.size()));
  const auto set = [&](const std::string& name, double value, const std::string& field) {
    const int i = layout.feed_index(name);
    if (i < 0) throw ValidationError(field + ": sweep '" + spec.name + "' references unknown feed " + name);
    v[i] = value;
  };
  for (const auto& [name, value] : spec.fixed) set(name, value, "sweeps.fixed");
  if (spec.ratio_locked()) {
    for (const auto& [name, ratio] : spec.ratios) set(name, ratio * p, "sweeps.ratios");
  } else {
    set(spec.parameter, p, "sweeps.parameter");
  }
  return v;
}

namespace {

// Assignment maximizing the summed overlaps: exhaustive for small n, greedy beyond.
std::vector<int> best_assignment(const Eigen::MatrixXd& w) {
  const auto n = static_cast<int>(w.rows());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  if (n <= 8) {
    std::vector<int> best = perm;
    double best_score = -1.0;
    do {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w(i, perm[static_cast<std::size_t>(i)]);
      if (s > best_score + 1e-12) {
        best_score = s;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    int arg = -1;
    for (int j = 0; j < n; ++j) {
      if (!taken[static_cast<std::size_t>(j)] && (arg < 0 || w(i, j) > w(i, arg))) arg = j;
    }
    perm[static_cast<std::size_t>(i)] = arg;
    taken[static_cast<std::size_t>(arg)] = 1;
  }
  return perm;
}

// Reorders the levels of `sp` to follow `reference` (columns in the pattern basis).
void track(const SpectrumPoint& sp, const Eigen::MatrixXcd& reference, SweepPoint& out) {
  const Eigen::MatrixXcd& c = sp.levels.coefficients;
  const Eigen::MatrixXcd& s = sp.coupling.S;
  const Eigen::MatrixXd w = (reference.adjoint() * s * c).cwiseAbs();
  const auto perm = best_assignment(w);
  const auto n = c.cols();
  out.energies.resize(n);
  out.coefficients.resize(c.rows(), n);
  out.min_tracking_overlap = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int j = perm[static_cast<std::size_t>(i)];
    out.energies[i] = sp.levels.energies[j];
    out.coefficients.col(i) = c.col(j);
    out.min_tracking_overlap = std::min(out.min_tracking_overlap, w(i, j));
  }
  out.overlap = s;
  out.ok = true;
}

Eigen::MatrixXcd unit_reference(const SpectrumPoint& sp) {
  // Pattern basis vectors normalized in the overlap metric.
  const auto n = sp.coupling.S.rows();
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) r(i, i) /= std::sqrt(sp.coupling.S(i, i).real());
  return r;
}

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

SpectrumSweep sweep_feed(const QubitSystem& system, const SweepSpec& spec, int threads) {
  if (spec.grid.empty()) throw ValidationError("sweeps." + spec.name + ".grid must not be empty");
  if (!std::is_sorted(spec.grid.begin(), spec.grid.end())) {
    throw ValidationError("sweeps." + spec.name + ".grid must be ascending");
  }
  if (spec.refine_levels < 0) throw ValidationError("sweeps." + spec.name + ".refine_levels must be non-negative");
  sweep_feeds(system.layout(), spec, 0.0);  // validates feed references up front

  SpectrumSweep sw;
  sw.spec = spec;
  sw.labels = table_order(system.n_qubits());
  std::vector<std::optional<SpectrumPoint>> raw(spec.grid.size());
  std::vector<std::string> errors(spec.grid.size());
  parallel_for(spec.grid.size(), threads, [&](std::size_t i) {
    try {
      raw[i] = compute_spectrum(system, sweep_feeds(system.layout(), spec, spec.grid[i]), 1);
    } catch (const SolverError& e) {
      errors[i] = e.what();
    }
  });

  Eigen::MatrixXcd reference;
  sw.points.resize(spec.grid.size());
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    SweepPoint& pt = sw.points[i];
    pt.parameter = spec.grid[i];
    if (!raw[i]) {
      pt.error = errors[i];
      sw.events.push_back("point " + format_value(pt.parameter) + " missing: " + errors[i]);
      continue;
    }
    if (reference.size() == 0) reference = unit_reference(*raw[i]);
    track(*raw[i], reference, pt);
    if (pt.min_tracking_overlap < kTrackingOverlap) {
      sw.events.push_back("point " + format_value(pt.parameter) + ": weak tracking overlap " +
                          format_value(pt.min_tracking_overlap));
    }
    reference = pt.coefficients;
  }

  std::vector<Crossing> found = detect_crossings(sw);
  const auto index_of = [&](const std::string& l) {
    return static_cast<Eigen::Index>(std::find(sw.labels.begin(), sw.labels.end(), l) - sw.labels.begin());
  };
  // Bisection on each bracket, tracking from the left end of the bracket.
  for (Crossing& c : found) {
    if (spec.refine_levels == 0) continue;
    std::size_t left = 0;
    while (left + 1 < sw.points.size() &&
           !(sw.points[left].ok && sw.points[left].parameter <= c.parameter &&
             sw.points[left + 1].parameter >= c.parameter)) {
      ++left;
    }
    std::size_t right = left + 1;
    while (right < sw.points.size() && !sw.points[right].ok) ++right;
    if (right >= sw.points.size()) continue;
    const Eigen::Index a = index_of(c.first), b = index_of(c.second);
    const auto exact = std::find_if(sw.points.begin(), sw.points.end(), [&](const SweepPoint& p) {
      return p.ok && p.parameter == c.parameter && p.energies[a] == p.energies[b];
    });
    if (exact != sw.points.end()) {
      c.refined = true;
      continue;
    }
    double lo = sw.points[left].parameter, hi = sw.points[right].parameter;
    double d_lo = sw.points[left].energies[a] - sw.points[left].energies[b];
    double d_hi = sw.points[right].energies[a] - sw.points[right].energies[b];
    Eigen::MatrixXcd ref = sw.points[left].coefficients;
    bool ok = true;
    for (int level = 0; level < spec.refine_levels && ok; ++level) {
      const double mid = 0.5 * (lo + hi);
      try {
        const SpectrumPoint sp = compute_spectrum(system, sweep_feeds(system.layout(), spec, mid), threads);
        SweepPoint mp;
        track(sp, ref, mp);
        const double d_mid = mp.energies[a] - mp.energies[b];
        if ((d_lo < 0.0) == (d_mid < 0.0)) {
          lo = mid;
          d_lo = d_mid;
          ref = mp.coefficients;
        } else {
          hi = mid;
          d_hi = d_mid;
        }
      } catch (const SolverError& e) {
        sw.events.push_back("refinement of " + c.first + "/" + c.second + " stopped: " + e.what());
        ok = false;
      }
    }
    c.parameter = d_hi == d_lo ? 0.5 * (lo + hi) : lo + (hi - lo) * d_lo / (d_lo - d_hi);
    c.refined = ok;
  }
  sw.crossings = std::move(found);
  return sw;
}

std::vector<Crossing> detect_crossings(const SpectrumSweep& sweep) {
  std::vector<Crossing> out;
  const auto n = static_cast<Eigen::Index>(sweep.labels.size());
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      // Last point with a nonzero gap, and the first exact touch after it (if any).
      const SweepPoint* prev = nullptr;
      const SweepPoint* touch = nullptr;
      for (const SweepPoint& p : sweep.points) {
        if (!p.ok) continue;
        const double d1 = p.energies[a] - p.energies[b];
        if (d1 == 0.0) {
          if (touch == nullptr) touch = &p;
          continue;
        }
        if (prev != nullptr) {
          const double d0 = prev->energies[a] - prev->energies[b];
          if ((d0 < 0.0) != (d1 < 0.0)) {
            const double x = touch != nullptr ? touch->parameter
                                              : prev->parameter + (p.parameter - prev->parameter) * d0 / (d0 - d1);
            out.push_back({sweep.labels[static_cast<std::size_t>(a)], sweep.labels[static_cast<std::size_t>(b)], x,
                           false});
          }
        }
        prev = &p;
        touch = nullptr;
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Crossing& x, const Crossing& y) { return x.parameter < y.parameter; });
  return out;
}

SpectrumSweep make_sweep(const std::vector<std::string>& labels, const std::vector<double>& grid,
                         const std::vector<Eigen::VectorXd>& energies) {
  if (grid.size() != energies.size()) throw ValidationError("make_sweep: grid and energy counts differ");
  SpectrumSweep sw;
  sw.labels = labels;
  sw.spec.grid = grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (energies[i].size() != static_cast<Eigen::Index>(labels.size())) {
      throw ValidationError("make_sweep: energy vector length differs from label count");
    }
    SweepPoint p;
    p.parameter = grid[i];
    p.energies = energies[i];
    p.ok = true;
    sw.points.push_back(p);
  }
  sw.crossings = detect_crossings(sw);
  return sw;
}

IsingCoefficients ising_decomposition(const std::vector<std::string>& labels, const Eigen::VectorXd& energies) {
  if (labels.empty() || static_cast<Eigen::Index>(labels.size()) != energies.size()) {
    throw ValidationError("ising decomposition: one energy per label required");
  }
  const auto n = static_cast<Eigen::Index>(labels.front().size());
  if (labels.size() != (std::size_t{1} << n)) throw ValidationError("ising decomposition: need all 2^n labels");
  IsingCoefficients c;
  c.fields = Eigen::VectorXd::Zero(n);
  c.couplings = Eigen::MatrixXd::Zero(n, n);
  const double norm = 1.0 / static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Eigen::VectorXd s(n);
    for (Eigen::Index k = 0; k < n; ++k) s[k] = labels[i][static_cast<std::size_t>(k)] == 'U' ? 1.0 : -1.0;
    const double e = energies[static_cast<Eigen::Index>(i)];
    c.offset += norm * e;
    c.fields += norm * e * s;
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index l = 0; l < n; ++l) {
        if (k != l) c.couplings(k, l) += norm * e * s[k] * s[l];
      }
    }
  }
  return c;
}

void write_sweep_csv(std::ostream& os, const QubitLayout& layout, const SpectrumSweep& sweep) {
  const SweepSpec& spec = sweep.spec;
  os << "# sweep " << spec.name << ": ";
  if (spec.ratio_locked()) {
    os << "ratio-locked";
    for (const auto& [name, r] : spec.ratios) os << ' ' << name << '=' << r << "*param";
  } else {
    os << "param=" << spec.parameter;
  }
  os << "; fixed feeds (2et/hbar):";
  for (const auto& feed : layout.feeds) {
    const bool swept = spec.ratio_locked() ? spec.ratios.count(feed.name) != 0 : feed.name == spec.parameter;
    if (swept) continue;
    const auto it = spec.fixed.find(feed.name);
    os << ' ' << feed.name << '=' << (it == spec.fixed.end() ? 0.0 : it->second);
  }
  os << '\n';
  os << "param_2et/hbar";
  for (const auto& l : sweep.labels) os << ",E_" << l << "_meV";
  os << '\n';
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(12);
  for (const auto& p : sweep.points) {
    os << p.parameter;
    for (std::size_t k = 0; k < sweep.labels.size(); ++k) {
      os << ',';
      if (p.ok) {
        os << p.energies[static_cast<Eigen::Index>(k)];
      } else {
        os << "nan";
      }
    }
    os << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

void write_crossings(std::ostream& os, const SpectrumSweep& sweep) {
  os << "# crossings of tracked levels, sweep " << sweep.spec.name << " (parameter in 2et/hbar)\n";
  os << "first second parameter refined\n";
  const auto prec = os.precision();
  os << std::setprecision(8);
  for (const auto& c : sweep.crossings) {
    os << c.first << ' ' << c.second << ' ' << c.parameter << ' ' << (c.refined ? "yes" : "no") << '\n';
  }
  os.precision(prec);
  for (const auto& e : sweep.events) os << "# event: " << e << '\n';
}

}  // namespace svilc
