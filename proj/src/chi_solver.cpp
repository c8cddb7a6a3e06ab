// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#include "svilc/chi_solver.hpp"

#include <cmath>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <queue>

#include "svilc/errors.hpp"

namespace svilc {

void FeedSpec::validate(const BondGraph& graph, const std::string& field) const {
  double in = 0.0, out = 0.0;
  for (const auto& p : sources) {
    graph.require_index(p.site, field + ".sources");
    if (!(p.magnitude >= 0.0)) throw ValidationError(field + ".sources: magnitude must be non-negative");
    in += p.magnitude;
  }
  for (const auto& p : drains) {
    graph.require_index(p.site, field + ".drains");
    if (!(p.magnitude >= 0.0)) throw ValidationError(field + ".drains: magnitude must be non-negative");
    out += p.magnitude;
  }
  if (std::abs(in - out) > 1e-12 * std::max(1.0, in)) {
    throw ValidationError(field + ": source total " + std::to_string(in) + " differs from drain total " +
                          std::to_string(out));
  }
}

Eigen::VectorXd FeedSpec::injection(const BondGraph& graph, double scale) const {
  Eigen::VectorXd inj = Eigen::VectorXd::Zero(graph.n_sites());
  for (const auto& p : sources) inj[graph.require_index(p.site, name + ".sources")] += scale * p.magnitude;
  for (const auto& p : drains) inj[graph.require_index(p.site, name + ".drains")] -= scale * p.magnitude;
  return inj;
}

Eigen::VectorXcd bond_density(const Eigen::MatrixXcd& occupied, const BondGraph& graph) {
  Eigen::VectorXcd rho(graph.n_bonds());
  for (int b = 0; b < graph.n_bonds(); ++b) {
    const Bond& bd = graph.bonds[static_cast<std::size_t>(b)];
    cplx acc = 0.0;
    for (int s = 0; s < 2; ++s) {
      acc += occupied.row(2 * bd.tail + s).dot(occupied.row(2 * bd.head + s));
    }
    rho[b] = acc;
  }
  return rho;
}

std::vector<int> texture_windings(const BondGraph& graph, const LoopBasis& basis, const SpinField& fields) {
  const std::vector<double> xi(fields.xi.data(), fields.xi.data() + fields.xi.size());
  const std::vector<double> theta = staggered_angles(graph, xi);
  std::vector<int> w;
  w.reserve(basis.loops.size());
  for (const Loop& loop : basis.loops) w.push_back(winding_number(theta, loop.sites));
  return w;
}

ChiContext::ChiContext(const BondGraph& graph, const LoopBasis& basis, const MeanFieldSolution& mf)
    : graph_(&graph), basis_(&basis), mf_(&mf) {
  if (mf.fields.size() != graph.n_sites()) throw ValidationError("chi: mean-field size does not match lattice");
  rho_ = svilc::bond_density(mf.orbitals.occupied, graph);

  std::vector<Eigen::Triplet<double>> trip;
  for (int l = 0; l < basis.n_loops(); ++l) {
    for (const auto& e : basis.loops[static_cast<std::size_t>(l)].edges) trip.emplace_back(l, e.bond, e.sign);
  }
  loops_.resize(basis.n_loops(), graph.n_bonds());
  loops_.setFromTriplets(trip.begin(), trip.end());
  if (basis.n_loops() > 0) {
    const Eigen::SparseMatrix<double> gram = loops_ * loops_.transpose();
    gram_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(gram);
    if (gram_->info() != Eigen::Success) throw SolverError("chi: loop Gram matrix is singular");
  }

  // BFS spanning tree rooted at site 0.
  const int m = graph.n_sites();
  tree_parent_bond_.assign(static_cast<std::size_t>(m), -1);
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    tree_order_.push_back(u);
    for (int v : graph.adjacency[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = 1;
      tree_parent_bond_[static_cast<std::size_t>(v)] = graph.find_bond(v, u).first;
      q.push(v);
    }
  }

  texture_ = svilc::texture_windings(graph, basis, mf.fields);

  const Eigen::VectorXd sx = mf.fields.sx(), sy = mf.fields.sy(), sz = mf.fields.sz();
  for (int j = 0; j < m; ++j) {
    constant_ += mf.params.U_meV *
                 (0.25 * mf.fields.n[j] * mf.fields.n[j] - sx[j] * sx[j] - sy[j] * sy[j] - sz[j] * sz[j]);
  }
}

Eigen::VectorXd ChiContext::base_one_form(const std::vector<int>& wbar) const {
  if (static_cast<int>(wbar.size()) != basis_->n_loops()) throw ValidationError("winding pattern size mismatch");
  if (!gram_) return Eigen::VectorXd::Zero(graph_->n_bonds());
  Eigen::VectorXd target(basis_->n_loops());
  for (int l = 0; l < basis_->n_loops(); ++l) target[l] = 2.0 * std::numbers::pi * wbar[static_cast<std::size_t>(l)];
  const Eigen::VectorXd y = gram_->solve(target);
  return loops_.transpose() * y;
}

Eigen::VectorXd ChiContext::loop_projection(const Eigen::VectorXd& v) const {
  if (!gram_) return Eigen::VectorXd::Zero(0);
  return gram_->solve(loops_ * v);
}

Eigen::VectorXd ChiContext::tree_flow(const Eigen::VectorXd& injection) const {
  Eigen::VectorXd subtree = injection;
  Eigen::VectorXd flow = Eigen::VectorXd::Zero(graph_->n_bonds());
  for (auto it = tree_order_.rbegin(); it != tree_order_.rend(); ++it) {
    const int v = *it;
    const int b = tree_parent_bond_[static_cast<std::size_t>(v)];
    if (b < 0) continue;
    const Bond& bd = graph_->bonds[static_cast<std::size_t>(b)];
    const int parent = bd.tail == v ? bd.head : bd.tail;
    // Current leaving v toward its parent equals everything injected inside v's subtree.
    flow[b] = (bd.tail == v) ? subtree[v] : -subtree[v];
    subtree[parent] += subtree[v];
  }
  return flow;
}

std::vector<WindingPattern> enumerate_patterns(const std::vector<int>& texture_windings) {
  std::vector<std::size_t> odd;
  for (std::size_t l = 0; l < texture_windings.size(); ++l) {
    if (texture_windings[l] % 2 != 0) odd.push_back(l);
  }
  if (odd.size() > 20) throw ValidationError("enumerate_patterns: too many odd loops to list (" +
                                             std::to_string(odd.size()) + ")");
  std::vector<WindingPattern> out;
  const std::size_t count = std::size_t{1} << odd.size();
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    WindingPattern p;
    p.wbar.assign(texture_windings.size(), 0);
    for (std::size_t k = 0; k < odd.size(); ++k) {
      const bool neg = (mask >> k) & 1U;
      p.wbar[odd[k]] = neg ? -1 : 1;
      p.label.push_back(neg ? '-' : '+');
    }
    out.push_back(std::move(p));
  }
  return out;
}

double pattern_count(const std::vector<int>& texture_windings) {
  int odd = 0;
  for (int w : texture_windings) odd += (w % 2 != 0);
  return std::ldexp(1.0, odd);
}

bool satisfies_parity(const WindingPattern& pattern, const std::vector<int>& texture_windings) {
  if (pattern.wbar.size() != texture_windings.size()) return false;
  for (std::size_t l = 0; l < texture_windings.size(); ++l) {
    if ((pattern.wbar[l] + texture_windings[l]) % 2 != 0) return false;
  }
  return true;
}

namespace {

Eigen::VectorXcd dressed(const ChiContext& ctx, const Eigen::VectorXd& delta) {
  const Eigen::VectorXcd& rho = ctx.bond_density();
  Eigen::VectorXcd z(rho.size());
  for (Eigen::Index b = 0; b < rho.size(); ++b) z[b] = std::polar(1.0, -0.5 * delta[b]) * rho[b];
  return z;
}

}  // namespace

double chi_energy(const ChiContext& ctx, const Eigen::VectorXd& delta) {
  return -2.0 * ctx.t() * dressed(ctx, delta).real().sum();
}

Eigen::VectorXd chi_gradient(const ChiContext& ctx, const Eigen::VectorXd& delta) {
  return -ctx.t() * dressed(ctx, delta).imag();
}

Eigen::VectorXd divergence(const BondGraph& graph, const Eigen::VectorXd& currents) {
  Eigen::VectorXd div = Eigen::VectorXd::Zero(graph.n_sites());
  for (int b = 0; b < graph.n_bonds(); ++b) {
    const Bond& bd = graph.bonds[static_cast<std::size_t>(b)];
    div[bd.tail] += currents[b];
    div[bd.head] -= currents[b];
  }
  return div;
}

CurrentState solve_chi(const ChiContext& ctx, const WindingPattern& pattern, const Eigen::VectorXd& injection,
                       const ChiOptions& options) {
  const BondGraph& graph = ctx.graph();
  const int m = graph.n_sites();
  const int nb = graph.n_bonds();
  const double t = ctx.t();
  if (!satisfies_parity(pattern, ctx.texture_windings())) {
    throw ValidationError("winding pattern '" + pattern.label + "' violates the parity constraint");
  }
  if (injection.size() != m) throw ValidationError("feed injection size does not match lattice");
  if (std::abs(injection.sum()) > 1e-12 * std::max(1.0, injection.cwiseAbs().sum())) {
    throw ValidationError("feed injection is not balanced");
  }

  const Eigen::VectorXd omega0 = ctx.base_one_form(pattern.wbar);
  // Unknowns phi_1..phi_{m-1}; phi_0 = 0 fixes the global phase.
  const int nu = m - 1;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(m);
  auto bond_delta = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd d = omega0;
    for (int b = 0; b < nb; ++b) {
      const Bond& bd = graph.bonds[static_cast<std::size_t>(b)];
      d[b] += p[bd.head] - p[bd.tail];
    }
    return d;
  };
  auto objective = [&](const Eigen::VectorXd& p) { return chi_energy(ctx, bond_delta(p)) + t * injection.dot(p); };
  auto gradient = [&](const Eigen::VectorXd& d) {
    // dG/dphi_n = sum_b B_nb E'_b + t I_n, B_nb = +1 at head, -1 at tail.
    const Eigen::VectorXd de = chi_gradient(ctx, d);
    Eigen::VectorXd g = t * injection;
    for (int b = 0; b < nb; ++b) {
      const Bond& bd = graph.bonds[static_cast<std::size_t>(b)];
      g[bd.head] += de[b];
      g[bd.tail] -= de[b];
    }
    return g;
  };

  CurrentState st;
  st.winding = pattern;
  st.injection = injection;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  Eigen::VectorXd delta = bond_delta(phi);
  Eigen::VectorXd g = gradient(delta);
  double gnorm = g.tail(nu).cwiseAbs().maxCoeff() / t;
  double obj = objective(phi);
  int it = 0;
  for (; it < options.max_iter && gnorm > options.tol; ++it) {
    const Eigen::VectorXcd z = dressed(ctx, delta);
    // Exact Hessian B diag(E'') B^T first; if it is not positive definite, clip the
    // offending bond stiffnesses to the regularization floor.
    Eigen::VectorXd step = Eigen::VectorXd::Zero(m);
    bool have_step = false;
    for (int attempt = 0; attempt < 2 && !have_step; ++attempt) {
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(static_cast<std::size_t>(4 * nb));
      for (int b = 0; b < nb; ++b) {
        double w = 0.5 * t * z[b].real();
        if (attempt == 1 && w < options.regularization * t) {
          w = options.regularization * t;
          st.regularized = true;
        }
        const Bond& bd = graph.bonds[static_cast<std::size_t>(b)];
        const int i = bd.tail - 1, j = bd.head - 1;
        if (i >= 0) trip.emplace_back(i, i, w);
        if (j >= 0) trip.emplace_back(j, j, w);
        if (i >= 0 && j >= 0) {
          trip.emplace_back(i, j, -w);
          trip.emplace_back(j, i, -w);
        }
      }
      Eigen::SparseMatrix<double> hess(nu, nu);
      hess.setFromTriplets(trip.begin(), trip.end());
      if (!analyzed) {
        ldlt.analyzePattern(hess);
        analyzed = true;
      }
      ldlt.factorize(hess);
      if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) continue;
      step.tail(nu) = -ldlt.solve(Eigen::VectorXd(g.tail(nu)));
      have_step = step.allFinite() && step.dot(g) < 0.0;
    }
    if (!have_step) {
      step.setZero();
      step.tail(nu) = -g.tail(nu) / t;  // steepest descent fallback
    }

    // Cap the largest bond phase change so iterates cannot hop over a phase-slip barrier
    // into a different winding sector.
    double alpha = 1.0;
    {
      double max_change = 0.0;
      for (int b = 0; b < nb; ++b) {
        const Bond& bd = graph.bonds[static_cast<std::size_t>(b)];
        max_change = std::max(max_change, std::abs(step[bd.head] - step[bd.tail]));
      }
      if (max_change > options.max_phase_step) alpha = options.max_phase_step / max_change;
    }
    bool accepted = false;
    Eigen::VectorXd trial_phi, trial_delta, trial_g;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      trial_phi = phi + alpha * step;
      trial_delta = bond_delta(trial_phi);
      trial_g = gradient(trial_delta);
      const double trial_obj = objective(trial_phi);
      const double trial_norm = trial_g.tail(nu).cwiseAbs().maxCoeff() / t;
      if (trial_obj <= obj + 1e-4 * alpha * step.dot(g) || (trial_norm < gnorm && trial_obj <= obj + 1e-9 * std::abs(obj))) {
        accepted = true;
        obj = trial_obj;
        gnorm = trial_norm;
        break;
      }
    }
    if (options.verbose) {
      std::cerr << "chi it " << it << " residual " << gnorm << " objective " << obj << " step " << alpha
                << " max|delta| " << trial_delta.cwiseAbs().maxCoeff() << (have_step ? "" : " (gradient)") << '\n';
    }
    if (!accepted) break;
    phi = trial_phi;
    delta = trial_delta;
    g = trial_g;
  }
  if (gnorm > options.tol) {
    throw SolverError("chi solver stalled for pattern '" + pattern.label + "' (Kirchhoff residual " +
                      std::to_string(gnorm) + "); the feed may exceed the lattice's critical current");
  }

  st.chi.delta = delta;
  st.iterations = it;
  st.gradient_norm = gnorm;
  st.energy = chi_energy(ctx, delta) + ctx.constant_energy();
  const Eigen::VectorXd de = chi_gradient(ctx, delta);
  st.bond_currents = de / t;
  // Stationarity: E' = t * f + O^T lambda, with f the tree flow carrying the feed.
  st.multipliers = ctx.loop_projection(de - t * ctx.tree_flow(injection));
  return st;
}

Eigen::VectorXd current_distribution(const ChiContext& ctx, const ChiField& chi) {
  const BondGraph& graph = ctx.graph();
  const Eigen::MatrixXcd& occ = ctx.meanfield().orbitals.occupied;
  Eigen::VectorXd j(graph.n_bonds());
  for (int b = 0; b < graph.n_bonds(); ++b) {
    const Bond& bd = graph.bonds[static_cast<std::size_t>(b)];
    const cplx phase = std::polar(1.0, -0.5 * chi.delta[b]);
    cplx forward = 0.0;  // <c_tail^dag c_head> in the dressed determinant
    for (Eigen::Index g = 0; g < occ.cols(); ++g) {
      for (int s = 0; s < 2; ++s) forward += std::conj(occ(2 * bd.tail + s, g)) * occ(2 * bd.head + s, g);
    }
    forward *= phase;
    const cplx backward = std::conj(forward);
    // j = -(i/2) <c_head^dag c_tail - c_tail^dag c_head>
    j[b] = (cplx(0.0, -0.5) * (backward - forward)).real();
  }
  return j;
}

Eigen::VectorXd multiplier_currents(const ChiContext& ctx, const CurrentState& state) {
  Eigen::VectorXd j = ctx.tree_flow(state.injection);
  if (state.multipliers.size() > 0) j += ctx.loop_incidence().transpose() * state.multipliers / ctx.t();
  return j;
}

void write_bond_currents(std::ostream& os, const BondGraph& graph, const Eigen::VectorXd& currents,
                         const std::string& header) {
  if (!header.empty()) os << "# " << header << '\n';
  os << "# x1 y1 x2 y2 current[2et/hbar]\n";
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::scientific << std::setprecision(10);
  for (int b = 0; b < graph.n_bonds(); ++b) {
    const Bond& bd = graph.bonds[static_cast<std::size_t>(b)];
    const Site a = graph.sites[static_cast<std::size_t>(bd.tail)];
    const Site c = graph.sites[static_cast<std::size_t>(bd.head)];
    const double v = currents[b] == 0.0 ? 0.0 : currents[b];
    os << a.x << ' ' << a.y << ' ' << c.x << ' ' << c.y << ' ' << v << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace svilc
