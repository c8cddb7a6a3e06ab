// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#include "svilc/observables.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <queue>

#include "svilc/errors.hpp"

namespace svilc {

namespace {

// int_{y1}^{y2} A_y(x, y) dy for the Landau-like gauge.
double vertical_integral(const FieldPolynomial& f, double x, double y1, double y2) {
  const double ax = f.cxx * x * x * x / 3.0 + 0.5 * f.cx * x * x + f.c0 * x + f.gauge_offset;
  return ax * (y2 - y1) +
         x * (f.cyy * (y2 * y2 * y2 - y1 * y1 * y1) / 3.0 + 0.5 * f.cy * (y2 * y2 - y1 * y1));
}

}  // namespace

Eigen::VectorXd vector_potential(const BondGraph& graph, const FieldPolynomial& field) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(graph.n_bonds());
  for (int b = 0; b < graph.n_bonds(); ++b) {
    const Bond& bd = graph.bonds[static_cast<std::size_t>(b)];
    const Site s = graph.sites[static_cast<std::size_t>(bd.tail)];
    const Site e = graph.sites[static_cast<std::size_t>(bd.head)];
    if (s.x == e.x) out[b] = vertical_integral(field, s.x, s.y, e.y);
  }
  return out;
}

double plaquette_flux(const FieldPolynomial& f, double x, double y) {
  const double x2 = x + 1.0, y2 = y + 1.0;
  const double ix2 = (x2 * x2 - x * x) / 2.0, ix3 = (x2 * x2 * x2 - x * x * x) / 3.0;
  const double iy2 = (y2 * y2 - y * y) / 2.0, iy3 = (y2 * y2 * y2 - y * y * y) / 3.0;
  return f.cxx * ix3 + f.cx * ix2 + f.cyy * iy3 + f.cy * iy2 + f.c0;
}

double flux_current_energy_meV(double t_meV, double lattice_constant_nm) {
  const double a = lattice_constant_nm * 1e-9;
  // (1 T a^2) * (2 e t / hbar) with t in joules, expressed in meV.
  return 2.0 * a * a * kElementaryCharge * t_meV / kHbar;
}

PairContraction::PairContraction(const ChiContext& ctx, const CurrentState& a, const CurrentState& b)
    : ctx_(&ctx), delta_b_(b.chi.delta) {
  const BondGraph& graph = ctx.graph();
  const int m = graph.n_sites();
  const Eigen::MatrixXcd& c = ctx.meanfield().orbitals.occupied;
  half_diff_ = Eigen::VectorXd::Zero(m);
  if (a.chi.delta.size() != graph.n_bonds() || b.chi.delta.size() != graph.n_bonds()) {
    throw ValidationError("pair contraction: states are not solved on this lattice");
  }
  identical_ = (a.chi.delta.array() == b.chi.delta.array()).all();
  if (identical_) return;

  // Integrate (delta_a - delta_b) / 2 over a BFS tree; it is single valued when the two
  // winding patterns differ by even numbers on every loop.
  const Eigen::VectorXd diff = 0.5 * (a.chi.delta - b.chi.delta);
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : graph.adjacency[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = 1;
      const auto [bond, sign] = graph.find_bond(u, v);
      half_diff_[v] = half_diff_[u] + sign * diff[bond];
      q.push(v);
    }
  }
  for (int bnd = 0; bnd < graph.n_bonds(); ++bnd) {
    const Bond& bd = graph.bonds[static_cast<std::size_t>(bnd)];
    const double mismatch = wrap_angle(half_diff_[bd.head] - half_diff_[bd.tail] - diff[bnd]);
    if (std::abs(mismatch) > 1e-8) {
      throw ValidationError("pair contraction: winding patterns differ by an odd number on some loop");
    }
  }

  Eigen::MatrixXcd phased = c;
  for (int j = 0; j < m; ++j) {
    const cplx ph = std::polar(1.0, half_diff_[j]);
    phased.row(2 * j) *= ph;
    phased.row(2 * j + 1) *= ph;
  }
  const Eigen::MatrixXcd overlap_matrix = c.adjoint() * phased;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(overlap_matrix);
  overlap_ = lu.determinant();
  if (std::abs(overlap_) < kSingularOverlap) {
    singular_ = true;
    return;
  }
  y_ = c * (overlap_ * lu.inverse());
}

cplx PairContraction::site(int j, int s, int s2) const {
  const Eigen::MatrixXcd& c = ctx_->meanfield().orbitals.occupied;
  if (singular_) return 0.0;
  const int p = 2 * j + s, q = 2 * j + s2;
  if (identical_) return c.row(p).dot(c.row(q));
  return std::polar(1.0, half_diff_[j]) * (y_.row(q).cwiseProduct(c.row(p).conjugate())).sum();
}

cplx PairContraction::hop(int k, int j) const {
  const Eigen::MatrixXcd& c = ctx_->meanfield().orbitals.occupied;
  if (singular_) return 0.0;
  const auto [bond, sign] = ctx_->graph().find_bond(j, k);
  if (bond < 0) throw ValidationError("pair contraction: sites are not bonded");
  const cplx link = std::polar(1.0, 0.5 * sign * delta_b_[bond]);
  cplx acc = 0.0;
  for (int s = 0; s < 2; ++s) {
    const int p = 2 * k + s, q = 2 * j + s;
    acc += identical_ ? c.row(p).dot(c.row(q)) : (y_.row(q).cwiseProduct(c.row(p).conjugate())).sum();
  }
  return (identical_ ? 1.0 : std::polar(1.0, half_diff_[k])) * link * acc;
}

namespace {

struct Elements {
  cplx s, hb, e, x, y;
};

Elements evaluate(const ChiContext& ctx, const PairContraction& pc, const Eigen::VectorXd& flux, double flux_scale,
                  double e_dc) {
  const BondGraph& graph = ctx.graph();
  const MeanFieldSolution& mf = ctx.meanfield();
  const double t = ctx.t(), u = mf.params.U_meV;
  const double xc = 0.5 * (graph.spec.nx + 1), yc = 0.5 * (graph.spec.ny + 1);
  const Eigen::VectorXd sx = mf.fields.sx(), sy = mf.fields.sy(), sz = mf.fields.sz();
  Elements el{pc.overlap(), 0.0, 0.0, 0.0, 0.0};
  if (pc.singular()) return Elements{pc.overlap(), 0.0, 0.0, 0.0, 0.0};
  for (int b = 0; b < graph.n_bonds(); ++b) {
    const Bond& bd = graph.bonds[static_cast<std::size_t>(b)];
    const cplx fwd = pc.hop(bd.head, bd.tail);  // c_head^dag c_tail
    const cplx bwd = pc.hop(bd.tail, bd.head);
    el.e += -t * (fwd + bwd);
    if (flux.size() > 0 && flux[b] != 0.0) {
      const cplx current = cplx(0.0, -0.5) * (fwd - bwd);
      el.hb += -flux_scale * flux[b] * current;
    }
  }
  for (int j = 0; j < graph.n_sites(); ++j) {
    const cplx uu = pc.site(j, 0, 0), dd = pc.site(j, 1, 1);
    const cplx ud = pc.site(j, 0, 1), du = pc.site(j, 1, 0);
    el.e += u * ((0.5 * mf.fields.n[j] - sz[j]) * uu + (0.5 * mf.fields.n[j] + sz[j]) * dd -
                 cplx(sx[j], -sy[j]) * ud - cplx(sx[j], sy[j]) * du);
    const Site s = graph.sites[static_cast<std::size_t>(j)];
    el.x += (s.x - xc) * (uu + dd);
    el.y += (s.y - yc) * (uu + dd);
  }
  el.e -= e_dc * el.s;
  return el;
}

}  // namespace

CouplingMatrix coupling_matrix(const ChiContext& ctx, const std::vector<CurrentState>& states,
                               const std::vector<std::string>& labels, const FieldPolynomial& field, bool offdiagonal,
                               int threads) {
  const auto n = static_cast<Eigen::Index>(states.size());
  if (labels.size() != states.size()) throw ValidationError("coupling matrix: label count mismatch");
  CouplingMatrix cm;
  cm.labels = labels;
  cm.S = Eigen::MatrixXcd::Zero(n, n);
  cm.HB = cm.S;
  cm.E = cm.S;
  cm.X = cm.S;
  cm.Y = cm.S;
  const Eigen::VectorXd flux = field.is_zero() && field.gauge_offset == 0.0
                                   ? Eigen::VectorXd()
                                   : vector_potential(ctx.graph(), field);
  const double scale = flux_current_energy_meV(ctx.t(), ctx.graph().spec.lattice_constant_nm);
  const double e_dc = ctx.constant_energy();

  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      if (a == b || offdiagonal) pairs.emplace_back(a, b);
    }
  }
  std::vector<Elements> results(pairs.size());
  std::vector<char> singular(pairs.size(), 0);
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto [a, b] = pairs[k];
    PairContraction pc(ctx, states[static_cast<std::size_t>(a)], states[static_cast<std::size_t>(b)]);
    singular[k] = pc.singular();
    results[k] = evaluate(ctx, pc, flux, scale, e_dc);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [a, b] = pairs[k];
    const Elements& el = results[k];
    cm.S(a, b) = el.s;
    cm.HB(a, b) = el.hb;
    cm.E(a, b) = el.e;
    cm.X(a, b) = el.x;
    cm.Y(a, b) = el.y;
    if (a != b) {
      cm.S(b, a) = std::conj(el.s);
      cm.HB(b, a) = std::conj(el.hb);
      cm.E(b, a) = std::conj(el.e);
      cm.X(b, a) = std::conj(el.x);
      cm.Y(b, a) = std::conj(el.y);
    } else {
      // Expectation values are real; drop rounding noise.
      cm.S(a, a) = cm.S(a, a).real();
      cm.HB(a, a) = cm.HB(a, a).real();
      cm.E(a, a) = cm.E(a, a).real();
      cm.X(a, a) = cm.X(a, a).real();
      cm.Y(a, a) = cm.Y(a, a).real();
    }
    if (singular[k]) cm.singular_pairs.emplace_back(a, b);
  }
  return cm;
}

double classical_field_energy(const ChiContext& ctx, const CurrentState& state, const FieldPolynomial& field) {
  const Eigen::VectorXd flux = vector_potential(ctx.graph(), field);
  return -flux_current_energy_meV(ctx.t(), ctx.graph().spec.lattice_constant_nm) * flux.dot(state.bond_currents);
}

void hermitian_eigen(const Eigen::MatrixXcd& h, Eigen::VectorXd& values, Eigen::MatrixXcd& vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw SolverError("hermitian eigensolver failed");
  values = es.eigenvalues();
  vectors = es.eigenvectors();
}

namespace {

void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best]) + 1e-12) best = i;
  }
  if (std::abs(v[best]) > 0.0) v *= std::conj(v[best]) / std::abs(v[best]);
}

}  // namespace

BasisStates diagonalize_basis(const CouplingMatrix& cm) {
  const auto n = cm.S.rows();
  Eigen::VectorXd s_vals;
  Eigen::MatrixXcd s_vecs;
  hermitian_eigen(cm.S, s_vals, s_vecs);
  if (s_vals.minCoeff() <= 1e-12) throw SolverError("pattern overlap matrix is not positive definite");
  const Eigen::MatrixXcd inv_sqrt = s_vecs * s_vals.cwiseSqrt().cwiseInverse().asDiagonal() * s_vecs.adjoint();

  const Eigen::MatrixXcd hb = inv_sqrt * cm.HB * inv_sqrt;
  const Eigen::MatrixXcd total = inv_sqrt * (cm.E + cm.HB) * inv_sqrt;
  Eigen::VectorXd lam;
  Eigen::MatrixXcd v;
  hermitian_eigen(0.5 * (hb + hb.adjoint()), lam, v);

  // Inside a degenerate cluster of field eigenvalues any basis is an eigenbasis. Pick the one
  // closest to the symmetrically orthogonalized patterns so that symmetry-related patterns
  // keep equal energies (at B = 0 this is the plain Loewdin basis).
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && lam[end] - lam[end - 1] <= 1e-9 * scale) ++end;
    const Eigen::Index k = end - start;
    if (k > 1) {
      const Eigen::MatrixXcd block = v.middleCols(start, k);
      const Eigen::MatrixXcd proj = block.adjoint();  // k x n: components of each pattern
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
      std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return proj.col(a).squaredNorm() > proj.col(b).squaredNorm() + 1e-12;
      });
      std::sort(idx.begin(), idx.begin() + k);
      Eigen::MatrixXcd a(k, k);
      for (Eigen::Index c = 0; c < k; ++c) a.col(c) = proj.col(idx[static_cast<std::size_t>(c)]);
      Eigen::VectorXd g_vals;
      Eigen::MatrixXcd g_vecs;
      hermitian_eigen(a.adjoint() * a, g_vals, g_vecs);
      if (g_vals.minCoeff() > 1e-12) {
        const Eigen::MatrixXcd g_inv_sqrt = g_vecs * g_vals.cwiseSqrt().cwiseInverse().asDiagonal() * g_vecs.adjoint();
        v.middleCols(start, k) = block * (a * g_inv_sqrt);
      }
    }
    start = end;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Eigen::VectorXd energies(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    fix_phase(v.col(k));
    energies[k] = (v.col(k).adjoint() * total * v.col(k))(0, 0).real();
    order[static_cast<std::size_t>(k)] = k;
  }
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return energies[a] < energies[b]; });

  BasisStates out;
  out.coefficients.resize(n, n);
  out.field_eigenvalues.resize(n);
  out.energies.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.coefficients.col(k) = inv_sqrt * v.col(src);
    out.field_eigenvalues[k] = lam[src];
    out.energies[k] = energies[src];
    Eigen::Index dominant = 0;
    v.col(src).cwiseAbs2().maxCoeff(&dominant);
    out.labels.push_back(cm.labels[static_cast<std::size_t>(dominant)]);
  }
  return out;
}

DipoleMatrix transition_dipoles(const CouplingMatrix& cm, const BasisStates& basis, double lattice_constant_nm) {
  const double unit = kElementaryCharge * lattice_constant_nm * 1e-9 / 1e-30;  // |e| a in 1e-30 C m
  DipoleMatrix d;
  d.labels = basis.labels;
  const Eigen::MatrixXcd& c = basis.coefficients;
  d.mu_x = -unit * (c.adjoint() * cm.X * c);
  d.mu_y = -unit * (c.adjoint() * cm.Y * c);
  return d;
}

void write_dipole_table(std::ostream& os, const DipoleMatrix& d, const std::vector<std::string>& order,
                        const std::string& header) {
  std::map<std::string, Eigen::Index> index;
  for (std::size_t k = 0; k < d.labels.size(); ++k) index.emplace(d.labels[k], static_cast<Eigen::Index>(k));
  std::vector<Eigen::Index> rows;
  for (const auto& l : order) {
    const auto it = index.find(l);
    if (it == index.end()) throw ValidationError("dipole table: no state labeled " + l);
    rows.push_back(it->second);
  }
  if (!header.empty()) os << "# " << header << '\n';
  os << "# |mu_y| above the diagonal, |mu_x| below, units 1e-30 C m\n";
  os << "state";
  for (const auto& l : order) os << ' ' << l;
  os << '\n';
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::fixed << std::setprecision(3);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    os << order[r];
    for (std::size_t c = 0; c < rows.size(); ++c) {
      if (r == c) {
        os << " -";
      } else if (c > r) {
        os << ' ' << std::abs(d.mu_y(rows[r], rows[c]));
      } else {
        os << ' ' << std::abs(d.mu_x(rows[r], rows[c]));
      }
    }
    os << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace svilc
