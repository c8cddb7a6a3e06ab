// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#include "svilc/meanfield.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <iostream>
#include <limits>

#include "svilc/errors.hpp"

namespace svilc {

void HubbardParams::validate(int n_sites) const {
  if (!(t_meV > 0.0)) throw ValidationError("physics.t must be positive");
  if (!(U_meV >= 0.0)) throw ValidationError("physics.U must be non-negative");
  if (n_electrons < 0 || n_electrons > 2 * n_sites) {
    throw ValidationError("physics.n_electrons must lie in [0, 2*sites], got " + std::to_string(n_electrons));
  }
}

SpinField SpinField::from_components(const Eigen::VectorXd& n, const Eigen::VectorXd& sx, const Eigen::VectorXd& sy,
                                     const Eigen::VectorXd& sz) {
  SpinField f;
  f.n = n;
  const auto m = n.size();
  f.S.resize(m);
  f.xi.resize(m);
  f.zeta.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double inplane = std::hypot(sx[j], sy[j]);
    f.S[j] = std::hypot(inplane, sz[j]);
    f.xi[j] = std::atan2(sy[j], sx[j]);
    f.zeta[j] = std::atan2(inplane, sz[j]);
  }
  return f;
}

SpinField build_svq_texture(const BondGraph& graph, const std::vector<Vortex>& vortices, int n_electrons,
                            bool allow_unbalanced) {
  int total = 0;
  for (const auto& v : vortices) {
    if (v.winding != 1 && v.winding != -1) throw ValidationError("vortex winding must be +1 or -1");
    total += v.winding;
  }
  if (total != 0 && !allow_unbalanced) {
    throw ValidationError("vortex windings sum to " + std::to_string(total) +
                          "; a spin-vortex texture needs zero net winding (override with allow_unbalanced)");
  }
  const int m = graph.n_sites();
  SpinField f;
  f.n = Eigen::VectorXd::Constant(m, double(n_electrons) / m);
  f.S = Eigen::VectorXd::Constant(m, 0.4);
  f.zeta = Eigen::VectorXd::Constant(m, std::numbers::pi / 2.0);
  f.xi.resize(m);
  for (int j = 0; j < m; ++j) {
    const Site s = graph.sites[static_cast<std::size_t>(j)];
    double a = std::numbers::pi * (s.x + s.y);
    for (const auto& v : vortices) a += v.winding * std::atan2(s.y - v.center.y, s.x - v.center.x);
    f.xi[j] = wrap_angle(a);
  }
  return f;
}

Eigen::MatrixXcd hf_hamiltonian(const HubbardParams& params, const SpinField& fields, const BondGraph& graph) {
  const int m = graph.n_sites();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
  for (const Bond& b : graph.bonds) {
    for (int s = 0; s < 2; ++s) {
      h(2 * b.tail + s, 2 * b.head + s) = -params.t_meV;
      h(2 * b.head + s, 2 * b.tail + s) = -params.t_meV;
    }
  }
  const Eigen::VectorXd sx = fields.sx(), sy = fields.sy(), sz = fields.sz();
  const double u = params.U_meV;
  for (int j = 0; j < m; ++j) {
    h(2 * j, 2 * j) = u * (0.5 * fields.n[j] - sz[j]);
    h(2 * j + 1, 2 * j + 1) = u * (0.5 * fields.n[j] + sz[j]);
    h(2 * j, 2 * j + 1) = -u * cplx(sx[j], -sy[j]);
    h(2 * j + 1, 2 * j) = -u * cplx(sx[j], sy[j]);
  }
  return h;
}

namespace {

// For in-plane spins the HF matrix commutes with sigma_x * conjugation, so the site-local
// rotation W = [[1, 1], [-i, i]] / sqrt(2) makes it real symmetric.
Eigen::MatrixXd real_form(const HubbardParams& params, const Eigen::VectorXd& n, const Eigen::VectorXd& sx,
                          const Eigen::VectorXd& sy, const BondGraph& graph) {
  const int m = graph.n_sites();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (const Bond& b : graph.bonds) {
    for (int s = 0; s < 2; ++s) {
      h(2 * b.tail + s, 2 * b.head + s) = -params.t_meV;
      h(2 * b.head + s, 2 * b.tail + s) = -params.t_meV;
    }
  }
  const double u = params.U_meV;
  for (int j = 0; j < m; ++j) {
    h(2 * j, 2 * j) = u * (0.5 * n[j] - sx[j]);
    h(2 * j + 1, 2 * j + 1) = u * (0.5 * n[j] + sx[j]);
    h(2 * j, 2 * j + 1) = u * sy[j];
    h(2 * j + 1, 2 * j) = u * sy[j];
  }
  return h;
}

constexpr double kInPlaneSz = 1e-12;

OrbitalSet fill_from_components(const HubbardParams& params, const Eigen::VectorXd& n, const Eigen::VectorXd& sx,
                                const Eigen::VectorXd& sy, const Eigen::VectorXd& sz, const BondGraph& graph) {
  const int m = graph.n_sites();
  const int occ = params.n_electrons;
  OrbitalSet out;
  out.n_occupied = occ;
  // cos(zeta) at zeta = pi/2 leaves S^z at rounding level; treat that as in-plane.
  if (sz.cwiseAbs().maxCoeff() > kInPlaneSz) {
    const SpinField f = SpinField::from_components(n, sx, sy, sz);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hf_hamiltonian(params, f, graph));
    if (es.info() != Eigen::Success) throw SolverError("HF eigensolver failed");
    out.energies = es.eigenvalues();
    out.occupied = es.eigenvectors().leftCols(occ);
  } else {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    symmetric_eigen(real_form(params, n, sx, sy, graph), values, vectors);
    out.energies = values;
    out.occupied.resize(2 * m, occ);
    const double r = 1.0 / std::sqrt(2.0);
    for (int g = 0; g < occ; ++g) {
      for (int j = 0; j < m; ++j) {
        const double a = vectors(2 * j, g), b = vectors(2 * j + 1, g);
        out.occupied(2 * j, g) = r * cplx(a, b);
        out.occupied(2 * j + 1, g) = r * cplx(a, -b);
      }
    }
  }
  if (occ > 0 && occ < 2 * m) {
    const double gap = out.energies[occ] - out.energies[occ - 1];
    out.degenerate_fermi_level = gap < 1e-10 * std::max(1.0, std::abs(out.energies[occ]));
  }
  return out;
}

struct Components {
  Eigen::VectorXd n, sx, sy, sz;
};

Components components_from_orbitals(const Eigen::MatrixXcd& occupied, int m) {
  Components c{Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m),
               Eigen::VectorXd::Zero(m)};
  for (Eigen::Index g = 0; g < occupied.cols(); ++g) {
    for (int j = 0; j < m; ++j) {
      const cplx up = occupied(2 * j, g), dn = occupied(2 * j + 1, g);
      const double nu = std::norm(up), nd = std::norm(dn);
      c.n[j] += nu + nd;
      c.sz[j] += 0.5 * (nu - nd);
      const cplx ud = std::conj(up) * dn;
      c.sx[j] += ud.real();
      c.sy[j] += ud.imag();
    }
  }
  return c;
}

double kinetic_energy(const HubbardParams& params, const Eigen::MatrixXcd& occupied, const BondGraph& graph) {
  double e = 0.0;
  for (const Bond& b : graph.bonds) {
    cplx acc = 0.0;
    for (Eigen::Index g = 0; g < occupied.cols(); ++g) {
      for (int s = 0; s < 2; ++s) acc += std::conj(occupied(2 * b.tail + s, g)) * occupied(2 * b.head + s, g);
    }
    e += -2.0 * params.t_meV * acc.real();
  }
  return e;
}

}  // namespace

OrbitalSet fill_orbitals(const HubbardParams& params, const SpinField& fields, const BondGraph& graph) {
  return fill_from_components(params, fields.n, fields.sx(), fields.sy(), fields.sz(), graph);
}

SpinField fields_from_orbitals(const Eigen::MatrixXcd& occupied, int n_sites) {
  const Components c = components_from_orbitals(occupied, n_sites);
  return SpinField::from_components(c.n, c.sx, c.sy, c.sz);
}

double hf_total_energy(const HubbardParams& params, const SpinField& fields, const OrbitalSet& orbitals) {
  const double band = orbitals.energies.head(orbitals.n_occupied).sum();
  const Eigen::VectorXd sx = fields.sx(), sy = fields.sy(), sz = fields.sz();
  double dc = 0.0;
  for (int j = 0; j < fields.size(); ++j) {
    dc += 0.25 * fields.n[j] * fields.n[j] - sx[j] * sx[j] - sy[j] * sy[j] - sz[j] * sz[j];
  }
  return band - params.U_meV * dc;
}

MeanFieldSolution scf_solve(const HubbardParams& params, const SpinField& initial, const BondGraph& graph,
                            const ScfOptions& options) {
  const int m = graph.n_sites();
  params.validate(m);
  if (!(options.tol > 0.0)) throw ValidationError("scf tolerance must be positive");
  if (!(options.mixing > 0.0 && options.mixing <= 1.0)) throw ValidationError("scf mixing must lie in (0, 1]");
  if (initial.size() != m) throw ValidationError("initial spin field size does not match lattice");

  // Unknowns: x = [n; S^x; S^y] with S^z projected to zero (zeta = pi/2).
  Eigen::VectorXd x(3 * m);
  {
    Eigen::VectorXd n = initial.n;
    const double total = n.sum();
    if (total > 0.0) n *= params.n_electrons / total;
    x << n, initial.sx(), initial.sy();
  }
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(m);
  const Eigen::VectorXd pin_cos = initial.xi.array().cos(), pin_sin = initial.xi.array().sin();

  MeanFieldSolution best;
  best.params = params;
  best.residual = std::numeric_limits<double>::infinity();
  std::deque<Eigen::VectorXd> dx_hist, dr_hist;
  Eigen::VectorXd x_prev, r_prev;
  std::vector<double> history;
  int increases = 0;

  for (int it = 1; it <= options.max_iter; ++it) {
    const Eigen::VectorXd n_in = x.segment(0, m), sx_in = x.segment(m, m), sy_in = x.segment(2 * m, m);
    OrbitalSet orb = fill_from_components(params, n_in, sx_in, sy_in, zeros, graph);
    Components out = components_from_orbitals(orb.occupied, m);
    if (options.pin_azimuth) {
      for (int j = 0; j < m; ++j) {
        const double along = out.sx[j] * pin_cos[j] + out.sy[j] * pin_sin[j];
        out.sx[j] = along * pin_cos[j];
        out.sy[j] = along * pin_sin[j];
      }
    }
    if (std::abs(out.n.sum() - params.n_electrons) > 1e-8) {
      throw SolverError("scf: charge drift " + std::to_string(out.n.sum() - params.n_electrons));
    }
    Eigen::VectorXd x_out(3 * m);
    x_out << out.n, out.sx, out.sy;
    const Eigen::VectorXd r = x_out - x;
    const double res = r.cwiseAbs().maxCoeff();

    const SpinField f_in = SpinField::from_components(n_in, sx_in, sy_in, zeros);
    const double energy = hf_total_energy(params, f_in, orb);
    if (!history.empty() && energy > history.back() + 1e-9 * std::abs(energy)) ++increases;
    history.push_back(energy);
    if (options.verbose) {
      std::cerr << "scf it " << it << " residual " << res << " energy " << energy << " meV\n";
    }

    if (res < best.residual) {
      best.residual = res;
      best.iterations = it;
      best.fields = SpinField::from_components(out.n, out.sx, out.sy, zeros);
      best.orbitals = std::move(orb);
    }
    // Without interaction the HF matrix ignores the fields, so one diagonalization is final.
    if (params.U_meV == 0.0) {
      best.residual = 0.0;
      best.converged = true;
      break;
    }
    if (res <= options.tol) {
      best.converged = true;
      break;
    }

    // Anderson (type II) update on the fixed-point residual.
    Eigen::VectorXd x_next = x + options.mixing * r;
    if (options.anderson_depth > 0 && x_prev.size() == x.size()) {
      dx_hist.push_back(x - x_prev);
      dr_hist.push_back(r - r_prev);
      if (static_cast<int>(dx_hist.size()) > options.anderson_depth) {
        dx_hist.pop_front();
        dr_hist.pop_front();
      }
      const auto k = static_cast<Eigen::Index>(dr_hist.size());
      Eigen::MatrixXd dr(3 * m, k), dx(3 * m, k);
      for (Eigen::Index c = 0; c < k; ++c) {
        dr.col(c) = dr_hist[static_cast<std::size_t>(c)];
        dx.col(c) = dx_hist[static_cast<std::size_t>(c)];
      }
      const Eigen::VectorXd gamma = dr.colPivHouseholderQr().solve(r);
      x_next = x + options.mixing * r - (dx + options.mixing * dr) * gamma;
    }
    x_prev = x;
    r_prev = r;
    x = x_next;
    x.segment(0, m) *= params.n_electrons / x.segment(0, m).sum();
  }

  best.energy_history = std::move(history);
  best.energy_increases = increases;
  best.total_energy = kinetic_energy(params, best.orbitals.occupied, graph);
  {
    const Eigen::VectorXd sx = best.fields.sx(), sy = best.fields.sy();
    double onsite = 0.0;
    for (int j = 0; j < m; ++j) {
      onsite += 0.25 * best.fields.n[j] * best.fields.n[j] - sx[j] * sx[j] - sy[j] * sy[j];
    }
    best.total_energy += params.U_meV * onsite;
  }
  return best;
}

namespace {

constexpr char kMagic[8] = {'S', 'V', 'I', 'L', 'C', 'M', 'F', '\0'};
constexpr std::int32_t kCheckpointVersion = 1;

template <typename T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ValidationError("checkpoint: truncated file");
  return v;
}
void put_vec(std::ofstream& os, const Eigen::VectorXd& v) {
  put<std::int64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * v.size()));
}
Eigen::VectorXd get_vec(std::ifstream& is) {
  const auto n = get<std::int64_t>(is);
  if (n < 0 || n > (1 << 28)) throw ValidationError("checkpoint: corrupt vector length");
  Eigen::VectorXd v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * n));
  if (!is) throw ValidationError("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const MeanFieldSolution& sol, bool with_orbitals) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("checkpoint: cannot write " + path);
  os.write(kMagic, sizeof(kMagic));
  put<std::int32_t>(os, kCheckpointVersion);
  put<std::int64_t>(os, sol.fields.size());
  put(os, sol.params.t_meV);
  put(os, sol.params.U_meV);
  put<std::int64_t>(os, sol.params.n_electrons);
  put(os, sol.params.zeta_fixed);
  put_vec(os, sol.fields.n);
  put_vec(os, sol.fields.S);
  put_vec(os, sol.fields.xi);
  put_vec(os, sol.fields.zeta);
  put(os, sol.total_energy);
  put(os, sol.residual);
  put<std::int32_t>(os, sol.iterations);
  put<std::int32_t>(os, sol.converged ? 1 : 0);
  put<std::int32_t>(os, with_orbitals ? 1 : 0);
  if (with_orbitals) {
    put_vec(os, sol.orbitals.energies);
    put<std::int64_t>(os, sol.orbitals.occupied.rows());
    put<std::int64_t>(os, sol.orbitals.occupied.cols());
    os.write(reinterpret_cast<const char*>(sol.orbitals.occupied.data()),
             static_cast<std::streamsize>(sizeof(cplx) * sol.orbitals.occupied.size()));
  }
  if (!os) throw ValidationError("checkpoint: write failed for " + path);
}

MeanFieldSolution load_checkpoint(const std::string& path, const BondGraph& graph) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + 8, kMagic)) throw ValidationError("checkpoint: bad magic in " + path);
  const auto version = get<std::int32_t>(is);
  if (version != kCheckpointVersion) throw ValidationError("checkpoint: unsupported version " + std::to_string(version));
  const auto m = get<std::int64_t>(is);
  if (m != graph.n_sites()) throw ValidationError("checkpoint: site count does not match lattice");
  MeanFieldSolution sol;
  sol.params.t_meV = get<double>(is);
  sol.params.U_meV = get<double>(is);
  sol.params.n_electrons = static_cast<int>(get<std::int64_t>(is));
  sol.params.zeta_fixed = get<double>(is);
  sol.fields.n = get_vec(is);
  sol.fields.S = get_vec(is);
  sol.fields.xi = get_vec(is);
  sol.fields.zeta = get_vec(is);
  sol.total_energy = get<double>(is);
  sol.residual = get<double>(is);
  sol.iterations = get<std::int32_t>(is);
  sol.converged = get<std::int32_t>(is) != 0;
  const bool with_orbitals = get<std::int32_t>(is) != 0;
  if (with_orbitals) {
    sol.orbitals.energies = get_vec(is);
    const auto rows = get<std::int64_t>(is), cols = get<std::int64_t>(is);
    if (rows != 2 * m || cols != sol.params.n_electrons) throw ValidationError("checkpoint: orbital block shape");
    sol.orbitals.occupied.resize(rows, cols);
    is.read(reinterpret_cast<char*>(sol.orbitals.occupied.data()),
            static_cast<std::streamsize>(sizeof(cplx) * rows * cols));
    if (!is) throw ValidationError("checkpoint: truncated orbital block");
    sol.orbitals.n_occupied = static_cast<int>(cols);
  } else {
    sol.orbitals = fill_orbitals(sol.params, sol.fields, graph);
  }
  return sol;
}

}  // namespace svilc
