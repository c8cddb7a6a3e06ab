// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

// Reference collinear unrestricted Hartree-Fock on an open square grid. Written against plain
// Eigen with its own hopping matrix and fixed spin populations, sharing no code with the
// library. For in-plane textures that are spin rotations of a collinear state, the total
// energy must agree.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace oracle {

struct HfResult {
  double energy = std::numeric_limits<double>::infinity();
  Eigen::VectorXd n_up;
  Eigen::VectorXd n_dn;
  bool converged = false;
  int n_up_electrons = 0;
};

inline Eigen::MatrixXd grid_hopping(int nx, int ny, double t) {
  const int m = nx * ny;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  auto id = [nx](int x, int y) { return y * nx + x; };
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      if (x + 1 < nx) h(id(x, y), id(x + 1, y)) = h(id(x + 1, y), id(x, y)) = -t;
      if (y + 1 < ny) h(id(x, y), id(x, y + 1)) = h(id(x, y + 1), id(x, y)) = -t;
    }
  }
  return h;
}

// Fixed (N_up, N_dn) UHF from a Neel seed with plain linear mixing.
inline HfResult uhf_fixed(int nx, int ny, double t, double u, int n_up, int n_dn, double tol = 1e-13,
                          int max_iter = 20000) {
  const int m = nx * ny;
  const Eigen::MatrixXd k = grid_hopping(nx, ny, t);
  HfResult r;
  r.n_up_electrons = n_up;
  r.n_up = Eigen::VectorXd(m);
  r.n_dn = Eigen::VectorXd(m);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const double s = ((x + y) % 2 == 0) ? 0.4 : -0.4;
      r.n_up[y * nx + x] = double(n_up) / m + s;
      r.n_dn[y * nx + x] = double(n_dn) / m - s;
    }
  }
  auto density = [&](const Eigen::MatrixXd& h, int occ, Eigen::VectorXd& n, double& band) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::MatrixXd c = es.eigenvectors().leftCols(occ);
    n = c.rowwise().squaredNorm();
    band = es.eigenvalues().head(occ).sum();
  };
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd hu = k, hd = k;
    hu.diagonal() += u * r.n_dn;
    hd.diagonal() += u * r.n_up;
    Eigen::VectorXd nu, nd;
    double bu = 0.0, bd = 0.0;
    density(hu, n_up, nu, bu);
    density(hd, n_dn, nd, bd);
    const double res = std::max((nu - r.n_up).cwiseAbs().maxCoeff(), (nd - r.n_dn).cwiseAbs().maxCoeff());
    if (res < tol) {
      r.energy = bu + bd - u * r.n_up.dot(r.n_dn);
      r.converged = true;
      return r;
    }
    r.n_up = 0.5 * r.n_up + 0.5 * nu;
    r.n_dn = 0.5 * r.n_dn + 0.5 * nd;
  }
  return r;
}

// Lowest-energy UHF over all spin splittings of n electrons.
inline HfResult uhf_ground(int nx, int ny, double t, double u, int n) {
  HfResult best;
  for (int up = (n + 1) / 2; up <= std::min(n, nx * ny); ++up) {
    const HfResult r = uhf_fixed(nx, ny, t, u, up, n - up);
    if (r.converged && r.energy < best.energy) best = r;
  }
  return best;
}

}  // namespace oracle
