// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace svilc {

using cplx = std::complex<double>;

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
/// Uses LAPACK's divide-and-conquer driver when available.
void symmetric_eigen(const Eigen::MatrixXd& a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is visited once;
/// callers write results into pre-sized slots so output order never depends on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Default worker count (set by the CLI's --threads flag).
int default_threads();
void set_default_threads(int n);

}  // namespace svilc
