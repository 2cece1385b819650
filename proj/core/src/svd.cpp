/*
 * Copyright 2026 The fastfield Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fastfield/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace fastfield {

namespace {

// Orthogonalizes the columns of `w` in place (m >= n) and accumulates the
// rotations into `v`.
int orthogonalize_columns(Eigen::MatrixXd& w, Eigen::MatrixXd& v, int max_sweeps) {
  const Eigen::Index n = w.cols();
  const double eps = std::numeric_limits<double>::epsilon();
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double alpha = w.col(i).squaredNorm();
        const double beta = w.col(j).squaredNorm();
        const double gamma = w.col(i).dot(w.col(j));
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
          const double wi = w(r, i);
          const double wj = w(r, j);
          w(r, i) = c * wi - s * wj;
          w(r, j) = s * wi + c * wj;
        }
        for (Eigen::Index r = 0; r < v.rows(); ++r) {
          const double vi = v(r, i);
          const double vj = v(r, j);
          v(r, i) = c * vi - s * vj;
          v(r, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }
  return sweep;
}

}  // namespace

SvdResult jacobi_svd(const Eigen::MatrixXd& a, int max_sweeps) {
  const bool transposed = a.rows() < a.cols();
  Eigen::MatrixXd w = transposed ? Eigen::MatrixXd(a.transpose()) : a;
  const Eigen::Index n = w.cols();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const int sweeps = orthogonalize_columns(w, v, max_sweeps);

  Eigen::VectorXd norms(n);
  for (Eigen::Index j = 0; j < n; ++j) norms(j) = w.col(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return norms(x) > norms(y); });

  SvdResult out;
  out.sweeps = sweeps;
  out.singular_values.resize(n);
  Eigen::MatrixXd left(w.rows(), n);
  Eigen::MatrixXd right(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)];
    out.singular_values(k) = norms(j);
    left.col(k) = norms(j) > 0.0 ? Eigen::VectorXd(w.col(j) / norms(j))
                                 : Eigen::VectorXd::Zero(w.rows());
    right.col(k) = v.col(j);
  }
  if (transposed) {
    out.u = std::move(right);
    out.v = std::move(left);
  } else {
    out.u = std::move(left);
    out.v = std::move(right);
  }
  return out;
}

}  // namespace fastfield
