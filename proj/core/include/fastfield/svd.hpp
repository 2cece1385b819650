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

#pragma once

#include <Eigen/Core>

namespace fastfield {

struct SvdResult {
  Eigen::MatrixXd u;                 // m x r, orthonormal columns
  Eigen::VectorXd singular_values;   // r, descending
  Eigen::MatrixXd v;                 // n x r, orthonormal columns
  int sweeps = 0;
};

/// Thin SVD by one-sided (Hestenes) Jacobi rotations, r = min(m, n).
/// Accurate to working precision for the small dense matrices used by the
/// factorization oracle.
SvdResult jacobi_svd(const Eigen::MatrixXd& a, int max_sweeps = 60);

}  // namespace fastfield
