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

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "fastfield/analytic.hpp"
#include "fastfield/field.hpp"

namespace fastfield {

struct LatticeSpec {
  int nx = 1;
  int ny = 1;
  int nz = 1;

  int count() const { return nx * ny * nz; }
};

/// Reference plenoptic samples. Positions are lattice bin centers ordered
/// x fastest; radiance is indexed (p * Q + q) * 3 + channel.
struct SampleGrid {
  Aabb aabb;
  std::array<int, 3> lattice{1, 1, 1};
  std::vector<Position> positions;
  std::vector<Direction> directions;
  std::vector<double> radiance;
  std::vector<double> density;

  std::size_t num_positions() const { return positions.size(); }
  std::size_t num_directions() const { return directions.size(); }

  /// The flattened 3P x Q matrix the factorization operates on; row 3p + c.
  Eigen::MatrixXd radiance_matrix() const;
  void validate() const;

  /// Wraps an arbitrary 3P x Q matrix as a grid over a P x 1 x 1 lattice in the
  /// unit cube with Fibonacci directions (density 1). Used for synthetic fits.
  static SampleGrid from_matrix(const Eigen::MatrixXd& m);
};

/// Q deterministic near-uniform unit directions on a Fibonacci spiral. Q = 1
/// yields +z.
std::vector<Direction> fibonacci_directions(int count);

/// Samples a field at lattice bin centers and Fibonacci directions. Throws
/// DegenerateAabb.
SampleGrid sample_reference(const FactorizedField& field, const Aabb& aabb, LatticeSpec lattice,
                            int num_directions);
/// Same sampling, but radiance comes from the scene's closed form.
SampleGrid sample_reference(const AnalyticScene& scene, const Aabb& aabb, LatticeSpec lattice,
                            int num_directions);

struct FactorTables {
  int num_positions = 0;
  int num_directions = 0;
  int num_components = 0;
  Eigen::MatrixXd pos_factors;  // 3P x D, row 3p + c holds channel c of (u, v, w)_i in column i
  Eigen::MatrixXd dir_factors;  // Q x D
  double residual = 0.0;        // Frobenius norm of the fit error
  std::vector<double> residual_history;
  int rank_deficient_solves = 0;

  Eigen::MatrixXd reconstruct() const { return pos_factors * dir_factors.transpose(); }
  Rgb combine_at(int position, int direction) const;
};

struct AlsOptions {
  double ridge = 1e-8;
};

/// Rank-D alternating least squares on the 3P x Q radiance matrix, starting from
/// a seeded uniform [-1, 1] direction factor. The residual is recorded after
/// every iteration and never increases.
FactorTables fit_als(const SampleGrid& grid, int num_components, int iterations, std::uint64_t seed,
                     const AlsOptions& options = {});
FactorTables fit_als(const Eigen::MatrixXd& matrix, int num_components, int iterations,
                     std::uint64_t seed, const AlsOptions& options = {});

/// Globally optimal rank-D approximation via a dense Jacobi SVD. Throws
/// SizeGuardExceeded when 3PQ > 4e6.
FactorTables fit_svd_oracle(const SampleGrid& grid, int num_components);
FactorTables fit_svd_oracle(const Eigen::MatrixXd& matrix, int num_components);

inline constexpr double kSvdOracleMaxEntries = 4e6;

/// Field view of fitted tables: nearest lattice entry for positions, nearest
/// sampled direction for directions. Exact at sample sites.
FactorizedField tables_to_field(const FactorTables& tables, const SampleGrid& grid);

/// Tables plus the grid geometry needed to rebuild the field.
void save_tables(const FactorTables& tables, const SampleGrid& grid,
                 const std::filesystem::path& path);
struct LoadedTables {
  FactorTables tables;
  SampleGrid grid;  // positions, directions, density; radiance left empty
};
LoadedTables load_tables(const std::filesystem::path& path);

}  // namespace fastfield
