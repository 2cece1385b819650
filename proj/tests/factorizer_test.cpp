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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "fastfield/analytic.hpp"
#include "fastfield/error.hpp"
#include "fastfield/factorizer.hpp"
#include "fastfield/svd.hpp"
#include "support/property.hpp"

namespace fastfield {
namespace {

using testing::for_all;
using testing::Gen;

Eigen::MatrixXd random_matrix(Gen& g, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = g.normal();
  }
  return m;
}

Eigen::MatrixXd random_low_rank(Gen& g, Eigen::Index rows, Eigen::Index cols, int rank) {
  return random_matrix(g, rows, rank) * random_matrix(g, rank, cols);
}

double tail_energy(const Eigen::MatrixXd& m, int keep) {
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd s = svd.singularValues();
  double e = 0.0;
  for (Eigen::Index i = keep; i < s.size(); ++i) e += s(i) * s(i);
  return e;
}

TEST(SampleGrid, TwoCubedLatticeSitsAtQuarterOffsets) {
  const auto scene = make_analytic_scene("lambert-sphere");
  const SampleGrid g = sample_reference(scene, testing::kUnitBox, {2, 2, 2}, 4);
  ASSERT_EQ(g.num_positions(), 8u);
  for (const Position& p : g.positions) {
    for (int a = 0; a < 3; ++a) EXPECT_DOUBLE_EQ(std::abs(p[a]), 0.25);
  }
  EXPECT_EQ(g.radiance.size(), 8u * 4u * 3u);
}

TEST(SampleGrid, SingleDirectionIsPlusZ) {
  const auto dirs = fibonacci_directions(1);
  ASSERT_EQ(dirs.size(), 1u);
  EXPECT_EQ(dirs[0].vec(), (Vec3{0, 0, 1}));
}

TEST(SampleGrid, FibonacciDirectionsAreUnitAndDistinct) {
  const auto dirs = fibonacci_directions(64);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    EXPECT_NEAR(length(dirs[i].vec()), 1.0, 1e-12);
    for (std::size_t j = 0; j < i; ++j) EXPECT_LT(dot(dirs[i].vec(), dirs[j].vec()), 1.0 - 1e-6);
  }
}

TEST(SampleGrid, DensityPositiveExactlyInsideSphere) {
  const auto scene = make_analytic_scene("lambert-sphere");
  const auto& sphere = std::get<LambertSphere>(scene.shape).shape;
  const SampleGrid g = sample_reference(scene, testing::kUnitBox, {9, 8, 7}, 2);
  for (std::size_t i = 0; i < g.num_positions(); ++i) {
    const Vec3 q = g.positions[i] - sphere.center;
    EXPECT_EQ(g.density[i] > 0.0, dot(q, q) <= sphere.radius * sphere.radius);
  }
}

TEST(SampleGrid, RejectsBadInput) {
  const auto scene = make_analytic_scene("lambert-sphere");
  EXPECT_THROW(sample_reference(scene, testing::kUnitBox, {0, 1, 1}, 2), Error);
  EXPECT_THROW(sample_reference(scene, testing::kUnitBox, {1, 1, 1}, 0), Error);
  EXPECT_THROW(sample_reference(scene, Aabb{{0, 0, 0}, {1, 0, 1}}, {1, 1, 1}, 2), Error);
}

TEST(Svd, MatchesEigenSingularValuesAndReconstructs) {
  for_all(30, 20, [](Gen& g) {
    const Eigen::Index m = g.integer(1, 40);
    const Eigen::Index n = g.integer(1, 40);
    const Eigen::MatrixXd a = random_matrix(g, m, n);
    const SvdResult r = jacobi_svd(a);
    const Eigen::BDCSVD<Eigen::MatrixXd> ref(a);
    const Eigen::VectorXd s = ref.singularValues();
    ASSERT_EQ(r.singular_values.size(), s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      EXPECT_NEAR(r.singular_values(i), s(i), 1e-10 * (1 + s(0)));
      if (i > 0) {
        EXPECT_LE(r.singular_values(i), r.singular_values(i - 1));
      }
    }
    const Eigen::MatrixXd back = r.u * r.singular_values.asDiagonal() * r.v.transpose();
    EXPECT_LT((back - a).norm(), 1e-10 * (1 + a.norm()));
    const auto k = r.singular_values.size();
    EXPECT_LT((r.u.transpose() * r.u - Eigen::MatrixXd::Identity(k, k)).norm(), 1e-10);
    EXPECT_LT((r.v.transpose() * r.v - Eigen::MatrixXd::Identity(k, k)).norm(), 1e-10);
  });
}

TEST(SvdOracle, FullRankIdentityHasZeroResidual) {
  const FactorTables t = fit_svd_oracle(Eigen::MatrixXd::Identity(3, 3), 3);
  EXPECT_NEAR(t.residual, 0.0, 1e-14);
}

TEST(SvdOracle, DiagonalDropsSmallestValue) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m.diagonal() << 3, 2, 1;
  EXPECT_NEAR(fit_svd_oracle(m, 2).residual, 1.0, 1e-14);
}

TEST(SvdOracle, ResidualSquaredIsDiscardedEnergy) {
  for_all(20, 21, [](Gen& g) {
    const Eigen::Index P = g.integer(1, 60);
    const Eigen::Index Q = g.integer(1, 30);
    const int D = g.integer(1, 6);
    const Eigen::MatrixXd m = random_matrix(g, 3 * P, Q);
    const FactorTables t = fit_svd_oracle(m, D);
    const double tail = tail_energy(m, D);
    EXPECT_NEAR(t.residual * t.residual, tail, 1e-8 * std::max(tail, 1e-300) + 1e-20);
  });
}

TEST(SvdOracle, SizeGuard) {
  try {
    fit_svd_oracle(Eigen::MatrixXd::Zero(3 * 20000, 100), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSizeGuardExceeded);
  }
}

TEST(Als, SeparableSceneIsExactAtRankOne) {
  Gen g(22);
  const Eigen::VectorXd f = random_matrix(g, 3 * 50, 1);
  const Eigen::VectorXd h = random_matrix(g, 20, 1);
  const Eigen::MatrixXd m = f * h.transpose();
  EXPECT_LT(fit_als(m, 1, 50, 1).residual, 1e-8);
}

TEST(Als, RecoversRankThree) {
  Gen g(23);
  const Eigen::MatrixXd m = random_low_rank(g, 3 * 80, 24, 3);
  EXPECT_LT(fit_als(m, 3, 200, 2).residual, 1e-6);
  const double truncation = std::sqrt(tail_energy(m, 2));
  EXPECT_NEAR(fit_als(m, 2, 200, 3).residual, truncation, 1e-4);
}

TEST(Als, ResidualNeverIncreases) {
  for_all(20, 24, [](Gen& g) {
    const Eigen::MatrixXd m = random_matrix(g, 3 * g.integer(2, 60), g.integer(2, 30));
    const FactorTables t = fit_als(m, g.integer(1, 5), 60, g.integer(0, 1000));
    ASSERT_FALSE(t.residual_history.empty());
    for (std::size_t i = 1; i < t.residual_history.size(); ++i) {
      EXPECT_LE(t.residual_history[i], t.residual_history[i - 1] + 1e-9);
    }
    EXPECT_NEAR(t.residual, (m - t.reconstruct()).norm(), 1e-9 * (1 + m.norm()));
  });
}

TEST(Als, ResidualNonIncreasingInRank) {
  Gen g(25);
  // Spread singular values so every rank converges quickly.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * 40, 20);
  for (int i = 0; i < 8; ++i) {
    m += std::pow(0.5, i) * random_matrix(g, 3 * 40, 1) * random_matrix(g, 1, 20);
  }
  double prev = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= 8; ++d) {
    const double r = fit_als(m, d, 300, 4).residual;
    EXPECT_LE(r, prev + 1e-9) << "D = " << d;
    prev = r;
  }
}

TEST(Als, MatchesOracleOnRandomGrids) {
  for_all(10, 26, [](Gen& g) {
    const Eigen::Index P = g.integer(4, 128);
    const Eigen::Index Q = g.integer(4, 64);
    const int D = g.integer(1, 4);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * P, Q);
    for (int i = 0; i < 6; ++i) {
      m += std::pow(0.3, i) * random_matrix(g, 3 * P, 1) * random_matrix(g, 1, Q);
    }
    m += 1e-3 * random_matrix(g, 3 * P, Q);
    const double als = fit_als(m, D, 200, 5).residual;
    const double svd = fit_svd_oracle(m, D).residual;
    EXPECT_LE(als, svd + 1e-4);
    EXPECT_GE(als, svd - 1e-9);
  });
}

TEST(Als, RejectsBadArguments) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Ones(6, 4);
  EXPECT_THROW(fit_als(m, 0, 10, 1), Error);
  EXPECT_THROW(fit_als(m, 1, 0, 1), Error);
  EXPECT_THROW(fit_als(Eigen::MatrixXd::Ones(5, 4), 1, 10, 1), Error);
}

TEST(Als, RankDeficientInputSurvives) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * 10, 5);
  const FactorTables t = fit_als(m, 3, 20, 1);
  EXPECT_TRUE(std::isfinite(t.residual));
  EXPECT_LT(t.residual, 1e-12);
}

Rgb combine_direct(const Eigen::MatrixXd& pos, const Eigen::MatrixXd& dir, int p, int q) {
  Rgb c;
  for (Eigen::Index i = 0; i < pos.cols(); ++i) {
    for (int ch = 0; ch < 3; ++ch) c[ch] += pos(3 * p + ch, i) * dir(q, i);
  }
  return c;
}

TEST(FactorTables, PermutationInvariance) {
  for_all(20, 27, [](Gen& g) {
    const int D = g.integer(2, 6);
    const Eigen::MatrixXd m = random_matrix(g, 3 * 12, 9);
    const FactorTables t = fit_svd_oracle(m, D);
    std::vector<int> perm(D);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g.engine());
    FactorTables s = t;
    for (int i = 0; i < D; ++i) {
      s.pos_factors.col(i) = t.pos_factors.col(perm[i]);
      s.dir_factors.col(i) = t.dir_factors.col(perm[i]);
    }
    for (int p = 0; p < 12; ++p) {
      for (int q = 0; q < 9; ++q) {
        const Rgb a = t.combine_at(p, q);
        const Rgb b = s.combine_at(p, q);
        for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(a[ch], b[ch], 1e-12);
      }
    }
  });
}

TEST(FactorTables, GaugeInvariance) {
  for_all(20, 28, [](Gen& g) {
    const int D = g.integer(1, 5);
    const Eigen::MatrixXd m = random_matrix(g, 3 * 10, 7);
    const FactorTables t = fit_als(m, D, 20, 6);
    FactorTables s = t;
    const int i = g.integer(0, D - 1);
    const double scale = std::exp(g.uniform(-3, 3));
    s.pos_factors.col(i) *= scale;
    s.dir_factors.col(i) /= scale;
    for (int p = 0; p < 10; ++p) {
      for (int q = 0; q < 7; ++q) {
        const Rgb a = t.combine_at(p, q);
        const Rgb b = s.combine_at(p, q);
        const Rgb c = combine_direct(t.pos_factors, t.dir_factors, p, q);
        for (int ch = 0; ch < 3; ++ch) {
          EXPECT_NEAR(a[ch], b[ch], 1e-9);
          EXPECT_NEAR(a[ch], c[ch], 1e-12);
        }
      }
    }
  });
}

TEST(TablesToField, LatticeQueryReturnsTabulatedFactors) {
  const auto scene = make_analytic_scene("spec-sphere");
  const SampleGrid grid = sample_reference(scene, testing::kUnitBox, {6, 5, 4}, 16);
  const FactorTables t = fit_svd_oracle(grid, 2);
  const FactorizedField field = tables_to_field(t, grid);
  ASSERT_EQ(field.num_components(), 2);
  for (std::size_t p = 0; p < grid.num_positions(); ++p) {
    const auto m = field.eval_pos(grid.positions[p]);
    EXPECT_EQ(m.sigma, static_cast<float>(grid.density[p]));
    for (int i = 0; i < 2; ++i) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(m.components[3 * i + c], static_cast<float>(t.pos_factors(3 * p + c, i)));
      }
    }
  }
  for (std::size_t q = 0; q < grid.num_directions(); ++q) {
    const auto b = field.eval_dir(grid.directions[q]);
    for (int i = 0; i < 2; ++i) EXPECT_EQ(b.beta[i], static_cast<float>(t.dir_factors(q, i)));
  }
}

TEST(TablesToField, OffLatticeQueryUsesNearestEntry) {
  const auto scene = make_analytic_scene("lambert-sphere");
  const SampleGrid grid = sample_reference(scene, testing::kUnitBox, {4, 4, 4}, 8);
  const FactorizedField field = tables_to_field(fit_svd_oracle(grid, 1), grid);
  for_all(200, 29, [&](Gen& g) {
    const Position p = g.point_in(testing::kUnitBox);
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.num_positions(); ++i) {
      if (length(grid.positions[i] - p) < length(grid.positions[best] - p)) best = i;
    }
    EXPECT_EQ(field.eval_pos(p), field.eval_pos(grid.positions[best]));
  });
}

TEST(TablesToField, ReconstructionErrorBoundedByResidualEntries) {
  const auto scene = make_analytic_scene("spec-sphere");
  const SampleGrid grid = sample_reference(scene, testing::kUnitBox, {5, 5, 5}, 24);
  const Eigen::MatrixXd m = grid.radiance_matrix();
  for (const int D : {1, 2}) {
    const FactorTables t = fit_als(grid, D, 100, 7);
    const Eigen::MatrixXd r = m - t.reconstruct();
    const FactorizedField field = tables_to_field(t, grid);
    for (std::size_t p = 0; p < grid.num_positions(); ++p) {
      for (std::size_t q = 0; q < grid.num_directions(); ++q) {
        const Rgb c = field.radiance(grid.positions[p], grid.directions[q]);
        for (int ch = 0; ch < 3; ++ch) {
          const double want = m(3 * p + ch, q);
          EXPECT_LE(std::abs(c[ch] - want), std::abs(r(3 * p + ch, q)) + 1e-6);
        }
      }
    }
  }
}

TEST(TablesToField, DimensionMismatchThrows) {
  const auto scene = make_analytic_scene("lambert-sphere");
  const SampleGrid grid = sample_reference(scene, testing::kUnitBox, {2, 2, 2}, 4);
  const SampleGrid other = sample_reference(scene, testing::kUnitBox, {3, 2, 2}, 4);
  EXPECT_THROW(tables_to_field(fit_svd_oracle(grid, 1), other), Error);
}

TEST(Tables, SaveLoadRoundTrip) {
  const auto scene = make_analytic_scene("spec-sphere");
  const SampleGrid grid = sample_reference(scene, testing::kUnitBox, {3, 3, 3}, 8);
  const FactorTables t = fit_als(grid, 2, 30, 8);
  const auto path = std::filesystem::temp_directory_path() / "fastfield_tables_test.fft";
  save_tables(t, grid, path);
  const LoadedTables back = load_tables(path);
  EXPECT_EQ(back.tables.pos_factors, t.pos_factors);
  EXPECT_EQ(back.tables.dir_factors, t.dir_factors);
  EXPECT_EQ(back.grid.positions.size(), grid.positions.size());
  EXPECT_EQ(back.grid.density, grid.density);
  const FactorizedField a = tables_to_field(t, grid);
  const FactorizedField b = tables_to_field(back.tables, back.grid);
  for (const Position& p : grid.positions) EXPECT_EQ(a.eval_pos(p), b.eval_pos(p));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace fastfield
