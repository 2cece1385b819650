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

#include "fastfield/factorizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fastfield/container.hpp"
#include "fastfield/error.hpp"
#include "fastfield/svd.hpp"

namespace fastfield {

namespace {

constexpr char kTablesMagic[] = "FFTB";
constexpr std::uint32_t kTablesVersion = 1;

std::vector<Position> lattice_centers(const Aabb& aabb, LatticeSpec lattice) {
  aabb.validate();
  if (lattice.nx < 1 || lattice.ny < 1 || lattice.nz < 1) {
    throw Error(ErrorCode::kInvalidArgument, "lattice counts must be >= 1");
  }
  const Vec3 e = aabb.extent();
  std::vector<Position> out;
  out.reserve(static_cast<std::size_t>(lattice.count()));
  for (int iz = 0; iz < lattice.nz; ++iz) {
    for (int iy = 0; iy < lattice.ny; ++iy) {
      for (int ix = 0; ix < lattice.nx; ++ix) {
        out.push_back({aabb.min.x + (ix + 0.5) * e.x / lattice.nx,
                       aabb.min.y + (iy + 0.5) * e.y / lattice.ny,
                       aabb.min.z + (iz + 0.5) * e.z / lattice.nz});
      }
    }
  }
  return out;
}

template <typename RadianceFn, typename DensityFn>
SampleGrid sample_grid(const Aabb& aabb, LatticeSpec lattice, int num_directions,
                       RadianceFn&& radiance, DensityFn&& density) {
  SampleGrid g;
  g.aabb = aabb;
  g.lattice = {lattice.nx, lattice.ny, lattice.nz};
  g.positions = lattice_centers(aabb, lattice);
  g.directions = fibonacci_directions(num_directions);
  const std::size_t P = g.positions.size();
  const std::size_t Q = g.directions.size();
  g.radiance.resize(P * Q * 3);
  g.density.resize(P);
  for (std::size_t p = 0; p < P; ++p) {
    g.density[p] = density(g.positions[p]);
    for (std::size_t q = 0; q < Q; ++q) {
      const Rgb c = radiance(g.positions[p], g.directions[q]);
      g.radiance[(p * Q + q) * 3 + 0] = c.x;
      g.radiance[(p * Q + q) * 3 + 1] = c.y;
      g.radiance[(p * Q + q) * 3 + 2] = c.z;
    }
  }
  return g;
}

void check_rank(int num_components, int iterations) {
  if (num_components < 1) throw Error(ErrorCode::kInvalidArgument, "D must be >= 1");
  if (iterations < 1) throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
}

// Solves X * (G + ridge I) = R for X, flagging near-singular G.
Eigen::MatrixXd solve_normal(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs, double ridge,
                             int& rank_deficient) {
  const Eigen::Index d = gram.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo <= 1e-12 * hi) ++rank_deficient;
  const Eigen::MatrixXd damped = gram + ridge * Eigen::MatrixXd::Identity(d, d);
  const Eigen::LLT<Eigen::MatrixXd> llt(damped);
  // The ridge biases well-conditioned solves by ~ridge / eigenvalue. A few
  // refinement steps against the undamped system remove that bias; components
  // along near-null directions of the Gram matrix stay damped.
  Eigen::MatrixXd x = llt.solve(rhs.transpose());
  for (int i = 0; i < 3; ++i) x += llt.solve(rhs.transpose() - gram * x);
  return x.transpose();
}

class TabulatedSource final : public FieldSource {
 public:
  TabulatedSource(const FactorTables& tables, const SampleGrid& grid)
      : aabb_(grid.aabb),
        lattice_(grid.lattice),
        directions_(grid.directions),
        density_(grid.density),
        pos_(tables.pos_factors),
        dir_(tables.dir_factors) {}

  int num_components() const override { return static_cast<int>(pos_.cols()); }

  void eval_pos_into(const Position& p, std::span<float> record) const override {
    int idx[3];
    const Vec3 e = aabb_.extent();
    for (int a = 0; a < 3; ++a) {
      const double u = (p[a] - aabb_.min[a]) / e[a] * lattice_[a];
      idx[a] = std::clamp(static_cast<int>(std::floor(u)), 0, lattice_[a] - 1);
    }
    const std::size_t cell =
        (static_cast<std::size_t>(idx[2]) * lattice_[1] + idx[1]) * lattice_[0] + idx[0];
    record[0] = static_cast<float>(std::max(0.0, density_[cell]));
    for (Eigen::Index i = 0; i < pos_.cols(); ++i) {
      for (int c = 0; c < 3; ++c) {
        record[1 + 3 * i + c] = static_cast<float>(pos_(static_cast<Eigen::Index>(3 * cell) + c, i));
      }
    }
  }

  void eval_dir_into(const Direction& d, std::span<float> beta) const override {
    std::size_t best = 0;
    double best_dot = -2.0;
    for (std::size_t q = 0; q < directions_.size(); ++q) {
      const double s = dot(d.vec(), directions_[q].vec());
      if (s > best_dot) {
        best_dot = s;
        best = q;
      }
    }
    for (Eigen::Index i = 0; i < dir_.cols(); ++i) {
      beta[static_cast<std::size_t>(i)] = static_cast<float>(dir_(static_cast<Eigen::Index>(best), i));
    }
  }

  std::string describe() const override {
    return "tables(P=" + std::to_string(density_.size()) + ", Q=" +
           std::to_string(directions_.size()) + ", D=" + std::to_string(pos_.cols()) + ")";
  }

 private:
  Aabb aabb_;
  std::array<int, 3> lattice_;
  std::vector<Direction> directions_;
  std::vector<double> density_;
  Eigen::MatrixXd pos_;
  Eigen::MatrixXd dir_;
};

}  // namespace

Eigen::MatrixXd SampleGrid::radiance_matrix() const {
  const auto P = static_cast<Eigen::Index>(num_positions());
  const auto Q = static_cast<Eigen::Index>(num_directions());
  Eigen::MatrixXd m(3 * P, Q);
  for (Eigen::Index p = 0; p < P; ++p) {
    for (Eigen::Index q = 0; q < Q; ++q) {
      for (int c = 0; c < 3; ++c) {
        m(3 * p + c, q) = radiance[static_cast<std::size_t>((p * Q + q) * 3 + c)];
      }
    }
  }
  return m;
}

void SampleGrid::validate() const {
  const std::size_t P = num_positions();
  const std::size_t Q = num_directions();
  if (P < 1 || Q < 1) throw Error(ErrorCode::kDimensionMismatch, "grid needs P, Q >= 1");
  if (radiance.size() != P * Q * 3 || density.size() != P ||
      static_cast<std::size_t>(lattice[0]) * lattice[1] * lattice[2] != P) {
    throw Error(ErrorCode::kDimensionMismatch, "grid arrays disagree with P and Q");
  }
  for (double v : radiance) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite radiance");
  }
  for (double v : density) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative density");
  }
}

SampleGrid SampleGrid::from_matrix(const Eigen::MatrixXd& m) {
  if (m.rows() % 3 != 0 || m.rows() == 0 || m.cols() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix rows must be a positive multiple of 3");
  }
  const int P = static_cast<int>(m.rows() / 3);
  const int Q = static_cast<int>(m.cols());
  SampleGrid g;
  g.aabb = {{0, 0, 0}, {1, 1, 1}};
  g.lattice = {P, 1, 1};
  g.positions = lattice_centers(g.aabb, {P, 1, 1});
  g.directions = fibonacci_directions(Q);
  g.density.assign(static_cast<std::size_t>(P), 1.0);
  g.radiance.resize(static_cast<std::size_t>(P) * Q * 3);
  for (int p = 0; p < P; ++p) {
    for (int q = 0; q < Q; ++q) {
      for (int c = 0; c < 3; ++c) {
        g.radiance[(static_cast<std::size_t>(p) * Q + q) * 3 + c] = m(3 * p + c, q);
      }
    }
  }
  return g;
}

std::vector<Direction> fibonacci_directions(int count) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "direction count must be >= 1");
  if (count == 1) return {Direction::normalized({0.0, 0.0, 1.0})};
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Direction> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * i / (count - 1.0);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.push_back(Direction::normalized({r * std::cos(phi), r * std::sin(phi), z}));
  }
  return out;
}

SampleGrid sample_reference(const FactorizedField& field, const Aabb& aabb, LatticeSpec lattice,
                            int num_directions) {
  return sample_grid(
      aabb, lattice, num_directions,
      [&](const Position& p, const Direction& d) { return field.radiance(p, d); },
      [&](const Position& p) { return static_cast<double>(field.eval_pos(p).sigma); });
}

SampleGrid sample_reference(const AnalyticScene& scene, const Aabb& aabb, LatticeSpec lattice,
                            int num_directions) {
  return sample_grid(
      aabb, lattice, num_directions,
      [&](const Position& p, const Direction& d) { return scene.radiance(p, d); },
      [&](const Position& p) { return scene.sigma(p); });
}

Rgb FactorTables::combine_at(int position, int direction) const {
  Rgb c;
  for (int ch = 0; ch < 3; ++ch) {
    c[ch] = pos_factors.row(3 * position + ch).dot(dir_factors.row(direction));
  }
  return c;
}

FactorTables fit_als(const SampleGrid& grid, int num_components, int iterations,
                     std::uint64_t seed, const AlsOptions& options) {
  grid.validate();
  return fit_als(grid.radiance_matrix(), num_components, iterations, seed, options);
}

FactorTables fit_als(const Eigen::MatrixXd& m, int num_components, int iterations,
                     std::uint64_t seed, const AlsOptions& options) {
  check_rank(num_components, iterations);
  if (m.rows() % 3 != 0 || m.rows() == 0 || m.cols() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "radiance matrix must be 3P x Q");
  }
  FactorTables t;
  t.num_positions = static_cast<int>(m.rows() / 3);
  t.num_directions = static_cast<int>(m.cols());
  t.num_components = num_components;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  t.dir_factors.resize(m.cols(), num_components);
  for (Eigen::Index j = 0; j < t.dir_factors.cols(); ++j) {
    for (Eigen::Index i = 0; i < t.dir_factors.rows(); ++i) t.dir_factors(i, j) = dist(rng);
  }

  t.residual_history.reserve(static_cast<std::size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    const Eigen::MatrixXd& B = t.dir_factors;
    t.pos_factors = solve_normal(B.transpose() * B, m * B, options.ridge, t.rank_deficient_solves);
    const Eigen::MatrixXd& U = t.pos_factors;
    t.dir_factors =
        solve_normal(U.transpose() * U, m.transpose() * U, options.ridge, t.rank_deficient_solves);
    t.residual = (m - t.reconstruct()).norm();
    t.residual_history.push_back(t.residual);
  }
  return t;
}

FactorTables fit_svd_oracle(const SampleGrid& grid, int num_components) {
  grid.validate();
  const double entries = 3.0 * static_cast<double>(grid.num_positions()) *
                         static_cast<double>(grid.num_directions());
  if (entries > kSvdOracleMaxEntries) {
    throw Error(ErrorCode::kSizeGuardExceeded, "3PQ = " + std::to_string(entries) + " > 4e6");
  }
  return fit_svd_oracle(grid.radiance_matrix(), num_components);
}

FactorTables fit_svd_oracle(const Eigen::MatrixXd& m, int num_components) {
  check_rank(num_components, 1);
  if (m.rows() % 3 != 0 || m.rows() == 0 || m.cols() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "radiance matrix must be 3P x Q");
  }
  if (static_cast<double>(m.size()) > kSvdOracleMaxEntries) {
    throw Error(ErrorCode::kSizeGuardExceeded, "3PQ = " + std::to_string(m.size()) + " > 4e6");
  }
  const SvdResult svd = jacobi_svd(m);
  const Eigen::Index r = svd.singular_values.size();
  const Eigen::Index keep = std::min<Eigen::Index>(num_components, r);

  FactorTables t;
  t.num_positions = static_cast<int>(m.rows() / 3);
  t.num_directions = static_cast<int>(m.cols());
  t.num_components = num_components;
  t.pos_factors = Eigen::MatrixXd::Zero(m.rows(), num_components);
  t.dir_factors = Eigen::MatrixXd::Zero(m.cols(), num_components);
  for (Eigen::Index i = 0; i < keep; ++i) {
    t.pos_factors.col(i) = svd.u.col(i) * svd.singular_values(i);
    t.dir_factors.col(i) = svd.v.col(i);
  }
  t.residual = (m - t.reconstruct()).norm();
  t.residual_history = {t.residual};
  return t;
}

FactorizedField tables_to_field(const FactorTables& tables, const SampleGrid& grid) {
  const auto P = static_cast<Eigen::Index>(grid.num_positions());
  const auto Q = static_cast<Eigen::Index>(grid.num_directions());
  if (tables.pos_factors.rows() != 3 * P || tables.dir_factors.rows() != Q ||
      tables.pos_factors.cols() != tables.dir_factors.cols() || tables.pos_factors.cols() < 1 ||
      grid.density.size() != grid.num_positions() ||
      static_cast<Eigen::Index>(grid.lattice[0]) * grid.lattice[1] * grid.lattice[2] != P) {
    std::ostringstream msg;
    msg << "tables (" << tables.pos_factors.rows() << "x" << tables.pos_factors.cols() << ", "
        << tables.dir_factors.rows() << "x" << tables.dir_factors.cols()
        << ") do not match grid P=" << P << " Q=" << Q;
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
  grid.aabb.validate();
  return FactorizedField(std::make_shared<const TabulatedSource>(tables, grid));
}

void save_tables(const FactorTables& tables, const SampleGrid& grid,
                 const std::filesystem::path& path) {
  Container c;
  std::copy_n(kTablesMagic, 4, c.magic.begin());
  c.version = kTablesVersion;
  c.meta = {{"num_positions", tables.num_positions},
            {"num_directions", tables.num_directions},
            {"num_components", tables.num_components},
            {"residual", tables.residual},
            {"rank_deficient_solves", tables.rank_deficient_solves},
            {"lattice", grid.lattice},
            {"aabb_min", {grid.aabb.min.x, grid.aabb.min.y, grid.aabb.min.z}},
            {"aabb_max", {grid.aabb.max.x, grid.aabb.max.y, grid.aabb.max.z}}};
  std::vector<double> dirs;
  for (const auto& d : grid.directions) dirs.insert(dirs.end(), {d.x(), d.y(), d.z()});
  // Column-major, as Eigen stores them.
  c.arrays.push_back(ContainerArray::of<double>(
      "pos_factors", std::span<const double>(tables.pos_factors.data(), tables.pos_factors.size())));
  c.arrays.push_back(ContainerArray::of<double>(
      "dir_factors", std::span<const double>(tables.dir_factors.data(), tables.dir_factors.size())));
  c.arrays.push_back(ContainerArray::of<double>("residual_history", tables.residual_history));
  c.arrays.push_back(ContainerArray::of<double>("density", grid.density));
  c.arrays.push_back(ContainerArray::of<double>("directions", dirs));
  write_container(path, c);
}

LoadedTables load_tables(const std::filesystem::path& path) {
  const Container c = read_container(path, kTablesMagic, kTablesVersion);
  LoadedTables out;
  FactorTables& t = out.tables;
  SampleGrid& g = out.grid;
  try {
    t.num_positions = c.meta.at("num_positions").get<int>();
    t.num_directions = c.meta.at("num_directions").get<int>();
    t.num_components = c.meta.at("num_components").get<int>();
    t.residual = c.meta.at("residual").get<double>();
    t.rank_deficient_solves = c.meta.at("rank_deficient_solves").get<int>();
    g.lattice = c.meta.at("lattice").get<std::array<int, 3>>();
    const auto lo = c.meta.at("aabb_min").get<std::array<double, 3>>();
    const auto hi = c.meta.at("aabb_max").get<std::array<double, 3>>();
    g.aabb = {{lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("tables metadata: ") + e.what());
  }
  const int P = t.num_positions, Q = t.num_directions, D = t.num_components;
  if (P < 1 || Q < 1 || D < 1 || g.lattice[0] * g.lattice[1] * g.lattice[2] != P) {
    throw Error(ErrorCode::kParse, "inconsistent table dimensions");
  }
  auto pos = c.array("pos_factors").as<double>("f64");
  auto dir = c.array("dir_factors").as<double>("f64");
  g.density = c.array("density").as<double>("f64");
  auto dirs = c.array("directions").as<double>("f64");
  t.residual_history = c.array("residual_history").as<double>("f64");
  if (pos.size() != static_cast<std::size_t>(3 * P * D) ||
      dir.size() != static_cast<std::size_t>(Q * D) || g.density.size() != static_cast<std::size_t>(P) ||
      dirs.size() != static_cast<std::size_t>(3 * Q)) {
    throw Error(ErrorCode::kParse, "table arrays disagree with declared dimensions");
  }
  t.pos_factors = Eigen::Map<Eigen::MatrixXd>(pos.data(), 3 * P, D);
  t.dir_factors = Eigen::Map<Eigen::MatrixXd>(dir.data(), Q, D);
  g.aabb.validate();
  g.positions = lattice_centers(g.aabb, {g.lattice[0], g.lattice[1], g.lattice[2]});
  for (int q = 0; q < Q; ++q) {
    g.directions.push_back(Direction(Vec3{dirs[3 * q], dirs[3 * q + 1], dirs[3 * q + 2]}));
  }
  return out;
}

}  // namespace fastfield
