// Copyright 2026 The cloudfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cloudfuse/registration.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "cloudfuse/error.hpp"
#include "cloudfuse/spatial_hash.hpp"

namespace cloudfuse {
namespace {

// Smallest-to-largest eigenvalue ratio of the source scatter below which the
// configuration is treated as collinear.
constexpr double kCollinearRatio = 1e-12;

void check_pairs(std::span<const CorrespondencePair> pairs) {
  std::unordered_set<int> ids;
  for (const CorrespondencePair& p : pairs) {
    if (!p.source.allFinite() || !p.target.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pair " + std::to_string(p.id) + " has a non-finite coordinate");
    }
    if (!ids.insert(p.id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate pair id " + std::to_string(p.id));
    }
  }
}

double squared_residual(const CorrespondencePair& pair, const Transform& m) {
  const Point3 moved = m.Apply(pair.source);
  const double dx = moved.x() - pair.target.x();
  const double dy = moved.y() - pair.target.y();
  const double dz = moved.z() - pair.target.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

RegistrationResult estimate_transform(std::span<const CorrespondencePair> pairs,
                                      TransformMode mode) {
  if (pairs.size() < 3) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "need at least 3 correspondence pairs, got " +
                    std::to_string(pairs.size()));
  }
  check_pairs(pairs);

  const double n = static_cast<double>(pairs.size());
  Eigen::Vector3d mean_source = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_target = Eigen::Vector3d::Zero();
  for (const CorrespondencePair& p : pairs) {
    mean_source += p.source;
    mean_target += p.target;
  }
  mean_source /= n;
  mean_target /= n;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const CorrespondencePair& p : pairs) {
    const Eigen::Vector3d q = p.source - mean_source;
    const Eigen::Vector3d t = p.target - mean_target;
    cross += t * q.transpose();
    scatter += q * q.transpose();
  }
  cross /= n;
  scatter /= n;
  const double source_variance = scatter.trace();

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
  if (!(lambda(2) > 0.0) || lambda(1) <= kCollinearRatio * lambda(2)) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "source points are coincident or collinear; rotation about their "
                "common line is unobservable");
  }

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Vector3d sign(1.0, 1.0, 1.0);
  if (u.determinant() * v.determinant() < 0.0) sign(2) = -1.0;
  const Eigen::Matrix3d r = u * sign.asDiagonal() * v.transpose();

  double scale = 1.0;
  if (mode == TransformMode::kSimilarity) {
    scale = svd.singularValues().dot(sign) / source_variance;
  }
  const Eigen::Vector3d translation = mean_target - scale * (r * mean_source);

  RegistrationResult out;
  out.mode = mode;
  out.transform = make_transform(RotationMatrix::FromMatrix(r), translation, scale);
  out.residuals = residuals(pairs, out.transform);
  out.rmse = rmse(pairs, out.transform);
  return out;
}

double rmse(std::span<const CorrespondencePair> pairs, const Transform& m) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "rmse of an empty correspondence set");
  }
  double sum = 0.0;
  for (const CorrespondencePair& p : pairs) sum += squared_residual(p, m);
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

std::vector<double> residuals(std::span<const CorrespondencePair> pairs,
                              const Transform& m) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "residuals of an empty correspondence set");
  }
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const CorrespondencePair& p : pairs) {
    out.push_back(std::sqrt(squared_residual(p, m)));
  }
  return out;
}

void IcpParams::validate() const {
  if (max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  }
  if (!(convergence_delta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "convergence_delta must be > 0");
  }
  if (!(max_pair_distance > 0.0) || !std::isfinite(max_pair_distance)) {
    throw Error(ErrorCode::kInvalidArgument, "max_pair_distance must be > 0");
  }
}

IcpResult refine_icp(const PointCloud& source, const PointCloud& target,
                     const Transform& init, const IcpParams& params) {
  params.validate();
  if (source.empty() || target.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "ICP needs two non-empty clouds");
  }
  const SpatialHashGrid grid(target.points, params.max_pair_distance);

  IcpResult out;
  out.transform = init;
  CorrespondenceSet pairs;
  pairs.reserve(source.size());
  for (int iteration = 1; iteration <= params.max_iterations; ++iteration) {
    pairs.clear();
    for (std::size_t i = 0; i < source.size(); ++i) {
      const Point3 moved = out.transform.Apply(source.points[i]);
      if (const auto nn = grid.Nearest(moved)) {
        pairs.push_back({moved, target.points[*nn], static_cast<int>(i)});
      }
    }
    if (pairs.empty()) throw NoOverlapError(iteration);

    const RegistrationResult step = estimate_transform(pairs, params.mode);
    if (!out.rmse_history.empty() && step.rmse > out.rmse_history.back()) break;

    out.transform = step.transform * out.transform;
    out.rmse_history.push_back(step.rmse);
    const std::size_t k = out.rmse_history.size();
    if (step.rmse == 0.0) break;
    if (k >= 2 && out.rmse_history[k - 2] - step.rmse < params.convergence_delta) break;
  }
  return out;
}

}  // namespace cloudfuse
