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

#pragma once

#include <span>
#include <vector>

#include "cloudfuse/geometry.hpp"
#include "cloudfuse/point_cloud.hpp"

namespace cloudfuse {

// One keypoint match: `source` in the frame being aligned, `target` in the
// reference frame.
struct CorrespondencePair {
  Point3 source = Point3::Zero();
  Point3 target = Point3::Zero();
  int id = 0;
};

using CorrespondenceSet = std::vector<CorrespondencePair>;

struct RegistrationResult {
  Transform transform;
  double rmse = 0.0;
  std::vector<double> residuals;
  TransformMode mode = TransformMode::kSimilarity;
};

// Closed-form least squares over the mode's family, uniform weights.
// Errors: kInsufficientCorrespondences (< 3 pairs), kDegenerateConfiguration
// (source points coincident or collinear), kInvalidArgument (non-finite or
// duplicate ids).
RegistrationResult estimate_transform(std::span<const CorrespondencePair> pairs,
                                      TransformMode mode);

// sqrt((1/N) Σ |M·q_i - p_i|²). Throws kInvalidArgument on an empty set.
double rmse(std::span<const CorrespondencePair> pairs, const Transform& m);

// |M·q_i - p_i| in input order. Throws kInvalidArgument on an empty set.
std::vector<double> residuals(std::span<const CorrespondencePair> pairs,
                              const Transform& m);

struct IcpParams {
  int max_iterations = 50;
  double convergence_delta = 1e-6;
  double max_pair_distance = 1.0;
  TransformMode mode = TransformMode::kRigid;

  void validate() const;
};

struct IcpResult {
  Transform transform;
  // rmse over the surviving pairs after each accepted iteration.
  std::vector<double> rmse_history;
};

// Point-to-point ICP starting from `init`. An iteration whose rmse exceeds
// the previous one is discarded and ends the refinement, so the history is
// non-increasing. Throws NoOverlapError when no source point has a target
// neighbour within params.max_pair_distance.
IcpResult refine_icp(const PointCloud& source, const PointCloud& target,
                     const Transform& init, const IcpParams& params = {});

}  // namespace cloudfuse
