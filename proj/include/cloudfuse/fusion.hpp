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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cloudfuse/point_cloud.hpp"

namespace cloudfuse {

// floor(coordinate / leaf) per axis, anchored at the frame origin. A point on
// a boundary belongs to the higher-index voxel.
struct VoxelKey {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  std::int64_t iz = 0;

  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

VoxelKey voxel_key(const Point3& p, double leaf);

// Sorted, duplicate-free occupied voxels.
std::vector<VoxelKey> occupied_voxels(const PointCloud& cloud, double leaf);

enum class ColorRule { kPreferColoredSource, kAverage, kFirstWins };
enum class DedupMode { kOnePerVoxelPerSource, kKeepAll };

std::string_view color_rule_name(ColorRule rule);
std::optional<ColorRule> parse_color_rule(std::string_view name);

// Fill for points that end up in a voxel no colored source reaches.
inline constexpr ColorRGB kUncoloredFill{128, 128, 128};

struct FusionPolicy {
  double leaf = 0.1;
  ColorRule color_rule = ColorRule::kPreferColoredSource;
  DedupMode dedup = DedupMode::kOnePerVoxelPerSource;

  void validate() const;
};

// One centroid per occupied voxel, emitted in voxel-key order. Colors are the
// rounded channel mean, labels the majority (ties go to the smaller class).
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

// Merges clouds that share a frame. With kOnePerVoxelPerSource each source
// contributes its voxel centroid to every voxel it occupies, and the output
// is ordered by (voxel key, source index). With kKeepAll every input point is
// kept in input order. Colors follow policy.color_rule per voxel; the output
// carries colors iff any input does and labels iff every input does.
// Errors: kInvalidArgument (no clouds, bad policy), kFrameMismatch.
PointCloud fuse(std::span<const PointCloud> clouds, const FusionPolicy& policy);

struct CoverageStats {
  double leaf = 0.0;
  // Unique report tags, parallel to the input clouds.
  std::vector<std::string> tags;
  std::vector<std::size_t> voxels;
  std::vector<std::size_t> unique;
  std::size_t union_count = 0;
  std::size_t intersection_count = 0;
  // Fraction of union voxels absent from each source.
  std::vector<double> completeness_gain;
  // Present only with a labeled truth cloud: per class, the covered fraction
  // of that class's truth voxels for each source, and for the union.
  bool has_truth = false;
  std::map<SurfaceClass, std::vector<double>> coverage;
  std::map<SurfaceClass, double> union_coverage;
  std::map<SurfaceClass, std::size_t> truth_voxels;
};

// Errors as in fuse, plus kInvalidArgument for an unlabeled truth cloud.
CoverageStats coverage_report(std::span<const PointCloud> clouds, double leaf,
                              const PointCloud* truth = nullptr);

}  // namespace cloudfuse
