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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace cloudfuse {

// Local Cartesian coordinates in meters.
using Point3 = Eigen::Vector3d;

struct ColorRGB {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const ColorRGB&, const ColorRGB&) = default;
};

// Declaration order is the lexicographic order of the names; majority-vote
// ties resolve to the smaller enumerator.
enum class SurfaceClass : std::uint8_t { kFacade = 0, kGround = 1, kRoof = 2 };

inline constexpr std::array<SurfaceClass, 3> kSurfaceClasses = {
    SurfaceClass::kFacade, SurfaceClass::kGround, SurfaceClass::kRoof};

std::string_view surface_class_name(SurfaceClass c);
std::optional<SurfaceClass> parse_surface_class(std::string_view name);

// Points with optional parallel colors and labels. An empty colors/labels
// vector means the attribute is absent.
struct PointCloud {
  std::vector<Point3> points;
  std::vector<ColorRGB> colors;
  std::vector<SurfaceClass> labels;
  std::string source_tag;
  std::string frame_id;
  std::string timestamp;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_labels() const { return !labels.empty(); }

  // Throws Error(kInvalidArgument) when a parallel attribute has the wrong
  // length or a coordinate is not finite.
  void validate() const;
};

}  // namespace cloudfuse
