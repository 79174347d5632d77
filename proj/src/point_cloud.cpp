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

#include "cloudfuse/point_cloud.hpp"

#include <string>

#include "cloudfuse/error.hpp"

namespace cloudfuse {

std::string_view surface_class_name(SurfaceClass c) {
  switch (c) {
    case SurfaceClass::kFacade: return "facade";
    case SurfaceClass::kGround: return "ground";
    case SurfaceClass::kRoof: return "roof";
  }
  return "unknown";
}

std::optional<SurfaceClass> parse_surface_class(std::string_view name) {
  for (SurfaceClass c : kSurfaceClasses) {
    if (surface_class_name(c) == name) return c;
  }
  return std::nullopt;
}

void PointCloud::validate() const {
  if (has_colors() && colors.size() != points.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "cloud has " + std::to_string(points.size()) + " points but " +
                    std::to_string(colors.size()) + " colors");
  }
  if (has_labels() && labels.size() != points.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "cloud has " + std::to_string(points.size()) + " points but " +
                    std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
}

}  // namespace cloudfuse
