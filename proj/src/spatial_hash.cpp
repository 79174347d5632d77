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

#include "cloudfuse/spatial_hash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cloudfuse/error.hpp"

namespace cloudfuse {

std::size_t SpatialHashGrid::CellHash::operator()(const Cell& c) const {
  std::uint64_t h = static_cast<std::uint64_t>(c.x) * 0x9E3779B97F4A7C15ULL;
  h ^= static_cast<std::uint64_t>(c.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(c.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

SpatialHashGrid::SpatialHashGrid(std::span<const Point3> points, double cell_size)
    : points_(points.begin(), points.end()), cell_size_(cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw Error(ErrorCode::kInvalidArgument, "grid cell size must be positive");
  }
  std::vector<Cell> keys(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) keys[i] = CellOf(points_[i]);
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    const Cell& ka = keys[a];
    const Cell& kb = keys[b];
    if (ka.x != kb.x) return ka.x < kb.x;
    if (ka.y != kb.y) return ka.y < kb.y;
    return ka.z < kb.z;
  });
  std::size_t begin = 0;
  while (begin < order_.size()) {
    std::size_t end = begin + 1;
    while (end < order_.size() && keys[order_[end]] == keys[order_[begin]]) ++end;
    cells_.emplace(keys[order_[begin]], std::make_pair(begin, end));
    begin = end;
  }
}

SpatialHashGrid::Cell SpatialHashGrid::CellOf(const Point3& p) const {
  return Cell{static_cast<std::int64_t>(std::floor(p.x() / cell_size_)),
              static_cast<std::int64_t>(std::floor(p.y() / cell_size_)),
              static_cast<std::int64_t>(std::floor(p.z() / cell_size_))};
}

std::optional<std::size_t> SpatialHashGrid::Nearest(const Point3& probe) const {
  const Cell center = CellOf(probe);
  const double radius_sq = cell_size_ * cell_size_;
  double best_sq = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> best;
  for (std::int64_t dx = -1; dx <= 1; ++dx) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dz = -1; dz <= 1; ++dz) {
        const auto it = cells_.find(Cell{center.x + dx, center.y + dy, center.z + dz});
        if (it == cells_.end()) continue;
        for (std::size_t k = it->second.first; k < it->second.second; ++k) {
          const std::size_t idx = order_[k];
          const double d = (points_[idx] - probe).squaredNorm();
          if (d > radius_sq) continue;
          if (d < best_sq || (d == best_sq && idx < *best)) {
            best_sq = d;
            best = idx;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace cloudfuse
