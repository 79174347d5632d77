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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cloudfuse/point_cloud.hpp"

namespace cloudfuse {

// Regular hash grid for fixed-radius nearest-neighbour queries. The cell size
// equals the query radius, so a query visits the 27 cells around the probe.
class SpatialHashGrid {
 public:
  SpatialHashGrid(std::span<const Point3> points, double cell_size);

  // Index of the closest point within `cell_size` of `probe`, ties broken
  // toward the lower index.
  std::optional<std::size_t> Nearest(const Point3& probe) const;

  double cell_size() const { return cell_size_; }

 private:
  struct Cell {
    std::int64_t x, y, z;
    friend bool operator==(const Cell&, const Cell&) = default;
  };
  struct CellHash {
    std::size_t operator()(const Cell& c) const;
  };

  Cell CellOf(const Point3& p) const;

  std::vector<Point3> points_;
  double cell_size_;
  // Point indices sorted by cell; each map entry is a [begin, end) range.
  std::vector<std::size_t> order_;
  std::unordered_map<Cell, std::pair<std::size_t, std::size_t>, CellHash> cells_;
};

}  // namespace cloudfuse
