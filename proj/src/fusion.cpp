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

#include "cloudfuse/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "cloudfuse/error.hpp"

namespace cloudfuse {
namespace {

void check_leaf(double leaf) {
  if (!(leaf > 0.0) || !std::isfinite(leaf)) {
    throw Error(ErrorCode::kInvalidArgument, "voxel size must be positive and finite");
  }
}

void check_frames(std::span<const PointCloud> clouds, const PointCloud* extra = nullptr) {
  if (clouds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one cloud is required");
  }
  const std::string& frame = clouds.front().frame_id;
  auto check = [&](const PointCloud& c, const std::string& what) {
    if (c.frame_id != frame) {
      throw Error(ErrorCode::kFrameMismatch, what + " is in frame '" + c.frame_id +
                                                 "' but cloud 0 is in frame '" + frame + "'");
    }
    c.validate();
  };
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    check(clouds[i], "cloud " + std::to_string(i));
  }
  if (extra != nullptr) check(*extra, "truth cloud");
}

// Moves `p` by whole ulps until voxel_key(p) == key. A centroid lies inside
// its voxel mathematically; rounding can leave it one ulp outside.
Point3 snap_into_voxel(Point3 p, const VoxelKey& key, double leaf) {
  const std::int64_t want[3] = {key.ix, key.iy, key.iz};
  for (int axis = 0; axis < 3; ++axis) {
    for (int guard = 0; guard < 64; ++guard) {
      const auto idx = static_cast<std::int64_t>(std::floor(p[axis] / leaf));
      if (idx == want[axis]) break;
      p[axis] = std::nextafter(p[axis], idx < want[axis]
                                            ? std::numeric_limits<double>::infinity()
                                            : -std::numeric_limits<double>::infinity());
    }
  }
  return p;
}

ColorRGB mean_color(std::span<const ColorRGB> colors) {
  std::array<unsigned long long, 3> sum{};
  for (const ColorRGB& c : colors) {
    sum[0] += c.r;
    sum[1] += c.g;
    sum[2] += c.b;
  }
  const unsigned long long n = colors.size();
  auto channel = [&](unsigned long long s) {
    return static_cast<std::uint8_t>((s + n / 2) / n);
  };
  return {channel(sum[0]), channel(sum[1]), channel(sum[2])};
}

std::vector<std::size_t> order_by_voxel(const std::vector<VoxelKey>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}

std::string sanitize_tag(const std::string& tag) {
  std::string out = tag;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return out;
}

std::vector<std::string> report_tags(std::span<const PointCloud> clouds) {
  std::vector<std::string> tags;
  std::set<std::string> seen = {"union", "intersection"};
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    std::string tag = clouds[i].source_tag.empty() ? "cloud" + std::to_string(i)
                                                   : sanitize_tag(clouds[i].source_tag);
    if (seen.count(tag) > 0) tag += "_" + std::to_string(i);
    seen.insert(tag);
    tags.push_back(tag);
  }
  return tags;
}

std::size_t count_common(const std::vector<VoxelKey>& a, const std::vector<VoxelKey>& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

}  // namespace

VoxelKey voxel_key(const Point3& p, double leaf) {
  return {static_cast<std::int64_t>(std::floor(p.x() / leaf)),
          static_cast<std::int64_t>(std::floor(p.y() / leaf)),
          static_cast<std::int64_t>(std::floor(p.z() / leaf))};
}

std::vector<VoxelKey> occupied_voxels(const PointCloud& cloud, double leaf) {
  check_leaf(leaf);
  std::vector<VoxelKey> keys;
  keys.reserve(cloud.size());
  for (const Point3& p : cloud.points) keys.push_back(voxel_key(p, leaf));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

std::string_view color_rule_name(ColorRule rule) {
  switch (rule) {
    case ColorRule::kPreferColoredSource: return "prefer-colored";
    case ColorRule::kAverage: return "average";
    case ColorRule::kFirstWins: return "first";
  }
  return "unknown";
}

std::optional<ColorRule> parse_color_rule(std::string_view name) {
  if (name == "prefer-colored" || name == "prefer-colored-source")
    return ColorRule::kPreferColoredSource;
  if (name == "average") return ColorRule::kAverage;
  if (name == "first" || name == "first-wins") return ColorRule::kFirstWins;
  return std::nullopt;
}

void FusionPolicy::validate() const { check_leaf(leaf); }

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  check_leaf(leaf);
  if (cloud.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot downsample an empty cloud");
  }
  cloud.validate();

  std::vector<VoxelKey> keys;
  keys.reserve(cloud.size());
  for (const Point3& p : cloud.points) keys.push_back(voxel_key(p, leaf));
  const std::vector<std::size_t> order = order_by_voxel(keys);

  PointCloud out;
  out.source_tag = cloud.source_tag;
  out.frame_id = cloud.frame_id;
  out.timestamp = cloud.timestamp;
  std::vector<ColorRGB> member_colors;
  std::size_t begin = 0;
  while (begin < order.size()) {
    const VoxelKey& key = keys[order[begin]];
    std::size_t end = begin + 1;
    while (end < order.size() && keys[order[end]] == key) ++end;

    Point3 sum = Point3::Zero();
    for (std::size_t k = begin; k < end; ++k) sum += cloud.points[order[k]];
    out.points.push_back(snap_into_voxel(sum / static_cast<double>(end - begin), key, leaf));

    if (cloud.has_colors()) {
      member_colors.clear();
      for (std::size_t k = begin; k < end; ++k) member_colors.push_back(cloud.colors[order[k]]);
      out.colors.push_back(mean_color(member_colors));
    }
    if (cloud.has_labels()) {
      std::array<std::size_t, kSurfaceClasses.size()> votes{};
      for (std::size_t k = begin; k < end; ++k) {
        ++votes[static_cast<std::size_t>(cloud.labels[order[k]])];
      }
      const auto winner = std::max_element(votes.begin(), votes.end());  // first max wins
      out.labels.push_back(static_cast<SurfaceClass>(winner - votes.begin()));
    }
    begin = end;
  }
  return out;
}

PointCloud fuse(std::span<const PointCloud> clouds, const FusionPolicy& policy) {
  policy.validate();
  check_frames(clouds);

  bool any_colors = false;
  bool all_labels = true;
  for (const PointCloud& c : clouds) {
    any_colors = any_colors || c.has_colors();
    all_labels = all_labels && (c.has_labels() || c.empty());
  }

  // Every contributing point: its voxel, source index, and attributes.
  struct Item {
    VoxelKey key;
    Point3 point;
    std::optional<ColorRGB> color;
    SurfaceClass label = SurfaceClass::kGround;
  };
  std::vector<Item> items;
  for (const PointCloud& c : clouds) {
    if (c.empty()) continue;
    PointCloud reduced;
    const PointCloud* src = &c;
    if (policy.dedup == DedupMode::kOnePerVoxelPerSource) {
      reduced = voxel_downsample(c, policy.leaf);
      src = &reduced;
    }
    for (std::size_t i = 0; i < src->size(); ++i) {
      Item item;
      item.key = voxel_key(src->points[i], policy.leaf);
      item.point = src->points[i];
      if (src->has_colors()) item.color = src->colors[i];
      if (all_labels) item.label = src->labels[i];
      items.push_back(item);
    }
  }

  std::vector<VoxelKey> keys;
  keys.reserve(items.size());
  for (const Item& it : items) keys.push_back(it.key);
  // Stable: within a voxel, items stay in (source, point) order.
  const std::vector<std::size_t> order = order_by_voxel(keys);

  std::vector<ColorRGB> assigned(items.size(), kUncoloredFill);
  if (any_colors) {
    std::vector<ColorRGB> colored;
    std::size_t begin = 0;
    while (begin < order.size()) {
      std::size_t end = begin + 1;
      while (end < order.size() && keys[order[end]] == keys[order[begin]]) ++end;
      colored.clear();
      for (std::size_t k = begin; k < end; ++k) {
        if (items[order[k]].color) colored.push_back(*items[order[k]].color);
      }
      for (std::size_t k = begin; k < end; ++k) {
        const Item& it = items[order[k]];
        ColorRGB& dst = assigned[order[k]];
        if (colored.empty()) {
          dst = kUncoloredFill;
          continue;
        }
        switch (policy.color_rule) {
          case ColorRule::kPreferColoredSource:
            dst = it.color ? *it.color : colored.front();
            break;
          case ColorRule::kAverage:
            dst = mean_color(colored);
            break;
          case ColorRule::kFirstWins:
            dst = colored.front();
            break;
        }
      }
      begin = end;
    }
  }

  PointCloud out;
  out.source_tag = "fused";
  out.frame_id = clouds.front().frame_id;
  out.timestamp = clouds.front().timestamp;
  for (const PointCloud& c : clouds) {
    if (c.timestamp != out.timestamp) out.timestamp.clear();
  }
  auto emit = [&](std::size_t idx) {
    out.points.push_back(items[idx].point);
    if (any_colors) out.colors.push_back(assigned[idx]);
    if (all_labels) out.labels.push_back(items[idx].label);
  };
  if (policy.dedup == DedupMode::kOnePerVoxelPerSource) {
    for (std::size_t idx : order) emit(idx);
  } else {
    for (std::size_t idx = 0; idx < items.size(); ++idx) emit(idx);
  }
  return out;
}

CoverageStats coverage_report(std::span<const PointCloud> clouds, double leaf,
                              const PointCloud* truth) {
  check_leaf(leaf);
  check_frames(clouds, truth);
  if (truth != nullptr && !truth->has_labels() && !truth->empty()) {
    throw Error(ErrorCode::kInvalidArgument, "truth cloud carries no surface labels");
  }

  CoverageStats stats;
  stats.leaf = leaf;
  stats.tags = report_tags(clouds);
  const std::size_t k = clouds.size();

  std::vector<std::vector<VoxelKey>> occupied;
  std::vector<std::pair<VoxelKey, std::size_t>> tagged;
  for (std::size_t i = 0; i < k; ++i) {
    occupied.push_back(occupied_voxels(clouds[i], leaf));
    stats.voxels.push_back(occupied.back().size());
    for (const VoxelKey& key : occupied.back()) tagged.emplace_back(key, i);
  }
  std::sort(tagged.begin(), tagged.end());

  stats.unique.assign(k, 0);
  std::vector<VoxelKey> union_keys;
  std::size_t begin = 0;
  while (begin < tagged.size()) {
    std::size_t end = begin + 1;
    while (end < tagged.size() && tagged[end].first == tagged[begin].first) ++end;
    union_keys.push_back(tagged[begin].first);
    if (end - begin == k) ++stats.intersection_count;
    if (end - begin == 1) ++stats.unique[tagged[begin].second];
    begin = end;
  }
  stats.union_count = union_keys.size();
  for (std::size_t i = 0; i < k; ++i) {
    stats.completeness_gain.push_back(
        stats.union_count == 0
            ? 0.0
            : static_cast<double>(stats.union_count - stats.voxels[i]) /
                  static_cast<double>(stats.union_count));
  }

  if (truth != nullptr) {
    stats.has_truth = true;
    std::map<SurfaceClass, std::vector<VoxelKey>> by_class;
    for (std::size_t i = 0; i < truth->size(); ++i) {
      by_class[truth->labels[i]].push_back(voxel_key(truth->points[i], leaf));
    }
    for (SurfaceClass c : kSurfaceClasses) {
      std::vector<VoxelKey>& keys = by_class[c];
      std::sort(keys.begin(), keys.end());
      keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
      stats.truth_voxels[c] = keys.size();
      const double denom = static_cast<double>(keys.size());
      auto fraction = [&](const std::vector<VoxelKey>& occ) {
        return keys.empty() ? 0.0 : static_cast<double>(count_common(keys, occ)) / denom;
      };
      std::vector<double>& row = stats.coverage[c];
      for (std::size_t i = 0; i < k; ++i) row.push_back(fraction(occupied[i]));
      stats.union_coverage[c] = fraction(union_keys);
    }
  }
  return stats;
}

}  // namespace cloudfuse
