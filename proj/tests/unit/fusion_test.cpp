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

#include <functional>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "cloudfuse/error.hpp"
#include "oracles.hpp"

namespace cloudfuse {
namespace {

std::vector<oracle::Vec3> ToOracle(const PointCloud& c) {
  std::vector<oracle::Vec3> out;
  for (const Point3& p : c.points) out.push_back({p.x(), p.y(), p.z()});
  return out;
}

std::set<oracle::VoxelIndex> KeySet(const std::vector<VoxelKey>& keys) {
  std::set<oracle::VoxelIndex> out;
  for (const VoxelKey& k : keys) out.insert({k.ix, k.iy, k.iz});
  return out;
}

PointCloud RandomCloud(oracle::Rng& rng, int n, double extent, double offset = 0.0,
                       bool colored = false, bool labeled = false) {
  PointCloud c;
  for (int i = 0; i < n; ++i) {
    c.points.emplace_back(offset + rng.Uniform(-extent, extent), rng.Uniform(-extent, extent),
                          rng.Uniform(-extent, extent));
    if (colored) {
      c.colors.push_back({static_cast<std::uint8_t>(rng.UniformInt(0, 255)),
                          static_cast<std::uint8_t>(rng.UniformInt(0, 255)),
                          static_cast<std::uint8_t>(rng.UniformInt(0, 255))});
    }
    if (labeled) c.labels.push_back(static_cast<SurfaceClass>(rng.UniformInt(0, 2)));
  }
  return c;
}

void ExpectErrorCode(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(VoxelKey, BoundaryGoesToHigherIndex) {
  EXPECT_EQ(voxel_key(Point3(1.0, 0.0, -1.0), 1.0), (VoxelKey{1, 0, -1}));
  EXPECT_EQ(voxel_key(Point3(0.999, -0.001, -0.5), 1.0), (VoxelKey{0, -1, -1}));
}

TEST(VoxelDownsample, SinglePointUnchanged) {
  PointCloud c;
  c.points.emplace_back(1.25, -3.5, 7.0);
  const PointCloud out = voxel_downsample(c, 0.1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.points[0], c.points[0]);
}

TEST(VoxelDownsample, TwoPointsCollapseToCentroid) {
  PointCloud c;
  c.points = {Point3(0.2, 0, 0), Point3(0.4, 0, 0)};
  const PointCloud out = voxel_downsample(c, 1.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out.points[0].x(), 0.3, 1e-15);
  EXPECT_EQ(out.points[0].y(), 0.0);
}

TEST(VoxelDownsample, MatchesBruteForceGroupBy) {
  oracle::Rng rng(21);
  const PointCloud c = RandomCloud(rng, 10000, 5.0);
  const double leaf = 0.7;
  const PointCloud out = voxel_downsample(c, leaf);
  const auto groups = oracle::GroupByVoxel(ToOracle(c), leaf);
  ASSERT_EQ(out.size(), groups.size());
  std::size_t i = 0;
  for (const auto& [key, g] : groups) {  // std::map order == voxel-key order
    const VoxelKey k = voxel_key(out.points[i], leaf);
    EXPECT_EQ(std::make_tuple(k.ix, k.iy, k.iz), key);
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(out.points[i][d], g.first[d] / g.second, 1e-12);
    ++i;
  }
}

TEST(VoxelDownsample, ColorMeanAndLabelMajority) {
  PointCloud c;
  c.points = {Point3(0.1, 0.1, 0.1), Point3(0.2, 0.2, 0.2), Point3(0.3, 0.3, 0.3),
              Point3(0.4, 0.4, 0.4)};
  c.colors = {{0, 0, 0}, {10, 20, 30}, {11, 21, 31}, {255, 255, 255}};
  c.labels = {SurfaceClass::kRoof, SurfaceClass::kFacade, SurfaceClass::kRoof,
              SurfaceClass::kFacade};
  const PointCloud out = voxel_downsample(c, 1.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.colors[0], (ColorRGB{69, 74, 79}));
  // Two roof, two facade: tie resolves to facade (lexicographically first).
  EXPECT_EQ(out.labels[0], SurfaceClass::kFacade);
}

TEST(VoxelDownsample, RejectsBadInput) {
  PointCloud c;
  c.points.emplace_back(0, 0, 0);
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] { voxel_downsample(c, 0.0); });
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] { voxel_downsample(c, -1.0); });
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] { voxel_downsample(PointCloud{}, 1.0); });
}

TEST(VoxelDownsample, RepresentativesStayInTheirVoxel) {
  // Points sitting exactly on voxel boundaries.
  PointCloud c;
  for (int i = 0; i < 7; ++i) c.points.emplace_back(0.1 * 3, 0.3, 0.7);
  for (int i = 0; i < 3; ++i) c.points.emplace_back(0.1, 0.1 + 1e-17, 0.2);
  const PointCloud out = voxel_downsample(c, 0.1);
  EXPECT_EQ(KeySet(occupied_voxels(out, 0.1)), KeySet(occupied_voxels(c, 0.1)));
}

TEST(Fuse, SingleCloudKeepAllIsIdentity) {
  oracle::Rng rng(22);
  PointCloud a = RandomCloud(rng, 300, 3.0, 0.0, true, true);
  a.source_tag = "uav";
  a.frame_id = "enu";
  const PointCloud out = fuse(std::vector<PointCloud>{a}, {0.1, ColorRule::kPreferColoredSource,
                                                          DedupMode::kKeepAll});
  EXPECT_EQ(out.points, a.points);
  EXPECT_EQ(out.colors, a.colors);
  EXPECT_EQ(out.labels, a.labels);
  EXPECT_EQ(out.frame_id, "enu");
  EXPECT_EQ(out.source_tag, "fused");
}

TEST(Fuse, SelfFusionKeepsVoxelSet) {
  oracle::Rng rng(23);
  const PointCloud a = RandomCloud(rng, 2000, 4.0);
  const PointCloud out = fuse(std::vector<PointCloud>{a, a}, {});
  EXPECT_EQ(occupied_voxels(out, 0.1), occupied_voxels(a, 0.1));
}

TEST(Fuse, UnionLawAgainstBruteForce) {
  oracle::Rng rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    const double leaf = rng.Uniform(0.05, 1.0);
    const PointCloud a = RandomCloud(rng, rng.UniformInt(1, 400), 3.0, 0.0, trial % 2 == 0);
    const PointCloud b = RandomCloud(rng, rng.UniformInt(1, 400), 3.0, rng.Uniform(-4, 4));
    FusionPolicy policy{leaf, static_cast<ColorRule>(trial % 3), DedupMode::kOnePerVoxelPerSource};
    const PointCloud out = fuse(std::vector<PointCloud>{a, b}, policy);
    std::set<oracle::VoxelIndex> expected = oracle::OccupiedVoxels(ToOracle(a), leaf);
    const auto vb = oracle::OccupiedVoxels(ToOracle(b), leaf);
    expected.insert(vb.begin(), vb.end());
    EXPECT_EQ(KeySet(occupied_voxels(out, leaf)), expected) << trial;
  }
}

TEST(Fuse, IdempotentAndOrderInsensitiveGeometry) {
  oracle::Rng rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud a = RandomCloud(rng, 500, 2.0, 0.0, true);
    const PointCloud b = RandomCloud(rng, 500, 2.0, 1.0);
    const FusionPolicy policy{0.2, ColorRule::kFirstWins, DedupMode::kOnePerVoxelPerSource};
    const PointCloud ab = fuse(std::vector<PointCloud>{a, b}, policy);
    const PointCloud ba = fuse(std::vector<PointCloud>{b, a}, policy);
    const PointCloud abb = fuse(std::vector<PointCloud>{ab, b}, policy);
    EXPECT_EQ(occupied_voxels(ab, 0.2), occupied_voxels(ba, 0.2));
    EXPECT_EQ(occupied_voxels(abb, 0.2), occupied_voxels(ab, 0.2));
  }
}

TEST(Fuse, PreferColoredSourceConservesColor) {
  oracle::Rng rng(26);
  const PointCloud uav = RandomCloud(rng, 800, 2.0, 0.0, true);
  const PointCloud mms = RandomCloud(rng, 800, 2.0, 0.5);
  const double leaf = 0.3;
  const PointCloud out = fuse(std::vector<PointCloud>{uav, mms}, {leaf});
  const PointCloud uav_rep = voxel_downsample(uav, leaf);
  std::map<VoxelKey, ColorRGB> uav_color;
  for (std::size_t i = 0; i < uav_rep.size(); ++i)
    uav_color[voxel_key(uav_rep.points[i], leaf)] = uav_rep.colors[i];
  ASSERT_TRUE(out.has_colors());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto it = uav_color.find(voxel_key(out.points[i], leaf));
    if (it != uav_color.end()) {
      EXPECT_EQ(out.colors[i], it->second);
    } else {
      EXPECT_EQ(out.colors[i], kUncoloredFill);
    }
  }
}

TEST(Fuse, AverageAndFirstWinsRules) {
  PointCloud a, b;
  a.points = {Point3(0.1, 0.1, 0.1)};
  a.colors = {{100, 0, 0}};
  b.points = {Point3(0.2, 0.2, 0.2)};
  b.colors = {{0, 200, 0}};
  const std::vector<PointCloud> ab = {a, b};
  const PointCloud avg = fuse(ab, {1.0, ColorRule::kAverage});
  ASSERT_EQ(avg.size(), 2u);
  EXPECT_EQ(avg.colors[0], (ColorRGB{50, 100, 0}));
  EXPECT_EQ(avg.colors[1], (ColorRGB{50, 100, 0}));
  const PointCloud first = fuse(ab, {1.0, ColorRule::kFirstWins});
  EXPECT_EQ(first.colors[0], (ColorRGB{100, 0, 0}));
  EXPECT_EQ(first.colors[1], (ColorRGB{100, 0, 0}));
  const PointCloud pref = fuse(ab, {1.0, ColorRule::kPreferColoredSource});
  EXPECT_EQ(pref.colors[0], (ColorRGB{100, 0, 0}));
  EXPECT_EQ(pref.colors[1], (ColorRGB{0, 200, 0}));
}

TEST(Fuse, ErrorPaths) {
  PointCloud a, b;
  a.points = {Point3(0, 0, 0)};
  b.points = {Point3(1, 0, 0)};
  a.frame_id = "enu";
  b.frame_id = "uav";
  ExpectErrorCode(ErrorCode::kFrameMismatch, [&] { fuse(std::vector<PointCloud>{a, b}, {}); });
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] { fuse(std::vector<PointCloud>{}, {}); });
  ExpectErrorCode(ErrorCode::kInvalidArgument,
                  [&] { fuse(std::vector<PointCloud>{a}, FusionPolicy{0.0}); });
}

TEST(CoverageReport, IdenticalClouds) {
  oracle::Rng rng(27);
  const PointCloud a = RandomCloud(rng, 1000, 2.0);
  const CoverageStats s = coverage_report(std::vector<PointCloud>{a, a}, 0.25);
  EXPECT_EQ(s.intersection_count, s.union_count);
  EXPECT_EQ(s.unique, (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(s.completeness_gain, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(s.tags, (std::vector<std::string>{"cloud0", "cloud1"}));
}

TEST(CoverageReport, DisjointClouds) {
  oracle::Rng rng(28);
  PointCloud a = RandomCloud(rng, 500, 2.0);
  PointCloud b = RandomCloud(rng, 700, 2.0, 100.0);
  a.source_tag = "uav";
  b.source_tag = "mms";
  const CoverageStats s = coverage_report(std::vector<PointCloud>{a, b}, 0.25);
  EXPECT_EQ(s.intersection_count, 0u);
  EXPECT_EQ(s.union_count, s.voxels[0] + s.voxels[1]);
  EXPECT_EQ(s.unique[0] + s.unique[1] + s.intersection_count, s.union_count);
  EXPECT_EQ(s.tags, (std::vector<std::string>{"uav", "mms"}));
  for (double g : s.completeness_gain) {
    EXPECT_GT(g, 0.0);
    EXPECT_LE(g, 1.0);
  }
}

TEST(CoverageReport, MonotoneCompletenessWithTruth) {
  oracle::Rng rng(29);
  const PointCloud truth = RandomCloud(rng, 3000, 3.0, 0.0, false, true);
  PointCloud a, b;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (rng.Uniform(0, 1) < 0.6) a.points.push_back(truth.points[i]);
    if (rng.Uniform(0, 1) < 0.4) b.points.push_back(truth.points[i]);
  }
  const std::vector<PointCloud> clouds = {a, b};
  const CoverageStats s = coverage_report(clouds, 0.2, &truth);
  const PointCloud fused = fuse(clouds, {0.2});
  const CoverageStats f = coverage_report(std::vector<PointCloud>{fused}, 0.2, &truth);
  for (SurfaceClass c : kSurfaceClasses) {
    const double fused_cov = f.coverage.at(c)[0];
    EXPECT_EQ(fused_cov, s.union_coverage.at(c));
    EXPECT_GE(fused_cov, s.coverage.at(c)[0]);
    EXPECT_GE(fused_cov, s.coverage.at(c)[1]);
    EXPECT_LE(fused_cov, 1.0);
  }
  PointCloud unlabeled = truth;
  unlabeled.labels.clear();
  ExpectErrorCode(ErrorCode::kInvalidArgument, [&] { coverage_report(clouds, 0.2, &unlabeled); });
}

}  // namespace
}  // namespace cloudfuse
