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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cloudfuse/geometry.hpp"
#include "cloudfuse/point_cloud.hpp"
#include "cloudfuse/registration.hpp"

namespace cloudfuse {

struct Box {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();
};

struct UavParams {
  double altitude = 50.0;
  Eigen::Vector2d grid_min{-25.0, -25.0};
  Eigen::Vector2d grid_max{25.0, 25.0};
  double grid_step = 10.0;
  double cone_half_angle_deg = 45.0;
  double oblique_tilt_deg = 45.0;
  double noise_sigma = 0.0;
};

struct MmsParams {
  double height = 2.0;
  double range = 80.0;
  double step = 2.0;
  double noise_sigma = 0.0;
  std::vector<Eigen::Vector2d> trajectory;
};

// Similarity applied to the UAV cloud so that it starts out of alignment.
struct Misregistration {
  bool enabled = true;
  double scale = 0.95;
  double yaw_deg = 2.0;
  Eigen::Vector3d translation{3.0, -2.0, 0.5};
};

struct SceneSpec {
  Eigen::Vector2d ground_x{-40.0, 40.0};
  Eigen::Vector2d ground_y{-40.0, 40.0};
  double spacing = 0.25;
  std::vector<Box> buildings;
  std::map<SurfaceClass, ColorRGB> albedo = {{SurfaceClass::kRoof, {178, 84, 66}},
                                             {SurfaceClass::kFacade, {205, 198, 182}},
                                             {SurfaceClass::kGround, {96, 98, 92}}};
  int color_jitter = 0;
  std::uint64_t seed = 0;
  // Added to every output point: places the emitted clouds' frame so that
  // lattice samples do not sit on voxel faces.
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  UavParams uav;
  MmsParams mms;
  Misregistration misregistration;

  // Throws Error(kInvalidScene) for malformed geometry or sensor settings,
  // including overlapping boxes.
  void validate() const;
};

// JSON document, schema "cloudfuse.scene/1". Missing keys take the defaults
// above.
SceneSpec parse_scene_spec(std::string_view text);
SceneSpec read_scene_spec(const std::filesystem::path& path);

struct SurfaceSample {
  Point3 position = Point3::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  SurfaceClass label = SurfaceClass::kGround;
  ColorRGB color;
};

struct Scene {
  std::vector<SurfaceSample> samples;
  std::vector<Box> boxes;
};

// Ground grid (footprints removed), then per box its roof and four facades,
// each a regular grid at spec.spacing including both edges.
Scene build_scene(const SceneSpec& spec);

// Front-facing and unobstructed: the segment from `viewpoint` to the sample,
// pulled back 1e-6 m at the sample end, misses every open box interior.
bool visible(const Point3& viewpoint, const SurfaceSample& sample, const Scene& scene);
bool segment_hits_box(const Point3& a, const Point3& b, const Box& box);

std::vector<Point3> uav_viewpoints(const UavParams& params);
// Nadir followed by four obliques (+x, -x, +y, -y).
std::vector<Eigen::Vector3d> uav_look_directions(const UavParams& params);
std::vector<Point3> mms_viewpoints(const MmsParams& params);

// Scene-frame clouds with the indices of the samples they were taken from.
struct SensorCloud {
  PointCloud cloud;
  std::vector<std::size_t> sample_index;
};

SensorCloud sample_uav(const Scene& scene, const UavParams& params, std::uint64_t seed = 0);
SensorCloud sample_mms(const Scene& scene, const MmsParams& params, std::uint64_t seed = 0);
PointCloud truth_cloud(const Scene& scene);

Transform misregistration_transform(const Misregistration& m);

// Scene coordinates of emitted points are `sample + spec.offset`.
struct SynthOutput {
  Scene scene;
  SensorCloud uav;   // misregistered when enabled
  SensorCloud mms;
  PointCloud truth;
  Transform misregistration;  // identity when disabled
};

SynthOutput synthesize(const SceneSpec& spec);

// Keypoint pairs (source = UAV point, target = MMS point of the same
// sample) spread by farthest-point sampling over samples seen by both.
CorrespondenceSet pick_keypoint_pairs(const SynthOutput& out, std::size_t count = 7);

}  // namespace cloudfuse
