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

#include "cloudfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "json.hpp"

#include "cloudfuse/error.hpp"
#include "cloudfuse/io.hpp"

namespace cloudfuse {
namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;
constexpr double kPullback = 1e-6;

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidScene, msg); }

// Evenly spaced values lo, lo + h, ... up to hi (inclusive within 1e-9 steps).
std::vector<double> grid_values(double lo, double hi, double spacing) {
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / spacing + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + spacing * static_cast<double>(i);
  return out;
}

bool inside_open(const Point3& p, const Box& b) {
  return p.x() > b.min.x() && p.x() < b.max.x() && p.y() > b.min.y() && p.y() < b.max.y() &&
         p.z() > b.min.z() && p.z() < b.max.z();
}

bool boxes_overlap(const Box& a, const Box& b) {
  for (int k = 0; k < 3; ++k) {
    if (!(a.min[k] < b.max[k] && b.min[k] < a.max[k])) return false;
  }
  return true;
}

ColorRGB jitter(ColorRGB c, int amount, std::mt19937_64& rng) {
  if (amount <= 0) return c;
  const auto span = static_cast<std::uint64_t>(2 * amount + 1);
  auto channel = [&](std::uint8_t v) {
    const int d = static_cast<int>(rng() % span) - amount;
    return static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + d, 0, 255));
  };
  const auto r = channel(c.r);
  const auto g = channel(c.g);
  const auto b = channel(c.b);
  return {r, g, b};
}

void add_noise(PointCloud* cloud, double sigma, std::uint64_t seed) {
  if (sigma <= 0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (Point3& p : cloud->points) {
    const double dx = normal(rng);
    const double dy = normal(rng);
    const double dz = normal(rng);
    p += Point3(dx, dy, dz);
  }
}

// Streams get distinct seeds so the jitter and each sensor's noise are
// independent of one another.
constexpr std::uint64_t kUavNoiseSalt = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kMmsNoiseSalt = 0xc2b2ae3d27d4eb4fULL;

// ---------------------------------------------------------------------------
// JSON

Eigen::Vector2d vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    invalid(std::string(what) + " must be [a, b]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Point3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number()) {
    invalid(std::string(what) + " must be [x, y, z]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
void read_opt(const json& obj, const char* key, T* out) {
  if (!obj.contains(key)) return;
  try {
    *out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    invalid(std::string("scene key '") + key + "' has the wrong type");
  }
}

ColorRGB rgb(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) invalid(what + " must be [r, g, b]");
  ColorRGB c;
  std::uint8_t* ch[3] = {&c.r, &c.g, &c.b};
  for (int k = 0; k < 3; ++k) {
    if (!j[k].is_number_integer() || j[k].get<int>() < 0 || j[k].get<int>() > 255) {
      invalid(what + " channels must be integers in [0, 255]");
    }
    *ch[k] = static_cast<std::uint8_t>(j[k].get<int>());
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------

void SceneSpec::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(spacing > 0) || !finite(spacing)) invalid("spacing must be positive");
  if (!(ground_x[0] < ground_x[1]) || !(ground_y[0] < ground_y[1]) || !finite(ground_x[0]) ||
      !finite(ground_x[1]) || !finite(ground_y[0]) || !finite(ground_y[1])) {
    invalid("ground extent must be non-empty");
  }
  double top = 0.0;
  for (std::size_t i = 0; i < buildings.size(); ++i) {
    const Box& b = buildings[i];
    for (int k = 0; k < 3; ++k) {
      if (!finite(b.min[k]) || !finite(b.max[k]) || !(b.min[k] < b.max[k])) {
        invalid("building " + std::to_string(i) + " has an empty or non-finite extent");
      }
    }
    if (b.min.z() < 0) invalid("building " + std::to_string(i) + " extends below the ground");
    for (std::size_t j = 0; j < i; ++j) {
      if (boxes_overlap(buildings[j], b)) {
        invalid("buildings " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
      }
    }
    top = std::max(top, b.max.z());
  }
  if (color_jitter < 0 || color_jitter > 255) invalid("color_jitter must be in [0, 255]");

  if (!(uav.altitude > top)) invalid("uav altitude must exceed the tallest building");
  if (!(uav.grid_step > 0) || !(uav.grid_min[0] <= uav.grid_max[0]) ||
      !(uav.grid_min[1] <= uav.grid_max[1])) {
    invalid("uav grid must be non-empty with a positive step");
  }
  if (!(uav.cone_half_angle_deg > 0 && uav.cone_half_angle_deg <= 90)) {
    invalid("uav cone_half_angle_deg must be in (0, 90]");
  }
  if (!(uav.oblique_tilt_deg >= 0 && uav.oblique_tilt_deg < 90)) {
    invalid("uav oblique_tilt_deg must be in [0, 90)");
  }
  if (!(uav.noise_sigma >= 0) || !(mms.noise_sigma >= 0)) invalid("noise_sigma must be >= 0");

  if (!(mms.range > 0) || !(mms.step > 0)) invalid("mms range and step must be positive");
  if (mms.trajectory.empty()) invalid("mms trajectory is empty");
  for (const auto& p : mms.trajectory) {
    if (p[0] < ground_x[0] || p[0] > ground_x[1] || p[1] < ground_y[0] || p[1] > ground_y[1]) {
      invalid("mms trajectory leaves the ground extent");
    }
  }
  for (const Point3& v : mms_viewpoints(mms)) {
    for (const Box& b : buildings) {
      if (inside_open(v, b)) invalid("mms trajectory passes through a building");
    }
  }
  if (!offset.allFinite()) invalid("offset must be finite");
  if (!(misregistration.scale > 0) || !finite(misregistration.yaw_deg) ||
      !misregistration.translation.allFinite()) {
    invalid("misregistration needs a positive scale and finite yaw/translation");
  }
}

SceneSpec parse_scene_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("scene document: ") + e.what());
  }
  if (!doc.is_object()) invalid("scene document must be a JSON object");
  if (doc.contains("schema") && doc["schema"] != "cloudfuse.scene/1") {
    invalid("scene schema must be \"cloudfuse.scene/1\"");
  }
  SceneSpec spec;
  read_opt(doc, "seed", &spec.seed);
  read_opt(doc, "spacing", &spec.spacing);
  read_opt(doc, "color_jitter", &spec.color_jitter);
  if (doc.contains("offset")) spec.offset = vec3(doc["offset"], "offset");
  if (doc.contains("ground")) {
    const auto& g = doc["ground"];
    if (g.contains("x")) spec.ground_x = vec2(g["x"], "ground.x");
    if (g.contains("y")) spec.ground_y = vec2(g["y"], "ground.y");
  }
  if (doc.contains("albedo")) {
    for (const auto& [name, value] : doc["albedo"].items()) {
      const auto cls = parse_surface_class(name);
      if (!cls) invalid("unknown albedo class '" + name + "'");
      spec.albedo[*cls] = rgb(value, "albedo." + name);
    }
  }
  if (doc.contains("buildings")) {
    if (!doc["buildings"].is_array()) invalid("buildings must be an array");
    for (const auto& b : doc["buildings"]) {
      if (!b.contains("min") || !b.contains("max")) invalid("building needs min and max");
      spec.buildings.push_back({vec3(b["min"], "building min"), vec3(b["max"], "building max")});
    }
  }
  if (doc.contains("uav")) {
    const auto& u = doc["uav"];
    read_opt(u, "altitude", &spec.uav.altitude);
    if (u.contains("grid_min")) spec.uav.grid_min = vec2(u["grid_min"], "uav.grid_min");
    if (u.contains("grid_max")) spec.uav.grid_max = vec2(u["grid_max"], "uav.grid_max");
    read_opt(u, "grid_step", &spec.uav.grid_step);
    read_opt(u, "cone_half_angle_deg", &spec.uav.cone_half_angle_deg);
    read_opt(u, "oblique_tilt_deg", &spec.uav.oblique_tilt_deg);
    read_opt(u, "noise_sigma", &spec.uav.noise_sigma);
  }
  if (doc.contains("mms")) {
    const auto& m = doc["mms"];
    read_opt(m, "height", &spec.mms.height);
    read_opt(m, "range", &spec.mms.range);
    read_opt(m, "step", &spec.mms.step);
    read_opt(m, "noise_sigma", &spec.mms.noise_sigma);
    if (m.contains("trajectory")) {
      if (!m["trajectory"].is_array()) invalid("mms.trajectory must be an array");
      for (const auto& p : m["trajectory"]) spec.mms.trajectory.push_back(vec2(p, "trajectory point"));
    }
  }
  if (spec.mms.trajectory.empty()) {
    spec.mms.trajectory = {{spec.ground_x[0] + 5, 0.0}, {spec.ground_x[1] - 5, 0.0}};
  }
  if (doc.contains("misregistration")) {
    const auto& r = doc["misregistration"];
    read_opt(r, "enabled", &spec.misregistration.enabled);
    read_opt(r, "scale", &spec.misregistration.scale);
    read_opt(r, "yaw_deg", &spec.misregistration.yaw_deg);
    if (r.contains("translation")) {
      spec.misregistration.translation = vec3(r["translation"], "misregistration.translation");
    }
  }
  spec.validate();
  return spec;
}

SceneSpec read_scene_spec(const std::filesystem::path& path) {
  return parse_scene_spec(read_file(path));
}

// ---------------------------------------------------------------------------

Scene build_scene(const SceneSpec& spec) {
  spec.validate();
  Scene scene;
  scene.boxes = spec.buildings;
  std::mt19937_64 rng(spec.seed);
  const double h = spec.spacing;
  auto emit = [&](const Point3& p, const Eigen::Vector3d& n, SurfaceClass c) {
    scene.samples.push_back({p, n, c, jitter(spec.albedo.at(c), spec.color_jitter, rng)});
  };

  const auto gx = grid_values(spec.ground_x[0], spec.ground_x[1], h);
  const auto gy = grid_values(spec.ground_y[0], spec.ground_y[1], h);
  for (double x : gx) {
    for (double y : gy) {
      const bool covered = std::any_of(spec.buildings.begin(), spec.buildings.end(), [&](const Box& b) {
        return b.min.z() == 0.0 && x >= b.min.x() && x <= b.max.x() && y >= b.min.y() &&
               y <= b.max.y();
      });
      if (!covered) emit({x, y, 0.0}, Eigen::Vector3d::UnitZ(), SurfaceClass::kGround);
    }
  }

  for (const Box& b : spec.buildings) {
    // Face on plane `axis = value`, gridded over the two other axes.
    auto face = [&](int axis, double value, const Eigen::Vector3d& normal, SurfaceClass c) {
      const int a = axis == 0 ? 1 : 0;
      const int d = axis == 2 ? 1 : 2;
      for (double u : grid_values(b.min[a], b.max[a], h)) {
        for (double v : grid_values(b.min[d], b.max[d], h)) {
          Point3 p;
          p[axis] = value;
          p[a] = u;
          p[d] = v;
          emit(p, normal, c);
        }
      }
    };
    face(2, b.max.z(), Eigen::Vector3d::UnitZ(), SurfaceClass::kRoof);
    face(0, b.min.x(), -Eigen::Vector3d::UnitX(), SurfaceClass::kFacade);
    face(0, b.max.x(), Eigen::Vector3d::UnitX(), SurfaceClass::kFacade);
    face(1, b.min.y(), -Eigen::Vector3d::UnitY(), SurfaceClass::kFacade);
    face(1, b.max.y(), Eigen::Vector3d::UnitY(), SurfaceClass::kFacade);
    if (b.min.z() > 0.0) face(2, b.min.z(), -Eigen::Vector3d::UnitZ(), SurfaceClass::kFacade);
  }
  return scene;
}

bool segment_hits_box(const Point3& a, const Point3& b, const Box& box) {
  const Eigen::Vector3d d = b - a;
  double t0 = 0.0;
  double t1 = 1.0;
  for (int k = 0; k < 3; ++k) {
    if (d[k] == 0.0) {
      if (!(a[k] > box.min[k] && a[k] < box.max[k])) return false;
      continue;
    }
    double ta = (box.min[k] - a[k]) / d[k];
    double tb = (box.max[k] - a[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (!(t0 < t1)) return false;
  }
  return true;
}

bool visible(const Point3& viewpoint, const SurfaceSample& sample, const Scene& scene) {
  const Eigen::Vector3d to_view = viewpoint - sample.position;
  if (!(sample.normal.dot(to_view) > 0.0)) return false;
  const double len = to_view.norm();
  const Point3 end = sample.position + to_view * (kPullback / len);
  for (const Box& b : scene.boxes) {
    if (segment_hits_box(viewpoint, end, b)) return false;
  }
  return true;
}

std::vector<Point3> uav_viewpoints(const UavParams& p) {
  std::vector<Point3> out;
  for (double x : grid_values(p.grid_min[0], p.grid_max[0], p.grid_step)) {
    for (double y : grid_values(p.grid_min[1], p.grid_max[1], p.grid_step)) {
      out.emplace_back(x, y, p.altitude);
    }
  }
  return out;
}

std::vector<Eigen::Vector3d> uav_look_directions(const UavParams& p) {
  const double t = p.oblique_tilt_deg * kPi / 180.0;
  const double s = std::sin(t);
  const double c = std::cos(t);
  return {{0, 0, -1}, {s, 0, -c}, {-s, 0, -c}, {0, s, -c}, {0, -s, -c}};
}

std::vector<Point3> mms_viewpoints(const MmsParams& p) {
  std::vector<Point3> out;
  const auto& traj = p.trajectory;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const Eigen::Vector2d a = traj[i];
    const Eigen::Vector2d b = traj[i + 1];
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / p.step - 1e-9)));
    for (int k = 0; k < n; ++k) {
      const Eigen::Vector2d q = a + (b - a) * (static_cast<double>(k) / n);
      out.emplace_back(q[0], q[1], p.height);
    }
  }
  if (!traj.empty()) out.emplace_back(traj.back()[0], traj.back()[1], p.height);
  return out;
}

SensorCloud sample_uav(const Scene& scene, const UavParams& params, std::uint64_t seed) {
  const auto views = uav_viewpoints(params);
  const auto dirs = uav_look_directions(params);
  const double cos_half = std::cos(params.cone_half_angle_deg * kPi / 180.0) - 1e-12;
  SensorCloud out;
  out.cloud.source_tag = "uav";
  for (std::size_t i = 0; i < scene.samples.size(); ++i) {
    const SurfaceSample& s = scene.samples[i];
    for (const Point3& v : views) {
      const Eigen::Vector3d look = (s.position - v).normalized();
      const bool in_cone = std::any_of(dirs.begin(), dirs.end(),
                                       [&](const Eigen::Vector3d& d) { return look.dot(d) >= cos_half; });
      if (in_cone && visible(v, s, scene)) {
        out.cloud.points.push_back(s.position);
        out.cloud.colors.push_back(s.color);
        out.cloud.labels.push_back(s.label);
        out.sample_index.push_back(i);
        break;
      }
    }
  }
  add_noise(&out.cloud, params.noise_sigma, seed ^ kUavNoiseSalt);
  return out;
}

SensorCloud sample_mms(const Scene& scene, const MmsParams& params, std::uint64_t seed) {
  const auto views = mms_viewpoints(params);
  const double range2 = params.range * params.range;
  SensorCloud out;
  out.cloud.source_tag = "mms";
  for (std::size_t i = 0; i < scene.samples.size(); ++i) {
    const SurfaceSample& s = scene.samples[i];
    for (const Point3& v : views) {
      if ((v - s.position).squaredNorm() > range2) continue;
      if (visible(v, s, scene)) {
        out.cloud.points.push_back(s.position);
        out.cloud.labels.push_back(s.label);
        out.sample_index.push_back(i);
        break;
      }
    }
  }
  add_noise(&out.cloud, params.noise_sigma, seed ^ kMmsNoiseSalt);
  return out;
}

PointCloud truth_cloud(const Scene& scene) {
  PointCloud out;
  out.source_tag = "truth";
  out.points.reserve(scene.samples.size());
  for (const SurfaceSample& s : scene.samples) {
    out.points.push_back(s.position);
    out.colors.push_back(s.color);
    out.labels.push_back(s.label);
  }
  return out;
}

Transform misregistration_transform(const Misregistration& m) {
  if (!m.enabled) return Transform();
  return make_transform(axis_rotation(Axis::kZ, m.yaw_deg * kPi / 180.0), m.translation, m.scale);
}

SynthOutput synthesize(const SceneSpec& spec) {
  SynthOutput out;
  out.scene = build_scene(spec);
  out.uav = sample_uav(out.scene, spec.uav, spec.seed);
  out.mms = sample_mms(out.scene, spec.mms, spec.seed);
  out.truth = truth_cloud(out.scene);
  out.misregistration = misregistration_transform(spec.misregistration);
  for (PointCloud* c : {&out.uav.cloud, &out.mms.cloud, &out.truth}) {
    for (Point3& p : c->points) p += spec.offset;
  }
  out.mms.cloud.frame_id = "scene";
  out.truth.frame_id = "scene";
  if (spec.misregistration.enabled) {
    out.uav.cloud = apply_transform(out.misregistration, out.uav.cloud);
    out.uav.cloud.frame_id = "uav";
  } else {
    out.uav.cloud.frame_id = "scene";
  }
  return out;
}

CorrespondenceSet pick_keypoint_pairs(const SynthOutput& out, std::size_t count) {
  // Positions in the uav/mms clouds of each sample seen by both.
  std::vector<std::pair<std::size_t, std::size_t>> common;
  const auto& iu = out.uav.sample_index;
  const auto& im = out.mms.sample_index;
  for (std::size_t a = 0, b = 0; a < iu.size() && b < im.size();) {
    if (iu[a] < im[b]) {
      ++a;
    } else if (im[b] < iu[a]) {
      ++b;
    } else {
      common.emplace_back(a++, b++);
    }
  }
  if (common.size() < count) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "only " + std::to_string(common.size()) + " samples are seen by both sensors");
  }
  auto position = [&](std::size_t c) { return out.scene.samples[iu[common[c].first]].position; };

  Point3 centroid = Point3::Zero();
  for (std::size_t c = 0; c < common.size(); ++c) centroid += position(c);
  centroid /= static_cast<double>(common.size());

  std::vector<double> dist(common.size());
  for (std::size_t c = 0; c < common.size(); ++c) dist[c] = (position(c) - centroid).squaredNorm();
  CorrespondenceSet pairs;
  for (std::size_t k = 0; k < count; ++k) {
    const auto best = static_cast<std::size_t>(
        std::distance(dist.begin(), std::max_element(dist.begin(), dist.end())));
    pairs.push_back({out.uav.cloud.points[common[best].first],
                     out.mms.cloud.points[common[best].second], static_cast<int>(k)});
    const Point3 chosen = position(best);
    for (std::size_t c = 0; c < common.size(); ++c) {
      dist[c] = k == 0 ? (position(c) - chosen).squaredNorm()
                       : std::min(dist[c], (position(c) - chosen).squaredNorm());
    }
  }
  return pairs;
}

}  // namespace cloudfuse
