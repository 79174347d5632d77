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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cloudfuse/fusion.hpp"
#include "cloudfuse/geometry.hpp"
#include "cloudfuse/point_cloud.hpp"
#include "cloudfuse/registration.hpp"

namespace cloudfuse {

// ---------------------------------------------------------------------------
// Point clouds
//
// PLY (ascii / binary_little_endian) with vertex properties x, y, z as float
// or double, optional uchar red/green/blue, and an optional integer `label`
// (SurfaceClass numbering: 0 facade, 1 ground, 2 roof). Unknown scalar and
// list properties are skipped. Cloud metadata rides in header comments:
// `comment source_tag <tag>`, `comment frame_id <id>`, `comment timestamp <t>`.
//
// XYZ text: one `x y z [r g b]` record per line; '#' lines are comments.

enum class PlyEncoding { kBinaryLittleEndian, kAscii };

struct CloudWriteOptions {
  PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian;
};

// Format is chosen from the extension: .ply, otherwise XYZ text.
PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                 const CloudWriteOptions& options = {});

PointCloud parse_ply(std::string_view bytes);
std::string encode_ply(const PointCloud& cloud, PlyEncoding encoding);
PointCloud parse_xyz(std::string_view text);
std::string encode_xyz(const PointCloud& cloud);

// ---------------------------------------------------------------------------
// Correspondence pairs: `sx sy sz tx ty tz` per line, comma or whitespace
// separated; ids follow line order starting at 0.

CorrespondenceSet read_pairs(const std::filesystem::path& path);
void write_pairs(const CorrespondenceSet& pairs, const std::filesystem::path& path);
CorrespondenceSet parse_pairs(std::string_view text);
std::string encode_pairs(const CorrespondenceSet& pairs);

// ---------------------------------------------------------------------------
// Transform documents (JSON, schema "cloudfuse.transform/1").

inline constexpr std::string_view kTransformSchema = "cloudfuse.transform/1";

struct TransformDocument {
  Transform transform;
  std::optional<double> rmse;
  std::vector<double> residuals;
  std::string notes;
};

TransformDocument parse_transform_document(std::string_view text);
std::string encode_transform_document(const TransformDocument& doc);
TransformDocument read_transform_document(const std::filesystem::path& path);
void write_transform_document(const TransformDocument& doc,
                              const std::filesystem::path& path);

Transform read_transform(const std::filesystem::path& path);
void write_transform(const Transform& transform, const std::filesystem::path& path);

// Document written by `register` and the viewer export for one estimate.
TransformDocument registration_document(const RegistrationResult& result,
                                        std::size_t pair_count);

// ---------------------------------------------------------------------------
// Coverage report: flat `key=value` lines, schema "cloudfuse.coverage/1".

std::string encode_coverage_report(const CoverageStats& stats);
std::string coverage_summary(const CoverageStats& stats);

// ---------------------------------------------------------------------------
// UAV pose table and geodesy.

struct PoseRecord {
  int id = 0;
  double latitude = 0.0;   // degrees
  double longitude = 0.0;  // degrees
  double altitude = 0.0;   // meters
  double yaw = 0.0;        // degrees, [0, 360)
};

struct GeoOrigin {
  double latitude = 0.0;
  double longitude = 0.0;
  double altitude = 0.0;
};

// Comma-separated with header `Id, Latitude (°), Longitude (°), Altitude (m),
// Yaw(°)`. Throws ParseError for malformed rows and Error(kValidation) for
// out-of-range values, naming the row.
std::vector<PoseRecord> read_pose_table(const std::filesystem::path& path);
std::vector<PoseRecord> parse_pose_table(std::string_view text);

// WGS-84 geodetic to local east-north-up, meters. The origin maps to (0,0,0).
Point3 geodetic_to_enu(const PoseRecord& record, const GeoOrigin& origin);

// ---------------------------------------------------------------------------
// Shared helpers.

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
// `digits` significant digits, '.' separator regardless of locale.
std::string format_double(double value, int digits);

}  // namespace cloudfuse
