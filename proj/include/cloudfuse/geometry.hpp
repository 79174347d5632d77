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

#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "cloudfuse/point_cloud.hpp"

namespace cloudfuse {

// Orthonormality tolerance for internally constructed rotations/transforms.
inline constexpr double kStrictTolerance = 1e-9;
// Tolerance admitting matrices published with three-decimal rounding.
inline constexpr double kRelaxedTolerance = 5e-3;

enum class Axis { kX, kY, kZ };

enum class TransformMode { kRigid, kSimilarity };

std::string_view transform_mode_name(TransformMode mode);
std::optional<TransformMode> parse_transform_mode(std::string_view name);

// Radians. theta about X, alpha about Y, beta about Z.
struct EulerAngles {
  double theta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

// A proper rotation: RᵀR = I and det R = +1 within the construction tolerance.
class RotationMatrix {
 public:
  RotationMatrix() : m_(Eigen::Matrix3d::Identity()) {}

  // Throws Error(kInvalidArgument) if `m` is not orthonormal with det +1
  // within `tolerance` (max-abs entry of RᵀR - I, and |det - 1|).
  static RotationMatrix FromMatrix(const Eigen::Matrix3d& m,
                                   double tolerance = kStrictTolerance);

  const Eigen::Matrix3d& matrix() const { return m_; }
  double operator()(int row, int col) const { return m_(row, col); }

 private:
  explicit RotationMatrix(const Eigen::Matrix3d& m) : m_(m) {}

  Eigen::Matrix3d m_;
};

// 4x4 homogeneous matrix [s·R t; 0 1]. Bottom row is exactly (0, 0, 0, 1).
class Transform {
 public:
  Transform() : m_(Eigen::Matrix4d::Identity()), mode_(TransformMode::kRigid) {}

  // Validates the bottom row exactly and the upper-left block against a
  // similarity within `tolerance`. With no explicit mode the transform is
  // rigid iff the recovered scale is within `tolerance` of 1.
  static Transform FromMatrix(const Eigen::Matrix4d& m,
                              std::optional<TransformMode> mode = std::nullopt,
                              double tolerance = kRelaxedTolerance);

  const Eigen::Matrix4d& matrix() const { return m_; }
  TransformMode mode() const { return mode_; }
  Eigen::Matrix3d linear() const { return m_.topLeftCorner<3, 3>(); }
  Eigen::Vector3d translation() const { return m_.topRightCorner<3, 1>(); }

  // block·q + t, evaluated left to right per row.
  Point3 Apply(const Point3& q) const;

  // (*this) ∘ other: apply `other` first.
  Transform operator*(const Transform& other) const;

 private:
  Transform(const Eigen::Matrix4d& m, TransformMode mode) : m_(m), mode_(mode) {}

  friend Transform make_transform(const RotationMatrix&, const Eigen::Vector3d&,
                                  double);
  friend Transform invert_transform(const Transform&);

  Eigen::Matrix4d m_;
  TransformMode mode_;
};

struct Decomposition {
  double scale = 1.0;
  RotationMatrix rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  EulerAngles angles;
};

RotationMatrix axis_rotation(Axis axis, double angle);

// R = Rz(beta) · Ry(alpha) · Rx(theta).
RotationMatrix euler_to_rotation(const EulerAngles& angles);

// Inverse of euler_to_rotation. When |cos alpha| < 1e-9 theta is pinned to
// zero and the remaining freedom goes to beta.
EulerAngles rotation_to_euler(const RotationMatrix& r);

// Throws Error(kInvalidArgument) for s <= 0, non-finite t, or (Matrix3d
// overload) a non-orthonormal r. Mode is rigid iff s == 1.
Transform make_transform(const RotationMatrix& r, const Eigen::Vector3d& t,
                         double s = 1.0);
Transform make_transform(const Eigen::Matrix3d& r, const Eigen::Vector3d& t,
                         double s = 1.0);

// s = cbrt(det(block)); R = nearest rotation to block / s (polar factor).
// Errors: kInvalidTransform (bottom row), kReflectionOrDegenerate (det <= 0),
// kNotASimilarity (block / s off orthonormal by more than `tolerance`).
Decomposition decompose_matrix(const Eigen::Matrix4d& m,
                               double tolerance = kRelaxedTolerance);
Decomposition decompose_transform(const Transform& m,
                                  double tolerance = kRelaxedTolerance);

Point3 apply_transform(const Transform& m, const Point3& q);
// Colors, labels, and metadata pass through unchanged.
PointCloud apply_transform(const Transform& m, const PointCloud& cloud);

// Exact 4x4 inverse of the stored matrix; mode is preserved.
Transform invert_transform(const Transform& m);

}  // namespace cloudfuse
