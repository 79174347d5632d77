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

#include "cloudfuse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "cloudfuse/error.hpp"

namespace cloudfuse {
namespace {

double orthonormality_deviation(const Eigen::Matrix3d& m) {
  return (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string_view transform_mode_name(TransformMode mode) {
  return mode == TransformMode::kRigid ? "rigid" : "similarity";
}

std::optional<TransformMode> parse_transform_mode(std::string_view name) {
  if (name == "rigid") return TransformMode::kRigid;
  if (name == "similarity") return TransformMode::kSimilarity;
  return std::nullopt;
}

RotationMatrix RotationMatrix::FromMatrix(const Eigen::Matrix3d& m,
                                          double tolerance) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "rotation has non-finite entries");
  }
  const double dev = orthonormality_deviation(m);
  const double det = m.determinant();
  if (dev > tolerance || std::abs(det - 1.0) > tolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                "matrix is not a proper rotation (|RᵀR - I| = " +
                    format_value(dev) + ", det = " + format_value(det) + ")");
  }
  return RotationMatrix(m);
}

Transform Transform::FromMatrix(const Eigen::Matrix4d& m,
                                std::optional<TransformMode> mode,
                                double tolerance) {
  const Decomposition d = decompose_matrix(m, tolerance);
  const bool unit_scale = std::abs(d.scale - 1.0) <= tolerance;
  if (mode == TransformMode::kRigid && !unit_scale) {
    throw Error(ErrorCode::kInvalidTransform,
                "transform declared rigid but its scale is " +
                    format_value(d.scale));
  }
  const TransformMode resolved =
      mode.value_or(unit_scale ? TransformMode::kRigid : TransformMode::kSimilarity);
  return Transform(m, resolved);
}

Point3 Transform::Apply(const Point3& q) const {
  const Eigen::Matrix4d& m = m_;
  return Point3(m(0, 0) * q.x() + m(0, 1) * q.y() + m(0, 2) * q.z() + m(0, 3),
                m(1, 0) * q.x() + m(1, 1) * q.y() + m(1, 2) * q.z() + m(1, 3),
                m(2, 0) * q.x() + m(2, 1) * q.y() + m(2, 2) * q.z() + m(2, 3));
}

Transform Transform::operator*(const Transform& other) const {
  const TransformMode mode =
      (mode_ == TransformMode::kRigid && other.mode_ == TransformMode::kRigid)
          ? TransformMode::kRigid
          : TransformMode::kSimilarity;
  Eigen::Matrix4d product = m_ * other.m_;
  product.row(3) << 0.0, 0.0, 0.0, 1.0;
  return Transform(product, mode);
}

RotationMatrix axis_rotation(Axis axis, double angle) {
  if (!std::isfinite(angle)) {
    throw Error(ErrorCode::kInvalidArgument, "rotation angle is not finite");
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d r;
  switch (axis) {
    case Axis::kX:
      r << 1.0, 0.0, 0.0,
           0.0, c, -s,
           0.0, s, c;
      break;
    case Axis::kY:
      r << c, 0.0, s,
           0.0, 1.0, 0.0,
           -s, 0.0, c;
      break;
    case Axis::kZ:
      r << c, -s, 0.0,
           s, c, 0.0,
           0.0, 0.0, 1.0;
      break;
  }
  return RotationMatrix::FromMatrix(r);
}

RotationMatrix euler_to_rotation(const EulerAngles& angles) {
  const Eigen::Matrix3d rz = axis_rotation(Axis::kZ, angles.beta).matrix();
  const Eigen::Matrix3d ry = axis_rotation(Axis::kY, angles.alpha).matrix();
  const Eigen::Matrix3d rx = axis_rotation(Axis::kX, angles.theta).matrix();
  const Eigen::Matrix3d r = rz * ry * rx;
  return RotationMatrix::FromMatrix(r);
}

EulerAngles rotation_to_euler(const RotationMatrix& rotation) {
  const Eigen::Matrix3d& r = rotation.matrix();
  EulerAngles out;
  // Row 2 of R is (-sin a, cos a sin t, cos a cos t).
  const double cos_alpha = std::hypot(r(2, 1), r(2, 2));
  out.theta = cos_alpha < 1e-9 ? 0.0 : std::atan2(r(2, 1), r(2, 2));
  // Strip Rx(theta); what remains is Rz(beta) Ry(alpha).
  const Eigen::Matrix3d zy =
      r * axis_rotation(Axis::kX, out.theta).matrix().transpose();
  out.beta = std::atan2(-zy(0, 1), zy(1, 1));
  out.alpha = std::atan2(-zy(2, 0), zy(2, 2));
  return out;
}

Transform make_transform(const RotationMatrix& r, const Eigen::Vector3d& t,
                         double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::kInvalidArgument,
                "scale must be positive and finite, got " + format_value(s));
  }
  if (!t.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "translation is not finite");
  }
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = s * r.matrix();
  m.topRightCorner<3, 1>() = t;
  return Transform(m, s == 1.0 ? TransformMode::kRigid : TransformMode::kSimilarity);
}

Transform make_transform(const Eigen::Matrix3d& r, const Eigen::Vector3d& t,
                         double s) {
  return make_transform(RotationMatrix::FromMatrix(r), t, s);
}

Decomposition decompose_matrix(const Eigen::Matrix4d& m, double tolerance) {
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
    std::ostringstream os;
    os << "bottom row must be (0, 0, 0, 1), got (" << m(3, 0) << ", " << m(3, 1)
       << ", " << m(3, 2) << ", " << m(3, 3) << ")";
    throw Error(ErrorCode::kInvalidTransform, os.str());
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidTransform, "matrix has non-finite entries");
  }
  const Eigen::Matrix3d block = m.topLeftCorner<3, 3>();
  const double det = block.determinant();
  if (!(det > 0.0)) {
    throw Error(ErrorCode::kReflectionOrDegenerate,
                "upper-left block has determinant " + format_value(det));
  }
  Decomposition out;
  out.scale = std::cbrt(det);
  const Eigen::Matrix3d normalized = block / out.scale;
  const double dev = orthonormality_deviation(normalized);
  if (dev > tolerance) {
    throw Error(ErrorCode::kNotASimilarity,
                "upper-left block deviates from a scaled rotation by " +
                    format_value(dev) + " (tolerance " + format_value(tolerance) +
                    ")");
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(normalized,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  out.rotation = RotationMatrix::FromMatrix(u * v.transpose());
  out.translation = m.topRightCorner<3, 1>();
  out.angles = rotation_to_euler(out.rotation);
  return out;
}

Decomposition decompose_transform(const Transform& m, double tolerance) {
  return decompose_matrix(m.matrix(), tolerance);
}

Point3 apply_transform(const Transform& m, const Point3& q) { return m.Apply(q); }

PointCloud apply_transform(const Transform& m, const PointCloud& cloud) {
  PointCloud out = cloud;
  for (Point3& p : out.points) p = m.Apply(p);
  return out;
}

Transform invert_transform(const Transform& m) {
  const Eigen::Matrix3d block = m.linear();
  const double det = block.determinant();
  if (!(std::abs(det) > 1e-300) || !std::isfinite(det)) {
    throw Error(ErrorCode::kNotInvertible,
                "upper-left block is singular (det = " + format_value(det) + ")");
  }
  const Eigen::Matrix3d inv = block.inverse();
  Eigen::Matrix4d out = Eigen::Matrix4d::Identity();
  out.topLeftCorner<3, 3>() = inv;
  out.topRightCorner<3, 1>() = -(inv * m.translation());
  return Transform(out, m.mode());
}

}  // namespace cloudfuse
