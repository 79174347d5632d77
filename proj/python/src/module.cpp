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

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cloudfuse/error.hpp"
#include "cloudfuse/fusion.hpp"
#include "cloudfuse/geometry.hpp"
#include "cloudfuse/io.hpp"
#include "cloudfuse/registration.hpp"
#include "cloudfuse/synth.hpp"

namespace py = pybind11;
namespace cf = cloudfuse;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Colors = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

void CheckNx3(const py::buffer_info& info, const char* what) {
  if (info.ndim != 2 || info.shape[1] != 3) {
    throw cf::Error(cf::ErrorCode::kInvalidArgument, std::string(what) + " must have shape (N, 3)");
  }
}

std::vector<cf::Point3> ToPoints(const Points& a, const char* what) {
  const auto info = a.request();
  CheckNx3(info, what);
  const double* d = static_cast<const double*>(info.ptr);
  std::vector<cf::Point3> out(info.shape[0]);
  for (py::ssize_t i = 0; i < info.shape[0]; ++i) out[i] = cf::Point3(d[3 * i], d[3 * i + 1], d[3 * i + 2]);
  return out;
}

py::array_t<double> FromPoints(const std::vector<cf::Point3>& pts) {
  py::array_t<double> a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  double* d = a.mutable_data();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int k = 0; k < 3; ++k) d[3 * i + k] = pts[i][k];
  return a;
}

cf::TransformMode ModeFromName(const std::string& name) {
  const auto m = cf::parse_transform_mode(name);
  if (!m) throw cf::Error(cf::ErrorCode::kInvalidArgument, "unknown mode '" + name + "'");
  return *m;
}

cf::CorrespondenceSet MakePairs(const Points& source, const Points& target) {
  const auto s = ToPoints(source, "source");
  const auto t = ToPoints(target, "target");
  if (s.size() != t.size()) throw cf::Error(cf::ErrorCode::kInvalidArgument, "source and target differ in length");
  cf::CorrespondenceSet pairs;
  for (std::size_t i = 0; i < s.size(); ++i) pairs.push_back({s[i], t[i], static_cast<int>(i)});
  return pairs;
}

py::dict CoverageDict(const cf::CoverageStats& st) {
  py::dict d;
  d["voxel"] = st.leaf;
  d["tags"] = st.tags;
  d["voxels"] = st.voxels;
  d["unique"] = st.unique;
  d["union"] = st.union_count;
  d["intersection"] = st.intersection_count;
  d["gain"] = st.completeness_gain;
  if (st.has_truth) {
    py::dict cov, uni, truth;
    for (cf::SurfaceClass c : cf::kSurfaceClasses) {
      const std::string name(cf::surface_class_name(c));
      cov[name.c_str()] = st.coverage.at(c);
      uni[name.c_str()] = st.union_coverage.at(c);
      truth[name.c_str()] = st.truth_voxels.at(c);
    }
    d["coverage"] = cov;
    d["union_coverage"] = uni;
    d["truth_voxels"] = truth;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_cloudfuse, m) {
  m.doc() = "Native bindings for cloudfuse.";

  static py::exception<cf::Error> error(m, "CloudfuseError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const cf::Error& e) {
      py::object exc = py::handle(error.ptr())(e.what());
      exc.attr("code") = std::string(cf::error_code_name(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<cf::PointCloud>(m, "PointCloud")
      .def(py::init<>())
      .def(py::init([](const Points& points, std::optional<Colors> colors, std::optional<py::array_t<int>> labels,
                       std::string source_tag, std::string frame_id) {
             cf::PointCloud c;
             c.points = ToPoints(points, "points");
             if (colors) {
               const auto info = colors->request();
               CheckNx3(info, "colors");
               const auto* d = static_cast<const std::uint8_t*>(info.ptr);
               for (py::ssize_t i = 0; i < info.shape[0]; ++i) c.colors.push_back({d[3 * i], d[3 * i + 1], d[3 * i + 2]});
             }
             if (labels) {
               for (py::ssize_t i = 0; i < labels->size(); ++i) {
                 const int v = labels->at(i);
                 if (v < 0 || v > 2) throw cf::Error(cf::ErrorCode::kInvalidArgument, "label out of range");
                 c.labels.push_back(static_cast<cf::SurfaceClass>(v));
               }
             }
             c.source_tag = std::move(source_tag);
             c.frame_id = std::move(frame_id);
             c.validate();
             return c;
           }),
           py::arg("points"), py::arg("colors") = py::none(), py::arg("labels") = py::none(),
           py::arg("source_tag") = "", py::arg("frame_id") = "")
      .def("__len__", &cf::PointCloud::size)
      .def_property_readonly("points", [](const cf::PointCloud& c) { return FromPoints(c.points); })
      .def_property_readonly("colors",
                             [](const cf::PointCloud& c) -> py::object {
                               if (!c.has_colors()) return py::none();
                               py::array_t<std::uint8_t> a({static_cast<py::ssize_t>(c.size()), py::ssize_t{3}});
                               auto* d = a.mutable_data();
                               for (std::size_t i = 0; i < c.size(); ++i) {
                                 d[3 * i] = c.colors[i].r;
                                 d[3 * i + 1] = c.colors[i].g;
                                 d[3 * i + 2] = c.colors[i].b;
                               }
                               return a;
                             })
      .def_property_readonly("labels",
                             [](const cf::PointCloud& c) -> py::object {
                               if (!c.has_labels()) return py::none();
                               py::array_t<std::uint8_t> a(std::vector<py::ssize_t>{static_cast<py::ssize_t>(c.size())});
                               auto view = a.mutable_unchecked<1>();
                               for (std::size_t i = 0; i < c.size(); ++i)
                                 view(static_cast<py::ssize_t>(i)) = static_cast<std::uint8_t>(c.labels[i]);
                               return a;
                             })
      .def_readwrite("source_tag", &cf::PointCloud::source_tag)
      .def_readwrite("frame_id", &cf::PointCloud::frame_id)
      .def_readwrite("timestamp", &cf::PointCloud::timestamp);

  py::class_<cf::Transform>(m, "Transform")
      .def(py::init<>())
      .def_static(
          "from_matrix",
          [](const Eigen::Matrix4d& mat, std::optional<std::string> mode) {
            std::optional<cf::TransformMode> md;
            if (mode) md = ModeFromName(*mode);
            return cf::Transform::FromMatrix(mat, md);
          },
          py::arg("matrix"), py::arg("mode") = py::none())
      .def_property_readonly("matrix", &cf::Transform::matrix)
      .def_property_readonly("mode", [](const cf::Transform& t) { return std::string(cf::transform_mode_name(t.mode())); })
      .def_property_readonly("scale", [](const cf::Transform& t) { return cf::decompose_transform(t).scale; })
      .def("inverse", &cf::invert_transform)
      .def("__matmul__", &cf::Transform::operator*)
      .def("apply", [](const cf::Transform& t, const Points& pts) {
        auto p = ToPoints(pts, "points");
        for (auto& q : p) q = t.Apply(q);
        return FromPoints(p);
      });

  py::class_<cf::RegistrationResult>(m, "RegistrationResult")
      .def_readonly("transform", &cf::RegistrationResult::transform)
      .def_readonly("rmse", &cf::RegistrationResult::rmse)
      .def_readonly("residuals", &cf::RegistrationResult::residuals);

  py::class_<cf::IcpResult>(m, "IcpResult")
      .def_readonly("transform", &cf::IcpResult::transform)
      .def_readonly("rmse_history", &cf::IcpResult::rmse_history);

  m.def(
      "estimate_transform",
      [](const Points& source, const Points& target, const std::string& mode) {
        return cf::estimate_transform(MakePairs(source, target), ModeFromName(mode));
      },
      py::arg("source"), py::arg("target"), py::arg("mode") = "similarity");

  m.def(
      "refine_icp",
      [](const cf::PointCloud& source, const cf::PointCloud& target, const cf::Transform& init,
         int max_iterations, double max_pair_distance, double convergence_delta, const std::string& mode) {
        cf::IcpParams p;
        p.max_iterations = max_iterations;
        p.max_pair_distance = max_pair_distance;
        p.convergence_delta = convergence_delta;
        p.mode = ModeFromName(mode);
        py::gil_scoped_release release;
        return cf::refine_icp(source, target, init, p);
      },
      py::arg("source"), py::arg("target"), py::arg("init") = cf::Transform(), py::arg("max_iterations") = 50,
      py::arg("max_pair_distance") = 1.0, py::arg("convergence_delta") = 1e-6, py::arg("mode") = "rigid");

  m.def("apply_transform", py::overload_cast<const cf::Transform&, const cf::PointCloud&>(&cf::apply_transform),
        py::arg("transform"), py::arg("cloud"));

  m.def(
      "fuse",
      [](const std::vector<cf::PointCloud>& clouds, double voxel, const std::string& color_rule, bool keep_all) {
        const auto rule = cf::parse_color_rule(color_rule);
        if (!rule) throw cf::Error(cf::ErrorCode::kInvalidArgument, "unknown color rule '" + color_rule + "'");
        cf::FusionPolicy policy;
        policy.leaf = voxel;
        policy.color_rule = *rule;
        policy.dedup = keep_all ? cf::DedupMode::kKeepAll : cf::DedupMode::kOnePerVoxelPerSource;
        return cf::fuse(clouds, policy);
      },
      py::arg("clouds"), py::arg("voxel") = 0.1, py::arg("color_rule") = "prefer-colored",
      py::arg("keep_all") = false);

  m.def(
      "coverage_report",
      [](const std::vector<cf::PointCloud>& clouds, double voxel, std::optional<cf::PointCloud> truth) {
        return CoverageDict(cf::coverage_report(clouds, voxel, truth ? &*truth : nullptr));
      },
      py::arg("clouds"), py::arg("voxel") = 0.1, py::arg("truth") = py::none());

  m.def("read_cloud", &cf::read_cloud, py::arg("path"));
  m.def(
      "write_cloud",
      [](const std::filesystem::path& path, const cf::PointCloud& cloud, bool ascii) {
        cf::CloudWriteOptions opt;
        if (ascii) opt.encoding = cf::PlyEncoding::kAscii;
        cf::write_cloud(cloud, path, opt);
      },
      py::arg("path"), py::arg("cloud"), py::arg("ascii") = false);
  m.def("read_transform", &cf::read_transform, py::arg("path"));
  m.def(
      "write_transform", [](const std::filesystem::path& path, const cf::Transform& t) { cf::write_transform(t, path); },
      py::arg("path"), py::arg("transform"));
  m.def(
      "read_pairs",
      [](const std::filesystem::path& path) {
        std::vector<cf::Point3> s, t;
        for (const auto& p : cf::read_pairs(path)) {
          s.push_back(p.source);
          t.push_back(p.target);
        }
        return py::make_tuple(FromPoints(s), FromPoints(t));
      },
      py::arg("path"));

  m.def(
      "synthesize",
      [](const std::string& spec_json, std::optional<std::uint64_t> seed) {
        cf::SceneSpec spec = cf::parse_scene_spec(spec_json);
        if (seed) spec.seed = *seed;
        cf::SynthOutput out;
        {
          py::gil_scoped_release release;
          out = cf::synthesize(spec);
        }
        py::dict d;
        d["uav"] = out.uav.cloud;
        d["mms"] = out.mms.cloud;
        d["truth"] = out.truth;
        d["misregistration"] = out.misregistration;
        return d;
      },
      py::arg("spec_json"), py::arg("seed") = py::none());
}
