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

#include "cli.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <ostream>

#include "CLI11.hpp"

#include "cloudfuse/error.hpp"
#include "cloudfuse/fusion.hpp"
#include "cloudfuse/io.hpp"
#include "cloudfuse/registration.hpp"
#include "cloudfuse/service.hpp"
#include "cloudfuse/synth.hpp"

namespace cloudfuse::cli {
namespace {

CloudWriteOptions write_options(bool ascii) {
  return {ascii ? PlyEncoding::kAscii : PlyEncoding::kBinaryLittleEndian};
}

const std::map<std::string, TransformMode> kModes = {{"rigid", TransformMode::kRigid},
                                                      {"similarity", TransformMode::kSimilarity}};
const std::map<std::string, ColorRule> kColorRules = {
    {"prefer-colored", ColorRule::kPreferColoredSource},
    {"average", ColorRule::kAverage},
    {"first", ColorRule::kFirstWins}};
const std::map<std::string, DedupMode> kDedup = {{"per-source", DedupMode::kOnePerVoxelPerSource},
                                                  {"keep-all", DedupMode::kKeepAll}};

// --- register --------------------------------------------------------------

struct RegisterArgs {
  std::string source, target, pairs, out;
  TransformMode mode = TransformMode::kSimilarity;
  bool icp = false;
  double icp_distance = 1.0;
  int icp_iterations = 50;
};

void do_register(const RegisterArgs& a, std::ostream& out) {
  const PointCloud source = read_cloud(a.source);
  const PointCloud target = read_cloud(a.target);
  const CorrespondenceSet pairs = read_pairs(a.pairs);
  RegistrationResult result = estimate_transform(pairs, a.mode);
  TransformDocument doc = registration_document(result, pairs.size());
  if (a.icp) {
    IcpParams params;
    params.mode = a.mode;
    params.max_pair_distance = a.icp_distance;
    params.max_iterations = a.icp_iterations;
    const IcpResult icp = refine_icp(source, target, result.transform, params);
    doc.transform = icp.transform;
    doc.residuals = residuals(pairs, icp.transform);
    doc.rmse = rmse(pairs, icp.transform);
    doc.notes += "; ICP refined over " + std::to_string(icp.rmse_history.size()) +
                 " iterations, cloud rmse " + format_double(icp.rmse_history.back());
  }
  if (a.out.empty()) {
    out << encode_transform_document(doc);
  } else {
    write_transform_document(doc, a.out);
    out << "rmse " << format_double(*doc.rmse) << " m over " << pairs.size() << " pairs -> "
        << a.out << "\n";
  }
}

// --- apply -----------------------------------------------------------------

struct ApplyArgs {
  std::string transform, in, out, frame;
  bool ascii = false;
};

void do_apply(const ApplyArgs& a, std::ostream&) {
  const Transform t = read_transform(a.transform);
  PointCloud cloud = apply_transform(t, read_cloud(a.in));
  if (!a.frame.empty()) cloud.frame_id = a.frame;
  write_cloud(cloud, a.out, write_options(a.ascii));
}

// --- fuse ------------------------------------------------------------------

struct FuseArgs {
  std::vector<std::string> in;
  std::string out;
  FusionPolicy policy;
  bool ascii = false;
};

void do_fuse(const FuseArgs& a, std::ostream& out) {
  a.policy.validate();
  std::vector<PointCloud> clouds;
  for (const auto& p : a.in) clouds.push_back(read_cloud(p));
  const PointCloud fused = fuse(clouds, a.policy);
  write_cloud(fused, a.out, write_options(a.ascii));
  out << fused.size() << " points -> " << a.out << "\n";
}

// --- stats -----------------------------------------------------------------

struct StatsArgs {
  std::vector<std::string> in;
  std::string truth, out;
  double voxel = 0.1;
};

void do_stats(const StatsArgs& a, std::ostream& out) {
  std::vector<PointCloud> clouds;
  for (const auto& p : a.in) clouds.push_back(read_cloud(p));
  std::optional<PointCloud> truth;
  if (!a.truth.empty()) truth = read_cloud(a.truth);
  const CoverageStats stats = coverage_report(clouds, a.voxel, truth ? &*truth : nullptr);
  if (a.out.empty()) {
    out << encode_coverage_report(stats);
  } else {
    write_file_atomic(a.out, encode_coverage_report(stats));
    out << coverage_summary(stats);
  }
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string spec, out_uav, out_mms, out_truth, out_misreg, out_pairs;
  std::optional<std::uint64_t> seed;
  std::size_t pair_count = 7;
  bool ascii = false;
};

void do_synth(const SynthArgs& a, std::ostream& out) {
  SceneSpec spec = read_scene_spec(a.spec);
  if (a.seed) spec.seed = *a.seed;
  const SynthOutput s = synthesize(spec);
  std::optional<CorrespondenceSet> pairs;
  if (!a.out_pairs.empty()) pairs = pick_keypoint_pairs(s, a.pair_count);
  write_cloud(s.uav.cloud, a.out_uav, write_options(a.ascii));
  write_cloud(s.mms.cloud, a.out_mms, write_options(a.ascii));
  if (!a.out_truth.empty()) write_cloud(s.truth, a.out_truth, write_options(a.ascii));
  if (!a.out_misreg.empty()) {
    write_transform_document(
        {s.misregistration, std::nullopt, {}, "misregistration applied to the UAV cloud (scene to uav frame)"},
        a.out_misreg);
  }
  if (pairs) write_pairs(*pairs, a.out_pairs);
  out << "scene " << s.scene.samples.size() << " samples, uav " << s.uav.cloud.size()
      << " points, mms " << s.mms.cloud.size() << " points\n";
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string source, target, web_root, host = "127.0.0.1";
  int port = 0;
  std::size_t lod_budget = kDefaultLodBudget;
};

void do_serve(const ServeArgs& a, std::ostream& out) {
  Session session(read_cloud(a.source), read_cloud(a.target), a.lod_budget);
  out << "serving on http://" << a.host << ":" << a.port << std::endl;
  serve(session, a.host, a.port, {a.web_root});
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Point-cloud registration and fusion toolkit", "cloudfuse"};
  app.require_subcommand(1);
  std::function<void()> action;

  RegisterArgs reg;
  auto* r = app.add_subcommand("register", "Estimate the source-to-target transform from keypoint pairs");
  r->add_option("--source", reg.source, "Source cloud (.ply or .xyz)")->required();
  r->add_option("--target", reg.target, "Target (reference) cloud")->required();
  r->add_option("--pairs", reg.pairs, "Pairs file: sx sy sz tx ty tz per line")->required();
  r->add_option("--mode", reg.mode, "rigid or similarity")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case))
      ->default_str("similarity");
  r->add_flag("--icp", reg.icp, "Refine with point-to-point ICP on the clouds");
  r->add_option("--icp-distance", reg.icp_distance, "ICP pairing radius, meters")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  r->add_option("--icp-iterations", reg.icp_iterations, "ICP iteration cap")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  r->add_option("--out", reg.out, "Transform document (stdout when omitted)");
  r->callback([&] { action = [&] { do_register(reg, out); }; });

  ApplyArgs ap;
  auto* a = app.add_subcommand("apply", "Transform a cloud");
  a->add_option("--transform", ap.transform, "Transform document")->required();
  a->add_option("--in", ap.in, "Input cloud")->required();
  a->add_option("--out", ap.out, "Output cloud")->required();
  a->add_option("--frame", ap.frame, "frame_id for the output (kept when omitted)");
  a->add_flag("--ascii", ap.ascii, "Write ASCII PLY");
  a->callback([&] { action = [&] { do_apply(ap, out); }; });

  FuseArgs fu;
  auto* f = app.add_subcommand("fuse", "Voxel-level fusion of aligned clouds");
  f->add_option("--in", fu.in, "Input clouds, all in one frame")->required()->expected(1, -1);
  f->add_option("--voxel", fu.policy.leaf, "Voxel size, meters")->required()->check(CLI::PositiveNumber);
  f->add_option("--color-rule", fu.policy.color_rule, "prefer-colored, average or first")
      ->transform(CLI::CheckedTransformer(kColorRules, CLI::ignore_case))
      ->default_str("prefer-colored");
  f->add_option("--dedup", fu.policy.dedup, "per-source or keep-all")
      ->transform(CLI::CheckedTransformer(kDedup, CLI::ignore_case))
      ->default_str("per-source");
  f->add_option("--out", fu.out, "Fused cloud")->required();
  f->add_flag("--ascii", fu.ascii, "Write ASCII PLY");
  f->callback([&] { action = [&] { do_fuse(fu, out); }; });

  StatsArgs st;
  auto* s = app.add_subcommand("stats", "Voxel coverage report");
  s->add_option("--in", st.in, "Clouds to compare, all in one frame")->required()->expected(1, -1);
  s->add_option("--truth", st.truth, "Labeled ground-truth cloud");
  s->add_option("--voxel", st.voxel, "Voxel size, meters")->required()->check(CLI::PositiveNumber);
  s->add_option("--out", st.out, "Report file (key=value); stdout when omitted");
  s->callback([&] { action = [&] { do_stats(st, out); }; });

  SynthArgs sy;
  auto* y = app.add_subcommand("synth", "Generate synthetic UAV and MMS clouds from a scene spec");
  y->add_option("--spec", sy.spec, "Scene document (JSON)")->required();
  y->add_option("--out-uav", sy.out_uav, "UAV cloud (misregistered when enabled)")->required();
  y->add_option("--out-mms", sy.out_mms, "MMS cloud")->required();
  y->add_option("--out-truth", sy.out_truth, "Labeled truth cloud");
  y->add_option("--out-misreg", sy.out_misreg, "Applied misregistration transform");
  y->add_option("--out-pairs", sy.out_pairs, "Keypoint pairs (uav -> mms)");
  y->add_option("--pair-count", sy.pair_count, "Number of keypoint pairs")
      ->check(CLI::Range(3, 100000))
      ->capture_default_str();
  y->add_option("--seed", sy.seed, "Overrides the spec seed");
  y->add_flag("--ascii", sy.ascii, "Write ASCII PLY");
  y->callback([&] { action = [&] { do_synth(sy, out); }; });

  ServeArgs sv;
  auto* v = app.add_subcommand("serve", "HTTP backend for the registration viewer");
  v->add_option("--source", sv.source, "Source cloud")->required();
  v->add_option("--target", sv.target, "Target cloud")->required();
  v->add_option("--port", sv.port, "TCP port")->required()->check(CLI::Range(1, 65535));
  v->add_option("--lod-budget", sv.lod_budget, "Max points served per cloud")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  v->add_option("--web-root", sv.web_root, "Directory with the viewer bundle")->check(CLI::ExistingDirectory);
  v->add_option("--host", sv.host, "Bind address")->capture_default_str();
  v->callback([&] { action = [&] { do_serve(sv, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    action();
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cloudfuse::cli
