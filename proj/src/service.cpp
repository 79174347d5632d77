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

#include "cloudfuse/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <utility>

#include "httplib.h"
#include "json.hpp"

#include "cloudfuse/error.hpp"
#include "cloudfuse/fusion.hpp"

namespace cloudfuse {
namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";
constexpr const char* kBinary = "application/octet-stream";

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInsufficientCorrespondences:
    case ErrorCode::kDegenerateConfiguration:
      return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kValidation:
    case ErrorCode::kParse:
      return 400;
    default:
      return 500;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message, const std::string& field = {}) {
  json body = {{"error", code}, {"message", message}};
  if (!field.empty()) body["field"] = field;
  send_json(res, status, body);
}

// Field-level validation failure, reported as 400.
struct BadField {
  std::string field;
  std::string message;
};

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw BadField{"", "body must be a JSON object"};
    return j;
  } catch (const json::parse_error& e) {
    throw BadField{"", std::string("malformed JSON: ") + e.what()};
  }
}

Point3 point_field(const json& body, const char* field) {
  if (!body.contains(field)) throw BadField{field, "missing"};
  const json& v = body[field];
  if (!v.is_array() || v.size() != 3) throw BadField{field, "expected [x, y, z]"};
  Point3 p;
  for (int k = 0; k < 3; ++k) {
    if (!v[k].is_number()) throw BadField{field, "coordinates must be numbers"};
    p[k] = v[k].get<double>();
  }
  if (!p.allFinite()) throw BadField{field, "coordinates must be finite"};
  return p;
}

std::optional<TransformMode> mode_field(const json& body) {
  if (!body.contains("mode")) return std::nullopt;
  if (!body["mode"].is_string()) throw BadField{"mode", "expected \"rigid\" or \"similarity\""};
  auto m = parse_transform_mode(body["mode"].get<std::string>());
  if (!m) throw BadField{"mode", "expected \"rigid\" or \"similarity\""};
  return m;
}

std::optional<std::size_t> lod_param(const httplib::Request& req) {
  if (!req.has_param("lod")) return std::nullopt;
  const std::string v = req.get_param_value("lod");
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || ptr != v.data() + v.size() || n == 0) {
    throw BadField{"lod", "expected a positive point budget"};
  }
  return n;
}

json point_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

json pair_json(const CorrespondencePair& p) {
  return {{"id", p.id}, {"source_point", point_json(p.source)}, {"target_point", point_json(p.target)}};
}

void send_points(const httplib::Request& req, httplib::Response& res, const PointCloud& cloud,
                 const std::string& name, double leaf) {
  if (req.has_header("Accept") && req.get_header_value("Accept").find(kBinary) != std::string::npos) {
    res.status = 200;
    res.set_content(encode_points_binary(cloud), kBinary);
    return;
  }
  json positions = json::array();
  for (const Point3& p : cloud.points) {
    positions.push_back(p.x());
    positions.push_back(p.y());
    positions.push_back(p.z());
  }
  json body = {{"cloud", name}, {"count", cloud.size()}, {"leaf", leaf}, {"positions", positions}};
  if (cloud.has_colors()) {
    json colors = json::array();
    for (const ColorRGB& c : cloud.colors) {
      colors.push_back(c.r);
      colors.push_back(c.g);
      colors.push_back(c.b);
    }
    body["colors"] = colors;
  }
  send_json(res, 200, body);
}

json estimate_json(const RegistrationResult& r, const CorrespondenceSet& pairs) {
  const Decomposition d = decompose_transform(r.transform);
  json matrix = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int j = 0; j < 4; ++j) row.push_back(r.transform.matrix()(i, j));
    matrix.push_back(row);
  }
  json residuals = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    residuals.push_back({{"id", pairs[i].id}, {"residual", r.residuals[i]}});
  }
  return {{"mode", transform_mode_name(r.mode)},
          {"matrix", matrix},
          {"rmse", r.rmse},
          {"scale", d.scale},
          {"residuals", residuals}};
}

// Wraps a handler with the service's error mapping.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const BadField& e) {
      send_error(res, 400, "validation-error", e.message, e.field);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), error_code_name(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal-error", e.what());
    }
  };
}

}  // namespace

// ---------------------------------------------------------------------------

Session::Session(PointCloud source, PointCloud target, std::size_t lod_budget)
    : source_(std::move(source)), target_(std::move(target)), lod_budget_(lod_budget) {
  if (source_.empty() || target_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "session needs non-empty source and target clouds");
  }
  if (lod_budget_ == 0) throw Error(ErrorCode::kInvalidArgument, "lod budget must be positive");
  source_.validate();
  target_.validate();
}

LodCloud Session::Lod(bool source, std::optional<std::size_t> budget) const {
  const std::size_t b = std::min(budget.value_or(lod_budget_), lod_budget_);
  std::lock_guard lock(lod_mutex_);
  const auto key = std::make_pair(source, b);
  if (auto it = lod_cache_.find(key); it != lod_cache_.end()) return it->second;
  const PointCloud& cloud = source ? source_ : target_;
  LodCloud lod;
  if (cloud.size() <= b) {
    lod.cloud = std::make_shared<const PointCloud>(cloud);
  } else {
    for (double leaf = 0.01;; leaf *= 2) {
      auto down = std::make_shared<PointCloud>(voxel_downsample(cloud, leaf));
      if (down->size() <= b) {
        lod.cloud = std::move(down);
        lod.leaf = leaf;
        break;
      }
    }
  }
  lod_cache_.emplace(key, lod);
  return lod;
}

int Session::AddPair(const Point3& source, const Point3& target) {
  if (!source.allFinite() || !target.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "pair coordinates must be finite");
  }
  std::unique_lock lock(mutex_);
  const int id = next_id_++;
  pairs_.push_back({source, target, id});
  return id;
}

bool Session::RemovePair(int id) {
  std::unique_lock lock(mutex_);
  const auto it = std::find_if(pairs_.begin(), pairs_.end(),
                               [id](const CorrespondencePair& p) { return p.id == id; });
  if (it == pairs_.end()) return false;
  pairs_.erase(it);
  return true;
}

CorrespondenceSet Session::Pairs() const {
  std::shared_lock lock(mutex_);
  return pairs_;
}

RegistrationResult Session::Estimate(TransformMode mode, CorrespondenceSet* used) {
  std::unique_lock lock(mutex_);
  RegistrationResult r = estimate_transform(pairs_, mode);
  last_ = r;
  if (used) *used = pairs_;
  return r;
}

std::optional<RegistrationResult> Session::LastEstimate() const {
  std::shared_lock lock(mutex_);
  return last_;
}

TransformDocument Session::ExportDocument(std::optional<TransformMode> mode) const {
  std::shared_lock lock(mutex_);
  const TransformMode m = mode.value_or(last_ ? last_->mode : TransformMode::kSimilarity);
  return registration_document(estimate_transform(pairs_, m), pairs_.size());
}

// ---------------------------------------------------------------------------

std::string encode_points_binary(const PointCloud& cloud) {
  const auto n = static_cast<std::uint32_t>(cloud.size());
  const std::uint32_t flags = cloud.has_colors() ? 1u : 0u;
  std::string out;
  out.reserve(8 + 12 * cloud.size() + (flags ? 3 * cloud.size() : 0));
  auto put = [&out](auto v) {
    char b[sizeof v];
    std::memcpy(b, &v, sizeof v);
    out.append(b, sizeof v);
  };
  put(n);
  put(flags);
  for (const Point3& p : cloud.points) {
    put(static_cast<float>(p.x()));
    put(static_cast<float>(p.y()));
    put(static_cast<float>(p.z()));
  }
  if (flags) {
    for (const ColorRGB& c : cloud.colors) {
      out.push_back(static_cast<char>(c.r));
      out.push_back(static_cast<char>(c.g));
      out.push_back(static_cast<char>(c.b));
    }
  }
  return out;
}

void install_routes(httplib::Server& server, Session& session, const ServiceOptions& options) {
  server.Get(R"(/api/clouds/(source|target))",
             guarded([&session](const httplib::Request& req, httplib::Response& res) {
               const bool is_source = req.matches[1] == "source";
               const LodCloud lod = session.Lod(is_source, lod_param(req));
               send_points(req, res, *lod.cloud, is_source ? "source" : "target", lod.leaf);
             }));

  server.Post("/api/pairs", guarded([&session](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const Point3 s = point_field(body, "source_point");
                const Point3 t = point_field(body, "target_point");
                send_json(res, 201, {{"id", session.AddPair(s, t)}});
              }));

  server.Get("/api/pairs", guarded([&session](const httplib::Request&, httplib::Response& res) {
               json list = json::array();
               for (const auto& p : session.Pairs()) list.push_back(pair_json(p));
               send_json(res, 200, {{"pairs", list}});
             }));

  server.Delete(R"(/api/pairs/(-?\d+))",
                guarded([&session](const httplib::Request& req, httplib::Response& res) {
                  int id = 0;
                  const std::string s = req.matches[1];
                  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
                  if (ec != std::errc() || !session.RemovePair(id)) {
                    send_error(res, 404, "not-found", "no pair with id " + s);
                    return;
                  }
                  res.status = 204;
                }));

  server.Post("/api/estimate",
              guarded([&session](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const TransformMode mode = mode_field(body).value_or(TransformMode::kSimilarity);
                CorrespondenceSet used;
                const RegistrationResult r = session.Estimate(mode, &used);
                send_json(res, 200, estimate_json(r, used));
              }));

  server.Get("/api/preview", guarded([&session](const httplib::Request& req, httplib::Response& res) {
               const auto last = session.LastEstimate();
               if (!last) {
                 send_error(res, 409, "no-estimate", "POST /api/estimate first");
                 return;
               }
               const LodCloud lod = session.Lod(true, lod_param(req));
               send_points(req, res, apply_transform(last->transform, *lod.cloud), "preview",
                           lod.leaf);
             }));

  server.Post("/api/export", guarded([&session](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("path") || !body["path"].is_string() ||
                    body["path"].get<std::string>().empty()) {
                  throw BadField{"path", "expected an output file path"};
                }
                const std::filesystem::path path = body["path"].get<std::string>();
                const TransformDocument doc = session.ExportDocument(mode_field(body));
                write_transform_document(doc, path);
                json reply = {{"path", path.string()}};
                if (body.contains("pairs_path")) {
                  if (!body["pairs_path"].is_string()) throw BadField{"pairs_path", "expected a path"};
                  const std::filesystem::path pp = body["pairs_path"].get<std::string>();
                  write_pairs(session.Pairs(), pp);
                  reply["pairs_path"] = pp.string();
                }
                send_json(res, 200, reply);
              }));

  if (!options.web_root.empty()) {
    if (!server.set_mount_point("/", options.web_root.string())) {
      throw Error(ErrorCode::kIo, "web root '" + options.web_root.string() + "' is not a directory");
    }
  }
}

void serve(Session& session, const std::string& host, int port, const ServiceOptions& options) {
  httplib::Server server;
  install_routes(server, session, options);
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace cloudfuse
