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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "cloudfuse/io.hpp"
#include "cloudfuse/point_cloud.hpp"
#include "cloudfuse/registration.hpp"

namespace httplib {
class Server;
}

namespace cloudfuse {

inline constexpr std::size_t kDefaultLodBudget = 200000;

// A level-of-detail view of a cloud. `leaf` is 0 when the cloud already fits
// the budget and is served as is.
struct LodCloud {
  std::shared_ptr<const PointCloud> cloud;
  double leaf = 0.0;
};

// One registration session: immutable clouds, a mutable pair list and the
// last estimate. Readers share a lock; mutations and estimates are
// serialized.
class Session {
 public:
  Session(PointCloud source, PointCloud target, std::size_t lod_budget = kDefaultLodBudget);

  const PointCloud& source() const { return source_; }
  const PointCloud& target() const { return target_; }
  std::size_t lod_budget() const { return lod_budget_; }

  // Budget defaults to, and is capped by, the session budget. The leaf
  // starts at 1 cm and doubles until the downsampled cloud fits.
  LodCloud Lod(bool source, std::optional<std::size_t> budget = std::nullopt) const;

  int AddPair(const Point3& source, const Point3& target);
  bool RemovePair(int id);
  CorrespondenceSet Pairs() const;

  // Estimates from the current pair list and stores the result. `used`
  // receives the pair list the estimate was computed from.
  RegistrationResult Estimate(TransformMode mode, CorrespondenceSet* used = nullptr);
  std::optional<RegistrationResult> LastEstimate() const;

  // Document `register` writes for the current pair list. Uses the mode of
  // the last estimate unless one is given.
  TransformDocument ExportDocument(std::optional<TransformMode> mode) const;

 private:
  PointCloud source_;
  PointCloud target_;
  std::size_t lod_budget_;

  mutable std::shared_mutex mutex_;
  CorrespondenceSet pairs_;
  int next_id_ = 0;
  std::optional<RegistrationResult> last_;

  mutable std::mutex lod_mutex_;
  mutable std::map<std::pair<bool, std::size_t>, LodCloud> lod_cache_;
};

// Point payload framing for `Accept: application/octet-stream`: u32 count,
// u32 flags (bit 0: colors follow), count*3 little-endian float32 xyz, then
// count*3 u8 rgb when flagged.
std::string encode_points_binary(const PointCloud& cloud);

struct ServiceOptions {
  std::filesystem::path web_root;  // static viewer bundle, optional
};

// Registers the /api routes (and the static mount) on `server`.
void install_routes(httplib::Server& server, Session& session, const ServiceOptions& options = {});

// Blocking server on host:port.
void serve(Session& session, const std::string& host, int port,
           const ServiceOptions& options = {});

}  // namespace cloudfuse
