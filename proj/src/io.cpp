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

#include "cloudfuse/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "cloudfuse/error.hpp"

namespace cloudfuse {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "binary PLY codec assumes a little-endian host");

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Commas and whitespace both separate; runs collapse.
std::vector<std::string_view> split_any(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r'; };
  while (i < s.size()) {
    while (i < s.size() && sep(s[i])) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && !sep(s[j])) ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Splits on commas when present, otherwise on whitespace.
std::vector<std::string_view> split_fields(std::string_view s) {
  if (s.find(',') == std::string_view::npos) return split_ws(s);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Line-at-a-time cursor with 1-based numbering.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool Next(std::string_view* line) {
    if (pos_ >= text_.size()) return false;
    auto nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) nl = text_.size();
    *line = text_.substr(pos_, nl - pos_);
    if (!line->empty() && line->back() == '\r') line->remove_suffix(1);
    pos_ = nl + 1;
    ++number_;
    return true;
  }

  std::size_t number() const { return number_; }
  std::size_t offset() const { return std::min(pos_, text_.size()); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

bool parse_number(std::string_view token, double* out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, *out);
  return ec == std::errc() && ptr == end;
}

template <typename Int>
bool parse_integer(std::string_view token, Int* out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, *out);
  return ec == std::errc() && ptr == end;
}

double require_number(std::string_view token, std::size_t line, std::string_view what) {
  double v = 0.0;
  if (!parse_number(token, &v)) {
    throw ParseError(line, "invalid " + std::string(what) + " '" + std::string(token) + "'");
  }
  return v;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool has_extension(const std::filesystem::path& path, std::string_view ext) {
  return lowercase(path.extension().string()) == ext;
}

// ---------------------------------------------------------------------------
// PLY

enum class PlyType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

std::optional<PlyType> parse_ply_type(std::string_view name) {
  static constexpr std::pair<std::string_view, PlyType> kNames[] = {
      {"char", PlyType::kInt8},     {"int8", PlyType::kInt8},
      {"uchar", PlyType::kUInt8},   {"uint8", PlyType::kUInt8},
      {"short", PlyType::kInt16},   {"int16", PlyType::kInt16},
      {"ushort", PlyType::kUInt16}, {"uint16", PlyType::kUInt16},
      {"int", PlyType::kInt32},     {"int32", PlyType::kInt32},
      {"uint", PlyType::kUInt32},   {"uint32", PlyType::kUInt32},
      {"float", PlyType::kFloat32}, {"float32", PlyType::kFloat32},
      {"double", PlyType::kFloat64}, {"float64", PlyType::kFloat64},
  };
  for (const auto& [n, t] : kNames) {
    if (n == name) return t;
  }
  return std::nullopt;
}

std::size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUInt8: return 1;
    case PlyType::kInt16:
    case PlyType::kUInt16: return 2;
    case PlyType::kInt32:
    case PlyType::kUInt32:
    case PlyType::kFloat32: return 4;
    case PlyType::kFloat64: return 8;
  }
  return 0;
}

bool is_integer_type(PlyType t) { return t != PlyType::kFloat32 && t != PlyType::kFloat64; }

double read_binary_value(const char* p, PlyType t) {
  switch (t) {
    case PlyType::kInt8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
    case PlyType::kUInt8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
    case PlyType::kInt16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case PlyType::kUInt16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case PlyType::kInt32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case PlyType::kUInt32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case PlyType::kFloat32: { float v; std::memcpy(&v, p, 4); return v; }
    case PlyType::kFloat64: { double v; std::memcpy(&v, p, 8); return v; }
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kFloat64;
  bool is_list = false;
  PlyType count_type = PlyType::kUInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

enum class Role { kSkip, kX, kY, kZ, kRed, kGreen, kBlue, kLabel };

Role role_of(const PlyProperty& p) {
  if (p.is_list) return Role::kSkip;
  if (p.name == "x") return Role::kX;
  if (p.name == "y") return Role::kY;
  if (p.name == "z") return Role::kZ;
  if (p.name == "red") return Role::kRed;
  if (p.name == "green") return Role::kGreen;
  if (p.name == "blue") return Role::kBlue;
  if (p.name == "label") return Role::kLabel;
  return Role::kSkip;
}

void check_vertex_properties(const PlyElement& v) {
  std::array<bool, 8> seen{};
  for (const auto& p : v.properties) {
    const Role r = role_of(p);
    if (r == Role::kSkip) continue;
    if (seen[static_cast<int>(r)]) {
      throw Error(ErrorCode::kParse, "duplicate vertex property '" + p.name + "'");
    }
    seen[static_cast<int>(r)] = true;
    if ((r == Role::kX || r == Role::kY || r == Role::kZ) && is_integer_type(p.type)) {
      throw Error(ErrorCode::kUnsupportedFormat,
                  "property '" + p.name + "' must be float or double");
    }
    if ((r == Role::kRed || r == Role::kGreen || r == Role::kBlue) &&
        p.type != PlyType::kUInt8) {
      throw Error(ErrorCode::kUnsupportedFormat,
                  "property '" + p.name + "' must be uchar");
    }
    if (r == Role::kLabel && !is_integer_type(p.type)) {
      throw Error(ErrorCode::kUnsupportedFormat,
                  "property 'label' must be an integer type");
    }
  }
  if (!seen[static_cast<int>(Role::kX)] || !seen[static_cast<int>(Role::kY)] ||
      !seen[static_cast<int>(Role::kZ)]) {
    throw Error(ErrorCode::kParse, "vertex element lacks x, y or z");
  }
  const int colors = seen[static_cast<int>(Role::kRed)] + seen[static_cast<int>(Role::kGreen)] +
                     seen[static_cast<int>(Role::kBlue)];
  if (colors != 0 && colors != 3) {
    throw Error(ErrorCode::kParse, "vertex colors need all of red, green, blue");
  }
}

SurfaceClass label_from_value(double v, std::size_t record) {
  if (v != std::floor(v) || v < 0 || v > 2) {
    throw Error(ErrorCode::kParse, "vertex " + std::to_string(record) +
                                       ": label " + format_double(v) + " is not 0, 1 or 2");
  }
  return static_cast<SurfaceClass>(static_cast<int>(v));
}

// Collects one vertex record's values into the cloud.
class VertexSink {
 public:
  VertexSink(const PlyElement& v, PointCloud* cloud) : cloud_(cloud) {
    for (const auto& p : v.properties) {
      const Role r = role_of(p);
      roles_.push_back(r);
      has_colors_ |= r == Role::kRed;
      has_labels_ |= r == Role::kLabel;
    }
    cloud_->points.reserve(v.count);
    if (has_colors_) cloud_->colors.reserve(v.count);
    if (has_labels_) cloud_->labels.reserve(v.count);
  }

  Role role(std::size_t i) const { return roles_[i]; }

  void Set(Role r, double v) { values_[static_cast<int>(r)] = v; }

  void Commit() {
    const std::size_t record = cloud_->points.size();
    cloud_->points.emplace_back(values_[1], values_[2], values_[3]);
    if (has_colors_) {
      cloud_->colors.push_back({static_cast<std::uint8_t>(values_[4]),
                                static_cast<std::uint8_t>(values_[5]),
                                static_cast<std::uint8_t>(values_[6])});
    }
    if (has_labels_) cloud_->labels.push_back(label_from_value(values_[7], record));
  }

 private:
  PointCloud* cloud_;
  std::vector<Role> roles_;
  std::array<double, 8> values_{};
  bool has_colors_ = false;
  bool has_labels_ = false;
};

std::string shortfall(const PlyElement& e, std::size_t got) {
  return "expected " + std::to_string(e.count) + " " + e.name + " records, got " +
         std::to_string(got);
}

void parse_ascii_body(std::string_view body, std::size_t first_line,
                      const std::vector<PlyElement>& elements, PointCloud* cloud) {
  LineReader lines(body);
  std::string_view line;
  for (const auto& e : elements) {
    std::optional<VertexSink> sink;
    if (e.name == "vertex") sink.emplace(e, cloud);
    for (std::size_t rec = 0; rec < e.count; ++rec) {
      do {
        if (!lines.Next(&line)) throw Error(ErrorCode::kParse, shortfall(e, rec));
      } while (trim(line).empty());
      const std::size_t lineno = first_line + lines.number() - 1;
      const auto tok = split_ws(line);
      std::size_t k = 0;
      auto next = [&](std::string_view what) {
        if (k >= tok.size()) {
          throw ParseError(lineno, "too few values in " + e.name + " record");
        }
        return require_number(tok[k++], lineno, what);
      };
      for (std::size_t i = 0; i < e.properties.size(); ++i) {
        const auto& p = e.properties[i];
        if (p.is_list) {
          const double n = next("list count");
          if (n < 0 || n != std::floor(n)) throw ParseError(lineno, "invalid list count");
          for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) next("list item");
          continue;
        }
        const double v = next(p.name);
        if (sink && sink->role(i) != Role::kSkip) {
          if (sink->role(i) >= Role::kRed && sink->role(i) <= Role::kBlue &&
              (v < 0 || v > 255 || v != std::floor(v))) {
            throw ParseError(lineno, "color value out of range");
          }
          sink->Set(sink->role(i), v);
        }
      }
      if (k != tok.size()) throw ParseError(lineno, "too many values in " + e.name + " record");
      if (sink) sink->Commit();
    }
  }
}

void parse_binary_body(std::string_view body, const std::vector<PlyElement>& elements,
                       PointCloud* cloud) {
  std::size_t pos = 0;
  auto take = [&](std::size_t n) -> const char* {
    if (body.size() - pos < n) return nullptr;
    const char* p = body.data() + pos;
    pos += n;
    return p;
  };
  for (const auto& e : elements) {
    std::optional<VertexSink> sink;
    if (e.name == "vertex") sink.emplace(e, cloud);
    for (std::size_t rec = 0; rec < e.count; ++rec) {
      for (std::size_t i = 0; i < e.properties.size(); ++i) {
        const auto& p = e.properties[i];
        if (p.is_list) {
          const char* c = take(ply_type_size(p.count_type));
          if (!c) throw Error(ErrorCode::kParse, shortfall(e, rec));
          const double n = read_binary_value(c, p.count_type);
          if (n < 0) throw Error(ErrorCode::kParse, "negative list count");
          if (!take(static_cast<std::size_t>(n) * ply_type_size(p.type))) {
            throw Error(ErrorCode::kParse, shortfall(e, rec));
          }
          continue;
        }
        const char* c = take(ply_type_size(p.type));
        if (!c) throw Error(ErrorCode::kParse, shortfall(e, rec));
        if (sink && sink->role(i) != Role::kSkip) {
          sink->Set(sink->role(i), read_binary_value(c, p.type));
        }
      }
      if (sink) sink->Commit();
    }
  }
}

// ---------------------------------------------------------------------------
// Output

void append_double(std::string* out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out->append(buf, ptr);
}

void append_double(std::string* out, double v, int digits) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  out->append(buf, ptr);
}

template <typename T>
void append_raw(std::string* out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out->append(buf, sizeof(T));
}

// Header comments carry single-line metadata only.
std::string sanitize_comment(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

json matrix_json(const Eigen::Matrix4d& m) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

}  // namespace

// ---------------------------------------------------------------------------

std::string format_double(double value) {
  std::string s;
  append_double(&s, value);
  return s;
}

std::string format_double(double value, int digits) {
  std::string s;
  append_double(&s, value, digits);
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "failed reading '" + path.string() + "'");
  return data;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open '" + tmp.string() + "' for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::kIo, "failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error(ErrorCode::kIo, "cannot move output into '" + path.string() + "': " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// Clouds

PointCloud parse_ply(std::string_view bytes) {
  LineReader lines(bytes);
  std::string_view line;
  if (!lines.Next(&line) || trim(line) != "ply") {
    throw ParseError(1, "missing 'ply' magic");
  }
  std::optional<PlyEncoding> encoding;
  std::vector<PlyElement> elements;
  PointCloud cloud;
  bool ended = false;
  while (lines.Next(&line)) {
    const std::size_t n = lines.number();
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    const auto kw = tok[0];
    if (kw == "end_header") {
      ended = true;
      break;
    }
    if (kw == "comment" || kw == "obj_info") {
      if (kw == "comment" && tok.size() >= 2) {
        auto rest = trim(line.substr(line.find(tok[1]) + tok[1].size()));
        if (tok[1] == "source_tag") cloud.source_tag = rest;
        else if (tok[1] == "frame_id") cloud.frame_id = rest;
        else if (tok[1] == "timestamp") cloud.timestamp = rest;
      }
      continue;
    }
    if (kw == "format") {
      if (tok.size() != 3) throw ParseError(n, "malformed format line");
      if (tok[1] == "ascii") encoding = PlyEncoding::kAscii;
      else if (tok[1] == "binary_little_endian") encoding = PlyEncoding::kBinaryLittleEndian;
      else if (tok[1] == "binary_big_endian") {
        throw Error(ErrorCode::kUnsupportedFormat, "binary_big_endian PLY is not supported");
      } else {
        throw ParseError(n, "unknown PLY format '" + std::string(tok[1]) + "'");
      }
      if (tok[2] != "1.0") throw ParseError(n, "unsupported PLY version " + std::string(tok[2]));
      continue;
    }
    if (kw == "element") {
      PlyElement e;
      if (tok.size() != 3 || !parse_integer(tok[2], &e.count)) {
        throw ParseError(n, "malformed element line");
      }
      e.name = tok[1];
      elements.push_back(std::move(e));
      continue;
    }
    if (kw == "property") {
      if (elements.empty()) throw ParseError(n, "property before any element");
      PlyProperty p;
      if (tok.size() == 5 && tok[1] == "list") {
        auto ct = parse_ply_type(tok[2]);
        auto it = parse_ply_type(tok[3]);
        if (!ct || !it) throw ParseError(n, "unknown list property type");
        if (!is_integer_type(*ct)) throw ParseError(n, "list count type must be an integer");
        p.is_list = true;
        p.count_type = *ct;
        p.type = *it;
        p.name = tok[4];
      } else if (tok.size() == 3) {
        auto t = parse_ply_type(tok[1]);
        if (!t) {
          throw Error(ErrorCode::kUnsupportedFormat, "line " + std::to_string(n) +
                                                         ": property '" + std::string(tok[2]) +
                                                         "' has unknown type '" +
                                                         std::string(tok[1]) + "'");
        }
        p.type = *t;
        p.name = tok[2];
      } else {
        throw ParseError(n, "malformed property line");
      }
      elements.back().properties.push_back(std::move(p));
      continue;
    }
    throw ParseError(n, "unexpected header keyword '" + std::string(kw) + "'");
  }
  if (!ended) throw ParseError(lines.number(), "header has no end_header");
  if (!encoding) throw ParseError(lines.number(), "header has no format line");
  const auto vertex = std::find_if(elements.begin(), elements.end(),
                                   [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex == elements.end()) throw ParseError(lines.number(), "no vertex element");
  check_vertex_properties(*vertex);

  const auto body = bytes.substr(lines.offset());
  if (*encoding == PlyEncoding::kAscii) {
    parse_ascii_body(body, lines.number() + 1, elements, &cloud);
  } else {
    parse_binary_body(body, elements, &cloud);
  }
  cloud.validate();
  return cloud;
}

std::string encode_ply(const PointCloud& cloud, PlyEncoding encoding) {
  cloud.validate();
  std::string out = "ply\n";
  out += encoding == PlyEncoding::kAscii ? "format ascii 1.0\n"
                                         : "format binary_little_endian 1.0\n";
  if (!cloud.source_tag.empty()) out += "comment source_tag " + sanitize_comment(cloud.source_tag) + "\n";
  if (!cloud.frame_id.empty()) out += "comment frame_id " + sanitize_comment(cloud.frame_id) + "\n";
  if (!cloud.timestamp.empty()) out += "comment timestamp " + sanitize_comment(cloud.timestamp) + "\n";
  if (cloud.has_labels()) out += "comment label 0=facade 1=ground 2=roof\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_colors()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (cloud.has_labels()) out += "property int label\n";
  out += "end_header\n";

  if (encoding == PlyEncoding::kBinaryLittleEndian) {
    std::size_t record = 24 + (cloud.has_colors() ? 3 : 0) + (cloud.has_labels() ? 4 : 0);
    out.reserve(out.size() + record * cloud.size());
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    if (encoding == PlyEncoding::kBinaryLittleEndian) {
      append_raw(&out, p.x());
      append_raw(&out, p.y());
      append_raw(&out, p.z());
      if (cloud.has_colors()) {
        append_raw(&out, cloud.colors[i].r);
        append_raw(&out, cloud.colors[i].g);
        append_raw(&out, cloud.colors[i].b);
      }
      if (cloud.has_labels()) append_raw(&out, static_cast<std::int32_t>(cloud.labels[i]));
    } else {
      append_double(&out, p.x(), 9);
      out += ' ';
      append_double(&out, p.y(), 9);
      out += ' ';
      append_double(&out, p.z(), 9);
      if (cloud.has_colors()) {
        const auto& c = cloud.colors[i];
        out += ' ' + std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b);
      }
      if (cloud.has_labels()) out += ' ' + std::to_string(static_cast<int>(cloud.labels[i]));
      out += '\n';
    }
  }
  return out;
}

PointCloud parse_xyz(std::string_view text) {
  PointCloud cloud;
  LineReader lines(text);
  std::string_view line;
  std::optional<bool> colored;
  while (lines.Next(&line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tok = split_any(t);
    const std::size_t n = lines.number();
    if (tok.size() != 3 && tok.size() != 6) {
      throw ParseError(n, "expected 3 or 6 columns, found " + std::to_string(tok.size()));
    }
    const bool has_rgb = tok.size() == 6;
    if (colored && *colored != has_rgb) throw ParseError(n, "mixed colored and uncolored rows");
    colored = has_rgb;
    cloud.points.emplace_back(require_number(tok[0], n, "x"), require_number(tok[1], n, "y"),
                              require_number(tok[2], n, "z"));
    if (has_rgb) {
      std::array<int, 3> c{};
      for (int k = 0; k < 3; ++k) {
        if (!parse_integer(tok[3 + k], &c[k]) || c[k] < 0 || c[k] > 255) {
          throw ParseError(n, "invalid color value '" + std::string(tok[3 + k]) + "'");
        }
      }
      cloud.colors.push_back({static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
                              static_cast<std::uint8_t>(c[2])});
    }
  }
  cloud.validate();
  return cloud;
}

std::string encode_xyz(const PointCloud& cloud) {
  cloud.validate();
  std::string out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    append_double(&out, p.x());
    out += ' ';
    append_double(&out, p.y());
    out += ' ';
    append_double(&out, p.z());
    if (cloud.has_colors()) {
      const auto& c = cloud.colors[i];
      out += ' ' + std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b);
    }
    out += '\n';
  }
  return out;
}

PointCloud read_cloud(const std::filesystem::path& path) {
  const auto data = read_file(path);
  PointCloud cloud = has_extension(path, ".ply") ? parse_ply(data) : parse_xyz(data);
  if (cloud.source_tag.empty()) cloud.source_tag = path.stem().string();
  return cloud;
}

void write_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                 const CloudWriteOptions& options) {
  write_file_atomic(path, has_extension(path, ".ply") ? encode_ply(cloud, options.encoding)
                                                      : encode_xyz(cloud));
}

// ---------------------------------------------------------------------------
// Pairs

CorrespondenceSet parse_pairs(std::string_view text) {
  CorrespondenceSet pairs;
  LineReader lines(text);
  std::string_view line;
  while (lines.Next(&line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tok = split_any(t);
    const std::size_t n = lines.number();
    if (tok.size() != 6) {
      throw ParseError(n, "expected 6 columns, found " + std::to_string(tok.size()));
    }
    std::array<double, 6> v{};
    static constexpr std::string_view kNames[] = {"sx", "sy", "sz", "tx", "ty", "tz"};
    for (int k = 0; k < 6; ++k) v[k] = require_number(tok[k], n, kNames[k]);
    for (double x : v) {
      if (!std::isfinite(x)) throw ParseError(n, "non-finite coordinate");
    }
    CorrespondencePair p;
    p.source = Point3(v[0], v[1], v[2]);
    p.target = Point3(v[3], v[4], v[5]);
    p.id = static_cast<int>(pairs.size());
    pairs.push_back(p);
  }
  return pairs;
}

std::string encode_pairs(const CorrespondenceSet& pairs) {
  std::string out = "# sx sy sz tx ty tz (meters)\n";
  for (const auto& p : pairs) {
    for (int k = 0; k < 3; ++k) {
      append_double(&out, p.source[k]);
      out += ' ';
    }
    for (int k = 0; k < 3; ++k) {
      append_double(&out, p.target[k]);
      out += k < 2 ? ' ' : '\n';
    }
  }
  return out;
}

CorrespondenceSet read_pairs(const std::filesystem::path& path) {
  return parse_pairs(read_file(path));
}

void write_pairs(const CorrespondenceSet& pairs, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pairs(pairs));
}

// ---------------------------------------------------------------------------
// Transform documents

TransformDocument parse_transform_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("transform document: ") + e.what());
  }
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kParse, "transform document: " + msg);
  };
  if (!doc.is_object()) fail("expected a JSON object");
  if (!doc.contains("schema") || doc["schema"] != kTransformSchema) {
    fail("schema must be \"" + std::string(kTransformSchema) + "\"");
  }
  if (!doc.contains("matrix")) fail("missing 'matrix'");
  const auto& rows = doc["matrix"];
  if (!rows.is_array() || rows.size() != 4) fail("'matrix' must have 4 rows");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    if (!rows[r].is_array() || rows[r].size() != 4) {
      fail("matrix row " + std::to_string(r) + " must have 4 entries");
    }
    for (int c = 0; c < 4; ++c) {
      if (!rows[r][c].is_number()) fail("matrix entries must be numbers");
      m(r, c) = rows[r][c].get<double>();
    }
  }
  std::optional<TransformMode> mode;
  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) fail("'mode' must be a string");
    mode = parse_transform_mode(doc["mode"].get<std::string>());
    if (!mode) fail("unknown mode '" + doc["mode"].get<std::string>() + "'");
  }
  TransformDocument out{Transform::FromMatrix(m, mode, kRelaxedTolerance), std::nullopt, {}, {}};
  if (doc.contains("rmse") && !doc["rmse"].is_null()) {
    if (!doc["rmse"].is_number()) fail("'rmse' must be a number");
    out.rmse = doc["rmse"].get<double>();
  }
  if (doc.contains("residuals")) {
    if (!doc["residuals"].is_array()) fail("'residuals' must be an array");
    for (const auto& v : doc["residuals"]) {
      if (!v.is_number()) fail("residuals must be numbers");
      out.residuals.push_back(v.get<double>());
    }
  }
  if (doc.contains("notes")) {
    if (!doc["notes"].is_string()) fail("'notes' must be a string");
    out.notes = doc["notes"].get<std::string>();
  }
  return out;
}

std::string encode_transform_document(const TransformDocument& doc) {
  const auto& t = doc.transform;
  json j = json::object();
  j["schema"] = kTransformSchema;
  j["mode"] = transform_mode_name(t.mode());
  j["units"] = "meters";
  j["matrix"] = matrix_json(t.matrix());
  if (doc.rmse) j["rmse"] = *doc.rmse;
  if (!doc.residuals.empty()) j["residuals"] = doc.residuals;
  if (!doc.notes.empty()) j["notes"] = doc.notes;
  // Informational only; readers use the matrix.
  const auto d = decompose_transform(t, kRelaxedTolerance);
  j["decomposition"] = {
      {"scale", d.scale},
      {"euler_deg",
       {{"x", d.angles.theta * kRadToDeg},
        {"y", d.angles.alpha * kRadToDeg},
        {"z", d.angles.beta * kRadToDeg}}},
      {"translation", {d.translation.x(), d.translation.y(), d.translation.z()}},
  };
  return j.dump(2) + "\n";
}

TransformDocument read_transform_document(const std::filesystem::path& path) {
  return parse_transform_document(read_file(path));
}

void write_transform_document(const TransformDocument& doc, const std::filesystem::path& path) {
  write_file_atomic(path, encode_transform_document(doc));
}

Transform read_transform(const std::filesystem::path& path) {
  return read_transform_document(path).transform;
}

void write_transform(const Transform& transform, const std::filesystem::path& path) {
  write_transform_document({transform, std::nullopt, {}, {}}, path);
}

TransformDocument registration_document(const RegistrationResult& result,
                                        std::size_t pair_count) {
  TransformDocument doc{result.transform, result.rmse, result.residuals, {}};
  doc.notes = "estimated from " + std::to_string(pair_count) + " correspondence pairs";
  return doc;
}

// ---------------------------------------------------------------------------
// Coverage report

std::string encode_coverage_report(const CoverageStats& stats) {
  std::string out = "schema=cloudfuse.coverage/1\n";
  out += "voxel=" + format_double(stats.leaf) + "\n";
  const auto n = stats.tags.size();
  for (std::size_t i = 0; i < n; ++i) {
    out += "voxels." + stats.tags[i] + "=" + std::to_string(stats.voxels[i]) + "\n";
  }
  out += "voxels.union=" + std::to_string(stats.union_count) + "\n";
  out += "voxels.intersection=" + std::to_string(stats.intersection_count) + "\n";
  for (std::size_t i = 0; i < n; ++i) {
    out += "unique." + stats.tags[i] + "=" + std::to_string(stats.unique[i]) + "\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    out += "gain." + stats.tags[i] + "=" + format_double(stats.completeness_gain[i]) + "\n";
  }
  if (stats.has_truth) {
    for (SurfaceClass c : kSurfaceClasses) {
      const std::string cls(surface_class_name(c));
      out += "truth." + cls + "=" + std::to_string(stats.truth_voxels.at(c)) + "\n";
      for (std::size_t i = 0; i < n; ++i) {
        out += "coverage." + cls + "." + stats.tags[i] + "=" +
               format_double(stats.coverage.at(c)[i]) + "\n";
      }
      out += "coverage." + cls + ".union=" + format_double(stats.union_coverage.at(c)) + "\n";
    }
  }
  return out;
}

std::string coverage_summary(const CoverageStats& stats) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "voxel size " << format_double(stats.leaf) << " m, " << stats.tags.size()
     << " clouds\n";
  for (std::size_t i = 0; i < stats.tags.size(); ++i) {
    os << "  " << stats.tags[i] << ": " << stats.voxels[i] << " voxels, " << stats.unique[i]
       << " unique, fusion adds " << format_double(100.0 * stats.completeness_gain[i], 3)
       << "% of the union\n";
  }
  os << "  union " << stats.union_count << ", intersection " << stats.intersection_count << "\n";
  if (stats.has_truth) {
    os << "coverage of truth voxels:\n";
    for (SurfaceClass c : kSurfaceClasses) {
      os << "  " << surface_class_name(c) << " (" << stats.truth_voxels.at(c) << "):";
      for (std::size_t i = 0; i < stats.tags.size(); ++i) {
        os << " " << stats.tags[i] << " " << format_double(stats.coverage.at(c)[i], 4);
      }
      os << " union " << format_double(stats.union_coverage.at(c), 4) << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Poses

std::vector<PoseRecord> parse_pose_table(std::string_view text) {
  LineReader lines(text);
  std::string_view line;
  bool header = false;
  std::vector<PoseRecord> out;
  static constexpr std::string_view kColumns[] = {"id", "latitude", "longitude", "altitude",
                                                  "yaw"};
  while (lines.Next(&line)) {
    auto t = trim(line);
    if (lines.number() == 1 && t.starts_with("\xEF\xBB\xBF")) t.remove_prefix(3);
    if (t.empty() || t.front() == '#') continue;
    const std::size_t n = lines.number();
    const auto tok = split_fields(t);
    if (!header) {
      if (t.find(',') == std::string_view::npos || tok.size() != 5) {
        throw ParseError(n, "expected header 'Id, Latitude (°), Longitude (°), Altitude (m), Yaw(°)'");
      }
      for (int k = 0; k < 5; ++k) {
        if (!lowercase(tok[k]).starts_with(kColumns[k])) {
          throw ParseError(n, "header column " + std::to_string(k + 1) + " should be " +
                                  std::string(kColumns[k]));
        }
      }
      header = true;
      continue;
    }
    if (tok.size() != 5) {
      throw ParseError(n, "expected 5 columns, found " + std::to_string(tok.size()));
    }
    PoseRecord r;
    if (!parse_integer(tok[0], &r.id)) throw ParseError(n, "invalid id '" + std::string(tok[0]) + "'");
    r.latitude = require_number(tok[1], n, "latitude");
    r.longitude = require_number(tok[2], n, "longitude");
    r.altitude = require_number(tok[3], n, "altitude");
    r.yaw = require_number(tok[4], n, "yaw");
    auto bad = [&](std::string_view field, double v, std::string_view range) {
      throw Error(ErrorCode::kValidation, "row " + std::to_string(n) + ": " + std::string(field) +
                                              " " + format_double(v) + " outside " +
                                              std::string(range));
    };
    if (!(r.latitude >= -90 && r.latitude <= 90)) bad("latitude", r.latitude, "[-90, 90]");
    if (!(r.longitude >= -180 && r.longitude <= 180)) bad("longitude", r.longitude, "[-180, 180]");
    if (!std::isfinite(r.altitude)) bad("altitude", r.altitude, "finite values");
    if (!(r.yaw >= 0 && r.yaw < 360)) bad("yaw", r.yaw, "[0, 360)");
    out.push_back(r);
  }
  if (!header) throw ParseError(lines.number(), "missing header row");
  return out;
}

std::vector<PoseRecord> read_pose_table(const std::filesystem::path& path) {
  return parse_pose_table(read_file(path));
}

namespace {

constexpr double kWgs84A = 6378137.0;
constexpr double kWgs84F = 1.0 / 298.257223563;
constexpr double kWgs84E2 = kWgs84F * (2.0 - kWgs84F);

Eigen::Vector3d geodetic_to_ecef(double lat_deg, double lon_deg, double h) {
  const double lat = lat_deg * kDegToRad;
  const double lon = lon_deg * kDegToRad;
  const double sl = std::sin(lat);
  const double cl = std::cos(lat);
  const double n = kWgs84A / std::sqrt(1.0 - kWgs84E2 * sl * sl);
  return {(n + h) * cl * std::cos(lon), (n + h) * cl * std::sin(lon),
          (n * (1.0 - kWgs84E2) + h) * sl};
}

void check_geo(double lat, double lon, double h, std::string_view what) {
  if (!(lat >= -90 && lat <= 90) || !(lon >= -180 && lon <= 180) || !std::isfinite(h)) {
    throw Error(ErrorCode::kValidation, std::string(what) + " coordinates out of range");
  }
}

}  // namespace

Point3 geodetic_to_enu(const PoseRecord& record, const GeoOrigin& origin) {
  check_geo(record.latitude, record.longitude, record.altitude, "pose");
  check_geo(origin.latitude, origin.longitude, origin.altitude, "origin");
  const Eigen::Vector3d d =
      geodetic_to_ecef(record.latitude, record.longitude, record.altitude) -
      geodetic_to_ecef(origin.latitude, origin.longitude, origin.altitude);
  const double lat = origin.latitude * kDegToRad;
  const double lon = origin.longitude * kDegToRad;
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double so = std::sin(lon), co = std::cos(lon);
  return {-so * d.x() + co * d.y(),
          -sl * co * d.x() - sl * so * d.y() + cl * d.z(),
          cl * co * d.x() + cl * so * d.y() + sl * d.z()};
}

}  // namespace cloudfuse
