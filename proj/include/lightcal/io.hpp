#pragma once

// File formats: PFM / 16-bit PGM images, CSV light characteristics, and the JSON
// manifest, light, scenario and report documents. Angles are degrees in files and
// radians everywhere else.

#include <json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lightcal/characteristic.hpp"
#include "lightcal/error.hpp"
#include "lightcal/geometry.hpp"
#include "lightcal/photometry.hpp"
#include "lightcal/solver.hpp"

namespace lightcal::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Text helpers

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::ParseError, what + ": '" + std::string(s) + "' is not a number");
  return x;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_bytes(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// ---------------------------------------------------------------------------
// Images

// Single-channel little-endian PFM; rows are stored bottom-to-top.
inline std::string encode_pfm(const Image& img) {
  std::string out = "Pf\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + img.data.size() * 4);
  char* dst = out.data() + header;
  for (int v = img.height - 1; v >= 0; --v) {
    for (int u = 0; u < img.width; ++u) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(img.at(u, v));
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      std::memcpy(dst, &bits, 4);
      dst += 4;
    }
  }
  return out;
}

inline void write_pfm(const fs::path& path, const Image& img) { write_bytes(path, encode_pfm(img)); }

namespace detail {
// Reads whitespace-separated header tokens of a PNM-family file.
inline std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}
}  // namespace detail

inline Image read_pfm(const fs::path& path) {
  const std::string bytes = read_text(path);
  std::size_t pos = 0;
  const std::string magic = detail::next_token(bytes, pos);
  if (magic != "Pf") throw Error(ErrorCode::ParseError, path.string() + ": not a single-channel PFM");
  const std::string ws = detail::next_token(bytes, pos);
  const std::string hs = detail::next_token(bytes, pos);
  const std::string ss = detail::next_token(bytes, pos);
  const int w = static_cast<int>(parse_double(ws, path.string() + " width"));
  const int h = static_cast<int>(parse_double(hs, path.string() + " height"));
  const double scale = parse_double(ss, path.string() + " scale");
  if (w <= 0 || h <= 0 || scale == 0.0) throw Error(ErrorCode::ParseError, path.string() + ": bad PFM header");
  ++pos;  // single whitespace byte after the scale
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 4;
  if (bytes.size() < pos + need) throw Error(ErrorCode::ParseError, path.string() + ": truncated PFM data");
  const bool little = scale < 0.0;
  Image img(w, h);
  const char* src = bytes.data() + pos;
  for (int v = h - 1; v >= 0; --v) {
    for (int u = 0; u < w; ++u) {
      std::uint32_t bits;
      std::memcpy(&bits, src, 4);
      src += 4;
      if (little != (std::endian::native == std::endian::little)) bits = __builtin_bswap32(bits);
      img.at(u, v) = std::bit_cast<float>(bits);
    }
  }
  return img;
}

// Binary PGM (8 or 16 bit); linear intensity = raw value * linearization.
inline Image read_pgm(const fs::path& path, double linearization) {
  const std::string bytes = read_text(path);
  std::size_t pos = 0;
  if (detail::next_token(bytes, pos) != "P5") throw Error(ErrorCode::ParseError, path.string() + ": not a binary PGM");
  const int w = static_cast<int>(parse_double(detail::next_token(bytes, pos), path.string() + " width"));
  const int h = static_cast<int>(parse_double(detail::next_token(bytes, pos), path.string() + " height"));
  const int maxval = static_cast<int>(parse_double(detail::next_token(bytes, pos), path.string() + " maxval"));
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw Error(ErrorCode::ParseError, path.string() + ": bad PGM header");
  ++pos;
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * bpp;
  if (bytes.size() < pos + need) throw Error(ErrorCode::ParseError, path.string() + ": truncated PGM data");
  Image img(w, h);
  const auto* src = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const unsigned raw = bpp == 2 ? (unsigned(src[2 * i]) << 8) | src[2 * i + 1] : src[i];
    img.data[i] = static_cast<float>(raw * linearization);
  }
  return img;
}

inline void write_pgm16(const fs::path& path, int width, int height, const std::vector<std::uint16_t>& raw) {
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
  for (auto x : raw) {
    out.push_back(static_cast<char>(x >> 8));
    out.push_back(static_cast<char>(x & 0xff));
  }
  write_bytes(path, out);
}

inline Image read_image(const fs::path& path, double linearization) {
  if (!fs::exists(path)) throw Error(ErrorCode::IoError, "missing image file " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".pgm") return read_pgm(path, linearization);
  return read_pfm(path);
}

// ---------------------------------------------------------------------------
// Light characteristics (CSV)

inline std::string encode_rid_csv(const RidCurve& curve) {
  std::string out = "theta_deg,intensity\n";
  for (std::size_t i = 0; i < curve.theta_deg().size(); ++i)
    out += format_double(curve.theta_deg()[i]) + "," + format_double(curve.intensity()[i]) + "\n";
  return out;
}

inline RidCurve parse_rid_csv(const std::string& text, const std::string& name = "RID curve") {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != "theta_deg,intensity")
    throw Error(ErrorCode::ParseError, name + ": expected header 'theta_deg,intensity'");
  std::vector<double> theta, e;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split_csv(lines[i]);
    const std::string where = name + " line " + std::to_string(i + 1);
    if (cols.size() != 2) throw Error(ErrorCode::ParseError, where + ": expected two columns");
    theta.push_back(parse_double(cols[0], where + " theta_deg"));
    e.push_back(parse_double(cols[1], where + " intensity"));
  }
  try {
    return RidCurve(std::move(theta), std::move(e));
  } catch (const Error& err) {
    throw Error(ErrorCode::ParseError, name + ": " + err.what());
  }
}

inline std::string encode_grid_csv(const RadianceGrid& grid) {
  std::string out = "n_theta,n_phi\n" + std::to_string(grid.n_theta()) + "," + std::to_string(grid.n_phi()) + "\n";
  for (int i = 0; i < grid.n_theta(); ++i) {
    for (int j = 0; j < grid.n_phi(); ++j) {
      if (j) out += ",";
      out += format_double(grid.at(i, j));
    }
    out += "\n";
  }
  return out;
}

inline RadianceGrid parse_grid_csv(const std::string& text, const std::string& name = "radiance grid") {
  const auto lines = lines_of(text);
  if (lines.size() < 2 || lines[0] != "n_theta,n_phi")
    throw Error(ErrorCode::ParseError, name + ": expected header 'n_theta,n_phi'");
  const auto dims = split_csv(lines[1]);
  if (dims.size() != 2) throw Error(ErrorCode::ParseError, name + ": expected 'n_theta,n_phi' values on line 2");
  const int nt = static_cast<int>(parse_double(dims[0], name + " n_theta"));
  const int np = static_cast<int>(parse_double(dims[1], name + " n_phi"));
  if (nt < 2 || np < 4) throw Error(ErrorCode::ParseError, name + ": need n_theta >= 2 and n_phi >= 4");
  std::vector<double> values;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto cols = split_csv(lines[i]);
    for (std::size_t c = 0; c < cols.size(); ++c)
      values.push_back(parse_double(cols[c], name + " line " + std::to_string(i + 1)));
  }
  try {
    return RadianceGrid(nt, np, std::move(values));
  } catch (const Error& err) {
    throw Error(ErrorCode::ParseError, name + ": " + err.what());
  }
}

// ---------------------------------------------------------------------------
// JSON field access with errors that name the offending field

namespace detail {

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "field '" + path + "': expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::ParseError, "missing field '" + (path.empty() ? key : path + "." + key) + "'");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline double as_number(const Json& v, const std::string& field) {
  if (!v.is_number()) throw Error(ErrorCode::ParseError, "field '" + field + "': expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw Error(ErrorCode::ParseError, "field '" + field + "': expected a finite number");
  return x;
}

inline std::int64_t as_integer(const Json& v, const std::string& field) {
  if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, "field '" + field + "': expected an integer");
  return v.get<std::int64_t>();
}

inline std::string as_string(const Json& v, const std::string& field) {
  if (!v.is_string()) throw Error(ErrorCode::ParseError, "field '" + field + "': expected a string");
  return v.get<std::string>();
}

inline std::vector<double> as_numbers(const Json& v, const std::string& field, std::optional<std::size_t> count = {}) {
  if (!v.is_array()) throw Error(ErrorCode::ParseError, "field '" + field + "': expected an array of numbers");
  if (count && v.size() != *count)
    throw Error(ErrorCode::ParseError, "field '" + field + "': expected " + std::to_string(*count) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline double number(const Json& j, const std::string& key, const std::string& path) {
  return as_number(require(j, key, path), join(path, key));
}

inline double number_or(const Json& j, const std::string& key, const std::string& path, double fallback) {
  return j.contains(key) ? as_number(j.at(key), join(path, key)) : fallback;
}

inline void check_version(const Json& j, const std::string& path) {
  if (!j.contains("version")) return;
  const auto v = as_integer(j.at("version"), join(path, "version"));
  if (v != kFormatVersion)
    throw Error(ErrorCode::ParseError, "field '" + join(path, "version") + "': unsupported version " + std::to_string(v));
}

inline Json parse_json(const std::string& text, const std::string& name) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, name + ": " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Intrinsics and poses

inline Json to_json(const CameraIntrinsics& intr) {
  return Json{{"fx", intr.fx},       {"fy", intr.fy},         {"cx", intr.cx}, {"cy", intr.cy},
              {"width", intr.width}, {"height", intr.height}, {"dist", intr.dist}};
}

inline CameraIntrinsics intrinsics_from_json(const Json& j, const std::string& path) {
  CameraIntrinsics intr;
  intr.fx = detail::number(j, "fx", path);
  intr.fy = detail::number(j, "fy", path);
  intr.cx = detail::number(j, "cx", path);
  intr.cy = detail::number(j, "cy", path);
  intr.width = static_cast<int>(detail::as_integer(detail::require(j, "width", path), detail::join(path, "width")));
  intr.height = static_cast<int>(detail::as_integer(detail::require(j, "height", path), detail::join(path, "height")));
  if (j.contains("dist")) {
    const auto d = detail::as_numbers(j.at("dist"), detail::join(path, "dist"), 5);
    std::copy(d.begin(), d.end(), intr.dist.begin());
  }
  try {
    intr.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, "field '" + path + "': " + e.what());
  }
  return intr;
}

// ---------------------------------------------------------------------------
// Light pose documents (init, ground truth, render input)

struct LightPoseRecord {
  std::array<double, 3> position_m{};
  double roll_deg = 0.0;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  double scale = 1.0;

  friend bool operator==(const LightPoseRecord&, const LightPoseRecord&) = default;
};

inline LightPoseRecord to_record(const LightModel& light) {
  return {{light.position.x(), light.position.y(), light.position.z()},
          light.roll * kRadToDeg,
          light.pitch * kRadToDeg,
          light.yaw * kRadToDeg,
          light.scale};
}

inline LightModel to_light(const LightPoseRecord& rec, Characteristic characteristic) {
  LightModel light;
  light.position = Vec3(rec.position_m[0], rec.position_m[1], rec.position_m[2]);
  light.roll = rec.roll_deg * kDegToRad;
  light.pitch = rec.pitch_deg * kDegToRad;
  light.yaw = rec.yaw_deg * kDegToRad;
  light.scale = rec.scale;
  light.characteristic = std::move(characteristic);
  return light;
}

inline Json to_json(const LightPoseRecord& rec) {
  return Json{{"position_m", rec.position_m},
              {"roll_deg", rec.roll_deg},
              {"pitch_deg", rec.pitch_deg},
              {"yaw_deg", rec.yaw_deg},
              {"scale", rec.scale}};
}

inline LightPoseRecord light_record_from_json(const Json& j, const std::string& path) {
  LightPoseRecord rec;
  const auto p = detail::as_numbers(detail::require(j, "position_m", path), detail::join(path, "position_m"), 3);
  std::copy(p.begin(), p.end(), rec.position_m.begin());
  rec.roll_deg = detail::number_or(j, "roll_deg", path, 0.0);
  rec.pitch_deg = detail::number_or(j, "pitch_deg", path, 0.0);
  rec.yaw_deg = detail::number_or(j, "yaw_deg", path, 0.0);
  rec.scale = detail::number(j, "scale", path);
  if (!(rec.scale > 0.0)) throw Error(ErrorCode::ParseError, "field '" + detail::join(path, "scale") + "': must be > 0");
  return rec;
}

inline void write_light_file(const fs::path& path, const LightPoseRecord& rec) {
  Json j = {{"version", kFormatVersion}};
  const Json fields = to_json(rec);
  for (const auto& [k, v] : fields.items()) j[k] = v;
  write_bytes(path, j.dump(2) + "\n");
}

inline LightPoseRecord read_light_file(const fs::path& path) {
  const Json j = detail::parse_json(read_text(path), path.string());
  detail::check_version(j, "");
  return light_record_from_json(j, "");
}

// Accepts a light file or a generated ground_truth.json (which nests the light).
inline LightPoseRecord read_light_or_truth(const fs::path& path) {
  const Json j = detail::parse_json(read_text(path), path.string());
  detail::check_version(j, "");
  if (j.is_object() && j.contains("light")) return light_record_from_json(j.at("light"), "light");
  return light_record_from_json(j, "");
}

// ---------------------------------------------------------------------------
// Dataset manifest

struct ManifestView {
  std::string image;
  std::array<double, 9> R{};  // row-major camera-to-world
  std::array<double, 3> C{};
  double exposure = 1.0;
  double linearization = 1.0 / 65535.0;  // only used for PGM images

  friend bool operator==(const ManifestView&, const ManifestView&) = default;
};

struct DatasetManifest {
  int version = kFormatVersion;
  CameraIntrinsics intrinsics;
  std::string light_type = "rid";  // rid | grid
  std::string light_file;
  std::vector<ManifestView> views;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

inline CameraPose to_pose(const ManifestView& v) {
  CameraPose pose;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) pose.R(r, c) = v.R[static_cast<std::size_t>(3 * r + c)];
  pose.C = Vec3(v.C[0], v.C[1], v.C[2]);
  return pose;
}

inline ManifestView to_manifest_view(const CameraPose& pose, std::string image, double exposure = 1.0) {
  ManifestView v;
  v.image = std::move(image);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v.R[static_cast<std::size_t>(3 * r + c)] = pose.R(r, c);
  v.C = {pose.C.x(), pose.C.y(), pose.C.z()};
  v.exposure = exposure;
  return v;
}

inline Json to_json(const DatasetManifest& m) {
  Json views = Json::array();
  for (const auto& v : m.views) {
    Json jv = {{"image", v.image}, {"R", v.R}, {"C", v.C}, {"exposure", v.exposure}};
    if (fs::path(v.image).extension() == ".pgm") jv["linearization"] = v.linearization;
    views.push_back(jv);
  }
  return Json{{"version", m.version},
              {"intrinsics", to_json(m.intrinsics)},
              {"light", {{"type", m.light_type}, {"file", m.light_file}}},
              {"views", views}};
}

inline DatasetManifest manifest_from_json(const Json& j) {
  detail::check_version(j, "");
  DatasetManifest m;
  m.intrinsics = intrinsics_from_json(detail::require(j, "intrinsics", ""), "intrinsics");
  const Json& light = detail::require(j, "light", "");
  m.light_type = detail::as_string(detail::require(light, "type", "light"), "light.type");
  if (m.light_type != "rid" && m.light_type != "grid")
    throw Error(ErrorCode::ParseError, "field 'light.type': expected 'rid' or 'grid'");
  m.light_file = detail::as_string(detail::require(light, "file", "light"), "light.file");
  const Json& views = detail::require(j, "views", "");
  if (!views.is_array()) throw Error(ErrorCode::ParseError, "field 'views': expected an array");
  for (std::size_t i = 0; i < views.size(); ++i) {
    const std::string path = "views[" + std::to_string(i) + "]";
    const Json& jv = views[i];
    ManifestView v;
    v.image = detail::as_string(detail::require(jv, "image", path), path + ".image");
    const auto R = detail::as_numbers(detail::require(jv, "R", path), path + ".R", 9);
    const auto C = detail::as_numbers(detail::require(jv, "C", path), path + ".C", 3);
    std::copy(R.begin(), R.end(), v.R.begin());
    std::copy(C.begin(), C.end(), v.C.begin());
    v.exposure = detail::number_or(jv, "exposure", path, 1.0);
    v.linearization = detail::number_or(jv, "linearization", path, 1.0 / 65535.0);
    if (!(v.exposure > 0.0)) throw Error(ErrorCode::ParseError, "field '" + path + ".exposure': must be > 0");
    try {
      to_pose(v).validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "field '" + path + "': " + e.what());
    }
    m.views.push_back(std::move(v));
  }
  return m;
}

inline DatasetManifest read_manifest(const fs::path& path) {
  return manifest_from_json(detail::parse_json(read_text(path), path.string()));
}

inline void write_manifest(const fs::path& path, const DatasetManifest& m) {
  write_bytes(path, to_json(m).dump(2) + "\n");
}

inline Characteristic read_characteristic(const fs::path& path, const std::string& type) {
  if (!fs::exists(path)) throw Error(ErrorCode::IoError, "missing light characteristic file " + path.string());
  if (type == "grid") return parse_grid_csv(read_text(path), path.string());
  return parse_rid_csv(read_text(path), path.string());
}

// Loads a manifest with every referenced image and the light characteristic.
inline Dataset load_dataset(const fs::path& manifest_path) {
  const DatasetManifest m = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  Dataset ds;
  ds.intrinsics = m.intrinsics;
  ds.characteristic = read_characteristic(base / m.light_file, m.light_type);
  for (std::size_t i = 0; i < m.views.size(); ++i) {
    const auto& v = m.views[i];
    ViewRecord rec;
    rec.pose = to_pose(v);
    rec.exposure = v.exposure;
    rec.image = read_image(base / v.image, v.linearization);
    if (rec.image.width != m.intrinsics.width || rec.image.height != m.intrinsics.height)
      throw Error(ErrorCode::ParseError, "views[" + std::to_string(i) + "]: image size does not match intrinsics");
    ds.views.push_back(std::move(rec));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Result report

struct SubsetRow {
  int n_views = 0;
  LightPoseRecord light;
  double final_cost = 0.0;
  std::string status;

  friend bool operator==(const SubsetRow&, const SubsetRow&) = default;
};

struct SubsetConsistency {
  std::vector<SubsetRow> rows;
  double pitch_std_deg = 0.0;
  double roll_std_deg = 0.0;
  double position_std_m = 0.0;  // RMS of per-axis standard deviations

  friend bool operator==(const SubsetConsistency&, const SubsetConsistency&) = default;
};

struct ViewResidual {
  std::size_t view = 0;
  double rms = 0.0;

  friend bool operator==(const ViewResidual&, const ViewResidual&) = default;
};

struct ResultReport {
  int version = kFormatVersion;
  std::string status;
  int iterations = 0;
  double final_cost = 0.0;
  std::vector<double> cost_trace;
  LightPoseRecord light;
  std::vector<std::size_t> views_used;
  std::size_t sample_count = 0;
  std::vector<ViewResidual> per_view_rms;
  std::optional<SubsetConsistency> subsets;

  friend bool operator==(const ResultReport&, const ResultReport&) = default;
};

inline ResultReport make_report(const CalibrationResult& result, const std::vector<std::size_t>& views_used) {
  ResultReport rep;
  rep.status = std::string(to_string(result.status));
  rep.iterations = result.iterations;
  rep.final_cost = result.final_cost;
  rep.cost_trace = result.cost_trace;
  rep.light = to_record(result.light);
  rep.views_used = views_used;
  rep.sample_count = result.sample_count;
  for (std::size_t i = 0; i < result.per_view_rms.size(); ++i)
    rep.per_view_rms.push_back({views_used.at(i), result.per_view_rms[i]});
  return rep;
}

inline Json to_json(const ResultReport& r) {
  Json rms = Json::array();
  for (const auto& v : r.per_view_rms) rms.push_back({{"view", v.view}, {"rms", v.rms}});
  Json j = {{"version", r.version},       {"status", r.status},         {"iterations", r.iterations},
            {"final_cost", r.final_cost}, {"cost_trace", r.cost_trace}, {"light", to_json(r.light)},
            {"views_used", r.views_used}, {"sample_count", r.sample_count}, {"per_view_rms", rms}};
  if (r.subsets) {
    Json rows = Json::array();
    for (const auto& row : r.subsets->rows)
      rows.push_back({{"n_views", row.n_views},
                      {"light", to_json(row.light)},
                      {"final_cost", row.final_cost},
                      {"status", row.status}});
    j["subset_consistency"] = {{"rows", rows},
                               {"pitch_std_deg", r.subsets->pitch_std_deg},
                               {"roll_std_deg", r.subsets->roll_std_deg},
                               {"position_std_m", r.subsets->position_std_m}};
  }
  return j;
}

inline ResultReport report_from_json(const Json& j) {
  detail::check_version(j, "");
  ResultReport r;
  r.status = detail::as_string(detail::require(j, "status", ""), "status");
  r.iterations = static_cast<int>(detail::as_integer(detail::require(j, "iterations", ""), "iterations"));
  r.final_cost = detail::number(j, "final_cost", "");
  r.cost_trace = detail::as_numbers(detail::require(j, "cost_trace", ""), "cost_trace");
  r.light = light_record_from_json(detail::require(j, "light", ""), "light");
  const Json& used = detail::require(j, "views_used", "");
  if (!used.is_array()) throw Error(ErrorCode::ParseError, "field 'views_used': expected an array");
  for (std::size_t i = 0; i < used.size(); ++i)
    r.views_used.push_back(static_cast<std::size_t>(detail::as_integer(used[i], "views_used[" + std::to_string(i) + "]")));
  r.sample_count = static_cast<std::size_t>(detail::as_integer(detail::require(j, "sample_count", ""), "sample_count"));
  const Json& rms = detail::require(j, "per_view_rms", "");
  if (!rms.is_array()) throw Error(ErrorCode::ParseError, "field 'per_view_rms': expected an array");
  for (std::size_t i = 0; i < rms.size(); ++i) {
    const std::string path = "per_view_rms[" + std::to_string(i) + "]";
    r.per_view_rms.push_back(
        {static_cast<std::size_t>(detail::as_integer(detail::require(rms[i], "view", path), path + ".view")),
         detail::number(rms[i], "rms", path)});
  }
  if (j.contains("subset_consistency")) {
    const Json& sc = j.at("subset_consistency");
    SubsetConsistency s;
    const Json& rows = detail::require(sc, "rows", "subset_consistency");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string path = "subset_consistency.rows[" + std::to_string(i) + "]";
      SubsetRow row;
      row.n_views = static_cast<int>(detail::as_integer(detail::require(rows[i], "n_views", path), path + ".n_views"));
      row.light = light_record_from_json(detail::require(rows[i], "light", path), path + ".light");
      row.final_cost = detail::number(rows[i], "final_cost", path);
      row.status = detail::as_string(detail::require(rows[i], "status", path), path + ".status");
      s.rows.push_back(row);
    }
    s.pitch_std_deg = detail::number(sc, "pitch_std_deg", "subset_consistency");
    s.roll_std_deg = detail::number(sc, "roll_std_deg", "subset_consistency");
    s.position_std_m = detail::number(sc, "position_std_m", "subset_consistency");
    r.subsets = s;
  }
  return r;
}

inline void write_report(const fs::path& path, const ResultReport& r) { write_bytes(path, to_json(r).dump(2) + "\n"); }

inline ResultReport read_report(const fs::path& path) {
  return report_from_json(detail::parse_json(read_text(path), path.string()));
}

}  // namespace lightcal::io
