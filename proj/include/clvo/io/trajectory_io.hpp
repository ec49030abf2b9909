#pragma once

// Pose files.
//
//   tum:        "timestamp tx ty tz qx qy qz qw" per line
//   tartanair:  "tx ty tz qx qy qz qw" per line; the frame index is the timestamp
//
// Blank lines and lines starting with '#' are skipped.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clvo/errors.hpp"
#include "clvo/geometry.hpp"
#include "clvo/trajectory.hpp"

namespace clvo::io {

enum class TrajectoryFormat { kTum, kTartanAir };

inline TrajectoryFormat parse_format(std::string_view s) {
  if (s == "tum") return TrajectoryFormat::kTum;
  if (s == "tartanair") return TrajectoryFormat::kTartanAir;
  throw Error(ErrorCode::kConfig, "unknown trajectory format '" + std::string(s) + "' (expected tum or tartanair)");
}

inline std::string_view to_string(TrajectoryFormat f) { return f == TrajectoryFormat::kTum ? "tum" : "tartanair"; }

namespace io_detail {

inline bool parse_double(std::string_view tok, double* out) {
  const char* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, *out);
  return ec == std::errc() && ptr == end && std::isfinite(*out);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace io_detail

/// `source` names the input in error messages.
inline Trajectory parse_trajectory(std::istream& in, TrajectoryFormat format, const std::string& source = "<stream>") {
  const std::size_t fields = format == TrajectoryFormat::kTum ? 8 : 7;
  std::vector<RigidPosed> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = io_detail::split_ws(line);
    if (toks.empty() || toks.front().front() == '#') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (toks.size() != fields) {
      throw Error(ErrorCode::kMalformedLine, where + ": expected " + std::to_string(fields) + " fields, found " +
                                                 std::to_string(toks.size()));
    }
    double v[8];
    for (std::size_t k = 0; k < fields; ++k) {
      if (!io_detail::parse_double(toks[k], &v[k])) {
        throw Error(ErrorCode::kMalformedLine, where + ": '" + std::string(toks[k]) + "' is not a finite number");
      }
    }
    const double* p = format == TrajectoryFormat::kTum ? v + 1 : v;
    const double ts = format == TrajectoryFormat::kTum ? v[0] : static_cast<double>(poses.size());
    const Eigen::Quaterniond q(p[6], p[3], p[4], p[5]);
    const double norm = q.norm();
    if (!(norm >= 0.9 && norm <= 1.1)) {
      throw Error(ErrorCode::kBadQuaternion, where + ": quaternion norm " + std::to_string(norm));
    }
    if (!poses.empty() && !(ts > *poses.back().timestamp())) {
      throw Error(ErrorCode::kNonMonotonicTimestamps, where + ": timestamp does not increase");
    }
    poses.emplace_back(q, Eigen::Vector3d(p[0], p[1], p[2]), ts);
  }
  return Trajectory(std::move(poses), source);
}

/// The sequence id is the file's stem.
inline Trajectory parse_trajectory_file(const std::string& path, TrajectoryFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path + "'");
  Trajectory t = parse_trajectory(in, format, path);
  const auto slash = path.find_last_of('/');
  std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = stem.find_last_of('.');
  if (dot != std::string::npos && dot > 0) stem.resize(dot);
  t.sequence_id = stem;
  return t;
}

/// Shortest round-trip representation ("%.17g").
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_trajectory(std::ostream& out, const Trajectory& t, TrajectoryFormat format) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    const RigidPosed& p = t[i];
    std::string line;
    if (format == TrajectoryFormat::kTum) {
      line += format_double(p.timestamp().value_or(static_cast<double>(i))) + ' ';
    }
    const auto& tr = p.translation();
    const auto& q = p.rotation();
    for (double v : {tr.x(), tr.y(), tr.z(), q.x(), q.y(), q.z(), q.w()}) line += format_double(v) + ' ';
    line.back() = '\n';
    out << line;
  }
}

inline void write_trajectory_file(const std::string& path, const Trajectory& t, TrajectoryFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  write_trajectory(out, t, format);
}

}  // namespace clvo::io
