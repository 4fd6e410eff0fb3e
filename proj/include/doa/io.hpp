// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "doa/array_model.hpp"
#include "doa/core.hpp"
#include "doa/spectral.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace doa {

/// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument(std::string(what) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline long long parse_integer(std::string_view s, std::string_view what) {
  s = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument(std::string(what) + ": not an integer: '" + std::string(s) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view s, std::string_view what) {
  s = trim(s);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw InvalidArgument(std::string(what) + ": not a boolean: '" + std::string(s) + "'");
}

/// Comma-separated numbers; an item of the form a:step:b expands to the
/// inclusive range.
inline std::vector<double> parse_number_list(std::string_view s, std::string_view what) {
  std::vector<double> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto item = trim(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
    const auto c1 = item.find(':');
    if (c1 == std::string_view::npos) {
      out.push_back(parse_double(item, what));
    } else {
      const auto c2 = item.find(':', c1 + 1);
      if (c2 == std::string_view::npos) throw InvalidArgument(std::string(what) + ": range needs a:step:b");
      const double a = parse_double(item.substr(0, c1), what);
      const double step = parse_double(item.substr(c1 + 1, c2 - c1 - 1), what);
      const double b = parse_double(item.substr(c2 + 1), what);
      if (!(step > 0.0) || b < a) throw InvalidArgument(std::string(what) + ": bad range");
      const auto n = static_cast<long long>(std::floor((b - a) / step + 1e-9));
      for (long long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

/// Flat key = value file. '#' starts a comment; keys are case-sensitive.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, std::string_view origin = "<string>") {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw InvalidArgument(std::string(origin) + ":" + std::to_string(line_no) +
                              ": expected key = value");
      }
      const std::string key(trim(line.substr(0, eq)));
      if (key.empty()) {
        throw InvalidArgument(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
      }
      cfg.values_[key] = std::string(trim(line.substr(eq + 1)));
    }
    return cfg;
  }

  static KeyValueConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get_string(const std::string& key, std::string fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(it->second, key);
  }
  long long get_integer(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_integer(it->second, key);
  }
  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_bool(it->second, key);
  }
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number_list(it->second, key);
  }

 private:
  std::map<std::string, std::string> values_;
};

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// One row per element, columns re_0,im_0,re_1,im_1,... per snapshot.
inline void write_snapshots_csv(const SnapshotMatrix& x, const std::filesystem::path& path) {
  auto out = open_output(path);
  const auto& d = x.data();
  for (Eigen::Index s = 0; s < d.cols(); ++s) {
    out << (s ? "," : "") << "re_" << s << ",im_" << s;
  }
  out << '\n';
  for (Eigen::Index m = 0; m < d.rows(); ++m) {
    for (Eigen::Index s = 0; s < d.cols(); ++s) {
      out << (s ? "," : "") << format_number(d(m, s).real()) << ',' << format_number(d(m, s).imag());
    }
    out << '\n';
  }
  finish_output(out, path);
}

inline SnapshotMatrix read_snapshots_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path.string() + "' is empty");
  std::vector<std::vector<Complex>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<double> vals;
    std::string_view sv(line);
    std::size_t pos = 0;
    while (true) {
      const auto comma = sv.find(',', pos);
      vals.push_back(parse_double(sv.substr(pos, comma == sv.npos ? sv.npos : comma - pos), path.string()));
      if (comma == sv.npos) break;
      pos = comma + 1;
    }
    if (vals.size() % 2 != 0) throw IoError("'" + path.string() + "': odd number of columns");
    std::vector<Complex> row;
    for (std::size_t i = 0; i < vals.size(); i += 2) row.emplace_back(vals[i], vals[i + 1]);
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("'" + path.string() + "': ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("'" + path.string() + "' has no data rows");
  CMatrix d(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t m = 0; m < rows.size(); ++m) {
    for (std::size_t s = 0; s < rows[m].size(); ++s) {
      d(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(s)) = rows[m][s];
    }
  }
  return SnapshotMatrix(std::move(d));
}

/// angle_deg,power_linear,power_db with dB relative to the spectrum maximum.
inline void write_spectrum_csv(const AngularSpectrum& spectrum, std::ostream& out) {
  double peak = 0.0;
  for (double p : spectrum.power) peak = std::max(peak, p);
  out << "angle_deg,power_linear,power_db\n";
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double p = spectrum.power[i];
    const double db = (peak > 0.0 && p > 0.0) ? 10.0 * std::log10(p / peak)
                                              : -std::numeric_limits<double>::infinity();
    out << format_number(spectrum.angles_deg[i]) << ',' << format_number(p) << ','
        << format_number(db) << '\n';
  }
}

inline void write_spectrum_csv(const AngularSpectrum& spectrum, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_spectrum_csv(spectrum, out);
  finish_output(out, path);
}

}  // namespace doa
