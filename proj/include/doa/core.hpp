// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace doa {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when a matrix cannot be inverted at working precision.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class Method {
  ds,
  mvdr,
  music,
  esprit,
  unitary_esprit,
  root_music,
  ft_doa,
};

inline constexpr std::array<Method, 7> kAllMethods = {
    Method::ds,     Method::mvdr,           Method::music,      Method::esprit,
    Method::unitary_esprit, Method::root_music, Method::ft_doa,
};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::ds: return "ds";
    case Method::mvdr: return "mvdr";
    case Method::music: return "music";
    case Method::esprit: return "esprit";
    case Method::unitary_esprit: return "u-esprit";
    case Method::root_music: return "r-music";
    case Method::ft_doa: return "ft-doa";
  }
  return "unknown";
}

inline Method parse_method(std::string_view tag) {
  for (Method m : kAllMethods) {
    if (to_string(m) == tag) return m;
  }
  // a few spellings people actually type
  if (tag == "uesprit" || tag == "unitary-esprit") return Method::unitary_esprit;
  if (tag == "rmusic" || tag == "root-music") return Method::root_music;
  if (tag == "ft" || tag == "ftdoa") return Method::ft_doa;
  throw InvalidArgument("unknown method tag '" + std::string(tag) + "'");
}

/// Search-based methods produce an angular spectrum and pick its peaks.
inline bool is_scan_method(Method m) {
  return m == Method::ds || m == Method::mvdr || m == Method::music || m == Method::ft_doa;
}

/// Common output of every estimator: angles in degrees, ascending.
struct DoaEstimate {
  Method method = Method::ds;
  std::vector<double> angles_deg;
  /// Spectrum value at each returned angle (search methods only).
  std::vector<double> peak_powers;
  /// Requested sources that could not be resolved (missing peaks or roots).
  int underdetected = 0;
  /// Sources dropped because the rotation phase mapped outside |sin| <= 1.
  int out_of_visible = 0;
  /// Unitary-ESPRIT eigenvalues whose imaginary part exceeded the realness tolerance.
  int complex_flagged = 0;

  bool complete() const { return underdetected == 0 && out_of_visible == 0; }
};

}  // namespace doa
