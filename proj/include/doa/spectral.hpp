// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "doa/array_model.hpp"
#include "doa/core.hpp"
#include "doa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

namespace doa {

/// Grid points closer than this to +-90 degrees are pulled inside the
/// visible region before the steering phase is evaluated.
inline constexpr double kEdgeClipDeg = 1e-6;

/// Uniform scan over [start, stop] in steps of step_deg.
struct ScanGrid {
  double start_deg = -90.0;
  double stop_deg = 90.0;
  double step_deg = 0.001;

  void validate() const {
    if (!(step_deg > 0.0)) throw InvalidArgument("scan grid step must be positive");
    if (!(start_deg < stop_deg)) throw InvalidArgument("scan grid start must be below stop");
    if (start_deg < -90.0 || stop_deg > 90.0) {
      throw InvalidArgument("scan grid must lie within [-90, 90]");
    }
  }

  int size() const {
    validate();
    return static_cast<int>(std::floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1;
  }

  std::vector<double> angles() const {
    const int p = size();
    std::vector<double> out(static_cast<std::size_t>(p));
    const double lo = -90.0 + kEdgeClipDeg;
    const double hi = 90.0 - kEdgeClipDeg;
    for (int i = 0; i < p; ++i) {
      out[static_cast<std::size_t>(i)] = std::clamp(start_deg + i * step_deg, lo, hi);
    }
    return out;
  }
};

/// Per-angle mean output power (or pseudo-power) of a search method.
struct AngularSpectrum {
  Method method = Method::ds;
  std::vector<double> angles_deg;
  std::vector<double> power;

  std::size_t size() const { return angles_deg.size(); }
};

/// Floor applied to quadratic forms before taking reciprocals.
inline double reciprocal_floor(int num_elements) { return 1e-12 * num_elements; }

/// Evaluates a(theta)^H G a(theta) for Hermitian G at every angle. Along a
/// ULA the form is g_0 + 2 Re sum_{l>0} g_l e^{j l psi}, where g_l is the sum
/// of the l-th subdiagonal of G, so each angle costs O(M).
inline std::vector<double> steered_quadratic_form(const CMatrix& g, const UlaGeometry& geometry,
                                                  const std::vector<double>& angles_deg) {
  const int m = geometry.num_elements();
  if (g.rows() != m || g.cols() != m) {
    throw InvalidArgument("quadratic form: matrix size does not match the array");
  }
  std::vector<Complex> diag_sums(static_cast<std::size_t>(m));
  for (int l = 0; l < m; ++l) diag_sums[static_cast<std::size_t>(l)] = g.diagonal(-l).sum();
  const double g0 = diag_sums[0].real();

  std::vector<double> out(angles_deg.size());
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    const Complex w = std::polar(1.0, geometry.phase_step(angles_deg[i]));
    Complex h = 0.0;
    for (int l = m - 1; l >= 1; --l) h = h * w + diag_sums[static_cast<std::size_t>(l)];
    out[i] = g0 + 2.0 * (h * w).real();
  }
  return out;
}

/// Delay-and-sum: P(theta) = a^H R a.
inline AngularSpectrum ds_spectrum(const CovarianceMatrix& r, const UlaGeometry& geometry,
                                   const ScanGrid& grid = {}) {
  AngularSpectrum out{Method::ds, grid.angles(), {}};
  out.power = steered_quadratic_form(r.data(), geometry, out.angles_deg);
  for (double& p : out.power) p = std::max(p, 0.0);
  return out;
}

/// Capon / MVDR: P(theta) = 1 / (a^H R^-1 a).
inline AngularSpectrum mvdr_spectrum(const CovarianceMatrix& r, const UlaGeometry& geometry,
                                     const ScanGrid& grid = {}, double loading = 0.0) {
  const CMatrix inv = invert_hermitian(r, loading);
  AngularSpectrum out{Method::mvdr, grid.angles(), {}};
  out.power = steered_quadratic_form(inv, geometry, out.angles_deg);
  const double floor = reciprocal_floor(geometry.num_elements());
  for (double& p : out.power) p = 1.0 / std::max(p, floor);
  return out;
}

/// MUSIC pseudo-spectrum: P(theta) = 1 / (a^H Qn Qn^H a).
inline AngularSpectrum music_spectrum(const SubspaceDecomposition& sub, const UlaGeometry& geometry,
                                      const ScanGrid& grid = {}) {
  if (sub.num_sources() < 1 || sub.noise_basis.cols() < 1) {
    throw InvalidArgument("music_spectrum: need 1 <= L < M");
  }
  AngularSpectrum out{Method::music, grid.angles(), {}};
  out.power = steered_quadratic_form(sub.noise_projector(), geometry, out.angles_deg);
  const double floor = reciprocal_floor(geometry.num_elements());
  for (double& p : out.power) p = 1.0 / std::max(p, floor);
  return out;
}

/// Spatial frequency of FFT bin `bin`. The DFT kernel is exp(-j 2 pi m l / N)
/// while the steering phase is exp(-j 2 pi u m), so a source at u lands on
/// the bin whose wrapped frequency is -u.
inline double ft_bin_spatial_frequency(int bin, int n_fft) {
  double f = static_cast<double>(bin) / n_fft;
  if (f >= 0.5) f -= 1.0;
  return -f;
}

namespace detail {

/// Maps per-bin powers onto angles, dropping bins outside the visible region,
/// and sorts by angle.
inline AngularSpectrum ft_bins_to_spectrum(const std::vector<double>& power_by_bin,
                                           const UlaGeometry& geometry) {
  const int n_fft = static_cast<int>(power_by_bin.size());
  const double d = geometry.spacing();
  std::vector<std::pair<double, double>> points;
  points.reserve(power_by_bin.size());
  for (int l = 0; l < n_fft; ++l) {
    const double u = ft_bin_spatial_frequency(l, n_fft);
    if (std::abs(u) > d) continue;
    const double theta = std::clamp(rad2deg(std::asin(std::clamp(u / d, -1.0, 1.0))),
                                    -90.0 + kEdgeClipDeg, 90.0 - kEdgeClipDeg);
    points.emplace_back(theta, power_by_bin[static_cast<std::size_t>(l)]);
  }
  std::sort(points.begin(), points.end());

  AngularSpectrum out{Method::ft_doa, {}, {}};
  out.angles_deg.reserve(points.size());
  out.power.reserve(points.size());
  for (const auto& [theta, p] : points) {
    out.angles_deg.push_back(theta);
    out.power.push_back(p);
  }
  return out;
}

inline void check_ft_args(int num_elements, const UlaGeometry& geometry, int n_fft) {
  if (num_elements != geometry.num_elements()) {
    throw InvalidArgument("ft_spectrum: data size does not match the array");
  }
  if (n_fft < geometry.num_elements()) throw InvalidArgument("ft_spectrum: n_fft < M");
}

}  // namespace detail

/// FT-DoA spatial spectrum: per-snapshot zero-padded DFT across the array,
/// squared magnitudes averaged over snapshots, bins mapped through
/// theta = asin(u / (d/lambda)). Bins outside the visible region are dropped.
inline AngularSpectrum ft_spectrum(const SnapshotMatrix& x, const UlaGeometry& geometry,
                                   int n_fft = 1024) {
  detail::check_ft_args(x.num_elements(), geometry, n_fft);
  if (x.num_snapshots() < 1) throw InvalidArgument("ft_spectrum: no snapshots");

  Dft plan(n_fft);
  std::vector<double> accum(static_cast<std::size_t>(n_fft), 0.0);
  for (int s = 0; s < x.num_snapshots(); ++s) {
    const auto& bins = plan.forward(x.data().col(s));
    for (std::size_t l = 0; l < accum.size(); ++l) accum[l] += std::norm(bins[l]);
  }
  const double inv_s = 1.0 / x.num_snapshots();
  for (double& v : accum) v *= inv_s;
  return detail::ft_bins_to_spectrum(accum, geometry);
}

/// Same spectrum from a covariance: the mean |DFT|^2 at bin l is f_l^H R f_l,
/// which reduces to 2 Re(G_l) - g_0 with G the DFT of the diagonal sums g_k.
/// Equal to the snapshot form when R is their sample covariance.
inline AngularSpectrum ft_spectrum(const CovarianceMatrix& r, const UlaGeometry& geometry,
                                   int n_fft = 1024) {
  detail::check_ft_args(r.size(), geometry, n_fft);
  const int m = r.size();
  CVector g(m);
  for (int k = 0; k < m; ++k) g(k) = r.data().diagonal(-k).sum();
  Dft plan(n_fft);
  const auto& bins = plan.forward(g);
  const double g0 = g(0).real();
  std::vector<double> power(static_cast<std::size_t>(n_fft));
  for (std::size_t l = 0; l < power.size(); ++l) {
    power[l] = std::max(2.0 * bins[l].real() - g0, 0.0);
  }
  return detail::ft_bins_to_spectrum(power, geometry);
}

/// Picks the `num_sources` strongest local maxima (p[i] > p[i-1] and
/// p[i] >= p[i+1]); equal powers resolve toward the smaller angle.
inline DoaEstimate find_peaks(const AngularSpectrum& spectrum, int num_sources) {
  if (spectrum.size() < 3) throw InvalidArgument("find_peaks: spectrum needs at least 3 points");
  if (spectrum.power.size() != spectrum.angles_deg.size()) {
    throw InvalidArgument("find_peaks: angle and power lengths differ");
  }
  if (num_sources < 1) throw InvalidArgument("find_peaks: need at least one source");

  const auto& p = spectrum.power;
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    if (p[i] > p[i - 1] && p[i] >= p[i + 1]) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  if (peaks.size() > static_cast<std::size_t>(num_sources)) {
    peaks.resize(static_cast<std::size_t>(num_sources));
  }
  std::sort(peaks.begin(), peaks.end());

  DoaEstimate est;
  est.method = spectrum.method;
  for (std::size_t i : peaks) {
    est.angles_deg.push_back(spectrum.angles_deg[i]);
    est.peak_powers.push_back(p[i]);
  }
  est.underdetected = num_sources - static_cast<int>(peaks.size());
  return est;
}

}  // namespace doa
