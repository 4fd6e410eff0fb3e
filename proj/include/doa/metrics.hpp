// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "doa/core.hpp"
#include "doa/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace doa {

/// Per-trial estimates of one method against a fixed set of true angles.
/// A trial whose estimator threw carries the message in `error` and no angles.
struct TrialOutcome {
  DoaEstimate estimate;
  std::optional<std::string> error;

  bool usable(std::size_t num_sources) const {
    return !error && estimate.complete() && estimate.angles_deg.size() == num_sources;
  }
};

struct TrialEnsemble {
  Method method = Method::ds;
  std::vector<double> true_angles_deg;
  std::vector<TrialOutcome> trials;

  int num_trials() const { return static_cast<int>(trials.size()); }
  int num_failed() const {
    int n = 0;
    for (const auto& t : trials) n += t.usable(true_angles_deg.size()) ? 0 : 1;
    return n;
  }
};

struct MseResult {
  double value = 0.0;
  int trials_used = 0;
  int trials_excluded = 0;
};

/// sum_i sum_l (est - truth)^2 / (I - 1) over usable trials, with estimates
/// and truths both sorted ascending and paired by index.
inline MseResult mse(const TrialEnsemble& ens) {
  std::vector<double> truth = ens.true_angles_deg;
  std::sort(truth.begin(), truth.end());
  MseResult out;
  double sum = 0.0;
  for (const auto& t : ens.trials) {
    if (!t.usable(truth.size())) {
      ++out.trials_excluded;
      continue;
    }
    std::vector<double> est = t.estimate.angles_deg;
    std::sort(est.begin(), est.end());
    for (std::size_t l = 0; l < truth.size(); ++l) {
      const double e = est[l] - truth[l];
      sum += e * e;
    }
    ++out.trials_used;
  }
  if (out.trials_used < 2) throw InvalidArgument("mse: need at least 2 usable trials");
  out.value = sum / (out.trials_used - 1);
  return out;
}

/// Half-power main-lobe width around the global maximum, with linearly
/// interpolated crossings.
inline double discrimination_3db(const AngularSpectrum& spectrum) {
  const auto& p = spectrum.power;
  const auto& a = spectrum.angles_deg;
  if (p.size() < 3 || p.size() != a.size()) {
    throw InvalidArgument("discrimination_3db: malformed spectrum");
  }
  const std::size_t k = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  const double half = 0.5 * p[k];
  if (!(p[k] > 0.0)) throw InvalidArgument("discrimination_3db: spectrum has no positive peak");

  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double t = (p[inside] - half) / (p[inside] - p[outside]);
    return a[inside] + t * (a[outside] - a[inside]);
  };

  std::size_t r = k;
  while (r + 1 < p.size() && p[r + 1] > half) ++r;
  if (r + 1 >= p.size()) throw Error("lobe wider than scan range");
  std::size_t l = k;
  while (l > 0 && p[l - 1] > half) --l;
  if (l == 0) throw Error("lobe wider than scan range");
  return crossing(r, r + 1) - crossing(l, l - 1);
}

struct SpreadStatistics {
  double mean = 0.0;
  double std = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  int trials_used = 0;
};

/// Sample standard deviation (divisor I-1) of a single-source ensemble, its
/// mean, and the normal 95% interval of the mean.
inline SpreadStatistics discrimination_std(const TrialEnsemble& ens) {
  if (ens.true_angles_deg.size() != 1) {
    throw InvalidArgument("discrimination_std: single-source ensemble required");
  }
  std::vector<double> v;
  v.reserve(ens.trials.size());
  for (const auto& t : ens.trials) {
    if (t.usable(1)) v.push_back(t.estimate.angles_deg.front());
  }
  if (v.size() < 2) throw InvalidArgument("discrimination_std: need at least 2 usable trials");
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  SpreadStatistics out;
  out.mean = mean;
  out.std = std::sqrt(ss / (n - 1.0));
  const double half = 1.96 * out.std / std::sqrt(n);
  out.ci95_low = mean - half;
  out.ci95_high = mean + half;
  out.trials_used = static_cast<int>(v.size());
  return out;
}

// ---------------------------------------------------------------------------
// Complexity model
// ---------------------------------------------------------------------------

struct ComplexityParams {
  long long num_elements = 256;   // M
  long long num_snapshots = 1000; // S
  long long num_sources = 1;      // L
  long long grid_points = 180001; // P
  long long n_fft = 1024;

  void validate() const {
    if (num_elements < 1 || num_snapshots < 1 || num_sources < 1 || grid_points < 1 || n_fft < 1) {
      throw InvalidArgument("complexity parameters must be positive");
    }
  }
};

/// Closed-form operation counts per method.
inline double flops(Method method, const ComplexityParams& p) {
  p.validate();
  const double m = static_cast<double>(p.num_elements);
  const double s = static_cast<double>(p.num_snapshots);
  const double l = static_cast<double>(p.num_sources);
  const double pp = static_cast<double>(p.grid_points);
  const double n = static_cast<double>(p.n_fft);
  const double m2 = m * m;
  const double m3 = m2 * m;
  switch (method) {
    case Method::ds: return m2 * (s + 2.0) + m + 4.0 * l * pp;
    case Method::mvdr: return m2 * (s + 6.0) + m + 4.0 * l * pp;
    case Method::music: return 5.0 / 3.0 * m3 + m2 * (s + l + 1.0) + 4.0 * l * pp;
    case Method::esprit: return 2.0 * m3 + m2 * (s + 1.0) + l * (l + 1.0);
    case Method::unitary_esprit:
      return 13.0 / 3.0 * m3 + 11.0 * m2 + m * (s * s + s + m + 1.0) + l * l / 2.0 + l / 2.0;
    case Method::root_music: return 11.0 / 3.0 * m3 + m2 * (s - 1.0 + l) + 2.0 * (m - 1.0);
    case Method::ft_doa: return (n * std::log2(n) + 4.0 * l * n) * s;
  }
  throw InvalidArgument("flops: unknown method");
}

inline double flops(std::string_view method_tag, const ComplexityParams& p) {
  return flops(parse_method(method_tag), p);
}

// ---------------------------------------------------------------------------
// Speedup model
// ---------------------------------------------------------------------------

/// Amdahl-type model with a linear overhead term: S_N = 1 / (f + (1-f)/N + c N),
/// times normalized to the single-processor run.
struct SpeedupModel {
  double serial_fraction = 0.0;
  double overhead_coefficient = 0.0;

  void validate() const {
    if (!(serial_fraction >= 0.0 && serial_fraction <= 1.0)) {
      throw InvalidArgument("serial fraction must lie in [0, 1]");
    }
    if (!(overhead_coefficient >= 0.0)) throw InvalidArgument("overhead coefficient must be >= 0");
  }
};

inline double speedup(const SpeedupModel& model, int n) {
  model.validate();
  if (n < 1) throw InvalidArgument("speedup: N must be >= 1");
  const double f = model.serial_fraction;
  const double nn = static_cast<double>(n);
  return 1.0 / (f + (1.0 - f) / nn + model.overhead_coefficient * nn);
}

/// Inverts the c = 0 model: f = (1/target - 1/N) / (1 - 1/N).
inline double fit_serial_fraction(double target_speedup, int n) {
  if (n < 1) throw InvalidArgument("fit_serial_fraction: N must be >= 1");
  if (!(target_speedup >= 1.0 && target_speedup <= n)) {
    throw InvalidArgument("fit_serial_fraction: target outside [1, N]");
  }
  if (n == 1) return 1.0;
  const double inv_n = 1.0 / n;
  return std::clamp((1.0 / target_speedup - inv_n) / (1.0 - inv_n), 0.0, 1.0);
}

/// Published 24-processor speedups used to calibrate per-method serial
/// fractions.
inline double reference_speedup_n24(Method method) {
  switch (method) {
    case Method::ds: return 1.50;
    case Method::mvdr: return 1.62;
    case Method::music: return 1.57;
    case Method::esprit: return 1.23;
    case Method::unitary_esprit: return 1.16;
    case Method::root_music: return 1.75;
    case Method::ft_doa: return 4.32;
  }
  throw InvalidArgument("reference_speedup_n24: unknown method");
}

inline SpeedupModel calibrated_speedup_model(Method method) {
  return SpeedupModel{fit_serial_fraction(reference_speedup_n24(method), 24), 0.0};
}

}  // namespace doa
