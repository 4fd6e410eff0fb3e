// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "doa/array_model.hpp"
#include "doa/core.hpp"
#include "doa/io.hpp"
#include "doa/linalg.hpp"
#include "doa/metrics.hpp"
#include "doa/parametric.hpp"
#include "doa/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace doa {

// ---------------------------------------------------------------------------
// Seeds and scheduling
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed of trial `index`: splitmix64(master ^ splitmix64(index)).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index));
}

inline constexpr const char* kSeedDerivation = "splitmix64(master ^ splitmix64(trial_index))";

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Every index runs
/// exactly once; the caller owns any ordering of results.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      (void)w;
      for (int i = next++; i < n; i = next++) {
        if (failed) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---------------------------------------------------------------------------
// Single-trial dispatch
// ---------------------------------------------------------------------------

struct EstimatorOptions {
  ScanGrid grid;
  int n_fft = 1024;
  /// Diagonal loading for MVDR, as a fraction of trace(R)/M.
  double mvdr_loading = 0.0;
};

struct RunOptions {
  EstimatorOptions estimator;
  int workers = 1;
  /// Use the asymptotic covariance in place of sampled snapshots.
  bool exact_covariance = false;
  /// Relative ridge (times trace/M) added to a noiseless exact covariance.
  double exact_regularization = 1e-10;
};

/// Everything one trial's estimators read. Snapshots are absent in
/// exact-covariance mode.
struct TrialData {
  TrialData(std::optional<SnapshotMatrix> x, CovarianceMatrix r, UlaGeometry g, int l)
      : snapshots(std::move(x)), covariance(std::move(r)), geometry(g), num_sources(l) {}

  std::optional<SnapshotMatrix> snapshots;
  CovarianceMatrix covariance;
  UlaGeometry geometry;
  int num_sources;

  const SubspaceDecomposition& subspaces() const {
    if (!subspaces_) subspaces_ = decompose(covariance, num_sources);
    return *subspaces_;
  }

 private:
  mutable std::optional<SubspaceDecomposition> subspaces_;
};

inline TrialData make_trial_data(const Scenario& scenario, std::uint64_t seed, const RunOptions& opts) {
  const int l = scenario.sources.size();
  if (opts.exact_covariance) {
    CovarianceMatrix r = exact_covariance(scenario.geometry, scenario.sources, scenario.snr_db,
                                          scenario.snr_convention);
    if (scenario.noise_power() == 0.0 && opts.exact_regularization > 0.0) {
      const int m = r.size();
      r = CovarianceMatrix(r.data() + opts.exact_regularization * r.trace() / m *
                                          CMatrix::Identity(m, m));
    }
    return TrialData{std::nullopt, std::move(r), scenario.geometry, l};
  }
  Scenario s = scenario;
  s.seed = seed;
  SnapshotMatrix x = synthesize_snapshots(s);
  CovarianceMatrix r = sample_covariance(x);
  return TrialData{std::move(x), std::move(r), scenario.geometry, l};
}

/// Spectrum of a scan method for one trial.
inline AngularSpectrum compute_spectrum(Method method, const TrialData& data,
                                        const EstimatorOptions& opts) {
  switch (method) {
    case Method::ds: return ds_spectrum(data.covariance, data.geometry, opts.grid);
    case Method::mvdr:
      return mvdr_spectrum(data.covariance, data.geometry, opts.grid, opts.mvdr_loading);
    case Method::music: return music_spectrum(data.subspaces(), data.geometry, opts.grid);
    case Method::ft_doa:
      return data.snapshots ? ft_spectrum(*data.snapshots, data.geometry, opts.n_fft)
                            : ft_spectrum(data.covariance, data.geometry, opts.n_fft);
    default: break;
  }
  throw InvalidArgument("method '" + std::string(to_string(method)) + "' has no angular spectrum");
}

/// Runs one estimator. Scan methods hand their spectrum back through
/// `spectrum_out` when it is non-null.
inline DoaEstimate run_estimator(Method method, const TrialData& data, const EstimatorOptions& opts,
                                 AngularSpectrum* spectrum_out = nullptr) {
  if (is_scan_method(method)) {
    AngularSpectrum sp = compute_spectrum(method, data, opts);
    DoaEstimate est = find_peaks(sp, data.num_sources);
    if (spectrum_out) *spectrum_out = std::move(sp);
    return est;
  }
  switch (method) {
    case Method::esprit: return esprit(data.subspaces(), data.geometry);
    // the FBA covariance R + Pi conj(R) Pi equals the one built from the
    // augmented snapshots, at a quarter of the cost
    case Method::unitary_esprit: return unitary_esprit(data.covariance, data.geometry, data.num_sources);
    case Method::root_music: return root_music(data.subspaces(), data.geometry, data.num_sources);
    default: break;
  }
  throw InvalidArgument("unsupported method");
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct EnsembleRun {
  std::vector<TrialEnsemble> ensembles;
  /// Mean spectrum per method (scan methods, when requested).
  std::vector<std::optional<AngularSpectrum>> mean_spectra;
  /// Trials that contributed to each mean spectrum.
  std::vector<int> spectrum_counts;
};

/// Runs I trials of every method on shared per-trial data. Trial i draws from
/// derive_seed(scenario.seed, i); results do not depend on `workers`.
inline EnsembleRun run_ensembles(const Scenario& scenario, std::span<const Method> methods,
                                 int num_trials, const RunOptions& opts, bool keep_mean_spectra) {
  scenario.validate();
  opts.estimator.grid.validate();
  if (num_trials < 1) throw InvalidArgument("run_trials: need at least one trial");
  if (methods.empty()) throw InvalidArgument("run_trials: no methods");

  const std::size_t nm = methods.size();
  EnsembleRun run;
  run.ensembles.resize(nm);
  run.mean_spectra.resize(nm);
  run.spectrum_counts.assign(nm, 0);
  for (std::size_t k = 0; k < nm; ++k) {
    run.ensembles[k].method = methods[k];
    run.ensembles[k].true_angles_deg = scenario.sources.angles_deg();
    run.ensembles[k].trials.resize(static_cast<std::size_t>(num_trials));
  }

  std::vector<char> wants_spectrum(nm, 0);
  for (std::size_t k = 0; k < nm; ++k) {
    wants_spectrum[k] = keep_mean_spectra && is_scan_method(methods[k]) ? 1 : 0;
  }

  // Spectra are reduced block by block in trial order so the sums are
  // bit-identical for any worker count.
  const int block = std::max(1, opts.workers);
  std::vector<std::vector<std::optional<AngularSpectrum>>> pending(
      static_cast<std::size_t>(block), std::vector<std::optional<AngularSpectrum>>(nm));

  for (int start = 0; start < num_trials; start += block) {
    const int count = std::min(block, num_trials - start);
    parallel_for(count, opts.workers, [&](int j) {
      const int i = start + j;
      auto& slot = pending[static_cast<std::size_t>(j)];
      std::optional<TrialData> data;
      std::string data_error;
      try {
        data.emplace(make_trial_data(scenario, derive_seed(scenario.seed, static_cast<std::uint64_t>(i)), opts));
      } catch (const std::exception& e) {
        data_error = e.what();
      }
      for (std::size_t k = 0; k < nm; ++k) {
        TrialOutcome& out = run.ensembles[k].trials[static_cast<std::size_t>(i)];
        out.estimate.method = methods[k];
        slot[k].reset();
        if (!data) {
          out.error = data_error;
          continue;
        }
        try {
          AngularSpectrum sp;
          out.estimate = run_estimator(methods[k], *data, opts.estimator, wants_spectrum[k] ? &sp : nullptr);
          if (wants_spectrum[k]) slot[k] = std::move(sp);
        } catch (const std::exception& e) {
          out.error = e.what();
        }
      }
    });
    for (int j = 0; j < count; ++j) {
      for (std::size_t k = 0; k < nm; ++k) {
        auto& sp = pending[static_cast<std::size_t>(j)][k];
        if (!sp) continue;
        auto& acc = run.mean_spectra[k];
        if (!acc) {
          acc = std::move(*sp);
        } else {
          for (std::size_t p = 0; p < acc->power.size(); ++p) acc->power[p] += sp->power[p];
        }
        ++run.spectrum_counts[k];
        sp.reset();
      }
    }
  }
  for (std::size_t k = 0; k < nm; ++k) {
    if (!run.mean_spectra[k]) continue;
    const double inv = 1.0 / run.spectrum_counts[k];
    for (double& p : run.mean_spectra[k]->power) p *= inv;
  }
  return run;
}

inline std::vector<TrialEnsemble> run_trials(const Scenario& scenario, std::span<const Method> methods,
                                             int num_trials, const RunOptions& opts = {}) {
  return run_ensembles(scenario, methods, num_trials, opts, false).ensembles;
}

inline TrialEnsemble run_trials(const Scenario& scenario, Method method, int num_trials,
                                const RunOptions& opts = {}) {
  const Method one[] = {method};
  return std::move(run_trials(scenario, one, num_trials, opts).front());
}

/// Element-wise mean of the per-trial spectra.
inline AngularSpectrum mean_spectrum(const Scenario& scenario, Method method, int num_trials,
                                     const RunOptions& opts = {}) {
  if (!is_scan_method(method)) {
    throw InvalidArgument("mean_spectrum: '" + std::string(to_string(method)) + "' is not a scan method");
  }
  const Method one[] = {method};
  EnsembleRun run = run_ensembles(scenario, one, num_trials, opts, true);
  if (!run.mean_spectra.front()) throw Error("mean_spectrum: every trial failed");
  return std::move(*run.mean_spectra.front());
}

// ---------------------------------------------------------------------------
// Histograms
// ---------------------------------------------------------------------------

struct Histogram {
  double mean = 0.0;
  double std = 0.0;
  double bin_width = 0.0;
  std::vector<double> bin_centers;
  std::vector<int> counts;
};

/// Bins of width 0.25 sigma over mean +- 5 sigma for a single-source ensemble.
inline Histogram estimate_histogram(const TrialEnsemble& ens) {
  const SpreadStatistics st = discrimination_std(ens);
  Histogram h;
  h.mean = st.mean;
  h.std = st.std;
  if (!(st.std > 0.0)) return h;
  h.bin_width = 0.25 * st.std;
  const int nbins = 40;
  const double lo = st.mean - 5.0 * st.std;
  h.counts.assign(nbins, 0);
  for (int b = 0; b < nbins; ++b) h.bin_centers.push_back(lo + (b + 0.5) * h.bin_width);
  for (const auto& t : ens.trials) {
    if (!t.usable(1)) continue;
    const int b = static_cast<int>(std::floor((t.estimate.angles_deg.front() - lo) / h.bin_width));
    if (b >= 0 && b < nbins) ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

enum class SweepAxis { num_elements, snr_db, num_sources, num_trials, processors };

inline std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::num_elements: return "M";
    case SweepAxis::snr_db: return "SNR";
    case SweepAxis::num_sources: return "L";
    case SweepAxis::num_trials: return "I";
    case SweepAxis::processors: return "N";
  }
  return "?";
}

inline SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "M" || s == "m") return SweepAxis::num_elements;
  if (s == "SNR" || s == "snr" || s == "snr_db") return SweepAxis::snr_db;
  if (s == "L" || s == "l") return SweepAxis::num_sources;
  if (s == "I" || s == "i" || s == "trials") return SweepAxis::num_trials;
  if (s == "N" || s == "n" || s == "processors") return SweepAxis::processors;
  throw InvalidArgument("unknown sweep axis '" + std::string(s) + "'");
}

/// L source angles spread evenly over [-60, 60] degrees (0 for one source).
inline std::vector<double> spread_angles(int num_sources) {
  if (num_sources < 1) throw InvalidArgument("spread_angles: need at least one source");
  if (num_sources == 1) return {0.0};
  std::vector<double> out;
  for (int i = 0; i < num_sources; ++i) out.push_back(-60.0 + 120.0 * i / (num_sources - 1));
  return out;
}

struct ExperimentPlan {
  Scenario base;
  SweepAxis axis = SweepAxis::num_elements;
  std::vector<double> values;
  std::vector<Method> methods;
  int num_trials = 40;
  std::filesystem::path output_dir = "results";
  RunOptions run;
  /// false: emit only the complexity/speedup model columns.
  bool simulate = true;
  bool dump_spectra = true;
  double overhead_coefficient = 0.0;

  void validate() const {
    if (values.empty()) throw InvalidArgument("plan: sweep list is empty");
    if (methods.empty()) throw InvalidArgument("plan: no methods selected");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (axis != SweepAxis::snr_db && !(values[i] > 0.0)) {
        throw InvalidArgument("plan: sweep values must be positive");
      }
      if (axis != SweepAxis::snr_db && values[i] != std::floor(values[i])) {
        throw InvalidArgument("plan: sweep values on this axis must be integers");
      }
      if (i > 0 && !(values[i] > values[i - 1])) {
        throw InvalidArgument("plan: sweep values must be strictly increasing");
      }
    }
    for (std::size_t i = 0; i < methods.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (methods[i] == methods[j]) throw InvalidArgument("plan: duplicate method");
      }
    }
    if (num_trials < 1) throw InvalidArgument("plan: num_trials must be >= 1");
    base.validate();
    run.estimator.grid.validate();
  }

  /// Scenario and trial count at one sweep point.
  std::pair<Scenario, int> at(double value) const {
    Scenario s = base;
    int trials = num_trials;
    switch (axis) {
      case SweepAxis::num_elements:
        s.geometry = UlaGeometry(static_cast<int>(value), base.geometry.spacing(),
                                 base.geometry.subarray_displacement());
        break;
      case SweepAxis::snr_db: s.snr_db = value; break;
      case SweepAxis::num_sources: {
        const int l = static_cast<int>(value);
        if (l != base.sources.size()) s.sources = SourceSet(spread_angles(l), base.sources.source_power());
        break;
      }
      case SweepAxis::num_trials: trials = static_cast<int>(value); break;
      case SweepAxis::processors: break;
    }
    return {s, trials};
  }
};

struct ResultRow {
  Method method = Method::ds;
  double sweep_value = 0.0;
  int num_elements = 0;
  int num_snapshots = 0;
  int num_sources = 0;
  double snr_db = 0.0;
  int num_trials = 0;
  int processors = 24;
  std::optional<double> mse_deg2;
  std::optional<double> disc_deg;
  double flops = 0.0;
  double speedup_n24 = 0.0;
  double speedup_n = 0.0;
  std::optional<double> mean_deg;
  std::optional<double> std_deg;
  double underdetected_rate = 0.0;
  double failed_rate = 0.0;
};

struct ResultTable {
  SweepAxis axis = SweepAxis::num_elements;
  std::vector<ResultRow> rows;

  static constexpr const char* kHeader =
      "method,M,S,L,SNR_dB,I,N,mse_deg2,disc_deg,flops,speedup_N24,speedup_N,mean_deg,std_deg,"
      "underdetected_rate,failed_rate";

  const ResultRow* find(Method m, double sweep_value) const {
    for (const auto& r : rows) {
      if (r.method == m && r.sweep_value == sweep_value) return &r;
    }
    return nullptr;
  }

  void write_csv(std::ostream& out) const {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    out << kHeader << '\n';
    for (const auto& r : rows) {
      out << to_string(r.method) << ',' << r.num_elements << ',' << r.num_snapshots << ','
          << r.num_sources << ',' << format_number(r.snr_db) << ',' << r.num_trials << ','
          << r.processors << ',' << opt(r.mse_deg2) << ',' << opt(r.disc_deg) << ','
          << format_number(r.flops) << ',' << format_number(r.speedup_n24) << ','
          << format_number(r.speedup_n) << ',' << opt(r.mean_deg) << ',' << opt(r.std_deg) << ','
          << format_number(r.underdetected_rate) << ',' << format_number(r.failed_rate) << '\n';
    }
  }
};

inline ComplexityParams complexity_params(const Scenario& s, const EstimatorOptions& opts) {
  ComplexityParams p;
  p.num_elements = s.geometry.num_elements();
  p.num_snapshots = s.num_snapshots;
  p.num_sources = s.sources.size();
  p.grid_points = opts.grid.size();
  p.n_fft = opts.n_fft;
  return p;
}

namespace detail {

inline std::string sweep_label(SweepAxis axis, double v) {
  return std::string(to_string(axis)) + "_" + format_number(v);
}

inline void write_manifest(const ExperimentPlan& plan, const std::filesystem::path& path) {
  auto out = open_output(path);
  const auto& b = plan.base;
  out << "# resolved experiment configuration\n";
  out << "m = " << b.geometry.num_elements() << '\n';
  out << "d_over_lambda = " << format_number(b.geometry.spacing()) << '\n';
  out << "delta_over_lambda = " << format_number(b.geometry.subarray_displacement()) << '\n';
  out << "angles_deg = ";
  for (std::size_t i = 0; i < b.sources.angles_deg().size(); ++i) {
    out << (i ? "," : "") << format_number(b.sources.angles_deg()[i]);
  }
  out << '\n';
  out << "source_power = " << format_number(b.sources.source_power()) << '\n';
  out << "snr_db = " << format_number(b.snr_db) << '\n';
  out << "snr_convention = " << to_string(b.snr_convention) << '\n';
  out << "noise_power = " << format_number(b.noise_power()) << '\n';
  out << "snapshots = " << b.num_snapshots << '\n';
  out << "seed = " << b.seed << '\n';
  out << "seed_derivation = " << kSeedDerivation << '\n';
  out << "rng = std::mt19937_64, circular normal, variance/2 per component\n";
  out << "sweep_axis = " << to_string(plan.axis) << '\n';
  out << "sweep_values = ";
  for (std::size_t i = 0; i < plan.values.size(); ++i) out << (i ? "," : "") << format_number(plan.values[i]);
  out << '\n';
  out << "methods = ";
  for (std::size_t i = 0; i < plan.methods.size(); ++i) out << (i ? "," : "") << to_string(plan.methods[i]);
  out << '\n';
  out << "trials = " << plan.num_trials << '\n';
  out << "simulate = " << (plan.simulate ? "true" : "false") << '\n';
  out << "exact_covariance = " << (plan.run.exact_covariance ? "true" : "false") << '\n';
  out << "grid_start = " << format_number(plan.run.estimator.grid.start_deg) << '\n';
  out << "grid_stop = " << format_number(plan.run.estimator.grid.stop_deg) << '\n';
  out << "grid_step = " << format_number(plan.run.estimator.grid.step_deg) << '\n';
  out << "grid_points = " << plan.run.estimator.grid.size() << '\n';
  out << "n_fft = " << plan.run.estimator.n_fft << '\n';
  out << "mvdr_loading = " << format_number(plan.run.estimator.mvdr_loading) << '\n';
  out << "overhead_coefficient = " << format_number(plan.overhead_coefficient) << '\n';
  out << "dump_spectra = " << (plan.dump_spectra ? "true" : "false") << '\n';
  // worker count is deliberately absent: outputs do not depend on it
  finish_output(out, path);
}

}  // namespace detail

/// Runs every sweep point and writes results.csv, manifest.txt, speedup.csv
/// and (optionally) spectra/ and histograms/ under plan.output_dir.
inline ResultTable run_plan(const ExperimentPlan& plan) {
  plan.validate();
  namespace fs = std::filesystem;
  ResultTable table;
  table.axis = plan.axis;

  const bool simulate = plan.simulate && plan.axis != SweepAxis::processors;
  for (double v : plan.values) {
    auto [scenario, trials] = plan.at(v);
    std::optional<EnsembleRun> run;
    if (simulate) run = run_ensembles(scenario, plan.methods, trials, plan.run, true);

    for (std::size_t k = 0; k < plan.methods.size(); ++k) {
      const Method method = plan.methods[k];
      ResultRow row;
      row.method = method;
      row.sweep_value = v;
      row.num_elements = scenario.geometry.num_elements();
      row.num_snapshots = scenario.num_snapshots;
      row.num_sources = scenario.sources.size();
      row.snr_db = scenario.snr_db;
      row.num_trials = simulate ? trials : 0;
      row.processors = plan.axis == SweepAxis::processors ? static_cast<int>(v) : 24;
      row.flops = flops(method, complexity_params(scenario, plan.run.estimator));
      const SpeedupModel model{fit_serial_fraction(reference_speedup_n24(method), 24),
                               plan.overhead_coefficient};
      row.speedup_n24 = speedup(model, 24);
      row.speedup_n = speedup(model, row.processors);

      if (run) {
        const TrialEnsemble& ens = run->ensembles[k];
        int under = 0;
        int failed = 0;
        for (const auto& t : ens.trials) {
          if (t.error) {
            ++failed;
          } else if (!t.usable(ens.true_angles_deg.size())) {
            ++under;
          }
        }
        row.underdetected_rate = static_cast<double>(under) / trials;
        row.failed_rate = static_cast<double>(failed) / trials;
        try {
          row.mse_deg2 = mse(ens).value;
        } catch (const InvalidArgument&) {
        }
        if (scenario.sources.size() == 1) {
          try {
            const SpreadStatistics st = discrimination_std(ens);
            row.mean_deg = st.mean;
            row.std_deg = st.std;
          } catch (const InvalidArgument&) {
          }
        }
        const auto& mean_sp = run->mean_spectra[k];
        if (is_scan_method(method)) {
          if (mean_sp) {
            try {
              row.disc_deg = discrimination_3db(*mean_sp);
            } catch (const Error&) {
            }
            if (plan.dump_spectra) {
              write_spectrum_csv(*mean_sp, plan.output_dir / "spectra" /
                                               (std::string(to_string(method)) + "_" +
                                                detail::sweep_label(plan.axis, v) + ".csv"));
            }
          }
        } else {
          row.disc_deg = row.std_deg;
          if (row.std_deg && *row.std_deg > 0.0) {
            const Histogram h = estimate_histogram(ens);
            const fs::path hp = plan.output_dir / "histograms" /
                                (std::string(to_string(method)) + "_" + detail::sweep_label(plan.axis, v) + ".csv");
            auto out = open_output(hp);
            out << "bin_center_deg,count\n";
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
              out << format_number(h.bin_centers[b]) << ',' << h.counts[b] << '\n';
            }
            finish_output(out, hp);
          }
        }
      }
      table.rows.push_back(row);
    }
  }

  {
    const fs::path p = plan.output_dir / "results.csv";
    auto out = open_output(p);
    table.write_csv(out);
    finish_output(out, p);
  }
  {
    const fs::path p = plan.output_dir / "speedup.csv";
    auto out = open_output(p);
    out << "method,N,serial_fraction,overhead_coefficient,speedup\n";
    std::vector<int> ns = {1, 2, 4, 8, 16, 24, 32, 48, 64, 100};
    if (plan.axis == SweepAxis::processors) {
      ns.clear();
      for (double v : plan.values) ns.push_back(static_cast<int>(v));
    }
    for (Method m : plan.methods) {
      const SpeedupModel model{fit_serial_fraction(reference_speedup_n24(m), 24), plan.overhead_coefficient};
      for (int n : ns) {
        out << to_string(m) << ',' << n << ',' << format_number(model.serial_fraction) << ','
            << format_number(model.overhead_coefficient) << ',' << format_number(speedup(model, n)) << '\n';
      }
    }
    finish_output(out, p);
  }
  detail::write_manifest(plan, plan.output_dir / "manifest.txt");
  return table;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Scenario keys: m, d_over_lambda, delta_over_lambda, angles_deg, snr_db,
/// snapshots, seed, source_power, snr_convention.
inline Scenario scenario_from_config(const KeyValueConfig& cfg) {
  const int m = static_cast<int>(cfg.get_integer("m", 8));
  const double d = cfg.get_double("d_over_lambda", 0.5);
  const double delta = cfg.get_double("delta_over_lambda", d);
  Scenario s{UlaGeometry(m, d, delta),
             SourceSet(cfg.get_list("angles_deg", {0.0}), cfg.get_double("source_power", 1.0))};
  s.snr_db = cfg.get_double("snr_db", 0.0);
  s.num_snapshots = static_cast<int>(cfg.get_integer("snapshots", 1000));
  s.seed = static_cast<std::uint64_t>(cfg.get_integer("seed", 0));
  s.snr_convention = parse_snr_convention(cfg.get_string("snr_convention", "offset_6db"));
  s.validate();
  return s;
}

inline std::vector<Method> parse_method_list(std::string_view s) {
  s = trim(s);
  if (s == "all") return {kAllMethods.begin(), kAllMethods.end()};
  std::vector<Method> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    const auto tag = trim(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
    if (!tag.empty()) out.push_back(parse_method(tag));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline EstimatorOptions estimator_options_from_config(const KeyValueConfig& cfg) {
  EstimatorOptions o;
  o.grid.start_deg = cfg.get_double("grid_start", o.grid.start_deg);
  o.grid.stop_deg = cfg.get_double("grid_stop", o.grid.stop_deg);
  o.grid.step_deg = cfg.get_double("grid_step", o.grid.step_deg);
  o.grid.validate();
  o.n_fft = static_cast<int>(cfg.get_integer("n_fft", o.n_fft));
  o.mvdr_loading = cfg.get_double("mvdr_loading", o.mvdr_loading);
  return o;
}

/// Plan keys on top of the scenario ones: sweep_axis, sweep_values, methods,
/// trials, output_dir, workers, exact_covariance, simulate, dump_spectra,
/// overhead_coefficient and the estimator keys grid_start/stop/step, n_fft,
/// mvdr_loading.
inline ExperimentPlan plan_from_config(const KeyValueConfig& cfg) {
  ExperimentPlan plan;
  plan.base = scenario_from_config(cfg);
  plan.axis = parse_sweep_axis(cfg.get_string("sweep_axis", "M"));
  plan.values = cfg.get_list("sweep_values", {});
  if (plan.values.empty() && !cfg.has("sweep_values")) {
    plan.values = {plan.axis == SweepAxis::num_elements ? static_cast<double>(plan.base.geometry.num_elements())
                   : plan.axis == SweepAxis::snr_db      ? plan.base.snr_db
                   : plan.axis == SweepAxis::num_sources ? static_cast<double>(plan.base.sources.size())
                   : plan.axis == SweepAxis::processors  ? 24.0
                                                         : 40.0};
  }
  plan.methods = parse_method_list(cfg.get_string("methods", "all"));
  plan.num_trials = static_cast<int>(cfg.get_integer("trials", 40));
  plan.output_dir = cfg.get_string("output_dir", "results");
  plan.run.estimator = estimator_options_from_config(cfg);
  plan.run.workers = static_cast<int>(cfg.get_integer("workers", 1));
  plan.run.exact_covariance = cfg.get_bool("exact_covariance", false);
  plan.simulate = cfg.get_bool("simulate", true);
  plan.dump_spectra = cfg.get_bool("dump_spectra", true);
  plan.overhead_coefficient = cfg.get_double("overhead_coefficient", 0.0);
  plan.validate();
  return plan;
}

}  // namespace doa
