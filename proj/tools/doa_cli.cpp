// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "doa/doa.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
  std::string config;
  std::string method = "all";
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--method", f.method, "method tag (ds, mvdr, music, esprit, u-esprit, r-music, ft-doa) or all");
  app->add_option("--trials", f.trials, "Monte-Carlo trials");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--workers", f.workers, "parallel workers");
  app->add_option("--out", f.out, "output file or directory");
}

doa::KeyValueConfig load_config(const CommonFlags& f) {
  doa::KeyValueConfig cfg = f.config.empty() ? doa::KeyValueConfig{} : doa::KeyValueConfig::load(f.config);
  if (f.seed) cfg.set("seed", std::to_string(*f.seed));
  if (f.trials) cfg.set("trials", std::to_string(*f.trials));
  if (f.workers) cfg.set("workers", std::to_string(*f.workers));
  if (!f.out.empty()) cfg.set("output_dir", f.out);
  cfg.set("methods", f.method);
  return cfg;
}

std::ostream& open_or_stdout(const std::string& path, std::optional<std::ofstream>& holder) {
  if (path.empty() || path == "-") return std::cout;
  holder = doa::open_output(path);
  return *holder;
}

int cmd_simulate(const CommonFlags& f) {
  const auto cfg = load_config(f);
  const doa::Scenario s = doa::scenario_from_config(cfg);
  const doa::SnapshotMatrix x = doa::synthesize_snapshots(s);
  const std::string out = f.out.empty() ? "snapshots.csv" : f.out;
  doa::write_snapshots_csv(x, out);
  std::cout << "wrote " << x.num_elements() << " x " << x.num_snapshots() << " snapshots to " << out << '\n';
  return 0;
}

int cmd_estimate(const CommonFlags& f, const std::string& input) {
  const auto cfg = load_config(f);
  const doa::Scenario s = doa::scenario_from_config(cfg);
  doa::RunOptions opts;
  opts.estimator = doa::estimator_options_from_config(cfg);
  opts.exact_covariance = cfg.get_bool("exact_covariance", false);

  std::optional<doa::TrialData> data;
  if (!input.empty()) {
    doa::SnapshotMatrix x = doa::read_snapshots_csv(input);
    doa::CovarianceMatrix r = doa::sample_covariance(x);
    data.emplace(std::move(x), std::move(r), s.geometry, s.sources.size());
  } else {
    data.emplace(doa::make_trial_data(s, s.seed, opts));
  }
  for (doa::Method m : doa::parse_method_list(f.method)) {
    std::cout << doa::to_string(m) << ':';
    try {
      const doa::DoaEstimate est = doa::run_estimator(m, *data, opts.estimator);
      for (double a : est.angles_deg) std::cout << ' ' << doa::format_number(a);
      if (est.underdetected) std::cout << "  (underdetected " << est.underdetected << ')';
      if (est.out_of_visible) std::cout << "  (out of visible " << est.out_of_visible << ')';
      if (est.complex_flagged) std::cout << "  (complex eigenvalues " << est.complex_flagged << ')';
    } catch (const doa::Error& e) {
      std::cout << " error: " << e.what();
    }
    std::cout << '\n';
  }
  return 0;
}

int cmd_spectrum(const CommonFlags& f) {
  const auto cfg = load_config(f);
  const doa::Scenario s = doa::scenario_from_config(cfg);
  doa::RunOptions opts;
  opts.estimator = doa::estimator_options_from_config(cfg);
  opts.exact_covariance = cfg.get_bool("exact_covariance", false);
  opts.workers = static_cast<int>(cfg.get_integer("workers", 1));
  const auto methods = doa::parse_method_list(f.method);
  if (methods.size() != 1) throw doa::InvalidArgument("spectrum: choose exactly one scan method");
  const int trials = static_cast<int>(cfg.get_integer("trials", 1));
  const doa::AngularSpectrum sp = doa::mean_spectrum(s, methods.front(), trials, opts);
  std::optional<std::ofstream> file;
  doa::write_spectrum_csv(sp, open_or_stdout(f.out, file));
  return 0;
}

int cmd_bench(const CommonFlags& f) {
  const auto cfg = load_config(f);
  const doa::ExperimentPlan plan = doa::plan_from_config(cfg);
  const doa::ResultTable table = doa::run_plan(plan);
  table.write_csv(std::cout);
  std::cerr << "results in " << plan.output_dir.string() << '\n';
  return 0;
}

int cmd_complexity(const CommonFlags& f, const doa::ComplexityParams& p) {
  std::optional<std::ofstream> file;
  std::ostream& out = open_or_stdout(f.out, file);
  out << "method,M,S,L,P,n_fft,flops\n";
  for (doa::Method m : doa::parse_method_list(f.method)) {
    out << doa::to_string(m) << ',' << p.num_elements << ',' << p.num_snapshots << ',' << p.num_sources
        << ',' << p.grid_points << ',' << p.n_fft << ',' << doa::format_number(doa::flops(m, p)) << '\n';
  }
  return 0;
}

int cmd_speedup(const CommonFlags& f, std::vector<int> ns, double overhead,
                std::optional<double> target) {
  std::optional<std::ofstream> file;
  std::ostream& out = open_or_stdout(f.out, file);
  if (target) {
    const double sf = doa::fit_serial_fraction(*target, 24);
    out << "# fit at N=24: target " << doa::format_number(*target) << " -> f = " << doa::format_number(sf)
        << '\n';
    out << "N,speedup\n";
    for (int n : ns) out << n << ',' << doa::format_number(doa::speedup({sf, overhead}, n)) << '\n';
    return 0;
  }
  out << "method,N,serial_fraction,speedup\n";
  for (doa::Method m : doa::parse_method_list(f.method)) {
    const doa::SpeedupModel model{doa::fit_serial_fraction(doa::reference_speedup_n24(m), 24), overhead};
    for (int n : ns) {
      out << doa::to_string(m) << ',' << n << ',' << doa::format_number(model.serial_fraction) << ','
          << doa::format_number(doa::speedup(model, n)) << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direction-of-arrival estimation toolkit"};
  app.require_subcommand(1);

  CommonFlags f;
  auto* sim = app.add_subcommand("simulate", "synthesize snapshots and write them as CSV");
  add_common(sim, f);

  std::string input;
  auto* est = app.add_subcommand("estimate", "estimate DoAs for one scenario");
  add_common(est, f);
  est->add_option("--input", input, "snapshot CSV to use instead of synthesizing")->check(CLI::ExistingFile);

  auto* spec = app.add_subcommand("spectrum", "write the (mean) angular spectrum of a scan method");
  add_common(spec, f);

  auto* bench = app.add_subcommand("bench", "run an experiment plan");
  add_common(bench, f);

  doa::ComplexityParams cp;
  auto* cx = app.add_subcommand("complexity", "flop-count table");
  add_common(cx, f);
  cx->add_option("-M,--elements", cp.num_elements);
  cx->add_option("-S,--snapshots", cp.num_snapshots);
  cx->add_option("-L,--sources", cp.num_sources);
  cx->add_option("-P,--grid-points", cp.grid_points);
  cx->add_option("--n-fft", cp.n_fft);

  std::vector<int> ns = {1, 2, 4, 8, 16, 24, 32, 48, 64, 100};
  double overhead = 0.0;
  std::optional<double> target;
  auto* sp = app.add_subcommand("speedup", "speedup model table");
  add_common(sp, f);
  sp->add_option("-N,--processors", ns, "processor counts");
  sp->add_option("--overhead", overhead, "linear overhead coefficient c");
  sp->add_option("--fit", target, "fit f to this speedup at N = 24 and tabulate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(f);
    if (*est) return cmd_estimate(f, input);
    if (*spec) return cmd_spectrum(f);
    if (*bench) return cmd_bench(f);
    if (*cx) return cmd_complexity(f, cp);
    if (*sp) return cmd_speedup(f, ns, overhead, target);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
