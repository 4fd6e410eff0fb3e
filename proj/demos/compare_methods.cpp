// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Two sources seen by a 16-element half-wavelength array; every estimator
// runs on the same snapshots.

#include "doa/doa.hpp"

#include <iomanip>
#include <iostream>

int main() {
  doa::Scenario s{doa::UlaGeometry(16), doa::SourceSet({-20.0, 35.0})};
  s.snr_db = 0.0;
  s.num_snapshots = 200;
  s.seed = 7;

  const doa::TrialData data = doa::make_trial_data(s, s.seed, {});
  doa::EstimatorOptions opts;
  opts.grid.step_deg = 0.01;

  std::cout << std::fixed << std::setprecision(3);
  std::cout << "truth:    -20.000  35.000\n";
  for (doa::Method m : doa::kAllMethods) {
    const doa::DoaEstimate est = doa::run_estimator(m, data, opts);
    std::cout << std::left << std::setw(10) << (std::string(doa::to_string(m)) + ":") << std::right;
    for (double a : est.angles_deg) std::cout << std::setw(8) << a;
    std::cout << "   flops(M=16,S=200) = "
              << doa::flops(m, doa::complexity_params(s, opts)) << '\n';
  }
}
