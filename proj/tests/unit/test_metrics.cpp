// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "doa/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace {

doa::TrialEnsemble ensemble(std::vector<double> truth, std::vector<std::vector<double>> est) {
  doa::TrialEnsemble e;
  e.method = doa::Method::esprit;
  e.true_angles_deg = std::move(truth);
  for (auto& a : est) {
    doa::TrialOutcome t;
    t.estimate.method = e.method;
    t.estimate.angles_deg = std::move(a);
    e.trials.push_back(std::move(t));
  }
  return e;
}

TEST(Mse, ExactEstimatesGiveZero) {
  EXPECT_DOUBLE_EQ(doa::mse(ensemble({10.0}, {{10.0}, {10.0}, {10.0}})).value, 0.0);
}

TEST(Mse, TwoTrialHandValue) {
  const auto r = doa::mse(ensemble({10.0}, {{9.0}, {11.0}}));
  EXPECT_DOUBLE_EQ(r.value, 2.0);
  EXPECT_EQ(r.trials_used, 2);
  EXPECT_EQ(r.trials_excluded, 0);
}

TEST(Mse, MultiSourceSortedPairing) {
  // truths {-5, 20}; estimates paired after sorting
  const auto r = doa::mse(ensemble({20.0, -5.0}, {{-4.0, 21.0}, {22.0, -5.0}}));
  EXPECT_DOUBLE_EQ(r.value, (1.0 + 1.0 + 0.0 + 4.0) / 1.0);
}

TEST(Mse, UnderdetectedAndFailedTrialsExcluded) {
  auto e = ensemble({0.0}, {{1.0}, {}, {-1.0}, {3.0}});
  e.trials[1].estimate.underdetected = 1;
  e.trials[3].error = "boom";
  const auto r = doa::mse(e);
  EXPECT_EQ(r.trials_used, 2);
  EXPECT_EQ(r.trials_excluded, 2);
  EXPECT_DOUBLE_EQ(r.value, 2.0);
  EXPECT_EQ(e.num_failed(), 2);
  EXPECT_THROW(doa::mse(ensemble({0.0}, {{1.0}})), doa::InvalidArgument);
}

TEST(Mse, TranslationInvariant) {
  const auto base = doa::mse(ensemble({3.0, 8.0}, {{2.5, 8.25}, {3.5, 7.0}, {3.0, 8.5}})).value;
  const auto moved = doa::mse(ensemble({3.0 + 17.0, 8.0 + 17.0}, {{19.5, 25.25}, {20.5, 24.0}, {20.0, 25.5}})).value;
  EXPECT_NEAR(base, moved, 1e-12);
}

TEST(DiscriminationStd, HandValues) {
  EXPECT_DOUBLE_EQ(doa::discrimination_std(ensemble({10.0}, {{4.0}, {4.0}, {4.0}})).std, 0.0);
  const auto st = doa::discrimination_std(ensemble({10.0}, {{9.0}, {11.0}}));
  EXPECT_NEAR(st.std, std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(st.mean, 10.0);
  EXPECT_NEAR(st.ci95_high - st.mean, 1.96 * std::sqrt(2.0) / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(st.mean - st.ci95_low, st.ci95_high - st.mean, 1e-15);
}

TEST(DiscriminationStd, TranslationInvariantAndErrors) {
  const auto a = doa::discrimination_std(ensemble({0.0}, {{0.1}, {-0.3}, {0.25}, {0.0}}));
  const auto b = doa::discrimination_std(ensemble({40.0}, {{40.1}, {39.7}, {40.25}, {40.0}}));
  EXPECT_NEAR(a.std, b.std, 1e-12);
  EXPECT_THROW(doa::discrimination_std(ensemble({0.0, 1.0}, {{0.0, 1.0}, {0.0, 1.0}})), doa::InvalidArgument);
}

TEST(Discrimination3db, TriangleHalfWidth) {
  doa::AngularSpectrum sp;
  const double step = 0.01;
  const double w = 1.3;  // half-width at half height -> base half-width 2w
  for (int i = 0; i <= 1000; ++i) {
    const double a = -5.0 + i * step;
    sp.angles_deg.push_back(a);
    sp.power.push_back(std::max(0.0, 1.0 - std::abs(a) / (2.0 * w)));
  }
  EXPECT_NEAR(doa::discrimination_3db(sp), 2.0 * w, step);
}

TEST(Discrimination3db, LobeWiderThanScan) {
  doa::AngularSpectrum sp;
  sp.angles_deg = {0.0, 1.0, 2.0, 3.0};
  sp.power = {0.9, 1.0, 0.95, 0.2};
  EXPECT_THROW(doa::discrimination_3db(sp), doa::Error);
  sp.power = {0.2, 1.0, 0.95, 0.9};
  EXPECT_THROW(doa::discrimination_3db(sp), doa::Error);
}

TEST(Flops, HandEvaluations) {
  const doa::ComplexityParams p;
  EXPECT_DOUBLE_EQ(doa::flops(doa::Method::ds, p), 66387332.0);
  EXPECT_DOUBLE_EQ(doa::flops(doa::Method::mvdr, p), 66649476.0);
  const double m = 256, s = 1000, l = 1, pp = 180001;
  EXPECT_NEAR(doa::flops(doa::Method::music, p), 5.0 / 3.0 * m * m * m + m * m * (s + l + 1) + 4 * l * pp, 1e-6);
  EXPECT_DOUBLE_EQ(doa::flops(doa::Method::esprit, p), 2 * m * m * m + m * m * (s + 1) + l * (l + 1));
  EXPECT_NEAR(doa::flops(doa::Method::unitary_esprit, p),
              13.0 / 3.0 * m * m * m + 11 * m * m + m * (s * s + s + m + 1) + 0.5 + 0.5, 1e-6);
  EXPECT_NEAR(doa::flops(doa::Method::root_music, p), 127052968.6666667, 1e-3);
  EXPECT_DOUBLE_EQ(doa::flops(doa::Method::ft_doa, p), (1024.0 * 10.0 + 4.0 * 1024.0) * 1000.0);
  EXPECT_DOUBLE_EQ(doa::flops("ds", p), 66387332.0);
  EXPECT_THROW(doa::flops("bogus", p), doa::InvalidArgument);
}

TEST(Flops, EspritSourceTermIsNegligible) {
  doa::ComplexityParams a;
  doa::ComplexityParams b;
  b.num_sources = 128;
  EXPECT_DOUBLE_EQ(doa::flops(doa::Method::esprit, b) - doa::flops(doa::Method::esprit, a), 16512.0 - 2.0);
}

TEST(Flops, MonotoneAndIndependence) {
  const doa::ComplexityParams base{32, 100, 2, 1801, 256};
  for (doa::Method m : {doa::Method::ds, doa::Method::mvdr, doa::Method::music}) {
    for (int axis = 0; axis < 4; ++axis) {
      doa::ComplexityParams q = base;
      long long* field[] = {&q.num_elements, &q.num_snapshots, &q.num_sources, &q.grid_points};
      *field[axis] += 1;
      EXPECT_GT(doa::flops(m, q), doa::flops(m, base)) << doa::to_string(m) << axis;
    }
  }
  doa::ComplexityParams more_p = base;
  more_p.grid_points *= 10;
  for (doa::Method m : {doa::Method::esprit, doa::Method::unitary_esprit, doa::Method::root_music}) {
    EXPECT_DOUBLE_EQ(doa::flops(m, more_p), doa::flops(m, base));
  }
  doa::ComplexityParams more_m = base;
  more_m.num_elements *= 4;
  EXPECT_DOUBLE_EQ(doa::flops(doa::Method::ft_doa, more_m), doa::flops(doa::Method::ft_doa, base));
  doa::ComplexityParams bad = base;
  bad.num_snapshots = 0;
  EXPECT_THROW(doa::flops(doa::Method::ds, bad), doa::InvalidArgument);
}

TEST(Flops, OrderingAtDefaults) {
  const doa::ComplexityParams p;
  const double ft = doa::flops(doa::Method::ft_doa, p);
  const double ds = doa::flops(doa::Method::ds, p);
  const double mv = doa::flops(doa::Method::mvdr, p);
  EXPECT_LT(ft, ds);
  EXPECT_LT(ds, mv);
  double mx = 0.0;
  for (doa::Method m : {doa::Method::music, doa::Method::esprit, doa::Method::unitary_esprit, doa::Method::root_music}) {
    EXPECT_LT(mv, doa::flops(m, p));
    mx = std::max(mx, doa::flops(m, p));
  }
  EXPECT_DOUBLE_EQ(mx, doa::flops(doa::Method::unitary_esprit, p));
}

TEST(Speedup, LimitingCases) {
  for (int n : {1, 2, 7, 100}) {
    EXPECT_NEAR(doa::speedup({0.0, 0.0}, n), n, 1e-12);
    EXPECT_NEAR(doa::speedup({1.0, 0.0}, n), 1.0, 1e-12);
  }
  EXPECT_THROW(doa::speedup({0.5, 0.0}, 0), doa::InvalidArgument);
  EXPECT_THROW(doa::speedup({1.5, 0.0}, 4), doa::InvalidArgument);
  EXPECT_THROW(doa::speedup({0.5, -1.0}, 4), doa::InvalidArgument);
}

TEST(Speedup, FitAndHundredProcessors) {
  const double f = doa::fit_serial_fraction(4.32, 24);
  EXPECT_NEAR(f, (1.0 / 4.32 - 1.0 / 24.0) / (1.0 - 1.0 / 24.0), 1e-15);
  EXPECT_NEAR(f, 0.19807, 1e-5);
  EXPECT_NEAR(doa::speedup({f, 0.0}, 24), 4.32, 1e-12);
  EXPECT_NEAR(doa::speedup({0.19807, 0.0}, 100), 4.85, 0.01);
  EXPECT_DOUBLE_EQ(doa::fit_serial_fraction(24.0, 24), 0.0);
  EXPECT_DOUBLE_EQ(doa::fit_serial_fraction(1.0, 24), 1.0);
  EXPECT_THROW(doa::fit_serial_fraction(0.5, 24), doa::InvalidArgument);
  EXPECT_THROW(doa::fit_serial_fraction(30.0, 24), doa::InvalidArgument);
}

TEST(Speedup, MonotoneAndBounded) {
  for (double f : {0.0, 0.05, 0.2, 0.7}) {
    double prev = 0.0;
    for (int n = 1; n <= 512; n *= 2) {
      const double s = doa::speedup({f, 0.0}, n);
      EXPECT_GE(s, prev);
      EXPECT_GE(s, 1.0 - 1e-12);
      EXPECT_LE(s, n + 1e-12);
      if (f > 0) EXPECT_LE(s, 1.0 / f + 1e-12);
      prev = s;
    }
  }
  // overhead eventually reverses the gain
  EXPECT_LT(doa::speedup({0.1, 1e-3}, 1000), doa::speedup({0.1, 1e-3}, 30));
}

TEST(Speedup, CalibratedModelsReproduceReferenceValues) {
  for (doa::Method m : doa::kAllMethods) {
    EXPECT_NEAR(doa::speedup(doa::calibrated_speedup_model(m), 24), doa::reference_speedup_n24(m), 1e-12);
  }
}

}  // namespace
