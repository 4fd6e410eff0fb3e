// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "doa/array_model.hpp"
#include "doa/core.hpp"
#include "doa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace doa {

/// Eigenvalues of the rotational operator, one per source.
struct RotationalSpectrum {
  std::vector<Complex> eigenvalues;
};

/// All roots of the Root-MUSIC polynomial and the ones chosen as DoAs.
struct RootSet {
  std::vector<Complex> roots;
  std::vector<Complex> selected;
};

namespace detail {

inline void check_source_count(int num_sources, int num_elements, const char* who) {
  if (num_sources < 1 || num_sources > num_elements - 1) {
    throw InvalidArgument(std::string(who) + ": need 1 <= L <= M - 1");
  }
}

/// Appends asin(x) in degrees, or counts the source as invisible when |x| > 1.
inline void push_sine(DoaEstimate& est, double x) {
  if (!std::isfinite(x) || std::abs(x) > 1.0) {
    ++est.out_of_visible;
    return;
  }
  est.angles_deg.push_back(rad2deg(std::asin(x)));
}

inline void finish(DoaEstimate& est) { std::sort(est.angles_deg.begin(), est.angles_deg.end()); }

}  // namespace detail

// ---------------------------------------------------------------------------
// ESPRIT
// ---------------------------------------------------------------------------

/// Least-squares rotational operator between the maximally overlapping
/// subarrays (rows 0..M-2 and 1..M-1 of the signal basis).
inline RotationalSpectrum esprit_rotations(const SubspaceDecomposition& sub) {
  const CMatrix& qs = sub.signal_basis;
  const Eigen::Index m = qs.rows();
  const CMatrix e1 = qs.topRows(m - 1);
  const CMatrix e2 = qs.bottomRows(m - 1);
  const CMatrix psi = least_squares(e1, e2);
  Eigen::ComplexEigenSolver<CMatrix> solver(psi, false);
  if (solver.info() != Eigen::Success) throw Error("esprit: eigensolver failed");
  RotationalSpectrum out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    out.eigenvalues.push_back(solver.eigenvalues()(i));
  }
  return out;
}

/// With the exp(-j ...) steering law the forward shift rotates each source by
/// phi = exp(-j 2 pi (delta/lambda) sin theta), hence the sign in the inversion.
inline DoaEstimate esprit(const SubspaceDecomposition& sub, const UlaGeometry& geometry) {
  detail::check_source_count(sub.num_sources(), geometry.num_elements(), "esprit");
  const RotationalSpectrum rot = esprit_rotations(sub);
  DoaEstimate est;
  est.method = Method::esprit;
  const double scale = 2.0 * kPi * geometry.subarray_displacement();
  for (const Complex& phi : rot.eigenvalues) detail::push_sine(est, -std::arg(phi) / scale);
  detail::finish(est);
  return est;
}

inline DoaEstimate esprit(const CovarianceMatrix& r, const UlaGeometry& geometry, int num_sources) {
  detail::check_source_count(num_sources, geometry.num_elements(), "esprit");
  return esprit(decompose(r, num_sources), geometry);
}

// ---------------------------------------------------------------------------
// Unitary ESPRIT
// ---------------------------------------------------------------------------

/// Imaginary parts above this are reported rather than discarded.
inline constexpr double kRealEigenvalueTolerance = 1e-6;

struct UnitaryEspritDetail {
  DoaEstimate estimate;
  std::vector<Complex> eigenvalues;
};

/// Real-valued ESPRIT on a centro-Hermitian covariance (the FBA covariance).
inline UnitaryEspritDetail unitary_esprit_from_fba_covariance(const CMatrix& r_fba,
                                                              const UlaGeometry& geometry,
                                                              int num_sources) {
  const int m = geometry.num_elements();
  detail::check_source_count(num_sources, m, "unitary_esprit");
  if (r_fba.rows() != m) throw InvalidArgument("unitary_esprit: covariance size mismatch");

  const CMatrix q = pi_real_transform(m);
  RMatrix t = (q.adjoint() * r_fba * q).real();
  t = 0.5 * (t + t.transpose());
  const SymmetricEigen eig = symmetric_eig(t);
  const RMatrix es = eig.vectors.leftCols(num_sources);

  const SelectionMatrices k = selection_matrices(m);
  const RMatrix gamma = least_squares<RMatrix>(k.k1 * es, k.k2 * es);
  Eigen::EigenSolver<RMatrix> solver(gamma, false);
  if (solver.info() != Eigen::Success) throw Error("unitary_esprit: eigensolver failed");

  UnitaryEspritDetail out;
  out.estimate.method = Method::unitary_esprit;
  const double scale = 2.0 * kPi * geometry.subarray_displacement();
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const Complex phi = solver.eigenvalues()(i);
    out.eigenvalues.push_back(phi);
    if (std::abs(phi.imag()) > kRealEigenvalueTolerance) ++out.estimate.complex_flagged;
    // tangent-half-angle map; sign as in esprit()
    detail::push_sine(out.estimate, -2.0 * std::atan(phi.real()) / scale);
  }
  detail::finish(out.estimate);
  return out;
}

/// Unitary ESPRIT from snapshots: forward-backward averaged data, covariance
/// normalized by the original snapshot count.
inline DoaEstimate unitary_esprit(const SnapshotMatrix& x, const UlaGeometry& geometry,
                                  int num_sources) {
  if (x.num_elements() != geometry.num_elements()) {
    throw InvalidArgument("unitary_esprit: snapshot rows do not match the array");
  }
  const CMatrix fba = forward_backward_average(x);
  CMatrix r = CMatrix::Zero(fba.rows(), fba.rows());
  r.selfadjointView<Eigen::Lower>().rankUpdate(fba, 1.0 / x.num_snapshots());
  r.triangularView<Eigen::StrictlyUpper>() = r.adjoint();
  return unitary_esprit_from_fba_covariance(r, geometry, num_sources).estimate;
}

/// Same estimator driven by a covariance: R + Pi conj(R) Pi equals the FBA
/// covariance above.
inline DoaEstimate unitary_esprit(const CovarianceMatrix& r, const UlaGeometry& geometry,
                                  int num_sources) {
  const CMatrix& d = r.data();
  const CMatrix r_fba = d + d.conjugate().reverse();
  return unitary_esprit_from_fba_covariance(r_fba, geometry, num_sources).estimate;
}

// ---------------------------------------------------------------------------
// Root-MUSIC
// ---------------------------------------------------------------------------

/// Diagonal sums a_l = sum_{m-n=l} A_mn of the noise projector, returned in
/// descending order l = M-1 ... -(M-1). These are the polynomial
/// coefficients, leading term first.
inline std::vector<Complex> root_music_coefficients(const SubspaceDecomposition& sub) {
  const CMatrix a = sub.noise_projector();
  const int m = static_cast<int>(a.rows());
  std::vector<Complex> c;
  c.reserve(static_cast<std::size_t>(2 * m - 1));
  for (int l = m - 1; l >= -(m - 1); --l) c.push_back(a.diagonal(-l).sum());
  return c;
}

inline constexpr double kUnitCircleSlack = 1e-6;

namespace detail {

struct RootCandidate {
  Complex root;
  /// Root plus its conjugate-reciprocal partner; same argument as the root
  /// but insensitive to the split of a near-double root on the circle.
  Complex phase_source;
};

}  // namespace detail

inline RootSet root_music_roots(const SubspaceDecomposition& sub, int num_sources,
                                std::vector<Complex>* phase_sources = nullptr) {
  std::vector<Complex> coeffs = root_music_coefficients(sub);
  const Complex lead = coeffs.front();
  for (auto& c : coeffs) c /= lead;

  RootSet out;
  out.roots = polynomial_roots(coeffs);
  const std::size_t n = out.roots.size();

  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(out.roots[i]) <= 1.0 + kUnitCircleSlack) inside.push_back(i);
  }
  std::stable_sort(inside.begin(), inside.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(1.0 - std::abs(out.roots[a])) < std::abs(1.0 - std::abs(out.roots[b]));
  });

  std::vector<char> used(n, 0);
  std::vector<detail::RootCandidate> candidates;
  for (std::size_t i : inside) {
    if (used[i]) continue;
    used[i] = 1;
    const Complex z = out.roots[i];
    detail::RootCandidate cand{z, z};
    if (z != Complex(0.0)) {
      const Complex mirror = 1.0 / std::conj(z);
      std::size_t best = n;
      double best_dist = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double dist = std::abs(out.roots[j] - mirror);
        if (best == n || dist < best_dist) {
          best = j;
          best_dist = dist;
        }
      }
      if (best != n && best_dist <= kUnitCircleSlack * std::max(1.0, std::abs(mirror))) {
        used[best] = 1;
        cand.phase_source = z + out.roots[best];
      }
    }
    candidates.push_back(cand);
    if (static_cast<int>(candidates.size()) == num_sources) break;
  }
  for (const auto& c : candidates) {
    out.selected.push_back(c.root);
    if (phase_sources) phase_sources->push_back(c.phase_source);
  }
  return out;
}

inline DoaEstimate root_music(const SubspaceDecomposition& sub, const UlaGeometry& geometry,
                              int num_sources) {
  detail::check_source_count(num_sources, geometry.num_elements(), "root_music");
  if (sub.num_sources() != num_sources) {
    throw InvalidArgument("root_music: subspace partition does not match the source count");
  }
  std::vector<Complex> phase_sources;
  const RootSet roots = root_music_roots(sub, num_sources, &phase_sources);
  DoaEstimate est;
  est.method = Method::root_music;
  const double scale = 2.0 * kPi * geometry.spacing();
  for (const Complex& z : phase_sources) detail::push_sine(est, std::arg(z) / scale);
  est.underdetected = num_sources - static_cast<int>(phase_sources.size());
  detail::finish(est);
  return est;
}

inline DoaEstimate root_music(const CovarianceMatrix& r, const UlaGeometry& geometry,
                              int num_sources) {
  detail::check_source_count(num_sources, geometry.num_elements(), "root_music");
  return root_music(decompose(r, num_sources), geometry, num_sources);
}

}  // namespace doa
