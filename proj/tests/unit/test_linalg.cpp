// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "doa/linalg.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace {

using doa::CMatrix;
using doa::Complex;
using doa::CVector;
using doa::RMatrix;

constexpr double kInf = std::numeric_limits<double>::infinity();
const Complex kJ(0.0, 1.0);

TEST(HermitianEig, IdentityAndDiagonal) {
  const auto id = doa::hermitian_eig(CMatrix::Identity(4, 4));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(id.values(i), 1.0, 1e-14);

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  const auto e = doa::hermitian_eig(d);
  EXPECT_NEAR(e.values(0), 3.0, 1e-14);
  EXPECT_NEAR(e.values(1), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 1)), 1.0, 1e-14);
}

TEST(HermitianEig, TwoByTwoHandCase) {
  CMatrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const auto e = doa::hermitian_eig(m);
  EXPECT_NEAR(e.values(0), 3.0, 1e-13);
  EXPECT_NEAR(e.values(1), 1.0, 1e-13);
}

TEST(HermitianEig, RejectsNonHermitian) {
  CMatrix m(2, 2);
  m << 1.0, 2.0, 0.0, 1.0;
  EXPECT_THROW(doa::hermitian_eig(m), doa::InvalidArgument);
}

TEST(PartitionSubspaces, RankOneSpansSteeringVector) {
  const doa::UlaGeometry g(8);
  const auto r = doa::exact_covariance(g, doa::SourceSet({27.0}), kInf);
  const auto sub = doa::decompose(r, 1);
  const CVector a = doa::steering_vector(g, 27.0);
  EXPECT_NEAR(std::abs((a.adjoint() * sub.signal_basis)(0, 0)) / a.norm(), 1.0, 1e-9);
}

TEST(PartitionSubspaces, WhiteNoisePowerEstimate) {
  const auto sub = doa::decompose(doa::noise_only_covariance(6, 0.7), 1);
  EXPECT_NEAR(sub.noise_power_estimate, 0.7, 1e-14);
  EXPECT_EQ(sub.noise_basis.cols(), 5);
}

TEST(PartitionSubspaces, TwoSourceNoiseMultiplicity) {
  const doa::UlaGeometry g(12);
  const auto r = doa::exact_covariance(g, doa::SourceSet({-40.0, 10.0}), 0.0, doa::SnrConvention::per_element);
  const auto sub = doa::decompose(r, 2);
  for (int i = 2; i < 12; ++i) EXPECT_NEAR(sub.eigenvalues(i), 1.0, 1e-9);
  EXPECT_NEAR(sub.noise_power_estimate, 1.0, 1e-9);
}

TEST(PartitionSubspaces, RejectsBadSourceCount) {
  const auto eig = doa::hermitian_eig(CMatrix::Identity(4, 4));
  EXPECT_THROW(doa::partition_subspaces(eig, 4), doa::InvalidArgument);
  EXPECT_THROW(doa::partition_subspaces(eig, 0), doa::InvalidArgument);
}

TEST(InvertHermitian, SimpleCases) {
  EXPECT_TRUE(doa::invert_hermitian(CMatrix::Identity(3, 3)).isApprox(CMatrix::Identity(3, 3)));
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  const CMatrix inv = doa::invert_hermitian(d);
  EXPECT_NEAR(inv(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(inv(1, 1).real(), 0.25, 1e-15);
}

TEST(InvertHermitian, SingularWithoutLoadingFinitWithLoading) {
  const doa::UlaGeometry g(6);
  const CMatrix r = doa::exact_covariance(g, doa::SourceSet({12.0}), kInf).data();
  EXPECT_THROW(doa::invert_hermitian(r), doa::SingularMatrix);
  const CMatrix inv = doa::invert_hermitian(r, 1e-3);
  EXPECT_TRUE(inv.allFinite());
  const CMatrix loaded = r + 1e-3 * r.trace().real() / 6.0 * CMatrix::Identity(6, 6);
  EXPECT_LT((inv * loaded - CMatrix::Identity(6, 6)).norm(), 1e-8 * 6);
  EXPECT_THROW(doa::invert_hermitian(r, -1.0), doa::InvalidArgument);
}

TEST(InvertHermitian, ResidualOnWellConditioned) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix a(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) a(i, j) = Complex(n(rng), n(rng));
  const CMatrix r = a * a.adjoint() + CMatrix::Identity(10, 10);
  EXPECT_LT((doa::invert_hermitian(r) * r - CMatrix::Identity(10, 10)).norm(), 1e-8 * 10);
}

TEST(LeastSquares, SquareIdentityAndMean) {
  CMatrix a(2, 2);
  a << 2.0, 1.0, 0.0, 3.0;
  CMatrix b(2, 2);
  b << 1.0, 0.0, 2.0, 5.0;
  EXPECT_TRUE(doa::least_squares(a, b).isApprox(a.inverse() * b, 1e-12));
  EXPECT_TRUE(doa::least_squares(a, a).isApprox(CMatrix::Identity(2, 2), 1e-12));

  CMatrix ones = CMatrix::Ones(3, 1);
  CMatrix rhs(3, 1);
  rhs << 1.0, 2.0, 3.0;
  EXPECT_NEAR(doa::least_squares(ones, rhs)(0, 0).real(), 2.0, 1e-13);
}

TEST(LeastSquares, NormalEquationsHold) {
  const CMatrix a = CMatrix::Random(9, 3);
  const CMatrix b = CMatrix::Random(9, 3);
  const CMatrix x = doa::least_squares(a, b);
  EXPECT_LT((a.adjoint() * (a * x - b)).norm(), 1e-8 * b.norm() * a.norm());
}

TEST(LeastSquares, RankDeficientRejected) {
  CMatrix a(3, 2);
  a << 1.0, 2.0, 2.0, 4.0, 3.0, 6.0;
  EXPECT_THROW(doa::least_squares(a, CMatrix(CMatrix::Ones(3, 2))), doa::RankDeficient);
}

std::vector<Complex> sorted(std::vector<Complex> v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

TEST(PolynomialRoots, Quadratic) {
  const auto r = sorted(doa::polynomial_roots({1.0, 0.0, -1.0}));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(std::abs(r[0] - Complex(-1.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r[1] - Complex(1.0)), 0.0, 1e-12);
}

TEST(PolynomialRoots, QuarticWithDoubleRoot) {
  const auto r = sorted(doa::polynomial_roots({1.0, 2.0, -6.0, 2.0, 1.0}));
  ASSERT_EQ(r.size(), 4u);
  const double s3 = std::sqrt(3.0);
  EXPECT_NEAR(std::abs(r[0] - Complex(-2.0 - s3)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(r[1] - Complex(-2.0 + s3)), 0.0, 1e-10);
  // a double root splits by O(sqrt(eps))
  EXPECT_NEAR(std::abs(r[2] - Complex(1.0)), 0.0, 1e-7);
  EXPECT_NEAR(std::abs(r[3] - Complex(1.0)), 0.0, 1e-7);
}

TEST(PolynomialRoots, ConjugateReciprocalClosure) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  const int deg = 10;
  std::vector<Complex> c(deg + 1);
  for (int k = 0; k <= deg / 2; ++k) {
    c[static_cast<std::size_t>(k)] = Complex(n(rng), n(rng));
    c[static_cast<std::size_t>(deg - k)] = std::conj(c[static_cast<std::size_t>(k)]);
  }
  c[deg / 2] = Complex(c[deg / 2].real(), 0.0);
  const auto roots = doa::polynomial_roots(c);
  for (const auto& z : roots) {
    const Complex mirror = 1.0 / std::conj(z);
    double best = kInf;
    for (const auto& w : roots) best = std::min(best, std::abs(w - mirror));
    EXPECT_LT(best, 1e-6);
  }
}

TEST(PolynomialRoots, ResidualBoundAndErrors) {
  const std::vector<Complex> c = {Complex(2, 1), 0.5, Complex(0, -3), 1.0, Complex(4, 4), -2.0};
  double cmax = 0.0;
  for (auto x : c) cmax = std::max(cmax, std::abs(x));
  for (const auto& z : doa::polynomial_roots(c)) {
    Complex p = 0.0;
    for (auto x : c) p = p * z + x;
    EXPECT_LE(std::abs(p), 1e-6 * cmax * std::pow(std::max(1.0, std::abs(z)), 5));
  }
  EXPECT_THROW(doa::polynomial_roots({0.0, 0.0}), doa::InvalidArgument);
  EXPECT_THROW(doa::polynomial_roots({0.0, 1.0}), doa::InvalidArgument);
  EXPECT_THROW(doa::polynomial_roots({1.0}), doa::InvalidArgument);
  const auto with_zero = doa::polynomial_roots({1.0, -3.0, 0.0});
  ASSERT_EQ(with_zero.size(), 2u);
}

CVector brute_dft(const CVector& x, int n) {
  CVector out = CVector::Zero(n);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < x.size(); ++m) out(l) += x(m) * std::polar(1.0, -2.0 * doa::kPi * m * l / n);
  return out;
}

TEST(Dft, TrivialInputs) {
  const CVector ones = CVector::Ones(4);
  const CVector y = doa::dft(ones, 4);
  EXPECT_NEAR(std::abs(y(0) - Complex(4.0)), 0.0, 1e-12);
  for (int l = 1; l < 4; ++l) EXPECT_NEAR(std::abs(y(l)), 0.0, 1e-12);

  CVector imp = CVector::Zero(5);
  imp(0) = 1.0;
  const CVector z = doa::dft(imp, 8);
  for (int l = 0; l < 8; ++l) EXPECT_NEAR(std::abs(z(l) - Complex(1.0)), 0.0, 1e-12);
}

TEST(Dft, PositiveExponentialLandsOnBinOne) {
  CVector x(8);
  for (int m = 0; m < 8; ++m) x(m) = std::polar(1.0, 2.0 * doa::kPi * m / 8.0);
  const CVector ref = brute_dft(x, 8);
  const CVector y = doa::dft(x, 8);
  EXPECT_TRUE(y.isApprox(ref, 1e-12));
  EXPECT_NEAR(std::abs(y(1)), 8.0, 1e-12);
  EXPECT_NEAR(std::abs(y(7)), 0.0, 1e-12);
}

TEST(Dft, InverseRecoversPaddedInputAndErrors) {
  const CVector x = CVector::Random(6);
  const CVector back = doa::inverse_dft(doa::dft(x, 16));
  for (int i = 0; i < 16; ++i) {
    const Complex expected = i < 6 ? x(i) : Complex(0.0);
    EXPECT_NEAR(std::abs(back(i) - expected), 0.0, 1e-10);
  }
  EXPECT_THROW(doa::dft(CVector::Ones(8), 4), doa::InvalidArgument);
  EXPECT_THROW(doa::dft(CVector::Ones(3), 12), doa::InvalidArgument);
}

TEST(ExchangeMatrix, ReversesAndIsInvolution) {
  doa::ExchangeMatrix pi(4);
  CVector v(4);
  v << 1.0, 2.0, 3.0, 4.0;
  const CVector r = pi.apply(v);
  EXPECT_EQ(r(0), Complex(4.0));
  EXPECT_EQ(r(3), Complex(1.0));
  EXPECT_TRUE(pi.apply(r).isApprox(v));
  const RMatrix p = pi.materialize();
  EXPECT_TRUE((p * p).isApprox(RMatrix::Identity(4, 4)));
}

TEST(ForwardBackward, ScalarCase) {
  CMatrix x(1, 1);
  x << Complex(2, 1);
  const CMatrix f = doa::forward_backward_average(doa::SnapshotMatrix(x));
  ASSERT_EQ(f.cols(), 2);
  EXPECT_EQ(f(0, 0), Complex(2, 1));
  EXPECT_EQ(f(0, 1), Complex(2, -1));
}

TEST(ForwardBackward, RightBlockIsFlippedConjugate) {
  const CMatrix x = CMatrix::Random(5, 7);
  const CMatrix f = doa::forward_backward_average(doa::SnapshotMatrix(x));
  for (int m = 0; m < 5; ++m)
    for (int s = 0; s < 7; ++s) EXPECT_EQ(f(m, 7 + s), std::conj(x(4 - m, 6 - s)));
  // left block re-averaged reproduces the whole
  EXPECT_TRUE(doa::forward_backward_average(doa::SnapshotMatrix(f.leftCols(7))).isApprox(f));
}

TEST(ForwardBackward, CovarianceIsCentroHermitian) {
  const CMatrix x = CMatrix::Random(6, 20);
  const CMatrix f = doa::forward_backward_average(doa::SnapshotMatrix(x));
  const CMatrix r = f * f.adjoint() / 20.0;
  const RMatrix pi = doa::ExchangeMatrix(6).materialize();
  EXPECT_LT((pi * r.conjugate() * pi - r).norm(), 1e-10);
}

TEST(PiReal, SmallOrders) {
  const double s = 1.0 / std::sqrt(2.0);
  const CMatrix q1 = doa::pi_real_transform(1);
  EXPECT_NEAR(std::abs(q1(0, 0) - Complex(1.0)), 0.0, 1e-15);

  CMatrix q2(2, 2);
  q2 << s, kJ * s, s, -kJ * s;
  EXPECT_TRUE(doa::pi_real_transform(2).isApprox(q2, 1e-15));

  CMatrix q3(3, 3);
  q3 << s, 0.0, kJ * s, 0.0, 1.0, 0.0, s, 0.0, -kJ * s;
  EXPECT_TRUE(doa::pi_real_transform(3).isApprox(q3, 1e-15));
  EXPECT_EQ(doa::PiRealTransform(3).parity(), doa::PiRealTransform::Parity::odd);
  EXPECT_EQ(doa::PiRealTransform(4).parity(), doa::PiRealTransform::Parity::even);
}

TEST(PiReal, UnitaryAndLeftPiReal) {
  for (int p = 1; p <= 12; ++p) {
    const CMatrix q = doa::pi_real_transform(p);
    EXPECT_LT((q.adjoint() * q - CMatrix::Identity(p, p)).norm(), 1e-12) << p;
    const RMatrix pi = doa::ExchangeMatrix(p).materialize();
    EXPECT_LT((pi * q.conjugate() - q).norm(), 1e-12) << p;
  }
}

TEST(SelectionMatrices, TwoElementHandCase) {
  // Q_1 = [1], J2 = [0 1], Q_2 = (1/sqrt2)[[1, j],[1, -j]] -> J2 Q_2 = (1/sqrt2)[1, -j]
  const auto k = doa::selection_matrices(2);
  ASSERT_EQ(k.k1.rows(), 1);
  ASSERT_EQ(k.k1.cols(), 2);
  const double r2 = std::sqrt(2.0);
  EXPECT_NEAR(k.k1(0, 0), r2, 1e-14);
  EXPECT_NEAR(k.k1(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(k.k2(0, 0), 0.0, 1e-14);
  EXPECT_NEAR(k.k2(0, 1), -r2, 1e-14);
}

TEST(SelectionMatrices, ReconstructDefinition) {
  for (int m : {3, 4, 7, 8}) {
    const auto k = doa::selection_matrices(m);
    RMatrix j2 = RMatrix::Zero(m - 1, m);
    for (int i = 0; i < m - 1; ++i) j2(i, i + 1) = 1.0;
    const CMatrix t = 2.0 * doa::pi_real_transform(m - 1).adjoint() * j2.cast<Complex>() *
                      doa::pi_real_transform(m);
    CMatrix rebuilt = k.k1.cast<Complex>() + kJ * k.k2.cast<Complex>();
    EXPECT_LT((rebuilt - t).norm(), 1e-12);
  }
  EXPECT_THROW(doa::selection_matrices(1), doa::InvalidArgument);
}

}  // namespace
