// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "doa/array_model.hpp"
#include "doa/core.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace doa {

// ---------------------------------------------------------------------------
// Eigendecomposition and subspaces
// ---------------------------------------------------------------------------

/// Eigenpairs with eigenvalues sorted descending; column i of `vectors`
/// belongs to values(i).
template <typename MatrixT>
struct EigenPairs {
  RVector values;
  MatrixT vectors;
};

using HermitianEigen = EigenPairs<CMatrix>;
using SymmetricEigen = EigenPairs<RMatrix>;

namespace detail {

template <typename MatrixT>
EigenPairs<MatrixT> sorted_descending(const RVector& ascending_values, const MatrixT& vectors) {
  const Eigen::Index n = ascending_values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return ascending_values(a) > ascending_values(b);
  });
  EigenPairs<MatrixT> out{RVector(n), MatrixT(vectors.rows(), n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    out.values(i) = ascending_values(src);
    out.vectors.col(i) = vectors.col(src);
  }
  return out;
}

template <typename MatrixT>
void require_self_adjoint(const MatrixT& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InvalidArgument(std::string(what) + ": matrix must be square and non-empty");
  }
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (asym > CovarianceMatrix::kHermitianTolerance *
                 std::max(scale, std::numeric_limits<double>::min())) {
    throw InvalidArgument(std::string(what) + ": matrix is not Hermitian");
  }
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix (tridiagonal QR via Eigen).
inline HermitianEigen hermitian_eig(const CMatrix& r) {
  detail::require_self_adjoint(r, "hermitian_eig");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(r);
  if (solver.info() != Eigen::Success) throw Error("hermitian_eig: solver did not converge");
  return detail::sorted_descending<CMatrix>(solver.eigenvalues(), solver.eigenvectors());
}

inline HermitianEigen hermitian_eig(const CovarianceMatrix& r) { return hermitian_eig(r.data()); }

inline SymmetricEigen symmetric_eig(const RMatrix& t) {
  detail::require_self_adjoint(t, "symmetric_eig");
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(t);
  if (solver.info() != Eigen::Success) throw Error("symmetric_eig: solver did not converge");
  return detail::sorted_descending<RMatrix>(solver.eigenvalues(), solver.eigenvectors());
}

/// Covariance eigenstructure split into signal (L largest) and noise parts.
struct SubspaceDecomposition {
  RVector eigenvalues;
  CMatrix signal_basis;
  CMatrix noise_basis;
  /// Mean of the M - L smallest eigenvalues.
  double noise_power_estimate = 0.0;

  int num_elements() const { return static_cast<int>(eigenvalues.size()); }
  int num_sources() const { return static_cast<int>(signal_basis.cols()); }
  CMatrix noise_projector() const { return noise_basis * noise_basis.adjoint(); }
};

inline SubspaceDecomposition partition_subspaces(const HermitianEigen& eig, int num_sources) {
  const int m = static_cast<int>(eig.values.size());
  if (num_sources < 1) throw InvalidArgument("partition_subspaces: need at least one source");
  if (num_sources >= m) {
    throw InvalidArgument("partition_subspaces: number of sources must be below the array size");
  }
  SubspaceDecomposition out;
  out.eigenvalues = eig.values;
  out.signal_basis = eig.vectors.leftCols(num_sources);
  out.noise_basis = eig.vectors.rightCols(m - num_sources);
  out.noise_power_estimate = eig.values.tail(m - num_sources).mean();
  return out;
}

inline SubspaceDecomposition decompose(const CovarianceMatrix& r, int num_sources) {
  return partition_subspaces(hermitian_eig(r), num_sources);
}

// ---------------------------------------------------------------------------
// Inversion and least squares
// ---------------------------------------------------------------------------

/// (R + loading * trace(R)/M * I)^-1 for Hermitian positive (semi)definite R.
inline CMatrix invert_hermitian(const CMatrix& r, double loading = 0.0) {
  if (!(loading >= 0.0)) throw InvalidArgument("invert_hermitian: loading must be >= 0");
  detail::require_self_adjoint(r, "invert_hermitian");
  const Eigen::Index m = r.rows();
  CMatrix loaded = r;
  if (loading > 0.0) {
    const double level = loading * r.diagonal().real().sum() / static_cast<double>(m);
    loaded.diagonal().array() += level;
  }
  Eigen::LLT<CMatrix> llt(loaded);
  const double eps = std::numeric_limits<double>::epsilon();
  if (llt.info() != Eigen::Success || !(llt.rcond() > eps * static_cast<double>(m))) {
    throw SingularMatrix(
        "invert_hermitian: matrix is singular at working precision (consider diagonal loading)");
  }
  CMatrix inv = llt.solve(CMatrix::Identity(m, m));
  return 0.5 * (inv + inv.adjoint());
}

inline CMatrix invert_hermitian(const CovarianceMatrix& r, double loading = 0.0) {
  return invert_hermitian(r.data(), loading);
}

/// argmin_X ||A X - B||_F via column-pivoted QR. Works for real or complex A.
template <typename MatrixT>
MatrixT least_squares(const MatrixT& a, const MatrixT& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("least_squares: row count mismatch");
  if (a.rows() < a.cols()) throw InvalidArgument("least_squares: system is underdetermined");
  Eigen::ColPivHouseholderQR<MatrixT> qr(a);
  if (qr.rank() < a.cols()) throw RankDeficient("least_squares: coefficient matrix is rank deficient");
  return qr.solve(b);
}

// ---------------------------------------------------------------------------
// Polynomial roots
// ---------------------------------------------------------------------------

namespace detail {

struct HornerValue {
  Complex p;
  Complex dp;
};

/// Evaluates p and p' with coefficients in descending powers.
inline HornerValue horner(std::span<const Complex> c, Complex z) {
  Complex p = c[0];
  Complex dp = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    dp = dp * z + p;
    p = p * z + c[k];
  }
  return {p, dp};
}

inline double horner_abs(std::span<const double> c, double x) {
  double p = c[0];
  for (std::size_t k = 1; k < c.size(); ++k) p = p * x + c[k];
  return p;
}

/// Newton ratio p(z)/p'(z). Outside the unit disk the reversed polynomial is
/// evaluated at 1/z so that high powers of |z| never appear. `converged` is
/// set when |p(z)| is already at the rounding floor.
inline Complex newton_ratio(std::span<const Complex> c, std::span<const Complex> reversed,
                            std::span<const double> abs_c, std::span<const double> abs_rev,
                            Complex z, bool& converged) {
  const double n = static_cast<double>(c.size() - 1);
  const double eps = std::numeric_limits<double>::epsilon();
  const double az = std::abs(z);
  if (az <= 1.0) {
    const auto [p, dp] = horner(c, z);
    converged = std::abs(p) <= 4.0 * n * eps * horner_abs(abs_c, az);
    if (p == Complex(0.0)) return 0.0;
    return p / dp;
  }
  const Complex w = 1.0 / z;
  const auto [q, dq] = horner(reversed, w);
  converged = std::abs(q) <= 4.0 * n * eps * horner_abs(abs_rev, 1.0 / az);
  if (q == Complex(0.0)) return 0.0;
  return z * q / (n * q - w * dq);
}

inline std::vector<Complex> companion_roots(std::span<const Complex> monic) {
  const int n = static_cast<int>(monic.size()) - 1;
  CMatrix comp = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) comp(0, k) = -monic[static_cast<std::size_t>(k + 1)];
  for (int k = 1; k < n; ++k) comp(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<CMatrix> solver(comp, false);
  if (solver.info() != Eigen::Success) throw Error("polynomial_roots: companion eigensolver failed");
  std::vector<Complex> roots(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) roots[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
  return roots;
}

/// Simultaneous Aberth-Ehrlich iteration. Returns false if it did not settle.
inline bool aberth_roots(std::span<const Complex> monic, std::vector<Complex>& roots,
                         int max_iterations = 800) {
  const int n = static_cast<int>(monic.size()) - 1;
  std::vector<Complex> reversed(monic.rbegin(), monic.rend());
  std::vector<double> abs_c(monic.size());
  std::vector<double> abs_rev(monic.size());
  for (std::size_t k = 0; k < monic.size(); ++k) {
    abs_c[k] = std::abs(monic[k]);
    abs_rev[k] = std::abs(reversed[k]);
  }

  // start on a circle at the geometric mean of the root moduli
  const double radius = std::pow(std::abs(monic.back()), 1.0 / n);
  roots.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    roots[static_cast<std::size_t>(k)] = std::polar(radius, 2.0 * kPi * k / n + 0.4);
  }

  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    int active = 0;
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (done[ui]) continue;
      bool at_floor = false;
      const Complex ratio =
          newton_ratio(monic, reversed, abs_c, abs_rev, roots[ui], at_floor);
      if (at_floor || ratio == Complex(0.0)) {
        done[ui] = 1;
        continue;
      }
      Complex repulsion = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) repulsion += 1.0 / (roots[ui] - roots[static_cast<std::size_t>(j)]);
      }
      const Complex step = ratio / (1.0 - ratio * repulsion);
      roots[ui] -= step;
      if (std::abs(step) <= 2.0 * eps * std::abs(roots[ui])) {
        done[ui] = 1;
      } else {
        ++active;
      }
    }
    if (active == 0) return true;
  }
  return false;
}

}  // namespace detail

/// All n roots (with multiplicity) of c[0] z^n + c[1] z^(n-1) + ... + c[n].
/// Aberth-Ehrlich iteration with a companion-matrix fallback, then one Newton
/// polishing step per root.
inline std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs) {
  if (coeffs.size() < 2) throw InvalidArgument("polynomial_roots: degree must be >= 1");
  if (std::all_of(coeffs.begin(), coeffs.end(), [](Complex c) { return c == Complex(0.0); })) {
    throw InvalidArgument("polynomial_roots: zero polynomial");
  }
  if (coeffs.front() == Complex(0.0)) {
    throw InvalidArgument("polynomial_roots: leading coefficient is zero");
  }

  std::vector<Complex> monic(coeffs.begin(), coeffs.end());
  const Complex lead = monic.front();
  for (auto& c : monic) c /= lead;

  // exact zero roots are peeled off before iterating
  std::vector<Complex> roots;
  while (monic.size() > 1 && monic.back() == Complex(0.0)) {
    monic.pop_back();
    roots.emplace_back(0.0);
  }
  if (monic.size() == 1) return roots;
  if (monic.size() == 2) {
    roots.push_back(-monic[1]);
    return roots;
  }

  std::vector<Complex> found;
  if (!detail::aberth_roots(monic, found)) found = detail::companion_roots(monic);

  for (auto& z : found) {
    const auto [p, dp] = detail::horner(monic, z);
    if (dp != Complex(0.0)) {
      const Complex candidate = z - p / dp;
      if (std::abs(detail::horner(monic, candidate).p) <= std::abs(p)) z = candidate;
    }
  }
  roots.insert(roots.end(), found.begin(), found.end());
  return roots;
}

inline std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
  return polynomial_roots(std::span<const Complex>(coeffs));
}

// ---------------------------------------------------------------------------
// DFT
// ---------------------------------------------------------------------------

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Zero-padded DFT with kernel exp(-j 2 pi m l / n_fft). Keeps its FFT plan
/// so repeated transforms of one length are cheap.
class Dft {
 public:
  explicit Dft(int n_fft) : n_fft_(n_fft), padded_(n_fft), spectrum_(n_fft) {
    if (!is_power_of_two(n_fft)) throw InvalidArgument("dft: n_fft must be a power of two");
  }

  int size() const { return n_fft_; }

  template <typename Derived>
  const std::vector<Complex>& forward(const Eigen::MatrixBase<Derived>& x) {
    if (x.size() > n_fft_) throw InvalidArgument("dft: n_fft is shorter than the input");
    std::fill(padded_.begin(), padded_.end(), Complex(0.0));
    for (Eigen::Index i = 0; i < x.size(); ++i) padded_[static_cast<std::size_t>(i)] = x(i);
    fft_.fwd(spectrum_, padded_);
    return spectrum_;
  }

 private:
  int n_fft_;
  Eigen::FFT<double> fft_;
  std::vector<Complex> padded_;
  std::vector<Complex> spectrum_;
};

inline CVector dft(const CVector& x, int n_fft) {
  if (n_fft < x.size()) throw InvalidArgument("dft: n_fft is shorter than the input");
  Dft plan(n_fft);
  const auto& out = plan.forward(x);
  return Eigen::Map<const CVector>(out.data(), n_fft);
}

/// Inverse of dft(): returns the zero-padded length-n sequence.
inline CVector inverse_dft(const CVector& spectrum) {
  const int n = static_cast<int>(spectrum.size());
  if (!is_power_of_two(n)) throw InvalidArgument("inverse_dft: length must be a power of two");
  Eigen::FFT<double> fft;
  std::vector<Complex> in(spectrum.data(), spectrum.data() + n);
  std::vector<Complex> out;
  fft.inv(out, in);
  return Eigen::Map<const CVector>(out.data(), n);
}

// ---------------------------------------------------------------------------
// Unitary transforms for real-valued ESPRIT
// ---------------------------------------------------------------------------

/// p x p exchange matrix (ones on the antidiagonal), kept implicit.
class ExchangeMatrix {
 public:
  explicit ExchangeMatrix(int order) : order_(order) {
    if (order < 1) throw InvalidArgument("exchange matrix order must be >= 1");
  }
  int order() const { return order_; }

  template <typename Derived>
  auto apply(const Eigen::MatrixBase<Derived>& v) const {
    if (v.rows() != order_) throw InvalidArgument("exchange matrix: dimension mismatch");
    return v.colwise().reverse().eval();
  }

  RMatrix materialize() const { return RMatrix::Identity(order_, order_).rowwise().reverse(); }

 private:
  int order_;
};

/// X_fba = [X, Pi_M conj(X) Pi_S].
inline CMatrix forward_backward_average(const SnapshotMatrix& x) {
  const CMatrix& d = x.data();
  CMatrix out(d.rows(), 2 * d.cols());
  out.leftCols(d.cols()) = d;
  out.rightCols(d.cols()) = d.conjugate().reverse();
  return out;
}

/// Sparse unitary left Pi-real matrix Q_p.
class PiRealTransform {
 public:
  enum class Parity { even, odd };

  explicit PiRealTransform(int order) : order_(order) {
    if (order < 1) throw InvalidArgument("Pi-real transform order must be >= 1");
  }

  int order() const { return order_; }
  Parity parity() const { return order_ % 2 == 0 ? Parity::even : Parity::odd; }

  CMatrix materialize() const {
    const int n = order_ / 2;
    const double s = 1.0 / std::sqrt(2.0);
    const Complex j(0.0, 1.0);
    CMatrix q = CMatrix::Zero(order_, order_);
    const int lower = order_ - n;  // first row of the exchange block
    for (int i = 0; i < n; ++i) {
      q(i, i) = s;                            // I_n
      q(i, order_ - n + i) = j * s;           // j I_n
      q(lower + i, n - 1 - i) = s;            // Pi_n
      q(lower + i, order_ - 1 - i) = -j * s;  // -j Pi_n
    }
    if (parity() == Parity::odd) q(n, n) = 1.0;  // sqrt(2) / sqrt(2)
    return q;
  }

 private:
  int order_;
};

inline CMatrix pi_real_transform(int order) { return PiRealTransform(order).materialize(); }

struct SelectionMatrices {
  RMatrix k1;
  RMatrix k2;
};

/// K1 = 2 Re{Q_m^H J2 Q_M}, K2 = 2 Im{Q_m^H J2 Q_M} with J2 = [0 I_m], m = M - 1.
inline SelectionMatrices selection_matrices(int num_elements) {
  if (num_elements < 2) throw InvalidArgument("selection matrices need M >= 2");
  const int m = num_elements - 1;
  RMatrix j2 = RMatrix::Zero(m, num_elements);
  j2.rightCols(m).setIdentity();
  const CMatrix t = pi_real_transform(m).adjoint() * j2.cast<Complex>() *
                    pi_real_transform(num_elements);
  return {2.0 * t.real(), 2.0 * t.imag()};
}

}  // namespace doa
