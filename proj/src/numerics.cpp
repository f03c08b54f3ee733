// SPDX-License-Identifier: Apache-2.0
//
// qdsim: cross-layer multiuser video streaming simulator
// Copyright (C) 2026 The qdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "qdsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qdsim/error.hpp"

namespace qdsim::numerics {

CMatrix::CMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(Errc::ShapeMismatch, "entry count does not match rows*cols");
  }
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

double CMatrix::max_abs() const noexcept { return numerics::max_abs(data_); }

CMatrix& CMatrix::operator+=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(Errc::ShapeMismatch, "matrix sum shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(Errc::ShapeMismatch, "matrix difference shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
  for (auto& x : data_) x *= s;
  return *this;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw Error(Errc::ShapeMismatch, "matrix product shape mismatch");
  CMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx ark = a(r, k);
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += ark * b(k, c);
    }
  return out;
}

CVector matvec(const CMatrix& a, std::span<const cplx> x) {
  if (a.cols() != x.size()) throw Error(Errc::ShapeMismatch, "A x shape mismatch");
  CVector y(a.rows(), cplx{0.0, 0.0});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    cplx acc{0.0, 0.0};
    for (std::size_t c = 0; c < a.cols(); ++c) acc += a(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

CVector matvec_adjoint(const CMatrix& a, std::span<const cplx> x) {
  if (a.rows() != x.size()) throw Error(Errc::ShapeMismatch, "A^H x shape mismatch");
  CVector y(a.cols(), cplx{0.0, 0.0});
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += std::conj(a(r, c)) * x[r];
  return y;
}

void add_outer(CMatrix& a, std::span<const cplx> x, double scale) {
  if (!a.square() || a.rows() != x.size())
    throw Error(Errc::ShapeMismatch, "outer product shape mismatch");
  for (std::size_t r = 0; r < x.size(); ++r)
    for (std::size_t c = 0; c < x.size(); ++c) a(r, c) += scale * x[r] * std::conj(x[c]);
}

void add_diagonal(CMatrix& a, double s) {
  const std::size_t n = std::min(a.rows(), a.cols());
  for (std::size_t i = 0; i < n; ++i) a(i, i) += s;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw Error(Errc::ShapeMismatch, "dot length mismatch");
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm2(std::span<const cplx> x) {
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc;
}

double max_abs(std::span<const cplx> x) {
  double m = 0.0;
  for (const auto& v : x) m = std::max(m, std::abs(v));
  return m;
}

CVector scaled(std::span<const cplx> x, cplx s) {
  CVector out(x.begin(), x.end());
  for (auto& v : out) v *= s;
  return out;
}

bool is_hermitian(const CMatrix& a) {
  if (!a.square()) return false;
  const double scale = a.max_abs();
  double worst = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = r; c < a.cols(); ++c)
      worst = std::max(worst, std::abs(a(r, c) - std::conj(a(c, r))));
  return worst <= 1e-10 * scale;
}

Cholesky::Cholesky(const CMatrix& a) : l_(a.rows(), a.cols()) {
  if (!a.square()) throw Error(Errc::ShapeMismatch, "Cholesky needs a square matrix");
  if (!is_hermitian(a)) throw Error(Errc::NonHermitian, "matrix is not Hermitian");
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(l_(j, k));
    if (!(diag > 0.0)) {
      std::ostringstream os;
      os << "non-positive pivot " << diag << " at column " << j;
      throw Error(Errc::NotPositiveDefinite, os.str());
    }
    const double ljj = std::sqrt(diag);
    l_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l_(i, k) * std::conj(l_(j, k));
      l_(i, j) = acc / ljj;
    }
  }
}

CVector Cholesky::solve(std::span<const cplx> b) const {
  const std::size_t n = l_.rows();
  if (b.size() != n) throw Error(Errc::ShapeMismatch, "rhs length mismatch");
  CVector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc = b[i];
    for (std::size_t k = 0; k < i; ++k) acc -= l_(i, k) * y[k];
    y[i] = acc / l_(i, i).real();
  }
  CVector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    cplx acc = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= std::conj(l_(k, ii)) * x[k];
    x[ii] = acc / l_(ii, ii).real();
  }
  return x;
}

double Cholesky::logdet() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < l_.rows(); ++i) acc += std::log(l_(i, i).real());
  return 2.0 * acc;
}

CVector solve_hpd(const CMatrix& a, std::span<const cplx> b) { return Cholesky(a).solve(b); }

double logdet_hpd(const CMatrix& a) { return Cholesky(a).logdet(); }

namespace {

double j0_series(double x) {
  const long double q = static_cast<long double>(x) * x / 4.0L;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L * std::max(1.0L, std::fabs(sum))) break;
  }
  return static_cast<double>(sum);
}

double j0_asymptotic(double x) {
  // c_k = prod_{j<=k} (2j-1)^2 / (k! (8x)^k); P and Q alternate over even/odd k.
  double p = 0.0;
  double q = 0.0;
  double c = 1.0;
  double prev = 2.0;
  for (int k = 0; k < 60; ++k) {
    if (k > 0) {
      const double odd = 2.0 * k - 1.0;
      c *= odd * odd / (k * 8.0 * x);
    }
    if (c > prev) break;  // asymptotic series started diverging
    prev = c;
    if (k % 2 == 0) {
      p += ((k / 2) % 2 == 0 ? c : -c);
    } else {
      q += (((k - 1) / 2) % 2 == 0 ? -c : c);
    }
    if (c < 1e-17) break;
  }
  const double phase = x - std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(phase) - q * std::sin(phase));
}

}  // namespace

double bessel_j0(double x) {
  const double ax = std::fabs(x);
  return ax < 12.0 ? j0_series(ax) : j0_asymptotic(ax);
}

CVector sample_cscg(std::size_t n, double variance, Rng& rng) {
  if (variance < 0.0) throw Error(Errc::NegativeVariance, "CSCG variance must be nonnegative");
  CVector out(n, cplx{0.0, 0.0});
  if (variance == 0.0) return out;
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  for (auto& v : out) {
    const double re = normal(rng);
    const double im = normal(rng);
    v = cplx{re, im};
  }
  return out;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw Error(Errc::NoSignChange, "bisection tolerance must be positive");
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi))
    throw Error(Errc::NoSignChange, "f(lo) and f(hi) have the same sign");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) return mid;
    const double fm = f(mid);
    if (std::fabs(fm) <= tol || std::fabs(hi - lo) <= tol) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  throw Error(Errc::MaxIterationsExceeded, "bisection did not converge in 200 iterations");
}

}  // namespace qdsim::numerics
