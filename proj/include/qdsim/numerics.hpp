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

#pragma once

/// Small dense complex linear algebra and scalar helpers shared by the
/// channel model and the beamforming solvers. Matrices here are at most a
/// handful of antennas wide, so everything is row-major and unblocked.

#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace qdsim {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;
using Rng = std::mt19937_64;

}  // namespace qdsim

namespace qdsim::numerics {

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols);
  CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);

  static CMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const cplx> entries() const noexcept { return data_; }
  std::span<cplx> entries() noexcept { return data_; }

  CMatrix adjoint() const;
  double max_abs() const noexcept;

  CMatrix& operator+=(const CMatrix& other);
  CMatrix& operator-=(const CMatrix& other);
  CMatrix& operator*=(cplx s);

  bool operator==(const CMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);
CMatrix operator*(const CMatrix& a, const CMatrix& b);

/// y = A x
CVector matvec(const CMatrix& a, std::span<const cplx> x);
/// y = Aᴴ x
CVector matvec_adjoint(const CMatrix& a, std::span<const cplx> x);
/// A += scale · x xᴴ
void add_outer(CMatrix& a, std::span<const cplx> x, double scale = 1.0);
/// A += s · I
void add_diagonal(CMatrix& a, double s);

/// aᴴ b
cplx dot(std::span<const cplx> a, std::span<const cplx> b);
/// ‖x‖²
double norm2(std::span<const cplx> x);
double max_abs(std::span<const cplx> x);
CVector scaled(std::span<const cplx> x, cplx s);

/// max|A − Aᴴ| ≤ 1e-10 · max|A|
bool is_hermitian(const CMatrix& a);

/// Cholesky factor A = L Lᴴ of a Hermitian positive definite matrix.
/// Throws NonHermitian or NotPositiveDefinite.
class Cholesky {
 public:
  explicit Cholesky(const CMatrix& a);

  CVector solve(std::span<const cplx> b) const;
  double logdet() const;
  const CMatrix& lower() const noexcept { return l_; }

 private:
  CMatrix l_;
};

CVector solve_hpd(const CMatrix& a, std::span<const cplx> b);

/// ln det(A) in nats.
double logdet_hpd(const CMatrix& a);

/// J₀(x). Power series below |x| = 12 (extended precision), Hankel
/// asymptotic expansion above. Absolute error below 1e-9 for |x| ≤ 50.
double bessel_j0(double x);

/// n draws of CN(0, variance): real and imaginary parts N(0, variance/2).
CVector sample_cscg(std::size_t n, double variance, Rng& rng);

/// Root of a function with a sign change on [lo, hi]. Returns x with
/// |f(x)| ≤ tol or a bracket narrower than tol. At most 200 halvings.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

}  // namespace qdsim::numerics
