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

#include "qdsim/quality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "qdsim/error.hpp"
#include "qdsim/numerics.hpp"

namespace qdsim::quality {

double quality_of_bitrate(double bitrate, const RQParams& z) { return z.z1 * std::log(z.z2 * bitrate + z.z3); }

double quality_of_rate(double rate, const RQParams& z) { return quality_of_bitrate(rate, z); }

double bitrate_of_quality(double quality, const RQParams& z) { return (std::exp(quality / z.z1) - z.z3) / z.z2; }

RQParams to_nat_units(const RQParams& z, double bandwidth_hz) {
  return {z.z1, z.z2 * bandwidth_hz / std::numbers::ln2, z.z3};
}

namespace {

void check_mse(double e) {
  if (!(e > 0.0) || e > 1.0) {
    std::ostringstream os;
    os << "MSE " << e << " outside (0, 1]";
    throw Error(Errc::MseOutOfRange, os.str());
  }
}

}  // namespace

double cost(double mse, const RQParams& z) {
  check_mse(mse);
  return -z.z1 * std::log(-z.z2 * std::log(mse) + z.z3);
}

double cost_deriv(double mse, const RQParams& z) {
  check_mse(mse);
  return z.z1 * z.z2 / (mse * (-z.z2 * std::log(mse) + z.z3));
}

bool cost_is_concave(const RQParams& z) { return z.z3 >= z.z2; }

double upsilon(double weight, const RQParams& z) {
  // In s = −ln e, c′ = z1 z2 e^s / (z2 s + z3), increasing for s ≥ s_min where
  // s_min = max(0, 1 − z3/z2) is where the concave branch starts.
  const double s_min = std::max(0.0, 1.0 - z.z3 / z.z2);
  const auto deriv_at = [&](double s) { return z.z1 * z.z2 * std::exp(s) / (z.z2 * s + z.z3); };
  const double w_min = deriv_at(s_min);
  if (!(weight >= w_min * (1.0 - 1e-14)) || !std::isfinite(weight)) {
    std::ostringstream os;
    os << "weight " << weight << " below the range minimum " << w_min;
    throw Error(Errc::WeightOutOfRange, os.str());
  }
  if (weight <= w_min) return std::exp(-s_min);
  double s_hi = s_min + 1.0;
  while (deriv_at(s_hi) < weight) {
    s_hi = s_min + 2.0 * (s_hi - s_min);
    if (s_hi > 745.0) throw Error(Errc::WeightOutOfRange, "weight too large for a representable MSE");
  }
  const auto f = [&](double s) { return std::log(deriv_at(s)) - std::log(weight); };
  const double s = numerics::bisect(f, s_min, s_hi, 1e-15);
  return std::exp(-s);
}

namespace {

constexpr double kRateScale = 1e6;  // fit internally in Mbit/s

struct Sample {
  double a;  // Mbit/s
  double q;
};

// theta = (z1, ln z2', ln z3) with z2' the Mbit/s-scaled slope
using Theta = std::array<double, 3>;

double sse(const std::vector<Sample>& pts, const Theta& th) {
  const double z2 = std::exp(th[1]);
  const double z3 = std::exp(th[2]);
  double acc = 0.0;
  for (const auto& p : pts) {
    const double r = th[0] * std::log(z2 * p.a + z3) - p.q;
    acc += r * r;
  }
  return acc;
}

// Solves the (active × active) normal system by Gaussian elimination with pivoting.
bool solve_small(std::array<std::array<double, 4>, 3>& aug, int n, std::array<double, 3>& x) {
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(aug[r][c]) > std::fabs(aug[piv][c])) piv = r;
    if (std::fabs(aug[piv][c]) < 1e-300) return false;
    std::swap(aug[c], aug[piv]);
    for (int r = c + 1; r < n; ++r) {
      const double f = aug[r][c] / aug[c][c];
      for (int k = c; k <= n; ++k) aug[r][k] -= f * aug[c][k];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = aug[r][n];
    for (int k = r + 1; k < n; ++k) acc -= aug[r][k] * x[k];
    x[r] = acc / aug[r][r];
  }
  return true;
}

// Levenberg–Marquardt over the parameters flagged in `active`.
Theta levenberg_marquardt(const std::vector<Sample>& pts, Theta th, const std::array<bool, 3>& active) {
  std::array<int, 3> idx{};
  int n = 0;
  for (int i = 0; i < 3; ++i)
    if (active[i]) idx[n++] = i;

  double lambda = 1e-3;
  double f = sse(pts, th);
  for (int it = 0; it < 500; ++it) {
    std::array<std::array<double, 3>, 3> jtj{};
    std::array<double, 3> jtr{};
    const double z2 = std::exp(th[1]);
    const double z3 = std::exp(th[2]);
    for (const auto& p : pts) {
      const double arg = z2 * p.a + z3;
      const double r = th[0] * std::log(arg) - p.q;
      const std::array<double, 3> grad{std::log(arg), th[0] * z2 * p.a / arg, th[0] * z3 / arg};
      for (int i = 0; i < n; ++i) {
        jtr[i] += grad[idx[i]] * r;
        for (int j = 0; j < n; ++j) jtj[i][j] += grad[idx[i]] * grad[idx[j]];
      }
    }
    bool improved = false;
    for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
      std::array<std::array<double, 4>, 3> aug{};
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) aug[i][j] = jtj[i][j];
        aug[i][i] += lambda * std::max(jtj[i][i], 1e-300);
        aug[i][n] = -jtr[i];
      }
      std::array<double, 3> step{};
      if (!solve_small(aug, n, step)) {
        lambda *= 10.0;
        continue;
      }
      Theta trial = th;
      for (int i = 0; i < n; ++i) trial[idx[i]] += step[i];
      const double ft = sse(pts, trial);
      if (std::isfinite(ft) && ft <= f) {
        const double gain = f - ft;
        th = trial;
        lambda = std::max(lambda / 10.0, 1e-15);
        improved = true;
        if (gain <= 1e-30 + 1e-15 * f) return th;
        f = ft;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return th;
}

double best_scale(const std::vector<Sample>& pts, double z2, double z3) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : pts) {
    const double l = std::log(z2 * p.a + z3);
    num += l * p.q;
    den += l * l;
  }
  return den > 0.0 ? num / den : 1.0;
}

Theta fit_from_seeds(const std::vector<Sample>& pts, const std::array<bool, 3>& active, double fixed_z3) {
  Theta best{};
  double best_f = std::numeric_limits<double>::infinity();
  // ten slope seeds log-spaced over [1e-2, 1e3] per Mbit/s
  for (int k = 0; k < 10; ++k) {
    const double z2 = std::pow(10.0, -2.0 + 5.0 * k / 9.0);
    const double z3 = fixed_z3;
    Theta th{best_scale(pts, z2, z3), std::log(z2), std::log(z3)};
    th = levenberg_marquardt(pts, th, active);
    const double f = sse(pts, th);
    if (f < best_f) {
      best_f = f;
      best = th;
    }
  }
  return best;
}

}  // namespace

RQFit fit_rq(std::span<const RatePoint> points) {
  if (points.size() < 3) throw Error(Errc::TooFewPoints, "need at least 3 (bitrate, quality) points");
  std::vector<Sample> pts;
  for (const auto& p : points) {
    if (!(p.bitrate > 0.0)) throw Error(Errc::NonMonotonePoints, "bitrates must be positive");
    pts.push_back({p.bitrate / kRateScale, p.quality});
  }
  std::sort(pts.begin(), pts.end(), [](const Sample& a, const Sample& b) { return a.a < b.a; });
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].a == pts[i - 1].a) throw Error(Errc::NonMonotonePoints, "duplicate bitrate");
    if (!(pts[i].q > pts[i - 1].q)) throw Error(Errc::NonMonotonePoints, "quality not increasing in bitrate");
  }

  Theta th = fit_from_seeds(pts, {true, true, true}, 1.0);
  RQFit fit;
  if (std::exp(th[2]) < 1.0 || th[0] <= 0.0) {
    th = fit_from_seeds(pts, {true, true, false}, 1.0);
    fit.projected = true;
  }
  if (th[0] <= 0.0) {
    th[0] = std::numeric_limits<double>::min();
    fit.projected = true;
  }
  fit.params = {th[0], std::exp(th[1]) / kRateScale, std::exp(th[2])};
  fit.residual_rms = std::sqrt(sse(pts, th) / static_cast<double>(pts.size()));
  return fit;
}

}  // namespace qdsim::quality
