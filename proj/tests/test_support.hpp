#pragma once

// Shared helpers for the unit and acceptance suites. Oracles here must stay
// independent of the library code paths they check.

#include "riem/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace riem::testing {

using Rng = std::mt19937_64;

inline Matrix random_gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

inline Matrix random_orthogonal(int n, Rng& rng) {
  const Matrix g = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  // Fix the sign convention so Q is a proper draw.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

// Random SPD matrix with condition number at most `max_cond` (log-uniform
// eigenvalue spread).
inline Matrix random_spd(int n, double max_cond, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double cond = std::exp(u(rng) * std::log(max_cond));
  Vector eig(n);
  for (int i = 0; i < n; ++i) {
    eig[i] = std::exp(u(rng) * std::log(cond));  // in [1, cond]
  }
  const Matrix q = random_orthogonal(n, rng);
  return q * eig.asDiagonal() * q.transpose();
}

// Naive O(n^2 T) covariance, the brute-force oracle for sample_covariance.
inline Matrix naive_covariance(const Matrix& x, double epsilon, double denom) {
  const int t = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  std::vector<double> mean(static_cast<std::size_t>(n), 0.0);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < t; ++r) mean[static_cast<std::size_t>(c)] += x(r, c);
    mean[static_cast<std::size_t>(c)] /= t;
  }
  Matrix cov = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int r = 0; r < t; ++r) {
        s += (x(r, a) - mean[static_cast<std::size_t>(a)]) *
             (x(r, b) - mean[static_cast<std::size_t>(b)]);
      }
      cov(a, b) = s / denom;
    }
  }
  for (int a = 0; a < n; ++a) cov(a, a) += epsilon;
  return cov;
}

// Naive DFT magnitude at every bin (0..T/2). Test-side spectral oracle.
inline std::vector<double> dft_magnitudes(const Vector& x) {
  const int t = static_cast<int>(x.size());
  std::vector<double> mags;
  for (int k = 0; k <= t / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (int i = 0; i < t; ++i) {
      const double phi = -2.0 * M_PI * k * i / t;
      re += x[i] * std::cos(phi);
      im += x[i] * std::sin(phi);
    }
    mags.push_back(std::hypot(re, im));
  }
  return mags;
}

inline int dominant_bin(const std::vector<double>& mags, int skip_dc = 1) {
  int best = skip_dc;
  for (int k = skip_dc; k < static_cast<int>(mags.size()); ++k) {
    if (mags[static_cast<std::size_t>(k)] > mags[static_cast<std::size_t>(best)]) {
      best = k;
    }
  }
  return best;
}

// Minimum-jerk reach: position offset along `dir` of total length `dist`
// over [0, duration]. Closed-form speed profile used as the onset oracle.
inline double min_jerk_pos(double t, double duration, double dist) {
  const double tau = std::clamp(t / duration, 0.0, 1.0);
  return dist * (10.0 * tau * tau * tau - 15.0 * tau * tau * tau * tau +
                 6.0 * tau * tau * tau * tau * tau);
}

inline double min_jerk_speed(double t, double duration, double dist) {
  if (t < 0.0 || t > duration) return 0.0;
  const double tau = t / duration;
  return 30.0 * dist / duration * tau * tau * (1.0 - tau) * (1.0 - tau);
}

}  // namespace riem::testing
