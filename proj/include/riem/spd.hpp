#pragma once

#include "riem/types.hpp"

#include <vector>

namespace riem::spd {

// Affine-invariant geometry of symmetric positive definite matrices.
//
// All matrix functions (log, exp, inverse square root) go through a symmetric
// eigendecomposition. Eigenvalues below 1e-12 * (largest eigenvalue) are
// raised to that floor before log / inverse-sqrt, so near-singular covariances
// from short windows stay usable. Inputs whose spectrum is clearly negative
// are rejected with std::domain_error.

inline constexpr double kEigenvalueFloorRel = 1e-12;

class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  // Symmetrizes (A + A^T)/2 instead of rejecting; covariance accumulation in
  // floating point breaks exact symmetry.
  explicit SymmetricMatrix(Matrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(Matrix m);  // symmetrizes, does not eigen-check
  static SpdMatrix identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

  double min_eigenvalue() const;  // exact smallest eigenvalue, for checks

 private:
  Matrix m_;
};

// Flattened row-major upper triangle (diagonal included) of a symmetric
// matrix; length is base_dim * (base_dim + 1) / 2.
struct TangentFeature {
  Vector values;
  int base_dim{0};

  int length() const { return static_cast<int>(values.size()); }
};

inline int tangent_length(int dim) { return dim * (dim + 1) / 2; }

// Off-diagonal scaling applied when flattening. The plain upper triangle is
// the default; the sqrt(2) variant makes the flattening an isometry and is
// exposed for sensitivity checks in the evaluation harness.
enum class TangentWeighting { upper_triangle, sqrt2_off_diagonal };

// Cached eigendecomposition of a base point. Repeated log/exp maps at the
// same base (Frechet iterations, per-window feature extraction) reuse the
// P^{1/2} and P^{-1/2} factors; results are bit-identical to the one-shot
// log_map/exp_map below, which delegate here.
class TangentBase {
 public:
  explicit TangentBase(const SpdMatrix& base);

  // Log_P(P*) = P^{1/2} log(P^{-1/2} P* P^{-1/2}) P^{1/2}
  SymmetricMatrix log_at(const SpdMatrix& point) const;
  // Exp_P(S*) = P^{1/2} exp(P^{-1/2} S* P^{-1/2}) P^{1/2}
  SpdMatrix exp_at(const SymmetricMatrix& tangent) const;

  int dim() const { return static_cast<int>(sqrt_.rows()); }
  const Matrix& sqrt() const { return sqrt_; }
  const Matrix& inv_sqrt() const { return inv_sqrt_; }

 private:
  Matrix sqrt_;
  Matrix inv_sqrt_;
};

SymmetricMatrix log_map(const SpdMatrix& base, const SpdMatrix& point);
SpdMatrix exp_map(const SpdMatrix& base, const SymmetricMatrix& tangent);

struct FrechetOptions {
  double tol{1e-8};  // on the Frobenius norm of the mean tangent step u
  int max_iter{50};
};

struct FrechetResult {
  SpdMatrix mean;
  bool converged{false};
  int iterations{0};
  double last_step_norm{0.0};
};

// Fixed-point iteration u = (1/N) sum Log_mu(x_i); mu <- Exp_mu(u), seeded
// with the (regularized) arithmetic mean. Returns the last iterate with a
// convergence flag; callers decide what a non-converged mean is worth.
FrechetResult frechet_mean(const std::vector<SpdMatrix>& points,
                           const FrechetOptions& opts = {});

TangentFeature tangent_vectorize(
    const SymmetricMatrix& tangent,
    TangentWeighting weighting = TangentWeighting::upper_triangle);

// Inverse of tangent_vectorize (same weighting must be given).
SymmetricMatrix tangent_unvectorize(
    const TangentFeature& feature,
    TangentWeighting weighting = TangentWeighting::upper_triangle);

}  // namespace riem::spd
