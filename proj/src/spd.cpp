#include "riem/spd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace riem::spd {

namespace {

Matrix symmetrized(Matrix m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("symmetric matrix must be square, got " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
  return 0.5 * (m + m.transpose()).eval();
}

void check_same_dim(int a, int b) {
  if (a != b) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a) +
                                " vs " + std::to_string(b));
  }
}

// Eigenvalues of an SPD-intended matrix, floored at kEigenvalueFloorRel times
// the largest one. A spectrum that is negative beyond rounding noise is not
// SPD and the caller has to regularize first.
Vector clamped_positive_eigenvalues(const Vector& eig) {
  const double max_eig = eig.maxCoeff();
  if (!(max_eig > 0.0)) {
    throw std::domain_error("matrix is not positive definite (max eigenvalue " +
                            std::to_string(max_eig) + ")");
  }
  if (eig.minCoeff() < -1e-6 * max_eig) {
    throw std::domain_error(
        "matrix is not positive definite (eigenvalue " +
        std::to_string(eig.minCoeff()) + " vs max " + std::to_string(max_eig) +
        "); regularize the covariance first");
  }
  const double floor = kEigenvalueFloorRel * max_eig;
  return eig.cwiseMax(floor);
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(Matrix m) : m_(symmetrized(std::move(m))) {}

SpdMatrix::SpdMatrix(Matrix m) : m_(symmetrized(std::move(m))) {}

SpdMatrix SpdMatrix::identity(int dim) {
  return SpdMatrix(Matrix::Identity(dim, dim));
}

double SpdMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

TangentBase::TangentBase(const SpdMatrix& base) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(base.matrix());
  if (es.info() != Eigen::Success) {
    throw std::domain_error("eigendecomposition of base point failed");
  }
  const Vector d = clamped_positive_eigenvalues(es.eigenvalues());
  const Matrix& u = es.eigenvectors();
  sqrt_ = u * d.cwiseSqrt().asDiagonal() * u.transpose();
  inv_sqrt_ = u * d.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
}

SymmetricMatrix TangentBase::log_at(const SpdMatrix& point) const {
  check_same_dim(dim(), point.dim());
  const Matrix whitened =
      0.5 * (inv_sqrt_ * point.matrix() * inv_sqrt_ +
             (inv_sqrt_ * point.matrix() * inv_sqrt_).transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(whitened);
  if (es.info() != Eigen::Success) {
    throw std::domain_error("eigendecomposition failed in log map");
  }
  const Vector d = clamped_positive_eigenvalues(es.eigenvalues());
  const Matrix& u = es.eigenvectors();
  const Matrix log_w = u * d.array().log().matrix().asDiagonal() * u.transpose();
  return SymmetricMatrix(sqrt_ * log_w * sqrt_);
}

SpdMatrix TangentBase::exp_at(const SymmetricMatrix& tangent) const {
  check_same_dim(dim(), tangent.dim());
  const Matrix whitened =
      0.5 * (inv_sqrt_ * tangent.matrix() * inv_sqrt_ +
             (inv_sqrt_ * tangent.matrix() * inv_sqrt_).transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(whitened);
  if (es.info() != Eigen::Success) {
    throw std::domain_error("eigendecomposition failed in exp map");
  }
  const Matrix& u = es.eigenvectors();
  const Matrix exp_w =
      u * es.eigenvalues().array().exp().matrix().asDiagonal() * u.transpose();
  return SpdMatrix(sqrt_ * exp_w * sqrt_);
}

SymmetricMatrix log_map(const SpdMatrix& base, const SpdMatrix& point) {
  return TangentBase(base).log_at(point);
}

SpdMatrix exp_map(const SpdMatrix& base, const SymmetricMatrix& tangent) {
  return TangentBase(base).exp_at(tangent);
}

FrechetResult frechet_mean(const std::vector<SpdMatrix>& points,
                           const FrechetOptions& opts) {
  if (points.empty()) {
    throw std::invalid_argument("frechet_mean of an empty set");
  }
  if (!(opts.tol > 0.0)) {
    throw std::invalid_argument("frechet_mean tolerance must be positive");
  }
  const int n = points.front().dim();
  Matrix acc = Matrix::Zero(n, n);
  for (const SpdMatrix& p : points) {
    check_same_dim(n, p.dim());
    acc += p.matrix();
  }
  acc /= static_cast<double>(points.size());

  // Regularize the Euclidean seed: the arithmetic mean of SPD matrices is SPD
  // in exact arithmetic, but the floor keeps a near-singular seed invertible.
  Eigen::SelfAdjointEigenSolver<Matrix> es(acc);
  const Vector d = clamped_positive_eigenvalues(es.eigenvalues());
  Matrix seed = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();

  FrechetResult result;
  result.mean = SpdMatrix(std::move(seed));
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const TangentBase base(result.mean);
    Matrix u = Matrix::Zero(n, n);
    for (const SpdMatrix& p : points) {
      u += base.log_at(p).matrix();
    }
    u /= static_cast<double>(points.size());
    result.iterations = iter + 1;
    result.last_step_norm = u.norm();
    if (result.last_step_norm < opts.tol) {
      result.converged = true;
      return result;  // gradient at the returned point is already below tol
    }
    result.mean = base.exp_at(SymmetricMatrix(std::move(u)));
  }
  return result;
}

TangentFeature tangent_vectorize(const SymmetricMatrix& tangent,
                                 TangentWeighting weighting) {
  const int n = tangent.dim();
  const Matrix& m = tangent.matrix();
  const double off = weighting == TangentWeighting::sqrt2_off_diagonal
                         ? std::sqrt(2.0)
                         : 1.0;
  TangentFeature f;
  f.base_dim = n;
  f.values.resize(tangent_length(n));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    f.values[k++] = m(i, i);
    for (int j = i + 1; j < n; ++j) {
      f.values[k++] = off * m(i, j);
    }
  }
  return f;
}

SymmetricMatrix tangent_unvectorize(const TangentFeature& feature,
                                    TangentWeighting weighting) {
  const int n = feature.base_dim;
  if (feature.length() != tangent_length(n)) {
    throw std::invalid_argument("tangent feature length " +
                                std::to_string(feature.length()) +
                                " does not match base dim " + std::to_string(n));
  }
  const double off = weighting == TangentWeighting::sqrt2_off_diagonal
                         ? 1.0 / std::sqrt(2.0)
                         : 1.0;
  Matrix m(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    m(i, i) = feature.values[k++];
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = off * feature.values[k];
      m(j, i) = m(i, j);
      ++k;
    }
  }
  return SymmetricMatrix(std::move(m));
}

}  // namespace riem::spd
