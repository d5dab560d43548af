#pragma once

#include "riem/spd.hpp"
#include "riem/types.hpp"

#include <cstdint>
#include <vector>

namespace riem::svm {

// Two-class probability, left + right == 1.
struct ClassScore {
  double p_left{0.5};
  double p_right{0.5};
};

struct SvmParams {
  double c{0.1};
  double gamma{0.5};
  double tol{1e-3};         // KKT violation at which SMO stops
  std::int64_t max_iter{0};  // 0 means 100 * N
  // Dense Gram cache is built when N is at or below this; above it kernel
  // rows are recomputed on demand.
  std::int64_t gram_cache_limit{20000};
};

// Soft-margin RBF kernel machine. Labels follow the global encoding
// (right = +1, left = -1). dual_coeffs holds alpha_i * y_i per support
// vector; support vectors are the rows of `support_vectors`. Immutable once
// trained; prediction entry points are pure.
struct SvmModel {
  Matrix support_vectors;  // n_sv x feature_dim
  Vector dual_coeffs;      // alpha_i * y_i
  double bias{0.0};
  double gamma{0.5};
  double c_param{0.1};
  double platt_a{-1.0};
  double platt_b{0.0};
  bool calibrated{false};
  bool converged{true};
  // base dim of tangent features, 0 when features are not tangent vectors
  int tangent_base_dim{0};

  int n_support() const { return static_cast<int>(support_vectors.rows()); }
  int feature_dim() const { return static_cast<int>(support_vectors.cols()); }
};

struct TrainDiagnostics {
  bool converged{false};
  std::int64_t iterations{0};
  double dual_objective{0.0};  // sum(alpha) - 0.5 * alpha^T Q alpha
  int n_support{0};
  int n_free_support{0};
};

double rbf_kernel(const spd::TangentFeature& a, const spd::TangentFeature& b,
                  double gamma);

// Sequential minimal optimization with second-order working-pair selection
// (maximal KKT violator paired with the maximal objective decrease).
// Deterministic for a fixed input order; ties break toward the lower index.
// Throws std::invalid_argument when only one class is present; hitting the
// iteration cap returns the best iterate with converged = false.
SvmModel train(const Matrix& features, const std::vector<int>& labels,
               const SvmParams& params, TrainDiagnostics* diag = nullptr);

SvmModel train(const std::vector<spd::TangentFeature>& features,
               const std::vector<int>& labels, const SvmParams& params,
               TrainDiagnostics* diag = nullptr);

double decision_value(const SvmModel& model,
                      const Eigen::Ref<const Vector>& feature);
double decision_value(const SvmModel& model, const spd::TangentFeature& feature);

// Batch decision values for the rows of `features` (one GEMM instead of a
// per-row loop).
Vector decision_values(const SvmModel& model, const Matrix& features);

// Platt scaling on 3-fold out-of-fold decision values: fits
// sigma(f) = 1 / (1 + exp(a f + b)) by Newton iterations on the Bernoulli
// log-likelihood, started from (a, b) = (-1, 0). Degenerate separation falls
// back to that start. Returns a copy of the model with calibration filled in.
SvmModel calibrate(const SvmModel& model, const Matrix& features,
                   const std::vector<int>& labels);

// Sigmoid fit on precomputed decision values (the cross-validation driver
// above feeds this; exposed for tests).
void fit_platt(const Vector& decision, const std::vector<int>& labels,
               double& platt_a, double& platt_b);

ClassScore predict_proba(const SvmModel& model,
                         const Eigen::Ref<const Vector>& feature);
ClassScore predict_proba(const SvmModel& model, const spd::TangentFeature& feature);
ClassScore score_from_decision(const SvmModel& model, double decision);

// Row-stacks a tangent feature list (all lengths must agree).
Matrix stack_features(const std::vector<spd::TangentFeature>& features);

}  // namespace riem::svm
