#include "riem/svm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace riem::svm {

namespace {

constexpr double kTau = 1e-12;

void check_labels(const std::vector<int>& labels, Eigen::Index n) {
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw std::invalid_argument("label count does not match feature count");
  }
  bool pos = false, neg = false;
  for (int y : labels) {
    if (y != 1 && y != -1) {
      throw std::invalid_argument("labels must be +1 or -1");
    }
    (y > 0 ? pos : neg) = true;
  }
  if (!pos || !neg) {
    throw std::invalid_argument("training set must contain both classes");
  }
}

Matrix gram_rbf(const Matrix& x, double gamma) {
  const Vector sq = x.rowwise().squaredNorm();
  Matrix d = -2.0 * (x * x.transpose());
  d.colwise() += sq;
  d.rowwise() += sq.transpose();
  return (-gamma * d.cwiseMax(0.0)).array().exp().matrix();
}

Vector kernel_row(const Matrix& x, Eigen::Index i, double gamma) {
  Vector d = (x.rowwise() - x.row(i)).rowwise().squaredNorm();
  return (-gamma * d).array().exp().matrix();
}

double stable_sigmoid(double z) {
  // 1 / (1 + exp(z)) without overflow.
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

// Negative Bernoulli log-likelihood of the sigmoid fit.
double platt_objective(const Vector& f, const std::vector<double>& target,
                       double a, double b) {
  double value = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double z = a * f[i] + b;
    const double t = target[static_cast<std::size_t>(i)];
    if (z >= 0.0) {
      value += t * z + std::log1p(std::exp(-z));
    } else {
      value += (t - 1.0) * z + std::log1p(std::exp(z));
    }
  }
  return value;
}

}  // namespace

double rbf_kernel(const spd::TangentFeature& a, const spd::TangentFeature& b,
                  double gamma) {
  if (a.length() != b.length()) {
    throw std::invalid_argument("kernel arguments have different lengths");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("gamma must be positive");
  }
  return std::exp(-gamma * (a.values - b.values).squaredNorm());
}

Matrix stack_features(const std::vector<spd::TangentFeature>& features) {
  if (features.empty()) return Matrix();
  const int d = features.front().length();
  Matrix x(static_cast<Eigen::Index>(features.size()), d);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].length() != d) {
      throw std::invalid_argument("inconsistent feature lengths");
    }
    x.row(static_cast<Eigen::Index>(i)) = features[i].values.transpose();
  }
  return x;
}

SvmModel train(const Matrix& features, const std::vector<int>& labels,
               const SvmParams& params, TrainDiagnostics* diag) {
  const Eigen::Index n = features.rows();
  if (n < 2) {
    throw std::invalid_argument("training needs at least 2 examples");
  }
  check_labels(labels, n);
  if (!(params.c > 0.0) || !(params.gamma > 0.0) || !(params.tol > 0.0)) {
    throw std::invalid_argument("C, gamma and tol must be positive");
  }

  const double c = params.c;
  const double gamma = params.gamma;
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)];

  const bool cache = n <= params.gram_cache_limit;
  Matrix k_cache;
  if (cache) k_cache = gram_rbf(features, gamma);
  auto row_of = [&](Eigen::Index i) -> Vector {
    if (cache) return k_cache.col(i);
    return kernel_row(features, i, gamma);
  };

  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);
  const std::int64_t max_iter =
      params.max_iter > 0 ? params.max_iter : 100 * static_cast<std::int64_t>(n);

  bool converged = false;
  std::int64_t iter = 0;
  for (; iter < max_iter; ++iter) {
    // Working pair: i is the maximal KKT violator over the "up" set, j the
    // maximal second-order objective decrease over the "low" set.
    double m_up = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      const bool in_up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
      if (!in_up) continue;
      const double v = -y[t] * grad[t];
      if (v > m_up) {
        m_up = v;
        i = t;
      }
    }
    if (i < 0) {
      converged = true;
      break;
    }
    const Vector k_i = row_of(i);

    double m_low = std::numeric_limits<double>::infinity();
    double best_gain = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      const bool in_low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c);
      if (!in_low) continue;
      const double v = -y[t] * grad[t];
      m_low = std::min(m_low, v);
      const double grad_diff = m_up - v;
      if (grad_diff > 0.0) {
        double quad = 2.0 - 2.0 * k_i[t];  // K_ii + K_tt - 2 K_it, RBF diag = 1
        if (quad <= 0.0) quad = kTau;
        const double gain = grad_diff * grad_diff / quad;
        if (gain > best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }
    if (m_up - m_low <= params.tol || j < 0) {
      converged = true;
      break;
    }

    const Vector k_j = row_of(j);
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    double quad = 2.0 - 2.0 * k_i[j];
    if (quad <= 0.0) quad = kTau;

    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else {
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = -diff;
        }
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = c + diff;
        }
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = sum;
        }
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else {
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = sum;
        }
      }
    }

    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    grad.array() +=
        y.array() * (k_i.array() * (y[i] * dai) + k_j.array() * (y[j] * daj));
  }

  // Bias from free support vectors, else the midpoint of the feasible band.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (upper + lower);

  SvmModel model;
  model.gamma = gamma;
  model.c_param = c;
  model.bias = -rho;
  model.converged = converged;

  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) sv.push_back(t);
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), features.cols());
  model.dual_coeffs.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = features.row(sv[s]);
    model.dual_coeffs[static_cast<Eigen::Index>(s)] = alpha[sv[s]] * y[sv[s]];
  }

  if (diag != nullptr) {
    diag->converged = converged;
    diag->iterations = iter;
    diag->dual_objective = 0.5 * (alpha.sum() - alpha.dot(grad));
    diag->n_support = static_cast<int>(sv.size());
    diag->n_free_support = n_free;
  }
  return model;
}

SvmModel train(const std::vector<spd::TangentFeature>& features,
               const std::vector<int>& labels, const SvmParams& params,
               TrainDiagnostics* diag) {
  SvmModel model = train(stack_features(features), labels, params, diag);
  model.tangent_base_dim = features.empty() ? 0 : features.front().base_dim;
  return model;
}

double decision_value(const SvmModel& model,
                      const Eigen::Ref<const Vector>& feature) {
  if (model.n_support() == 0) return model.bias;
  if (feature.size() != model.feature_dim()) {
    throw std::invalid_argument("feature length " + std::to_string(feature.size()) +
                                " does not match model dim " +
                                std::to_string(model.feature_dim()));
  }
  const Vector d =
      (model.support_vectors.rowwise() - feature.transpose()).rowwise().squaredNorm();
  return ((-model.gamma * d).array().exp().matrix()).dot(model.dual_coeffs) +
         model.bias;
}

double decision_value(const SvmModel& model, const spd::TangentFeature& feature) {
  return decision_value(model, feature.values);
}

Vector decision_values(const SvmModel& model, const Matrix& features) {
  Vector out(features.rows());
  if (model.n_support() == 0) {
    out.setConstant(model.bias);
    return out;
  }
  if (features.cols() != model.feature_dim()) {
    throw std::invalid_argument("feature matrix width does not match model dim");
  }
  const Vector sv_sq = model.support_vectors.rowwise().squaredNorm();
  const Eigen::Index chunk = 4096;
  for (Eigen::Index start = 0; start < features.rows(); start += chunk) {
    const Eigen::Index rows = std::min(chunk, features.rows() - start);
    const auto block = features.middleRows(start, rows);
    Matrix d = -2.0 * (block * model.support_vectors.transpose());
    d.colwise() += block.rowwise().squaredNorm();
    d.rowwise() += sv_sq.transpose();
    out.segment(start, rows) =
        ((-model.gamma * d.cwiseMax(0.0)).array().exp().matrix() * model.dual_coeffs)
            .array() +
        model.bias;
  }
  return out;
}

void fit_platt(const Vector& decision, const std::vector<int>& labels,
               double& platt_a, double& platt_b) {
  const Eigen::Index n = decision.size();
  check_labels(labels, n);

  double n_pos = 0.0, n_neg = 0.0;
  for (int y : labels) (y > 0 ? n_pos : n_neg) += 1.0;
  const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
  const double t_neg = 1.0 / (n_neg + 2.0);
  std::vector<double> target(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    target[static_cast<std::size_t>(i)] =
        labels[static_cast<std::size_t>(i)] > 0 ? t_pos : t_neg;
  }

  // Decision values that never change sign and sit far out cannot anchor a
  // sigmoid; keep the neutral orientation instead.
  const double f_min = decision.minCoeff();
  const double f_max = decision.maxCoeff();
  if ((f_min > 0.0 || f_max < 0.0) && std::min(std::abs(f_min), std::abs(f_max)) > 10.0) {
    std::cerr << "riem: degenerate decision values in calibration, keeping "
                 "sigmoid (-1, 0)\n";
    platt_a = -1.0;
    platt_b = 0.0;
    return;
  }

  double a = -1.0, b = 0.0;  // start; the fit may only improve on it
  double value = platt_objective(decision, target, a, b);
  for (int it = 0; it < 100; ++it) {
    double g_a = 0.0, g_b = 0.0;
    double h_aa = 1e-12, h_ab = 0.0, h_bb = 1e-12;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double f = decision[i];
      const double p = stable_sigmoid(a * f + b);  // P(y = +1)
      const double pq = std::max(p * (1.0 - p), 1e-12);
      const double diff = target[static_cast<std::size_t>(i)] - p;
      g_a += f * diff;
      g_b += diff;
      h_aa += f * f * pq;
      h_ab += f * pq;
      h_bb += pq;
    }
    if (std::abs(g_a) < 1e-5 && std::abs(g_b) < 1e-5) break;
    const double det = h_aa * h_bb - h_ab * h_ab;
    const double d_a = -(h_bb * g_a - h_ab * g_b) / det;
    const double d_b = -(-h_ab * g_a + h_aa * g_b) / det;
    const double slope = g_a * d_a + g_b * d_b;  // negative for a descent step

    double step = 1.0;
    bool moved = false;
    while (step >= 1e-10) {
      const double na = a + step * d_a;
      const double nb = b + step * d_b;
      const double nv = platt_objective(decision, target, na, nb);
      if (nv < value + 1e-4 * step * slope) {
        a = na;
        b = nb;
        value = nv;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }

  if (!std::isfinite(a) || !std::isfinite(b) || a >= 0.0) {
    std::cerr << "riem: sigmoid fit lost classifier orientation, keeping "
                 "(-1, 0)\n";
    a = -1.0;
    b = 0.0;
  }
  platt_a = a;
  platt_b = b;
}

SvmModel calibrate(const SvmModel& model, const Matrix& features,
                   const std::vector<int>& labels) {
  const Eigen::Index n = features.rows();
  check_labels(labels, n);

  int n_pos = 0, n_neg = 0;
  for (int y : labels) (y > 0 ? n_pos : n_neg) += 1;

  Vector oof(n);
  constexpr int kFolds = 3;
  if (n_pos < kFolds || n_neg < kFolds) {
    // Too few points for out-of-fold values; fall back to in-sample decisions.
    oof = decision_values(model, features);
  } else {
    // Deterministic stratified assignment: per class, round-robin in input
    // order.
    std::vector<int> fold(static_cast<std::size_t>(n));
    int seen_pos = 0, seen_neg = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int& seen = labels[static_cast<std::size_t>(i)] > 0 ? seen_pos : seen_neg;
      fold[static_cast<std::size_t>(i)] = seen % kFolds;
      ++seen;
    }
    SvmParams params;
    params.c = model.c_param;
    params.gamma = model.gamma;
    for (int k = 0; k < kFolds; ++k) {
      std::vector<Eigen::Index> train_idx, test_idx;
      for (Eigen::Index i = 0; i < n; ++i) {
        (fold[static_cast<std::size_t>(i)] == k ? test_idx : train_idx).push_back(i);
      }
      Matrix x_train(static_cast<Eigen::Index>(train_idx.size()), features.cols());
      std::vector<int> y_train(train_idx.size());
      for (std::size_t r = 0; r < train_idx.size(); ++r) {
        x_train.row(static_cast<Eigen::Index>(r)) = features.row(train_idx[r]);
        y_train[r] = labels[static_cast<std::size_t>(train_idx[r])];
      }
      const SvmModel fold_model = train(x_train, y_train, params);
      Matrix x_test(static_cast<Eigen::Index>(test_idx.size()), features.cols());
      for (std::size_t r = 0; r < test_idx.size(); ++r) {
        x_test.row(static_cast<Eigen::Index>(r)) = features.row(test_idx[r]);
      }
      const Vector f_test = decision_values(fold_model, x_test);
      for (std::size_t r = 0; r < test_idx.size(); ++r) {
        oof[test_idx[r]] = f_test[static_cast<Eigen::Index>(r)];
      }
    }
  }

  SvmModel out = model;
  fit_platt(oof, labels, out.platt_a, out.platt_b);
  out.calibrated = true;
  return out;
}

ClassScore score_from_decision(const SvmModel& model, double decision) {
  if (!model.calibrated) {
    throw std::logic_error("model is not calibrated; run calibrate() first");
  }
  ClassScore score;
  score.p_right = stable_sigmoid(model.platt_a * decision + model.platt_b);
  score.p_left = 1.0 - score.p_right;
  return score;
}

ClassScore predict_proba(const SvmModel& model,
                         const Eigen::Ref<const Vector>& feature) {
  return score_from_decision(model, decision_value(model, feature));
}

ClassScore predict_proba(const SvmModel& model,
                         const spd::TangentFeature& feature) {
  return predict_proba(model, feature.values);
}

}  // namespace riem::svm
