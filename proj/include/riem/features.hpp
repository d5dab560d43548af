#pragma once

#include "riem/spd.hpp"
#include "riem/types.hpp"

#include <optional>
#include <vector>

namespace riem::features {

// Covariance normalization. The window-length denominator is the default;
// the channel-count variant is kept selectable for the evaluation grid.
enum class CovDenominator { window_minus_one, channels_minus_one };

// Ridge added to the sample covariance. `relative_trace` scales the value by
// trace(C)/n so the ridge tracks signal amplitude; a degenerate window with
// zero trace falls back to the raw value.
struct EpsilonPolicy {
  enum class Kind { absolute, relative_trace };
  Kind kind{Kind::relative_trace};
  double value{1e-6};

  double resolve(double trace, int dim) const {
    if (kind == Kind::absolute) return value;
    const double scale = trace / static_cast<double>(dim);
    return scale > 0.0 ? value * scale : value;
  }
};

// Mean-centered sample covariance with an additive epsilon ridge:
// C = X~^T X~ / denom + eps * I. Always SPD for eps > 0.
spd::SpdMatrix sample_covariance(
    const MultichannelWindow& window, double epsilon,
    CovDenominator denom = CovDenominator::window_minus_one);

struct FeatureOptions {
  EpsilonPolicy epsilon{};
  CovDenominator denominator{CovDenominator::window_minus_one};
  spd::TangentWeighting weighting{spd::TangentWeighting::upper_triangle};
};

// Frozen tangent-space projector. The reference mean is fitted once on
// training covariances and reused verbatim online so every window lands in
// the same tangent chart the classifier was trained in. Immutable after
// construction; extract() is pure and safe to run concurrently.
class FeatureExtractor {
 public:
  FeatureExtractor() = default;
  FeatureExtractor(spd::SpdMatrix reference_mean, FeatureOptions options);

  const spd::SpdMatrix& reference_mean() const { return mean_; }
  const FeatureOptions& options() const { return options_; }
  int dim() const { return mean_.dim(); }
  int feature_length() const { return spd::tangent_length(mean_.dim()); }
  bool fitted() const { return mean_.dim() > 0; }

  spd::TangentFeature extract_covariance(const spd::SpdMatrix& cov) const;
  spd::TangentFeature extract(const MultichannelWindow& window) const;

 private:
  spd::SpdMatrix mean_;
  FeatureOptions options_;
  std::optional<spd::TangentBase> base_;
};

struct FitResult {
  FeatureExtractor extractor;
  bool converged{false};
  int iterations{0};
};

// Riemannian mean of the training covariances, frozen into an extractor.
FitResult fit_reference(const std::vector<spd::SpdMatrix>& covariances,
                        const FeatureOptions& options = {},
                        const spd::FrechetOptions& frechet = {});

}  // namespace riem::features
