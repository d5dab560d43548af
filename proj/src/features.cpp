#include "riem/features.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace riem::features {

spd::SpdMatrix sample_covariance(const MultichannelWindow& window,
                                 double epsilon, CovDenominator denom) {
  const int w = window.length();
  const int n = window.channels();
  if (w < 2) {
    throw std::invalid_argument("covariance needs a window of at least 2 samples");
  }
  if (epsilon < 0.0) {
    throw std::invalid_argument("epsilon must be non-negative");
  }
  const Matrix centered =
      window.samples.rowwise() - window.samples.colwise().mean();
  const double d = denom == CovDenominator::window_minus_one
                       ? static_cast<double>(w - 1)
                       : static_cast<double>(n - 1);
  Matrix c = (centered.transpose() * centered) / d;
  c.diagonal().array() += epsilon;
  return spd::SpdMatrix(std::move(c));
}

FeatureExtractor::FeatureExtractor(spd::SpdMatrix reference_mean,
                                   FeatureOptions options)
    : mean_(std::move(reference_mean)),
      options_(options),
      base_(spd::TangentBase(mean_)) {}

spd::TangentFeature FeatureExtractor::extract_covariance(
    const spd::SpdMatrix& cov) const {
  if (!fitted()) {
    throw std::logic_error("feature extractor has no fitted reference mean");
  }
  if (cov.dim() != dim()) {
    throw std::invalid_argument("covariance dim " + std::to_string(cov.dim()) +
                                " does not match extractor dim " +
                                std::to_string(dim()));
  }
  return spd::tangent_vectorize(base_->log_at(cov), options_.weighting);
}

spd::TangentFeature FeatureExtractor::extract(
    const MultichannelWindow& window) const {
  if (window.channels() != dim()) {
    throw std::invalid_argument("window has " + std::to_string(window.channels()) +
                                " channels, extractor expects " +
                                std::to_string(dim()));
  }
  // Resolve the ridge from the un-ridged covariance trace, then project.
  const spd::SpdMatrix raw = sample_covariance(window, 0.0, options_.denominator);
  const double eps = options_.epsilon.resolve(raw.matrix().trace(), dim());
  Matrix ridged = raw.matrix();
  ridged.diagonal().array() += eps;
  return extract_covariance(spd::SpdMatrix(std::move(ridged)));
}

FitResult fit_reference(const std::vector<spd::SpdMatrix>& covariances,
                        const FeatureOptions& options,
                        const spd::FrechetOptions& frechet) {
  if (covariances.empty()) {
    throw std::invalid_argument("fit_reference needs at least one covariance");
  }
  spd::FrechetResult mean = spd::frechet_mean(covariances, frechet);
  FitResult result;
  result.converged = mean.converged;
  result.iterations = mean.iterations;
  result.extractor = FeatureExtractor(std::move(mean.mean), options);
  return result;
}

}  // namespace riem::features
