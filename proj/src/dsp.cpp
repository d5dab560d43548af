#include "riem/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace riem::dsp {

namespace {

using Complex = std::complex<double>;

constexpr double kPi = std::numbers::pi;

void validate_spec(const FilterSpec& spec, double rate) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("sample rate must be positive");
  }
  if (spec.low_hz < 0.0 || !(spec.high_hz > spec.low_hz)) {
    throw std::invalid_argument("band edges must satisfy 0 <= low < high");
  }
  if (spec.high_hz >= 0.5 * rate) {
    throw std::invalid_argument("high edge " + std::to_string(spec.high_hz) +
                                " Hz reaches Nyquist at rate " +
                                std::to_string(rate));
  }
  if (spec.order <= 0 || spec.order % 2 != 0) {
    throw std::invalid_argument("filter order must be a positive even integer");
  }
}

// Left-half-plane Butterworth prototype poles on the unit circle.
std::vector<Complex> prototype_poles(int n) {
  std::vector<Complex> poles;
  poles.reserve(n);
  for (int k = 1; k <= n; ++k) {
    const double theta = kPi * (2.0 * k + n - 1.0) / (2.0 * n);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

Complex bilinear(Complex s) { return (1.0 + s) / (1.0 - s); }

// Group a conjugate-symmetric pole set into real-coefficient denominators.
std::vector<Biquad> sections_from_poles(const std::vector<Complex>& poles) {
  std::vector<Biquad> sections;
  std::vector<double> reals;
  for (const Complex& z : poles) {
    if (std::abs(z) >= 1.0) {
      throw std::domain_error("unstable pole in filter design");
    }
    if (z.imag() > 1e-10) {
      Biquad s;
      s.a1 = -2.0 * z.real();
      s.a2 = std::norm(z);
      sections.push_back(s);
    } else if (z.imag() >= -1e-10) {
      reals.push_back(z.real());
    }
    // negative-imag poles are the conjugates of ones already handled
  }
  std::sort(reals.begin(), reals.end());
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    Biquad s;
    s.a1 = -(reals[i] + reals[i + 1]);
    s.a2 = reals[i] * reals[i + 1];
    sections.push_back(s);
  }
  return sections;
}

Complex section_response(const Biquad& s, double omega) {
  const Complex z = std::polar(1.0, omega);
  const Complex zi = 1.0 / z;
  return (s.b0 + s.b1 * zi + s.b2 * zi * zi) /
         (1.0 + s.a1 * zi + s.a2 * zi * zi);
}

double kaiser_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double half_sq = 0.25 * x * x;
  for (int k = 1; k < 200; ++k) {
    term *= half_sq / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Best rational approximation p/q of x with q <= max_den, by continued
// fractions.
std::pair<std::int64_t, std::int64_t> rational_approx(double x, int max_den) {
  std::int64_t p_prev = 1, q_prev = 0;
  std::int64_t p_cur = static_cast<std::int64_t>(std::floor(x));
  std::int64_t q_cur = 1;
  double frac = x - std::floor(x);
  while (frac > 1e-15) {
    const double inv = 1.0 / frac;
    const std::int64_t a = static_cast<std::int64_t>(std::floor(inv));
    const std::int64_t p_next = a * p_cur + p_prev;
    const std::int64_t q_next = a * q_cur + q_prev;
    if (q_next > max_den) break;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
    frac = inv - std::floor(inv);
  }
  return {p_cur, q_cur};
}

}  // namespace

BiquadCascade design_bandpass(const FilterSpec& spec, double rate) {
  validate_spec(spec, rate);
  BiquadCascade cascade;

  if (spec.low_hz == 0.0) {
    // Low-pass: all zeros at z = -1, unit gain pinned at DC.
    const double wc = std::tan(kPi * spec.high_hz / rate);
    std::vector<Complex> poles;
    for (const Complex& p : prototype_poles(spec.order)) {
      poles.push_back(bilinear(p * wc));
    }
    cascade.sections = sections_from_poles(poles);
    for (Biquad& s : cascade.sections) {
      const double dc_gain = 4.0 / (1.0 + s.a1 + s.a2);
      s.b0 = 1.0 / dc_gain;
      s.b1 = 2.0 / dc_gain;
      s.b2 = 1.0 / dc_gain;
    }
    return cascade;
  }

  // Band-pass: low-pass prototype of half the order through the standard
  // s -> (s^2 + w0^2) / (bw * s) substitution, then bilinear.
  const double wl = std::tan(kPi * spec.low_hz / rate);
  const double wh = std::tan(kPi * spec.high_hz / rate);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;

  std::vector<Complex> poles;
  for (const Complex& p : prototype_poles(spec.order / 2)) {
    const Complex pbw = p * bw;
    const Complex disc = std::sqrt(pbw * pbw - 4.0 * w0 * w0);
    poles.push_back(bilinear(0.5 * (pbw + disc)));
    poles.push_back(bilinear(0.5 * (pbw - disc)));
  }
  cascade.sections = sections_from_poles(poles);

  // One zero at z = 1 and one at z = -1 per section; normalize each section
  // at the warped band center.
  const double omega0 = 2.0 * std::atan(w0);
  for (Biquad& s : cascade.sections) {
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    const double gain = std::abs(section_response(s, omega0));
    s.b0 /= gain;
    s.b2 /= gain;
  }
  return cascade;
}

FilterState::FilterState(const BiquadCascade& coeffs, int channels)
    : channels_(channels),
      sections_(static_cast<int>(coeffs.sections.size())),
      s1_(static_cast<std::size_t>(channels) * coeffs.sections.size(), 0.0),
      s2_(static_cast<std::size_t>(channels) * coeffs.sections.size(), 0.0) {}

void FilterState::reset() {
  std::fill(s1_.begin(), s1_.end(), 0.0);
  std::fill(s2_.begin(), s2_.end(), 0.0);
}

void FilterState::step(const BiquadCascade& coeffs, double* row) {
  for (int s = 0; s < sections_; ++s) {
    const Biquad& q = coeffs.sections[static_cast<std::size_t>(s)];
    double* s1 = s1_.data() + static_cast<std::size_t>(s) * channels_;
    double* s2 = s2_.data() + static_cast<std::size_t>(s) * channels_;
    for (int c = 0; c < channels_; ++c) {
      const double x = row[c];
      const double y = q.b0 * x + s1[c];
      s1[c] = q.b1 * x - q.a1 * y + s2[c];
      s2[c] = q.b2 * x - q.a2 * y;
      row[c] = y;
    }
  }
}

SignalBlock filter_block(const BiquadCascade& coeffs, FilterState& state,
                         const SignalBlock& block, FilterMode mode) {
  SignalBlock out = block;
  const int n = block.channels();
  const std::int64_t t = block.length();

  if (mode == FilterMode::causal) {
    if (state.channels() != n) {
      throw std::invalid_argument("filter state has " +
                                  std::to_string(state.channels()) +
                                  " channels, block has " + std::to_string(n));
    }
    std::vector<double> row(static_cast<std::size_t>(n));
    for (std::int64_t r = 0; r < t; ++r) {
      for (int c = 0; c < n; ++c) row[static_cast<std::size_t>(c)] = out.samples(r, c);
      state.step(coeffs, row.data());
      for (int c = 0; c < n; ++c) out.samples(r, c) = row[static_cast<std::size_t>(c)];
    }
    return out;
  }

  // Zero-phase: forward then backward over the whole block, fresh state each
  // pass. Offline only; the caller's streaming state is left untouched.
  FilterState fwd(coeffs, n);
  std::vector<double> row(static_cast<std::size_t>(n));
  for (std::int64_t r = 0; r < t; ++r) {
    for (int c = 0; c < n; ++c) row[static_cast<std::size_t>(c)] = out.samples(r, c);
    fwd.step(coeffs, row.data());
    for (int c = 0; c < n; ++c) out.samples(r, c) = row[static_cast<std::size_t>(c)];
  }
  FilterState bwd(coeffs, n);
  for (std::int64_t r = t - 1; r >= 0; --r) {
    for (int c = 0; c < n; ++c) row[static_cast<std::size_t>(c)] = out.samples(r, c);
    bwd.step(coeffs, row.data());
    for (int c = 0; c < n; ++c) out.samples(r, c) = row[static_cast<std::size_t>(c)];
  }
  return out;
}

SignalBlock resample(const SignalBlock& block, double target_rate,
                     const ResampleOptions& opts) {
  if (!(target_rate > 0.0) || !(block.rate > 0.0)) {
    throw std::invalid_argument("resample rates must be positive");
  }
  if (target_rate == block.rate) {
    return block;
  }
  const double ratio = target_rate / block.rate;
  auto [p, q] = rational_approx(ratio, opts.max_denominator);
  const std::int64_t g = std::gcd(p, q);
  p /= g;
  q /= g;
  if (p <= 0 || std::abs(static_cast<double>(p) / static_cast<double>(q) - ratio) >
                    1e-9 * ratio) {
    throw std::invalid_argument(
        "rate ratio " + std::to_string(ratio) +
        " is not representable as p/q with q <= " +
        std::to_string(opts.max_denominator));
  }

  const std::int64_t taps = 8 * std::max(p, q) + 1;
  const std::int64_t delay = (taps - 1) / 2;
  // Cutoff at min(rate, target)/2, normalized to the p-upsampled rate.
  const double cutoff = std::min(1.0, static_cast<double>(p) / static_cast<double>(q)) /
                        (2.0 * static_cast<double>(p));
  std::vector<double> h(static_cast<std::size_t>(taps));
  const double i0_beta = kaiser_i0(opts.kaiser_beta);
  for (std::int64_t k = 0; k < taps; ++k) {
    const double m = static_cast<double>(k - delay);
    const double w = kaiser_i0(opts.kaiser_beta *
                               std::sqrt(std::max(0.0, 1.0 - (m / delay) * (m / delay)))) /
                     i0_beta;
    h[static_cast<std::size_t>(k)] = 2.0 * cutoff * sinc(2.0 * cutoff * m) * w;
  }
  // Normalize every polyphase branch to unit DC gain so constants survive
  // exactly.
  for (std::int64_t phase = 0; phase < p; ++phase) {
    double sum = 0.0;
    for (std::int64_t k = phase; k < taps; k += p) sum += h[static_cast<std::size_t>(k)];
    for (std::int64_t k = phase; k < taps; k += p) h[static_cast<std::size_t>(k)] /= sum;
  }

  const std::int64_t t_in = block.length();
  const std::int64_t t_out = (t_in * p + q - 1) / q;
  const int n = block.channels();
  SignalBlock out;
  out.rate = target_rate;
  out.start_index =
      static_cast<std::int64_t>(std::llround(static_cast<double>(block.start_index) *
                                             static_cast<double>(p) / static_cast<double>(q)));
  out.samples.setZero(t_out, n);
  for (std::int64_t m = 0; m < t_out; ++m) {
    const std::int64_t u = m * q + delay;
    const std::int64_t phase = u % p;
    const std::int64_t base = u / p;
    for (std::int64_t k = phase, j = 0; k < taps; k += p, ++j) {
      const std::int64_t idx = std::clamp<std::int64_t>(base - j, 0, t_in - 1);
      out.samples.row(m) += h[static_cast<std::size_t>(k)] * block.samples.row(idx);
    }
  }
  return out;
}

SignalBlock differentiate(const SignalBlock& block, const Vector* prev_row) {
  const std::int64_t t = block.length();
  const int n = block.channels();
  SignalBlock out;
  out.rate = block.rate;
  if (prev_row != nullptr) {
    if (prev_row->size() != n) {
      throw std::invalid_argument("previous row has wrong channel count");
    }
    out.start_index = block.start_index;
    out.samples.resize(t, n);
    if (t > 0) {
      out.samples.row(0) = block.samples.row(0) - prev_row->transpose();
      for (std::int64_t r = 1; r < t; ++r) {
        out.samples.row(r) = block.samples.row(r) - block.samples.row(r - 1);
      }
    }
    return out;
  }
  out.start_index = block.start_index + 1;
  out.samples.resize(std::max<std::int64_t>(0, t - 1), n);
  for (std::int64_t r = 1; r < t; ++r) {
    out.samples.row(r - 1) = block.samples.row(r) - block.samples.row(r - 1);
  }
  return out;
}

std::vector<MultichannelWindow> sliding_windows(const SignalBlock& block,
                                                int window, int step) {
  if (window < 2) {
    throw std::invalid_argument("window length must be at least 2 samples");
  }
  if (step < 1) {
    throw std::invalid_argument("window step must be at least 1");
  }
  std::vector<MultichannelWindow> out;
  const std::int64_t t = block.length();
  if (t < window) return out;
  out.reserve(static_cast<std::size_t>((t - window) / step + 1));
  for (std::int64_t r = 0; r + window <= t; r += step) {
    MultichannelWindow w;
    w.samples = block.samples.middleRows(r, window);
    w.end_index = block.start_index + r + window - 1;
    w.rate = block.rate;
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace riem::dsp
