#pragma once

#include "riem/types.hpp"

#include <cstdint>
#include <vector>

namespace riem::dsp {

enum class FilterMode { causal, zero_phase };

// Band edges in Hz. low_hz == 0 degenerates to a plain low-pass. order is the
// total pole count of the final filter and must be even so sections pair up.
struct FilterSpec {
  double low_hz{5.0};
  double high_hz{15.0};
  int order{4};
  FilterMode mode{FilterMode::causal};
};

// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0{0}, b1{0}, b2{0};
  double a1{0}, a2{0};
};

struct BiquadCascade {
  std::vector<Biquad> sections;
  int order() const { return static_cast<int>(sections.size()) * 2; }
};

// Butterworth band-pass (or low-pass when low_hz == 0) as a cascade of
// second-order sections, each normalized to unit gain at the reference
// frequency (band center, or DC for the low-pass). Deterministic for fixed
// inputs.
BiquadCascade design_bandpass(const FilterSpec& spec, double rate);

// Per-channel, per-section delay lines for streaming (direct form II
// transposed). Reset to zeros at stream start.
class FilterState {
 public:
  FilterState() = default;
  FilterState(const BiquadCascade& coeffs, int channels);

  int channels() const { return channels_; }
  bool empty() const { return channels_ == 0; }
  void reset();

  // One sample row in place, advancing the delay lines.
  void step(const BiquadCascade& coeffs, double* row);

 private:
  int channels_{0};
  int sections_{0};
  std::vector<double> s1_, s2_;  // sections_ x channels_, section-major
};

// Causal mode: direct-form recursion continuing from state, so any block
// partition of a stream gives identical output. Zero-phase mode filters the
// whole block forward then backward (offline use; state is not touched).
SignalBlock filter_block(const BiquadCascade& coeffs, FilterState& state,
                         const SignalBlock& block, FilterMode mode);

struct ResampleOptions {
  int max_denominator{1000};
  // Anti-alias FIR: 8*max(p,q)+1 taps, Kaiser window.
  double kaiser_beta{8.6};
};

// Polyphase rational resampling with a linear-phase anti-alias low-pass at
// min(rate, target)/2. Edges are handled by sample replication and each
// polyphase branch is normalized to unit DC gain, so a constant stays
// constant. Output length is ceil(T*p/q). Pass-through when the rates match.
SignalBlock resample(const SignalBlock& block, double target_rate,
                     const ResampleOptions& opts = {});

// Per-channel first difference. When prev_row is given the first output row
// is samples[0] - prev_row and the block length is preserved; otherwise the
// first row is dropped and start_index advances by one.
SignalBlock differentiate(const SignalBlock& block,
                          const Vector* prev_row = nullptr);

// Overlapping W x n windows, step samples apart, each tagged with the stream
// index of its newest row. T < W yields an empty sequence.
std::vector<MultichannelWindow> sliding_windows(const SignalBlock& block,
                                                int window, int step = 1);

}  // namespace riem::dsp
