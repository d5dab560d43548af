#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace riem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Left/right motor intention. Label encoding is frozen across the whole
// toolkit: right = +1, left = -1.
enum class Side { left, right };

inline int side_to_label(Side s) { return s == Side::right ? +1 : -1; }
inline Side label_to_side(int y) { return y > 0 ? Side::right : Side::left; }
inline const char* side_name(Side s) { return s == Side::right ? "right" : "left"; }

// A contiguous run of multichannel samples, rows = time, cols = channels.
// start_index is the stream sample index of row 0 (at this block's rate).
struct SignalBlock {
  Matrix samples;
  double rate{0.0};
  std::int64_t start_index{0};

  std::int64_t length() const { return samples.rows(); }
  int channels() const { return static_cast<int>(samples.cols()); }
};

// One W x n analysis window. end_index is the stream sample index of the
// newest row, i.e. the causal prediction instant.
struct MultichannelWindow {
  Matrix samples;
  std::int64_t end_index{0};
  double rate{0.0};

  int length() const { return static_cast<int>(samples.rows()); }
  int channels() const { return static_cast<int>(samples.cols()); }
};

}  // namespace riem
