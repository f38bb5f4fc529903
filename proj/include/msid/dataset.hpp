#pragma once

#include "msid/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace msid {

// Provenance of a generated dataset. Everything needed to regenerate it and
// to recover the true initial conditions of the noiseless trajectory.
struct DatasetMeta {
  std::string generator;  // empty for data loaded from disk
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> noise_levels;
  Vec true_theta;
  // True model state at k = 0..N (column k). Empty when unknown.
  Mat true_states;
  // Output noise realization v[k], k = 1..N (length N, or empty).
  Vec noise;
};

// Measured inputs and outputs, samples k = 1..N. Row k-1 holds sample k.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Mat inputs, Mat outputs);

  int size() const { return static_cast<int>(outputs_.rows()); }
  int input_channels() const { return static_cast<int>(inputs_.cols()); }
  int output_channels() const { return static_cast<int>(outputs_.cols()); }

  // Sample accessors with 1-based k. Indices before the first sample hold the
  // first measurement; indices past the end hold the last one.
  double y(int k, int channel = 0) const { return outputs_(clamp(k), channel); }
  double u(int k, int channel = 0) const { return inputs_(clamp(k), channel); }
  auto y_row(int k) const { return outputs_.row(clamp(k)); }
  auto u_row(int k) const { return inputs_.row(clamp(k)); }

  const Mat& inputs() const { return inputs_; }
  const Mat& outputs() const { return outputs_; }
  Mat& mutable_inputs() { return inputs_; }
  Mat& mutable_outputs() { return outputs_; }

  DatasetMeta meta;

 private:
  int clamp(int k) const {
    const int n = size();
    if (k < 1) return 0;
    if (k > n) return n - 1;
    return k - 1;
  }

  Mat inputs_;
  Mat outputs_;
};

// Zero-copy view of z[k] = (y[k-1..k-n_y], u[k..k-n_u]) over a dataset.
// Lags that reach before the first sample are filled with the first sample
// (hold-first) and flagged through padded().
class RegressorWindow {
 public:
  RegressorWindow(const Dataset& data, int k, int n_y, int n_u)
      : data_(&data), k_(k), n_y_(n_y), n_u_(n_u) {}

  int k() const { return k_; }
  int n_y() const { return n_y_; }
  int n_u() const { return n_u_; }

  // j = 1..n_y
  double past_output(int j, int channel = 0) const { return data_->y(k_ - j, channel); }
  // j = 0..n_u
  double input(int j, int channel = 0) const { return data_->u(k_ - j, channel); }

  bool padded() const { return k_ - std::max(n_y_, n_u_) < 1; }

 private:
  const Dataset* data_;
  int k_;
  int n_y_;
  int n_u_;
};

// CSV with header `k,u,y` (single channel) or `k,u1,y1,u2,y2,...`.
void write_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_csv(const std::filesystem::path& path);

}  // namespace msid
