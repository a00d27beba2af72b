// Copyright 2026 The Trialtab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef TRIALTAB_LINEAR_H_
#define TRIALTAB_LINEAR_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "trialtab/features.h"

namespace trialtab {

// Hyper-parameters shared by the entity and relation trainers.
struct TrainConfig {
  int batch_size = 64;
  double dropout = 0.2;
  // Unset means the backend default: 0.1 (hashed, plain gradient descent)
  // or 5e-5 (dense, Adam).
  std::optional<double> learning_rate;
  int patience_steps = 1000;
  int max_steps = 20000;
  int eval_interval = 50;
  std::uint64_t seed = 0;

  double EffectiveLearningRate(features::Backend backend) const;

  // Throws Error(kConfig) for non-positive values or patience > max_steps.
  void Validate() const;

  // Flat key=value lines, in a fixed order.
  std::string Echo(features::Backend backend) const;

  bool operator==(const TrainConfig &) const = default;
};

// Sparse input row; dense inputs use every index.
struct FeatureRow {
  std::vector<std::uint32_t> index;
  std::vector<float> value;

  void Add(std::uint32_t i, float v) {
    index.push_back(i);
    value.push_back(v);
  }
  std::size_t size() const { return index.size(); }
};

// Per-class linear scores: bias[c] + sum_i weight[index_i][c] * value_i.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(std::size_t num_features, int num_classes);

  std::size_t num_features() const { return num_features_; }
  int num_classes() const { return num_classes_; }

  void Score(const FeatureRow &row, std::span<double> scores) const;

  float weight(std::size_t feature, int cls) const {
    return weights_[feature * num_classes_ + cls];
  }
  std::vector<float> &weights() { return weights_; }
  const std::vector<float> &weights() const { return weights_; }
  std::vector<float> &bias() { return bias_; }
  const std::vector<float> &bias() const { return bias_; }

  std::size_t NonZeroCount() const;

  bool operator==(const LinearModel &) const = default;

 private:
  std::size_t num_features_ = 0;
  int num_classes_ = 0;
  std::vector<float> weights_;
  std::vector<float> bias_;
};

// Gradient summed over one minibatch, keyed by touched feature.
class GradientAccumulator {
 public:
  explicit GradientAccumulator(int num_classes) : num_classes_(num_classes) {}

  void Add(const FeatureRow &row, std::span<const double> class_grad,
           std::span<const float> row_scale = {});
  void Clear();

  int num_classes() const { return num_classes_; }
  const std::vector<std::uint32_t> &features() const { return features_; }
  std::span<const double> Row(std::size_t slot) const {
    return {values_.data() + slot * num_classes_,
            static_cast<std::size_t>(num_classes_)};
  }
  std::span<const double> bias() const { return bias_; }

 private:
  int num_classes_;
  std::unordered_map<std::uint32_t, std::size_t> slots_;
  std::vector<std::uint32_t> features_;
  std::vector<double> values_;
  std::vector<double> bias_;
};

// Applies accumulated gradients: plain descent for hashed models (whose
// weight tables are too large for moment estimates) and Adam for dense ones.
class Optimizer {
 public:
  Optimizer(features::Backend backend, double learning_rate,
            const LinearModel &model);

  // `scale` multiplies every gradient entry before the update.
  void Apply(const GradientAccumulator &grad, double scale, LinearModel &model);

 private:
  bool adam_;
  double learning_rate_;
  std::int64_t t_ = 0;
  std::vector<float> m_, v_, mb_, vb_;
};

struct TrainLogEntry {
  int step = 0;
  double loss = 0.0;
  std::optional<double> dev_f1;

  bool operator==(const TrainLogEntry &) const = default;
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;
  std::vector<std::string> notes;
  int steps_run = 0;
  int best_step = 0;
  std::optional<double> best_dev_f1;
  std::string stop_reason;

  // Line-delimited {"step","loss","dev_f1"} records, then note records.
  void Write(std::ostream &out) const;
  std::string ToString() const;
};

// Early-stopping bookkeeping: improvement means strictly higher dev F1;
// training stops once `patience` steps pass without one.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true if `score` at `step` is a new best.
  bool Observe(int step, double score);
  bool ShouldStop(int step) const;

  int best_step() const { return best_step_; }
  std::optional<double> best_score() const { return best_; }

 private:
  int patience_;
  int best_step_ = 0;
  std::optional<double> best_;
};

// Binary archive: magic line, one JSON header line, then the weights as
// (uint32 index, float32 value) pairs for non-zero entries and the bias.
// Integers and floats are little-endian.
void WriteModelArchive(const std::string &path, const std::string &header_json,
                       const LinearModel &model);
// Returns the header JSON. Throws Error(kFormat) for a corrupt archive.
std::string ReadModelArchive(const std::string &path, LinearModel *model);

}  // namespace trialtab

#endif  // TRIALTAB_LINEAR_H_
