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
#include "trialtab/linear.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trialtab/error.h"

namespace trialtab {
namespace {

static_assert(std::endian::native == std::endian::little,
              "model archives assume a little-endian host");

constexpr char kMagic[] = "TRIALTAB-MODEL 1\n";

template <typename T>
void WriteRaw(std::ostream &out, T value) {
  out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
bool ReadRaw(std::istream &in, T *value) {
  return static_cast<bool>(
      in.read(reinterpret_cast<char *>(value), sizeof(T)));
}

}  // namespace

double TrainConfig::EffectiveLearningRate(features::Backend backend) const {
  if (learning_rate) return *learning_rate;
  return backend == features::Backend::kHashed ? 0.1 : 5e-5;
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string &what) {
    throw Error(ErrorKind::kConfig, "train config: " + what);
  };
  if (batch_size <= 0) fail("batch_size must be positive");
  if (dropout < 0.0 || dropout >= 1.0) fail("dropout must lie in [0, 1)");
  if (learning_rate && !(*learning_rate > 0.0)) {
    fail("learning_rate must be positive");
  }
  if (patience_steps <= 0) fail("patience_steps must be positive");
  if (max_steps <= 0) fail("max_steps must be positive");
  if (eval_interval <= 0) fail("eval_interval must be positive");
  if (patience_steps > max_steps) fail("patience_steps exceeds max_steps");
}

std::string TrainConfig::Echo(features::Backend backend) const {
  std::ostringstream out;
  out << "batch_size=" << batch_size << '\n'
      << "dropout=" << dropout << '\n'
      << "learning_rate=" << EffectiveLearningRate(backend) << '\n'
      << "patience_steps=" << patience_steps << '\n'
      << "max_steps=" << max_steps << '\n'
      << "eval_interval=" << eval_interval << '\n'
      << "seed=" << seed << '\n';
  return out.str();
}

LinearModel::LinearModel(std::size_t num_features, int num_classes)
    : num_features_(num_features),
      num_classes_(num_classes),
      weights_(num_features * num_classes, 0.0f),
      bias_(num_classes, 0.0f) {}

void LinearModel::Score(const FeatureRow &row, std::span<double> scores) const {
  for (int c = 0; c < num_classes_; ++c) scores[c] = bias_[c];
  for (std::size_t k = 0; k < row.index.size(); ++k) {
    const float *w = &weights_[row.index[k] * num_classes_];
    const double v = row.value[k];
    for (int c = 0; c < num_classes_; ++c) scores[c] += w[c] * v;
  }
}

std::size_t LinearModel::NonZeroCount() const {
  std::size_t count = 0;
  for (float w : weights_) count += w != 0.0f;
  return count;
}

void GradientAccumulator::Add(const FeatureRow &row,
                              std::span<const double> class_grad,
                              std::span<const float> row_scale) {
  if (bias_.empty()) bias_.assign(num_classes_, 0.0);
  for (int c = 0; c < num_classes_; ++c) bias_[c] += class_grad[c];
  for (std::size_t k = 0; k < row.index.size(); ++k) {
    const double v =
        row.value[k] * (row_scale.empty() ? 1.0f : row_scale[k]);
    if (v == 0.0) continue;
    auto [it, inserted] = slots_.try_emplace(row.index[k], features_.size());
    if (inserted) {
      features_.push_back(row.index[k]);
      values_.resize(values_.size() + num_classes_, 0.0);
    }
    double *dst = &values_[it->second * num_classes_];
    for (int c = 0; c < num_classes_; ++c) dst[c] += class_grad[c] * v;
  }
}

void GradientAccumulator::Clear() {
  slots_.clear();
  features_.clear();
  values_.clear();
  bias_.assign(num_classes_, 0.0);
}

Optimizer::Optimizer(features::Backend backend, double learning_rate,
                     const LinearModel &model)
    : adam_(backend == features::Backend::kDense),
      learning_rate_(learning_rate) {
  if (adam_) {
    m_.assign(model.weights().size(), 0.0f);
    v_.assign(model.weights().size(), 0.0f);
    mb_.assign(model.bias().size(), 0.0f);
    vb_.assign(model.bias().size(), 0.0f);
  }
}

void Optimizer::Apply(const GradientAccumulator &grad, double scale,
                      LinearModel &model) {
  const int classes = grad.num_classes();
  if (!adam_) {
    for (std::size_t s = 0; s < grad.features().size(); ++s) {
      float *w = &model.weights()[grad.features()[s] * classes];
      std::span<const double> g = grad.Row(s);
      for (int c = 0; c < classes; ++c) {
        w[c] -= static_cast<float>(learning_rate_ * scale * g[c]);
      }
    }
    for (int c = 0; c < classes && c < static_cast<int>(grad.bias().size());
         ++c) {
      model.bias()[c] -=
          static_cast<float>(learning_rate_ * scale * grad.bias()[c]);
    }
    return;
  }

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++t_;
  const double correction1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  auto update = [&](float &w, float &m, float &v, double g) {
    m = static_cast<float>(kBeta1 * m + (1 - kBeta1) * g);
    v = static_cast<float>(kBeta2 * v + (1 - kBeta2) * g * g);
    const double mhat = m / correction1;
    const double vhat = v / correction2;
    w -= static_cast<float>(learning_rate_ * mhat / (std::sqrt(vhat) + kEps));
  };
  for (std::size_t s = 0; s < grad.features().size(); ++s) {
    const std::size_t base = grad.features()[s] * classes;
    std::span<const double> g = grad.Row(s);
    for (int c = 0; c < classes; ++c) {
      update(model.weights()[base + c], m_[base + c], v_[base + c],
             scale * g[c]);
    }
  }
  for (int c = 0; c < classes && c < static_cast<int>(grad.bias().size());
       ++c) {
    update(model.bias()[c], mb_[c], vb_[c], scale * grad.bias()[c]);
  }
}

void TrainLog::Write(std::ostream &out) const {
  for (const TrainLogEntry &e : entries) {
    nlohmann::json record = {{"step", e.step}, {"loss", e.loss}};
    record["dev_f1"] = e.dev_f1 ? nlohmann::json(*e.dev_f1) : nlohmann::json();
    out << record.dump() << '\n';
  }
  for (const std::string &note : notes) {
    out << nlohmann::json({{"note", note}}).dump() << '\n';
  }
}

std::string TrainLog::ToString() const {
  std::ostringstream out;
  Write(out);
  return out.str();
}

bool EarlyStopping::Observe(int step, double score) {
  if (!best_ || score > *best_) {
    best_ = score;
    best_step_ = step;
    return true;
  }
  return false;
}

bool EarlyStopping::ShouldStop(int step) const {
  return best_.has_value() && step - best_step_ >= patience_;
}

void WriteModelArchive(const std::string &path, const std::string &header_json,
                       const LinearModel &model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << kMagic << header_json << '\n';
  WriteRaw<std::uint64_t>(out, model.num_features());
  WriteRaw<std::uint32_t>(out, static_cast<std::uint32_t>(model.num_classes()));
  const std::vector<float> &w = model.weights();
  WriteRaw<std::uint64_t>(out, model.NonZeroCount());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0f) continue;
    WriteRaw<std::uint64_t>(out, i);
    WriteRaw<float>(out, w[i]);
  }
  for (float b : model.bias()) WriteRaw<float>(out, b);
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
}

std::string ReadModelArchive(const std::string &path, LinearModel *model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic + "\n" != kMagic) {
    throw Error(ErrorKind::kFormat, path + ": not a trialtab model archive");
  }
  std::string header;
  std::getline(in, header);
  std::uint64_t num_features = 0, nonzero = 0;
  std::uint32_t num_classes = 0;
  if (!ReadRaw(in, &num_features) || !ReadRaw(in, &num_classes) ||
      !ReadRaw(in, &nonzero) || num_classes == 0 || num_classes > 1024) {
    throw Error(ErrorKind::kFormat, path + ": truncated weight table header");
  }
  LinearModel loaded(num_features, static_cast<int>(num_classes));
  for (std::uint64_t k = 0; k < nonzero; ++k) {
    std::uint64_t index = 0;
    float value = 0;
    if (!ReadRaw(in, &index) || !ReadRaw(in, &value) ||
        index >= loaded.weights().size()) {
      throw Error(ErrorKind::kFormat, path + ": corrupt weight entry");
    }
    loaded.weights()[index] = value;
  }
  for (float &b : loaded.bias()) {
    if (!ReadRaw(in, &b)) throw Error(ErrorKind::kFormat, path + ": no bias");
  }
  *model = std::move(loaded);
  return header;
}

}  // namespace trialtab
