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
#include "trialtab/ner.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "trialtab/error.h"
#include "trialtab/evaluate.h"
#include "trialtab/rng.h"

namespace trialtab::ner {
namespace {

using features::Backend;
using features::DocFeatures;
using json = nlohmann::json;

constexpr std::array<EntityLabel, 3> kAlphabeticalLabels = {
    EntityLabel::kIntv, EntityLabel::kMeas, EntityLabel::kOc};

int AlphabeticalIndex(EntityLabel label) {
  for (int i = 0; i < 3; ++i) {
    if (kAlphabeticalLabels[i] == label) return i;
  }
  return 0;
}

// Slots read by the state features.
enum Slot : std::uint32_t {
  kBuffer0 = 1,
  kBuffer1,
  kBuffer2,
  kStackFirst,
  kStackLast,
  kNumTokenSlots = 5,
};

constexpr int kNoPreviousAction = kNumActionClasses;
// Dense layout after the token slots: previous action (14), open label (4),
// stack length bucket (4).
constexpr int kDenseExtras = kNumActionClasses + 1 + 4 + 4;

std::size_t NumFeatures(Backend backend, int dim) {
  if (backend == Backend::kHashed) return std::size_t{1} << dim;
  return static_cast<std::size_t>(kNumTokenSlots) * dim + kDenseExtras;
}

void CheckSource(const NerModel &model, const features::FeatureSource &source) {
  if (source.backend() != model.backend() || source.dim() != model.dim()) {
    throw Error(ErrorKind::kConfig,
                "NER model expects " +
                    std::string(features::ToString(model.backend())) +
                    " inputs of dim " + std::to_string(model.dim()) +
                    ", feature source provides " +
                    std::string(features::ToString(source.backend())) +
                    " of dim " + std::to_string(source.dim()));
  }
}

int ArgmaxValid(const ParserState &state, std::span<const double> scores) {
  int best = -1;
  for (int cls = 0; cls < kNumActionClasses; ++cls) {
    if (!IsValid(state, ActionFromClass(cls))) continue;
    if (best < 0 || scores[cls] > scores[best]) best = cls;
  }
  return best;
}

}  // namespace

std::string ToString(const Action &action) {
  static constexpr const char *kNames[] = {"Out", "Unit", "Begin", "In",
                                           "Last"};
  std::string name = kNames[static_cast<int>(action.kind)];
  if (action.kind != ActionKind::kOut) {
    name += "-" + std::string(trialtab::ToString(action.label));
  }
  return name;
}

int ActionClass(const Action &action) {
  if (action.kind == ActionKind::kOut) return 0;
  return 1 + (static_cast<int>(action.kind) - 1) * 3 +
         AlphabeticalIndex(action.label);
}

Action ActionFromClass(int cls) {
  if (cls <= 0) return {ActionKind::kOut, EntityLabel::kIntv};
  const int k = cls - 1;
  return {static_cast<ActionKind>(1 + k / 3), kAlphabeticalLabels[k % 3]};
}

ActionKindSet ValidActions(const ParserState &state) {
  ActionKindSet set;
  const int buffered = state.buffer_size();
  if (state.stack_empty()) {
    if (buffered >= 1) {
      set.Insert(ActionKind::kOut);
      set.Insert(ActionKind::kUnit);
    }
    if (buffered >= 2) set.Insert(ActionKind::kBegin);
  } else {
    if (buffered >= 1) set.Insert(ActionKind::kLast);
    if (buffered >= 2) set.Insert(ActionKind::kIn);
  }
  return set;
}

bool IsValid(const ParserState &state, const Action &action) {
  if (!ValidActions(state).Contains(action.kind)) return false;
  if (action.kind == ActionKind::kIn || action.kind == ActionKind::kLast) {
    return action.label == state.stack_label();
  }
  return true;
}

void ParserState::ApplyUnchecked(const Action &action) {
  ++steps_;
  switch (action.kind) {
    case ActionKind::kOut:
      ++next_;
      break;
    case ActionKind::kUnit:
      output_.push_back({action.label, next_, next_});
      ++next_;
      break;
    case ActionKind::kBegin:
      stack_start_ = next_;
      stack_label_ = action.label;
      ++next_;
      break;
    case ActionKind::kIn:
      ++next_;
      break;
    case ActionKind::kLast:
      output_.push_back({stack_label_, stack_start_, next_});
      stack_start_ = -1;
      ++next_;
      break;
  }
}

ParserState Apply(ParserState state, const Action &action) {
  if (!IsValid(state, action)) {
    throw Error(ErrorKind::kContract,
                "action " + ToString(action) + " is not valid at token " +
                    std::to_string(state.front()) + " (stack size " +
                    std::to_string(state.stack_size()) + ")");
  }
  state.ApplyUnchecked(action);
  return state;
}

std::vector<Action> OracleActions(const Doc &doc) {
  std::vector<EntitySpan> spans = doc.entities;
  std::sort(spans.begin(), spans.end());
  const int n = doc.num_tokens();
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const EntitySpan &s = spans[i];
    if (s.token_start < 0 || s.token_end >= n || s.token_start > s.token_end) {
      throw Error(ErrorKind::kIntegrity,
                  "doc " + doc.id + ": gold span out of token bounds");
    }
    if (i > 0 && spans[i - 1].token_end >= s.token_start) {
      throw Error(ErrorKind::kIntegrity,
                  "doc " + doc.id + ": overlapping gold spans at token " +
                      std::to_string(s.token_start));
    }
  }
  std::vector<Action> actions;
  actions.reserve(n);
  int t = 0;
  for (const EntitySpan &s : spans) {
    for (; t < s.token_start; ++t) actions.push_back({ActionKind::kOut});
    if (s.length() == 1) {
      actions.push_back({ActionKind::kUnit, s.label});
    } else {
      actions.push_back({ActionKind::kBegin, s.label});
      for (int k = s.token_start + 1; k < s.token_end; ++k) {
        actions.push_back({ActionKind::kIn, s.label});
      }
      actions.push_back({ActionKind::kLast, s.label});
    }
    t = s.token_end + 1;
  }
  for (; t < n; ++t) actions.push_back({ActionKind::kOut});
  return actions;
}

std::vector<EntitySpan> Replay(int num_tokens,
                               const std::vector<Action> &actions) {
  ParserState state(num_tokens);
  for (const Action &action : actions) state = Apply(std::move(state), action);
  return state.output();
}

NerModel::NerModel(Backend backend, int dim)
    : backend_(backend),
      dim_(dim),
      scorer_(NumFeatures(backend, dim), kNumActionClasses) {}

FeatureRow NerModel::StateFeatures(const DocFeatures &doc,
                                   const ParserState &state,
                                   int previous_class) const {
  const int slot_tokens[kNumTokenSlots] = {
      state.front(),
      state.front() + 1,
      state.front() + 2,
      state.stack_empty() ? -1 : state.stack_start(),
      state.stack_empty() ? -1 : state.front() - 1,
  };
  const int n = doc.num_tokens();
  const int stack_bucket = std::min(state.stack_size(), 3);
  const int open_label =
      state.stack_empty() ? 0 : 1 + AlphabeticalIndex(state.stack_label());

  FeatureRow row;
  if (backend_ == Backend::kHashed) {
    const std::uint64_t mask = (std::uint64_t{1} << dim_) - 1;
    auto add = [&](std::uint64_t h) {
      row.Add(static_cast<std::uint32_t>(h & mask), 1.0f);
    };
    static const std::uint64_t kAbsent = features::Fnv1a64("<absent>");
    for (int s = 0; s < static_cast<int>(kNumTokenSlots); ++s) {
      const int t = slot_tokens[s];
      const std::uint32_t slot = kBuffer0 + s;
      if (t < 0 || t >= n) {
        add(features::MixSlot(kAbsent, slot));
        continue;
      }
      for (std::uint64_t h : doc.hashes[t]) add(features::MixSlot(h, slot));
    }
    add(features::Fnv1a64("prev=" + std::to_string(previous_class)));
    add(features::Fnv1a64("open=" + std::to_string(open_label)));
    add(features::Fnv1a64("slen=" + std::to_string(stack_bucket)));
    add(features::Fnv1a64("open+slen=" + std::to_string(open_label) + "/" +
                          std::to_string(stack_bucket)));
    return row;
  }

  for (int s = 0; s < static_cast<int>(kNumTokenSlots); ++s) {
    const int t = slot_tokens[s];
    if (t < 0 || t >= n) continue;
    const features::DenseVector &v = doc.vectors[t];
    for (int i = 0; i < dim_; ++i) {
      if (v[i] != 0.0f) row.Add(static_cast<std::uint32_t>(s * dim_ + i), v[i]);
    }
  }
  const std::uint32_t base = static_cast<std::uint32_t>(kNumTokenSlots * dim_);
  row.Add(base + previous_class, 1.0f);
  row.Add(base + kNumActionClasses + 1 + open_label, 1.0f);
  row.Add(base + kNumActionClasses + 1 + 4 + stack_bucket, 1.0f);
  return row;
}

void NerModel::Save(const std::string &path) const {
  json labels = json::array();
  for (EntityLabel l : kEntityLabels) labels.push_back(trialtab::ToString(l));
  json actions = json::array();
  for (int c = 0; c < kNumActionClasses; ++c) {
    actions.push_back(ToString(ActionFromClass(c)));
  }
  json header = {
      {"format_version", 1},
      {"kind", "ner"},
      {"backend", features::ToString(backend_)},
      {"dim", dim_},
      {"labels", labels},
      {"actions", actions},
      {"config",
       {{"batch_size", config_.batch_size},
        {"dropout", config_.dropout},
        {"learning_rate", config_.EffectiveLearningRate(backend_)},
        {"patience_steps", config_.patience_steps},
        {"max_steps", config_.max_steps},
        {"eval_interval", config_.eval_interval},
        {"seed", config_.seed}}},
  };
  header[backend_ == Backend::kHashed ? "bucket_bits" : "embedding_dim"] = dim_;
  WriteModelArchive(path, header.dump(), scorer_);
}

NerModel NerModel::Load(const std::string &path) {
  LinearModel scorer;
  json header;
  try {
    header = json::parse(ReadModelArchive(path, &scorer));
    if (header.at("kind") != "ner") {
      throw Error(ErrorKind::kFormat, path + ": not an NER model");
    }
    NerModel model;
    model.backend_ =
        header.at("backend") == "hashed" ? Backend::kHashed : Backend::kDense;
    model.dim_ = header.at("dim").get<int>();
    const json &c = header.at("config");
    model.config_.batch_size = c.at("batch_size").get<int>();
    model.config_.dropout = c.at("dropout").get<double>();
    model.config_.learning_rate = c.at("learning_rate").get<double>();
    model.config_.patience_steps = c.at("patience_steps").get<int>();
    model.config_.max_steps = c.at("max_steps").get<int>();
    model.config_.eval_interval = c.at("eval_interval").get<int>();
    model.config_.seed = c.at("seed").get<std::uint64_t>();
    if (scorer.num_classes() != kNumActionClasses ||
        scorer.num_features() != NumFeatures(model.backend_, model.dim_)) {
      throw Error(ErrorKind::kFormat, path + ": weight table shape mismatch");
    }
    model.scorer_ = std::move(scorer);
    return model;
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kFormat, path + ": bad header: " + e.what());
  }
}

DecodeResult DecodeActions(const Doc &doc, const NerModel &model,
                           const features::FeatureSource &source) {
  CheckSource(model, source);
  DecodeResult result;
  if (doc.tokens.empty()) return result;
  const DocFeatures features = source.Extract(doc);
  ParserState state(doc.num_tokens());
  std::array<double, kNumActionClasses> scores{};
  int previous = kNoPreviousAction;
  while (!state.terminal()) {
    FeatureRow row = model.StateFeatures(features, state, previous);
    model.scorer().Score(row, scores);
    const int cls = ArgmaxValid(state, scores);
    const Action action = ActionFromClass(cls);
    state.ApplyUnchecked(action);
    result.actions.push_back(action);
    previous = cls;
  }
  result.entities = state.output();
  return result;
}

Doc Decode(const Doc &doc, const NerModel &model,
           const features::FeatureSource &source) {
  Doc out = doc;
  out.entities = DecodeActions(doc, model, source).entities;
  out.relations.clear();
  Canonicalize(out);
  return out;
}

std::vector<Doc> DecodeAll(const std::vector<Doc> &docs, const NerModel &model,
                           const features::FeatureSource &source, int jobs) {
  CheckSource(model, source);
  std::vector<Doc> out(docs.size());
  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(docs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      out[i] = Decode(docs[i], model, source);
    }
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < docs.size(); i += workers) {
          out[i] = Decode(docs[i], model, source);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread &t : threads) t.join();
  for (const std::exception_ptr &e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace {

// One teacher-forced state: its features, valid classes and gold class.
struct TrainingState {
  FeatureRow row;
  std::array<bool, kNumActionClasses> valid{};
  int gold = 0;
};

std::vector<TrainingState> OracleStates(const Doc &doc, const NerModel &model,
                                        const features::FeatureSource &source) {
  std::vector<TrainingState> states;
  if (doc.tokens.empty()) return states;
  const DocFeatures features = source.Extract(doc);
  ParserState state(doc.num_tokens());
  int previous = kNoPreviousAction;
  for (const Action &action : OracleActions(doc)) {
    TrainingState ts;
    ts.row = model.StateFeatures(features, state, previous);
    for (int c = 0; c < kNumActionClasses; ++c) {
      ts.valid[c] = IsValid(state, ActionFromClass(c));
    }
    ts.gold = ActionClass(action);
    states.push_back(std::move(ts));
    state = Apply(std::move(state), action);
    previous = ActionClass(action);
  }
  return states;
}

double DevF1(const std::vector<Doc> &dev, const NerModel &model,
             const features::FeatureSource &source) {
  std::vector<Doc> predicted;
  predicted.reserve(dev.size());
  for (const Doc &doc : dev) predicted.push_back(Decode(doc, model, source));
  return eval::EvalNer(predicted, dev).scores.f1;
}

}  // namespace

NerTrainResult TrainNer(const std::vector<Doc> &train,
                        const std::vector<Doc> &dev, const TrainConfig &config,
                        const features::FeatureSource &source) {
  config.Validate();
  if (train.empty()) {
    throw Error(ErrorKind::kSize, "cannot train NER on an empty training set");
  }
  NerTrainResult result;
  NerModel model(source.backend(), source.dim());
  TrainConfig resolved = config;
  resolved.learning_rate = config.EffectiveLearningRate(source.backend());
  model.set_config(resolved);

  std::vector<std::vector<TrainingState>> doc_states;
  doc_states.reserve(train.size());
  for (const Doc &doc : train) {
    doc_states.push_back(OracleStates(doc, model, source));
  }

  Rng rng(config.seed);
  Optimizer optimizer(source.backend(),
                      config.EffectiveLearningRate(source.backend()),
                      model.scorer());
  GradientAccumulator grad(kNumActionClasses);
  EarlyStopping stopping(config.patience_steps);
  NerModel best = model;
  const bool use_dev = !dev.empty();
  const std::size_t batch =
      std::min<std::size_t>(config.batch_size, train.size());
  const float keep = static_cast<float>(1.0 - config.dropout);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  std::size_t cursor = 0;
  double loss_sum = 0.0;
  int loss_steps = 0;
  std::array<double, kNumActionClasses> scores{};
  std::array<double, kNumActionClasses> class_grad{};
  std::vector<float> mask;

  result.log.stop_reason = "max_steps";
  int step = 0;
  for (step = 1; step <= config.max_steps; ++step) {
    grad.Clear();
    double batch_loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        rng.Shuffle(order);
        cursor = 0;
      }
      const std::vector<TrainingState> &states = doc_states[order[cursor++]];
      for (const TrainingState &ts : states) {
        // Feature dropout, rescaled to keep expectations.
        mask.assign(ts.row.size(), 1.0f);
        if (config.dropout > 0.0) {
          for (float &m : mask) {
            m = rng.Uniform() < config.dropout ? 0.0f : 1.0f / keep;
          }
        }
        FeatureRow dropped = ts.row;
        for (std::size_t k = 0; k < mask.size(); ++k) {
          dropped.value[k] *= mask[k];
        }
        model.scorer().Score(dropped, scores);
        double max_score = -1e300;
        for (int c = 0; c < kNumActionClasses; ++c) {
          if (ts.valid[c]) max_score = std::max(max_score, scores[c]);
        }
        double z = 0.0;
        for (int c = 0; c < kNumActionClasses; ++c) {
          if (ts.valid[c]) z += std::exp(scores[c] - max_score);
        }
        for (int c = 0; c < kNumActionClasses; ++c) {
          const double p =
              ts.valid[c] ? std::exp(scores[c] - max_score) / z : 0.0;
          class_grad[c] = p - (c == ts.gold ? 1.0 : 0.0);
        }
        batch_loss -= scores[ts.gold] - max_score - std::log(z);
        grad.Add(dropped, class_grad);
      }
    }
    optimizer.Apply(grad, 1.0 / static_cast<double>(batch), model.scorer());
    loss_sum += batch_loss / static_cast<double>(batch);
    ++loss_steps;

    if (step % config.eval_interval == 0 || step == config.max_steps) {
      TrainLogEntry entry;
      entry.step = step;
      entry.loss = loss_sum / loss_steps;
      loss_sum = 0.0;
      loss_steps = 0;
      if (use_dev) {
        entry.dev_f1 = DevF1(dev, model, source);
        if (stopping.Observe(step, *entry.dev_f1)) best = model;
      }
      result.log.entries.push_back(entry);
      if (use_dev && stopping.ShouldStop(step)) {
        result.log.stop_reason = "patience";
        break;
      }
    }
  }
  result.log.steps_run = std::min(step, config.max_steps);
  if (use_dev) {
    result.log.best_step = stopping.best_step();
    result.log.best_dev_f1 = stopping.best_score();
    result.model = std::move(best);
  } else {
    result.log.best_step = result.log.steps_run;
    result.model = std::move(model);
  }
  return result;
}

}  // namespace trialtab::ner
