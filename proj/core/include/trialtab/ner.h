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
#ifndef TRIALTAB_NER_H_
#define TRIALTAB_NER_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trialtab/doc.h"
#include "trialtab/features.h"
#include "trialtab/linear.h"

namespace trialtab::ner {

// Declaration order is the tie-break order between equal scores.
enum class ActionKind { kOut = 0, kUnit = 1, kBegin = 2, kIn = 3, kLast = 4 };

struct Action {
  ActionKind kind = ActionKind::kOut;
  EntityLabel label = EntityLabel::kIntv;  // ignored for kOut

  bool operator==(const Action &other) const {
    return kind == other.kind &&
           (kind == ActionKind::kOut || label == other.label);
  }
};

std::string ToString(const Action &action);

// Out, then Unit/Begin/In/Last for each label in alphabetical order
// (INTV, MEAS, OC): 13 classes. Class order equals tie-break order.
inline constexpr int kNumActionClasses = 13;
int ActionClass(const Action &action);
Action ActionFromClass(int cls);

class ActionKindSet {
 public:
  void Insert(ActionKind kind) { bits_ |= 1u << static_cast<int>(kind); }
  bool Contains(ActionKind kind) const {
    return bits_ & (1u << static_cast<int>(kind));
  }
  bool empty() const { return bits_ == 0; }
  bool operator==(const ActionKindSet &) const = default;

  static ActionKindSet Of(std::initializer_list<ActionKind> kinds) {
    ActionKindSet set;
    for (ActionKind k : kinds) set.Insert(k);
    return set;
  }

 private:
  unsigned bits_ = 0;
};

// Buffer / entity stack / output triple. The buffer is the suffix of the
// sentence starting at front(); stack tokens are contiguous and end just
// before it.
class ParserState {
 public:
  explicit ParserState(int num_tokens) : num_tokens_(num_tokens) {}

  int num_tokens() const { return num_tokens_; }
  int front() const { return next_; }
  int buffer_size() const { return num_tokens_ - next_; }
  bool stack_empty() const { return stack_start_ < 0; }
  int stack_start() const { return stack_start_; }
  int stack_size() const { return stack_empty() ? 0 : next_ - stack_start_; }
  EntityLabel stack_label() const { return stack_label_; }
  const std::vector<EntitySpan> &output() const { return output_; }
  bool terminal() const { return buffer_size() == 0 && stack_empty(); }
  int steps() const { return steps_; }

  // Unchecked transition; see Apply.
  void ApplyUnchecked(const Action &action);

 private:
  int num_tokens_;
  int next_ = 0;
  int stack_start_ = -1;
  EntityLabel stack_label_ = EntityLabel::kIntv;
  std::vector<EntitySpan> output_;
  int steps_ = 0;
};

// Begin needs an empty stack and at least two buffered tokens; Unit and
// Out need an empty stack and one. In needs an open stack and at least two
// buffered tokens; Last needs an open stack and one. With an open stack
// and a single buffered token only Last remains, so every action consumes
// exactly one token.
ActionKindSet ValidActions(const ParserState &state);
bool IsValid(const ParserState &state, const Action &action);

// Throws Error(kContract) for an invalid action.
ParserState Apply(ParserState state, const Action &action);

// Gold action sequence: Unit for single-token spans, Begin, In..., Last for
// longer ones, Out elsewhere. Throws Error(kIntegrity) for overlapping or
// out-of-bounds spans.
std::vector<Action> OracleActions(const Doc &doc);

// Replays actions from the initial state and returns the emitted spans.
std::vector<EntitySpan> Replay(int num_tokens,
                               const std::vector<Action> &actions);

class NerModel {
 public:
  NerModel() = default;
  // `dim` is bucket bits (hashed) or the embedding dimension (dense).
  NerModel(features::Backend backend, int dim);

  features::Backend backend() const { return backend_; }
  int dim() const { return dim_; }
  const LinearModel &scorer() const { return scorer_; }
  LinearModel &scorer() { return scorer_; }
  const TrainConfig &config() const { return config_; }
  void set_config(const TrainConfig &config) { config_ = config; }

  // Features describing a parser state: buffer[0..2], the first and last
  // stack tokens, the previous action, the open label and the stack length.
  FeatureRow StateFeatures(const features::DocFeatures &doc,
                           const ParserState &state, int previous_class) const;

  void Save(const std::string &path) const;
  static NerModel Load(const std::string &path);

  bool operator==(const NerModel &) const = default;

 private:
  features::Backend backend_ = features::Backend::kHashed;
  int dim_ = 0;
  LinearModel scorer_;
  TrainConfig config_;
};

struct DecodeResult {
  std::vector<EntitySpan> entities;
  std::vector<Action> actions;
};

// Greedy decoding: the highest-scoring valid action at each step, ties
// broken by class order. Needs a source of the model's backend; throws
// Error(kConfig) on a mismatch and Error(kAlignment) for missing dense
// inputs.
DecodeResult DecodeActions(const Doc &doc, const NerModel &model,
                           const features::FeatureSource &source);

// Returns `doc` with its entities replaced by the predicted ones and its
// relations cleared.
Doc Decode(const Doc &doc, const NerModel &model,
           const features::FeatureSource &source);

// Decodes docs in parallel over `jobs` threads, preserving order.
std::vector<Doc> DecodeAll(const std::vector<Doc> &docs, const NerModel &model,
                           const features::FeatureSource &source, int jobs = 1);

struct NerTrainResult {
  NerModel model;
  TrainLog log;
};

// Teacher-forced training: states follow the oracle path, each scored by a
// softmax over its valid actions. A step processes batch_size docs (all of
// them when fewer) and descends along the summed per-doc loss averaged over
// the batch's docs. Dev entity F1 is measured every eval_interval steps; the
// best-on-dev weights are returned. With an empty dev set training runs to
// max_steps. Throws Error(kSize) for an empty training set.
NerTrainResult TrainNer(const std::vector<Doc> &train,
                        const std::vector<Doc> &dev, const TrainConfig &config,
                        const features::FeatureSource &source);

}  // namespace trialtab::ner

#endif  // TRIALTAB_NER_H_
