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
#ifndef TRIALTAB_RELEX_H_
#define TRIALTAB_RELEX_H_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "trialtab/doc.h"
#include "trialtab/features.h"
#include "trialtab/linear.h"

namespace trialtab::relex {

inline constexpr int kDefaultMaxPairDistance = 100;
inline constexpr double kDefaultThreshold = 0.5;

inline constexpr int kNumPairExtras = 14;

struct PairInstance {
  int parent = 0;  // span ids
  int child = 0;
  features::TokenVector pooled_parent;
  features::TokenVector pooled_child;
  // Pair context: direction, distance bucket, the words and the number of
  // spans between the two, and a parent x child last-word cross. Entity
  // labels are never read.
  std::vector<std::uint64_t> context_hashes;
  // The same context as one-hot indices below kNumPairExtras.
  std::vector<int> context_extras;
};

// Readable pair-context feature strings.
std::vector<std::string> PairContextNames(const Doc &doc, const EntitySpan &parent,
                                          const EntitySpan &child);

// Ordered candidate pairs (both directions) of distinct spans whose start
// tokens lie at most `max_pair_distance` apart, sorted by parent start then
// child start. Labels are not consulted.
std::vector<std::pair<int, int>> CandidatePairs(
    const Doc &doc, int max_pair_distance = kDefaultMaxPairDistance);

// CandidatePairs with each span's token vectors mean-pooled and the pair
// context attached.
std::vector<PairInstance> GenerateInstances(
    const Doc &doc, const features::FeatureSource &source,
    int max_pair_distance = kDefaultMaxPairDistance);

// Probabilities per ordered pair, indexed by RelationLabel.
struct RelationMatrix {
  std::map<std::pair<int, int>, std::array<double, kNumRelationLabels>> cells;

  bool operator==(const RelationMatrix &) const = default;
};

// Sigmoid over a linear layer applied to (pooled parent ++ pooled child ++
// pair context).
class RelexModel {
 public:
  RelexModel() = default;
  RelexModel(features::Backend backend, int dim);

  features::Backend backend() const { return backend_; }
  int dim() const { return dim_; }
  int max_pair_distance() const { return max_pair_distance_; }
  void set_max_pair_distance(int distance) { max_pair_distance_ = distance; }
  double threshold() const { return threshold_; }
  void set_threshold(double threshold) { threshold_ = threshold; }
  const LinearModel &scorer() const { return scorer_; }
  LinearModel &scorer() { return scorer_; }
  const TrainConfig &config() const { return config_; }
  void set_config(const TrainConfig &config) { config_ = config; }

  FeatureRow PairFeatures(const PairInstance &instance) const;

  void Save(const std::string &path) const;
  static RelexModel Load(const std::string &path);

  bool operator==(const RelexModel &) const = default;

 private:
  features::Backend backend_ = features::Backend::kHashed;
  int dim_ = 0;
  int max_pair_distance_ = kDefaultMaxPairDistance;
  double threshold_ = kDefaultThreshold;
  LinearModel scorer_;
  TrainConfig config_;
};

// Scores every candidate pair of the doc's entities for all labels.
// Throws Error(kConfig) when the source backend differs from the model's
// and Error(kAlignment) for missing dense inputs.
RelationMatrix ScorePairs(const Doc &doc, const RelexModel &model,
                          const features::FeatureSource &source);

// For each pair, the highest-probability label (ties: OC_RES, A1_RES,
// A2_RES) becomes an edge when its probability is strictly above
// `threshold`.
std::vector<RelationEdge> PredictRelations(const RelationMatrix &matrix,
                                           double threshold = kDefaultThreshold);

// Returns `doc` with relations predicted over its current entities.
Doc Annotate(const Doc &doc, const RelexModel &model,
             const features::FeatureSource &source, double threshold);

struct RelexTrainResult {
  RelexModel model;
  TrainLog log;
};

// Squared error between each (pair, label) probability and its 0/1 gold
// value. The logged loss is the mean over cells; a step descends along the
// per-doc summed loss averaged over the batch's docs. Gold edges outside
// the pair window add a log note and no cell. Dev F1 is relation F1 over
// gold entities at threshold 0.5. Throws Error(kSize) for an empty training
// set.
RelexTrainResult TrainRe(const std::vector<Doc> &train,
                         const std::vector<Doc> &dev, const TrainConfig &config,
                         const features::FeatureSource &source,
                         int max_pair_distance = kDefaultMaxPairDistance);

// Line-delimited {"doc_id","parent","child","probs":{label: p}} records.
std::string MatrixDump(const std::string &doc_id, const RelationMatrix &matrix);

}  // namespace trialtab::relex

#endif  // TRIALTAB_RELEX_H_
