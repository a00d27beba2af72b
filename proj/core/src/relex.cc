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
#include "trialtab/relex.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trialtab/error.h"
#include "trialtab/evaluate.h"
#include "trialtab/lexicon.h"
#include "trialtab/rng.h"

namespace trialtab::relex {
namespace {

using features::Backend;
using features::DenseVector;
using features::SparseVector;
using features::TokenVector;
using json = nlohmann::json;

constexpr std::uint32_t kParentSlot = 11;
constexpr std::uint32_t kChildSlot = 12;

std::size_t NumFeatures(Backend backend, int dim) {
  if (backend == Backend::kHashed) return std::size_t{1} << dim;
  return 2 * static_cast<std::size_t>(dim) + kNumPairExtras;
}

constexpr std::uint32_t kContextSlot = 13;

int DistanceBucket(int distance) {
  static constexpr int kUpper[] = {1, 2, 3, 4, 7, 12, 20};
  for (int b = 0; b < 7; ++b) {
    if (distance <= kUpper[b]) return b;
  }
  return 7;
}

// Dense one-hot layout: direction [0,2), distance [2,10), spans between
// [10,14).
std::vector<int> ContextExtras(const Doc &doc, const EntitySpan &parent,
                               const EntitySpan &child) {
  const bool forward = parent.token_start < child.token_start;
  const int lo = forward ? parent.token_end : child.token_end;
  const int hi = forward ? child.token_start : parent.token_start;
  int between = 0;
  for (const EntitySpan &span : doc.entities) {
    if (span.token_start > lo && span.token_end < hi) ++between;
  }
  return {forward ? 0 : 1,
          2 + DistanceBucket(std::abs(child.token_start - parent.token_start)),
          10 + std::min(between, 3)};
}

void CheckSource(const RelexModel &model,
                 const features::FeatureSource &source) {
  if (source.backend() != model.backend() || source.dim() != model.dim()) {
    throw Error(ErrorKind::kConfig,
                "relation model expects " +
                    std::string(features::ToString(model.backend())) +
                    " inputs of dim " + std::to_string(model.dim()) +
                    ", feature source provides " +
                    std::string(features::ToString(source.backend())) +
                    " of dim " + std::to_string(source.dim()));
  }
}

double Sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                : std::exp(z) / (1.0 + std::exp(z));
}

TokenVector PoolSpan(const features::DocFeatures &features,
                     const features::FeatureSource &source,
                     const EntitySpan &span) {
  std::vector<TokenVector> vectors;
  for (int t = span.token_start; t <= span.token_end; ++t) {
    vectors.push_back(source.TokenAt(features, t));
  }
  return features::PoolMean(std::span<const TokenVector>(vectors));
}

}  // namespace

std::vector<std::string> PairContextNames(const Doc &doc,
                                          const EntitySpan &parent,
                                          const EntitySpan &child) {
  const bool forward = parent.token_start < child.token_start;
  const std::string dir = forward ? "fwd" : "bwd";
  std::vector<std::string> names = {
      "dir=" + dir,
      "dist=" + std::to_string(DistanceBucket(
                    std::abs(child.token_start - parent.token_start))) +
          "/" + dir,
  };
  const int lo = forward ? parent.token_end : child.token_end;
  const int hi = forward ? child.token_start : parent.token_start;
  for (int t = lo + 1; t < hi; ++t) {
    names.push_back("btw=" + ToLower(doc.tokens[t].text) + "/" + dir);
  }
  int between = 0;
  for (const EntitySpan &span : doc.entities) {
    if (span.token_start > lo && span.token_end < hi) ++between;
  }
  names.push_back("btw_spans=" + std::to_string(std::min(between, 3)) + "/" +
                  dir);
  names.push_back("x=" + ToLower(doc.tokens[parent.token_end].text) + "|" +
                  ToLower(doc.tokens[child.token_end].text) + "|" + dir);
  return names;
}

std::vector<std::pair<int, int>> CandidatePairs(const Doc &doc,
                                                int max_pair_distance) {
  std::vector<int> starts;
  for (const EntitySpan &span : doc.entities) starts.push_back(span.id());
  std::sort(starts.begin(), starts.end());
  std::vector<std::pair<int, int>> pairs;
  for (int parent : starts) {
    for (int child : starts) {
      if (parent == child) continue;
      if (std::abs(child - parent) > max_pair_distance) continue;
      pairs.emplace_back(parent, child);
    }
  }
  return pairs;
}

std::vector<PairInstance> GenerateInstances(
    const Doc &doc, const features::FeatureSource &source,
    int max_pair_distance) {
  std::vector<std::pair<int, int>> pairs =
      CandidatePairs(doc, max_pair_distance);
  std::vector<PairInstance> instances;
  if (pairs.empty()) return instances;
  const features::DocFeatures features = source.Extract(doc);
  std::map<int, TokenVector> pooled;
  for (const EntitySpan &span : doc.entities) {
    pooled[span.id()] = PoolSpan(features, source, span);
  }
  instances.reserve(pairs.size());
  for (const auto &[parent, child] : pairs) {
    const EntitySpan &p = *doc.FindSpan(parent);
    const EntitySpan &c = *doc.FindSpan(child);
    PairInstance instance{parent, child, pooled[parent], pooled[child], {}, {}};
    if (source.backend() == Backend::kHashed) {
      for (const std::string &name : PairContextNames(doc, p, c)) {
        instance.context_hashes.push_back(features::Fnv1a64(name));
      }
    } else {
      instance.context_extras = ContextExtras(doc, p, c);
    }
    instances.push_back(std::move(instance));
  }
  return instances;
}

RelexModel::RelexModel(Backend backend, int dim)
    : backend_(backend),
      dim_(dim),
      scorer_(NumFeatures(backend, dim), kNumRelationLabels) {}

FeatureRow RelexModel::PairFeatures(const PairInstance &instance) const {
  FeatureRow row;
  if (backend_ == Backend::kHashed) {
    const std::uint64_t mask = (std::uint64_t{1} << dim_) - 1;
    auto add = [&](const TokenVector &v, std::uint32_t slot) {
      for (const features::SparseEntry &e : std::get<SparseVector>(v)) {
        row.Add(static_cast<std::uint32_t>(
                    features::MixSlot(e.bucket, slot) & mask),
                e.weight);
      }
    };
    add(instance.pooled_parent, kParentSlot);
    add(instance.pooled_child, kChildSlot);
    for (std::uint64_t hash : instance.context_hashes) {
      row.Add(static_cast<std::uint32_t>(
                  features::MixSlot(hash, kContextSlot) & mask),
              1.0f);
    }
    return row;
  }
  const DenseVector &parent = std::get<DenseVector>(instance.pooled_parent);
  const DenseVector &child = std::get<DenseVector>(instance.pooled_child);
  for (int i = 0; i < dim_; ++i) {
    if (parent[i] != 0.0f) row.Add(static_cast<std::uint32_t>(i), parent[i]);
  }
  for (int i = 0; i < dim_; ++i) {
    if (child[i] != 0.0f) {
      row.Add(static_cast<std::uint32_t>(dim_ + i), child[i]);
    }
  }
  for (int extra : instance.context_extras) {
    row.Add(static_cast<std::uint32_t>(2 * dim_ + extra), 1.0f);
  }
  return row;
}

void RelexModel::Save(const std::string &path) const {
  json labels = json::array();
  for (RelationLabel l : kRelationLabels) labels.push_back(ToString(l));
  json header = {
      {"format_version", 1},
      {"kind", "relex"},
      {"backend", features::ToString(backend_)},
      {"dim", dim_},
      {"labels", labels},
      {"threshold", threshold_},
      {"max_pair_distance", max_pair_distance_},
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

RelexModel RelexModel::Load(const std::string &path) {
  LinearModel scorer;
  try {
    json header = json::parse(ReadModelArchive(path, &scorer));
    if (header.at("kind") != "relex") {
      throw Error(ErrorKind::kFormat, path + ": not a relation model");
    }
    RelexModel model;
    model.backend_ =
        header.at("backend") == "hashed" ? Backend::kHashed : Backend::kDense;
    model.dim_ = header.at("dim").get<int>();
    model.threshold_ = header.at("threshold").get<double>();
    model.max_pair_distance_ = header.at("max_pair_distance").get<int>();
    const json &c = header.at("config");
    model.config_.batch_size = c.at("batch_size").get<int>();
    model.config_.dropout = c.at("dropout").get<double>();
    model.config_.learning_rate = c.at("learning_rate").get<double>();
    model.config_.patience_steps = c.at("patience_steps").get<int>();
    model.config_.max_steps = c.at("max_steps").get<int>();
    model.config_.eval_interval = c.at("eval_interval").get<int>();
    model.config_.seed = c.at("seed").get<std::uint64_t>();
    if (scorer.num_classes() != kNumRelationLabels ||
        scorer.num_features() != NumFeatures(model.backend_, model.dim_)) {
      throw Error(ErrorKind::kFormat, path + ": weight table shape mismatch");
    }
    model.scorer_ = std::move(scorer);
    return model;
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kFormat, path + ": bad header: " + e.what());
  }
}

RelationMatrix ScorePairs(const Doc &doc, const RelexModel &model,
                          const features::FeatureSource &source) {
  CheckSource(model, source);
  RelationMatrix matrix;
  std::array<double, kNumRelationLabels> scores{};
  for (const PairInstance &instance :
       GenerateInstances(doc, source, model.max_pair_distance())) {
    model.scorer().Score(model.PairFeatures(instance), scores);
    std::array<double, kNumRelationLabels> probs{};
    for (int k = 0; k < kNumRelationLabels; ++k) probs[k] = Sigmoid(scores[k]);
    matrix.cells[{instance.parent, instance.child}] = probs;
  }
  return matrix;
}

std::vector<RelationEdge> PredictRelations(const RelationMatrix &matrix,
                                           double threshold) {
  std::vector<RelationEdge> edges;
  for (const auto &[pair, probs] : matrix.cells) {
    int best = 0;
    for (int k = 1; k < kNumRelationLabels; ++k) {
      if (probs[k] > probs[best]) best = k;
    }
    if (probs[best] > threshold) {
      edges.push_back({kRelationLabels[best], pair.first, pair.second});
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

Doc Annotate(const Doc &doc, const RelexModel &model,
             const features::FeatureSource &source, double threshold) {
  Doc out = doc;
  out.relations = PredictRelations(ScorePairs(doc, model, source), threshold);
  return out;
}

namespace {

struct TrainingCell {
  FeatureRow row;
  std::array<double, kNumRelationLabels> target{};
};

double DevF1(const std::vector<Doc> &dev, const RelexModel &model,
             const features::FeatureSource &source) {
  std::vector<Doc> predicted;
  predicted.reserve(dev.size());
  for (const Doc &doc : dev) {
    predicted.push_back(Annotate(doc, model, source, kDefaultThreshold));
  }
  return eval::EvalReGold(predicted, dev).scores.f1;
}

}  // namespace

RelexTrainResult TrainRe(const std::vector<Doc> &train,
                         const std::vector<Doc> &dev, const TrainConfig &config,
                         const features::FeatureSource &source,
                         int max_pair_distance) {
  config.Validate();
  if (train.empty()) {
    throw Error(ErrorKind::kSize,
                "cannot train relations on an empty training set");
  }
  RelexTrainResult result;
  RelexModel model(source.backend(), source.dim());
  TrainConfig resolved = config;
  resolved.learning_rate = config.EffectiveLearningRate(source.backend());
  model.set_config(resolved);
  model.set_max_pair_distance(max_pair_distance);

  std::vector<std::vector<TrainingCell>> doc_cells;
  doc_cells.reserve(train.size());
  for (const Doc &doc : train) {
    std::vector<TrainingCell> cells;
    std::vector<PairInstance> instances =
        GenerateInstances(doc, source, max_pair_distance);
    std::map<std::pair<int, int>, std::size_t> index;
    for (const PairInstance &instance : instances) {
      index[{instance.parent, instance.child}] = cells.size();
      cells.push_back({model.PairFeatures(instance), {}});
    }
    for (const RelationEdge &edge : doc.relations) {
      auto it = index.find({edge.parent, edge.child});
      if (it == index.end()) {
        result.log.notes.push_back(
            "out-of-window gold edge in " + doc.id + ": " +
            std::string(ToString(edge.label)) + " " +
            std::to_string(edge.parent) + "->" + std::to_string(edge.child));
        continue;
      }
      cells[it->second].target[static_cast<int>(edge.label)] = 1.0;
    }
    doc_cells.push_back(std::move(cells));
  }

  Rng rng(config.seed);
  Optimizer optimizer(source.backend(),
                      config.EffectiveLearningRate(source.backend()),
                      model.scorer());
  GradientAccumulator grad(kNumRelationLabels);
  EarlyStopping stopping(config.patience_steps);
  RelexModel best = model;
  const bool use_dev = !dev.empty();
  const std::size_t batch =
      std::min<std::size_t>(config.batch_size, train.size());
  const float keep = static_cast<float>(1.0 - config.dropout);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  std::size_t cursor = 0;
  double loss_sum = 0.0;
  long loss_cells = 0;
  std::array<double, kNumRelationLabels> scores{};
  std::array<double, kNumRelationLabels> label_grad{};

  result.log.stop_reason = "max_steps";
  int step = 0;
  for (step = 1; step <= config.max_steps; ++step) {
    grad.Clear();
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        rng.Shuffle(order);
        cursor = 0;
      }
      for (const TrainingCell &cell : doc_cells[order[cursor++]]) {
        FeatureRow dropped = cell.row;
        if (config.dropout > 0.0) {
          for (float &v : dropped.value) {
            v = rng.Uniform() < config.dropout ? 0.0f : v / keep;
          }
        }
        model.scorer().Score(dropped, scores);
        for (int k = 0; k < kNumRelationLabels; ++k) {
          const double p = Sigmoid(scores[k]);
          const double diff = p - cell.target[k];
          loss_sum += diff * diff;
          label_grad[k] = 2.0 * diff * p * (1.0 - p);
        }
        loss_cells += kNumRelationLabels;
        grad.Add(dropped, label_grad);
      }
    }
    optimizer.Apply(grad, 1.0 / static_cast<double>(batch), model.scorer());

    if (step % config.eval_interval == 0 || step == config.max_steps) {
      TrainLogEntry entry;
      entry.step = step;
      entry.loss = loss_cells > 0 ? loss_sum / loss_cells : 0.0;
      loss_sum = 0.0;
      loss_cells = 0;
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

std::string MatrixDump(const std::string &doc_id,
                       const RelationMatrix &matrix) {
  std::ostringstream out;
  for (const auto &[pair, probs] : matrix.cells) {
    json p = json::object();
    for (int k = 0; k < kNumRelationLabels; ++k) {
      p[std::string(ToString(kRelationLabels[k]))] = probs[k];
    }
    json record = {{"doc_id", doc_id},
                   {"parent", pair.first},
                   {"child", pair.second},
                   {"probs", p}};
    out << record.dump() << '\n';
  }
  return out.str();
}

}  // namespace trialtab::relex
