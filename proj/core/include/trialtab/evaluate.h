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
#ifndef TRIALTAB_EVALUATE_H_
#define TRIALTAB_EVALUATE_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trialtab/doc.h"
#include "trialtab/tabulate.h"

namespace trialtab::eval {

struct MetricCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  MetricCounts &operator+=(const MetricCounts &other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    return *this;
  }
  bool operator==(const MetricCounts &) const = default;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// P = tp/(tp+fp), R = tp/(tp+fn), F1 = tp/(tp + (fp+fn)/2). A zero
// denominator yields 0 for that score.
Prf ComputePrf(const MetricCounts &counts);

inline constexpr char kZeroDenominatorConvention[] =
    "score=0 when its denominator is 0";

struct MetricsReport {
  std::string task;
  MetricCounts overall;  // sum of per_label counts
  Prf scores;            // from the summed counts (micro-average)
  std::map<std::string, MetricCounts> per_label;
  std::map<std::string, std::string> config;
  // Tabulation only: whole-table accounting (a table is tp when every tuple
  // matches, fp when a non-empty prediction differs, fn when the prediction
  // is empty but gold is not).
  std::optional<MetricCounts> table_level;

  // Adds `counts` under `label` and to the overall totals.
  void Add(const std::string &label, const MetricCounts &counts);
  void Finish();  // recomputes scores from overall

  std::string ToJson() const;
  std::string FormatTable() const;
};

// Entity-level exact matching on (token_start, token_end, label). Pairs docs
// by id; throws Error(kPairing) for ids present on one side only.
MetricsReport EvalNer(const std::vector<Doc> &pred,
                      const std::vector<Doc> &gold);

// Relation extraction over gold entities: an edge is tp when (parent,
// child, label) matches a gold edge. `pred` docs carry the predicted edges
// (already thresholded). Throws Error(kIntegrity) for an edge endpoint that
// is not a gold span start.
MetricsReport EvalReGold(const std::vector<Doc> &pred,
                         const std::vector<Doc> &gold);

// Joint entities + relations. Pair identity is the exact token range of
// both endpoints.
//  * Ordered pairs that carry a gold edge are scored by the relation rule
//    (a missing predicted pair is fn).
//  * Predicted edges on pairs without a gold edge are fp.
//  * Remaining entities (predicted entities without a predicted edge that
//    are not endpoints of a gold edge, and gold entities without a gold edge
//    that are not endpoints of a predicted edge) are scored by the entity
//    rule.
MetricsReport EvalJoint(const std::vector<Doc> &pred,
                        const std::vector<Doc> &gold);

using TableSet = std::map<std::string, tabulate::EvidenceTable>;

// Tuple matching per doc id. Strict: equal cells in order, each gold tuple
// matched at most once. Throws Error(kPairing) for unpaired ids.
MetricsReport EvalTabStrict(const TableSet &pred, const TableSet &gold);

// Relaxed: every gold cell with at least one whitespace token shares a
// token (case-insensitively) with the predicted cell in the same position.
// Uses a maximum matching, so it never scores below the strict match.
MetricsReport EvalTabRelaxed(const TableSet &pred, const TableSet &gold);

bool StrictTupleMatch(const tabulate::EvidenceTuple &pred,
                      const tabulate::EvidenceTuple &gold);
bool RelaxedTupleMatch(const tabulate::EvidenceTuple &pred,
                       const tabulate::EvidenceTuple &gold);

struct ConfusionMatrix {
  std::vector<std::string> labels;  // rows: gold, columns: predicted
  std::vector<std::vector<double>> counts;
  bool normalized = false;

  double at(const std::string &gold, const std::string &pred) const;
  // Divides each row by its total (rows with zero total stay zero).
  ConfusionMatrix Normalized() const;
  std::string ToCsv() const;
};

// Token-level: each token's gold class (its span label or NONE) against its
// predicted class. Returns raw counts.
ConfusionMatrix ConfusionNer(const std::vector<Doc> &pred,
                             const std::vector<Doc> &gold);

// Entity-pair level over the union of gold and predicted ordered pairs
// (matched by exact endpoint ranges).
ConfusionMatrix ConfusionRe(const std::vector<Doc> &pred,
                            const std::vector<Doc> &gold);

}  // namespace trialtab::eval

#endif  // TRIALTAB_EVALUATE_H_
