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
#include "trialtab/evaluate.h"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "trialtab/error.h"

namespace trialtab::eval {
namespace {

using json = nlohmann::json;
using tabulate::EvidenceTable;
using tabulate::EvidenceTuple;

constexpr char kNone[] = "NONE";

// (start, end) token range.
using Range = std::pair<int, int>;
// (parent range, child range, label)
using RangeEdge = std::tuple<Range, Range, RelationLabel>;

template <typename T>
std::map<std::string, std::pair<const T *, const T *>> PairById(
    const std::vector<T> &pred, const std::vector<T> &gold,
    const std::function<std::string(const T &)> &id_of) {
  std::map<std::string, std::pair<const T *, const T *>> paired;
  for (const T &p : pred) {
    auto [it, inserted] = paired.try_emplace(id_of(p), &p, nullptr);
    if (!inserted) {
      throw Error(ErrorKind::kPairing,
                  "duplicate predicted id \"" + id_of(p) + "\"");
    }
  }
  std::vector<std::string> unpaired;
  for (const T &g : gold) {
    auto it = paired.find(id_of(g));
    if (it == paired.end()) {
      unpaired.push_back("gold only: " + id_of(g));
      continue;
    }
    if (it->second.second != nullptr) {
      throw Error(ErrorKind::kPairing,
                  "duplicate gold id \"" + id_of(g) + "\"");
    }
    it->second.second = &g;
  }
  for (const auto &[id, sides] : paired) {
    if (sides.second == nullptr) unpaired.push_back("predicted only: " + id);
  }
  if (!unpaired.empty()) {
    throw Error(ErrorKind::kPairing,
                std::to_string(unpaired.size()) + " unpaired id(s)", unpaired);
  }
  return paired;
}

std::map<std::string, std::pair<const Doc *, const Doc *>> PairDocs(
    const std::vector<Doc> &pred, const std::vector<Doc> &gold) {
  return PairById<Doc>(pred, gold, [](const Doc &d) { return d.id; });
}

// Adds set-difference counts for labelled items to the report.
template <typename T, typename LabelFn>
void CountSets(const std::set<T> &pred, const std::set<T> &gold,
               LabelFn label_of, MetricsReport *report) {
  for (const T &p : pred) {
    MetricCounts c;
    (gold.count(p) ? c.tp : c.fp) = 1;
    report->Add(label_of(p), c);
  }
  for (const T &g : gold) {
    if (pred.count(g)) continue;
    MetricCounts c;
    c.fn = 1;
    report->Add(label_of(g), c);
  }
}

std::set<EntitySpan> SpanSet(const Doc &doc) {
  return {doc.entities.begin(), doc.entities.end()};
}

Range RangeOf(const Doc &doc, int id) {
  const EntitySpan *span = doc.FindSpan(id);
  if (span == nullptr) {
    throw Error(ErrorKind::kIntegrity,
                doc.id + ": edge endpoint " + std::to_string(id) +
                    " is not a span start");
  }
  return {span->token_start, span->token_end};
}

std::set<RangeEdge> RangeEdges(const Doc &doc) {
  std::set<RangeEdge> edges;
  for (const RelationEdge &e : doc.relations) {
    edges.emplace(RangeOf(doc, e.parent), RangeOf(doc, e.child), e.label);
  }
  return edges;
}

void InitLabels(MetricsReport *report, bool entities, bool relations) {
  if (entities) {
    for (EntityLabel l : kEntityLabels) report->per_label[std::string(ToString(l))];
  }
  if (relations) {
    for (RelationLabel l : kRelationLabels) {
      report->per_label[std::string(ToString(l))];
    }
  }
}

std::string EntityName(const EntitySpan &s) {
  return std::string(ToString(s.label));
}

std::string EdgeName(const RangeEdge &e) {
  return std::string(ToString(std::get<2>(e)));
}

std::vector<std::string> WhitespaceTokens(const std::string &text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    std::transform(token.begin(), token.end(), token.begin(), [](char c) {
      return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    });
    tokens.push_back(token);
  }
  return tokens;
}

// Kuhn's augmenting-path maximum bipartite matching; returns the size.
int MaximumMatching(const std::vector<std::vector<int>> &adjacency,
                    int num_right) {
  std::vector<int> owner(num_right, -1);
  int matched = 0;
  for (int left = 0; left < static_cast<int>(adjacency.size()); ++left) {
    std::vector<bool> seen(num_right, false);
    std::function<bool(int)> augment = [&](int u) {
      for (int v : adjacency[u]) {
        if (seen[v]) continue;
        seen[v] = true;
        if (owner[v] < 0 || augment(owner[v])) {
          owner[v] = u;
          return true;
        }
      }
      return false;
    };
    if (augment(left)) ++matched;
  }
  return matched;
}

using TupleMatcher = bool (*)(const EvidenceTuple &, const EvidenceTuple &);

MetricsReport EvalTables(const std::string &task, const TableSet &pred,
                         const TableSet &gold, bool maximum,
                         TupleMatcher match) {
  std::vector<std::string> unpaired;
  for (const auto &[id, table] : pred) {
    if (!gold.count(id)) unpaired.push_back("predicted only: " + id);
  }
  for (const auto &[id, table] : gold) {
    if (!pred.count(id)) unpaired.push_back("gold only: " + id);
  }
  if (!unpaired.empty()) {
    throw Error(ErrorKind::kPairing,
                std::to_string(unpaired.size()) + " unpaired table(s)",
                unpaired);
  }
  MetricsReport report;
  report.task = task;
  report.config["matching"] = maximum ? "relaxed" : "strict";
  report.per_label["tuple"];
  MetricCounts tables;
  for (const auto &[id, gold_table] : gold) {
    const std::vector<EvidenceTuple> &p = pred.at(id).rows;
    const std::vector<EvidenceTuple> &g = gold_table.rows;
    int matched = 0;
    if (maximum) {
      std::vector<std::vector<int>> adjacency(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < g.size(); ++j) {
          if (match(p[i], g[j])) adjacency[i].push_back(static_cast<int>(j));
        }
      }
      matched = MaximumMatching(adjacency, static_cast<int>(g.size()));
    } else {
      std::vector<bool> used(g.size(), false);
      for (const EvidenceTuple &row : p) {
        for (std::size_t j = 0; j < g.size(); ++j) {
          if (!used[j] && match(row, g[j])) {
            used[j] = true;
            ++matched;
            break;
          }
        }
      }
    }
    MetricCounts c;
    c.tp = matched;
    c.fp = static_cast<long>(p.size()) - matched;
    c.fn = static_cast<long>(g.size()) - matched;
    report.Add("tuple", c);
    if (p.empty()) {
      if (!g.empty()) ++tables.fn;
    } else if (c.fp == 0 && c.fn == 0) {
      ++tables.tp;
    } else {
      ++tables.fp;
    }
  }
  report.table_level = tables;
  report.Finish();
  return report;
}

json CountsJson(const MetricCounts &c) {
  const Prf s = ComputePrf(c);
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn},
          {"p", s.precision}, {"r", s.recall}, {"f1", s.f1}};
}

std::string Fixed(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

}  // namespace

Prf ComputePrf(const MetricCounts &counts) {
  Prf prf;
  const double tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) prf.precision = tp / (counts.tp + counts.fp);
  if (counts.tp + counts.fn > 0) prf.recall = tp / (counts.tp + counts.fn);
  const double f1_denominator = tp + 0.5 * (counts.fp + counts.fn);
  if (f1_denominator > 0) prf.f1 = tp / f1_denominator;
  return prf;
}

void MetricsReport::Add(const std::string &label,
                        const MetricCounts &counts) {
  per_label[label] += counts;
  overall += counts;
}

void MetricsReport::Finish() { scores = ComputePrf(overall); }

std::string MetricsReport::ToJson() const {
  json per = json::object();
  for (const auto &[label, counts] : per_label) {
    per[label] = CountsJson(counts);
  }
  json cfg = json::object();
  for (const auto &[key, value] : config) cfg[key] = value;
  cfg["zero_denominator"] = kZeroDenominatorConvention;
  json record = {{"task", task},
                 {"overall", CountsJson(overall)},
                 {"per_label", per},
                 {"config", cfg}};
  if (table_level) record["table_level"] = CountsJson(*table_level);
  return record.dump();
}

std::string MetricsReport::FormatTable() const {
  std::ostringstream out;
  char line[160];
  out << "task: " << task << '\n';
  std::snprintf(line, sizeof(line), "%-10s %6s %6s %6s %9s %9s %9s\n",
                "label", "tp", "fp", "fn", "precision", "recall", "f1");
  out << line;
  auto row = [&](const std::string &label, const MetricCounts &c) {
    const Prf s = ComputePrf(c);
    std::snprintf(line, sizeof(line), "%-10s %6ld %6ld %6ld %9s %9s %9s\n",
                  label.c_str(), c.tp, c.fp, c.fn, Fixed(s.precision).c_str(),
                  Fixed(s.recall).c_str(), Fixed(s.f1).c_str());
    out << line;
  };
  for (const auto &[label, counts] : per_label) row(label, counts);
  row("micro", overall);
  if (table_level) row("tables", *table_level);
  for (const auto &[key, value] : config) out << key << '=' << value << '\n';
  out << "note: " << kZeroDenominatorConvention << '\n';
  return out.str();
}

MetricsReport EvalNer(const std::vector<Doc> &pred,
                      const std::vector<Doc> &gold) {
  MetricsReport report;
  report.task = "ner";
  report.config["matching"] = "exact";
  InitLabels(&report, true, false);
  for (const auto &[id, docs] : PairDocs(pred, gold)) {
    CountSets(SpanSet(*docs.first), SpanSet(*docs.second), EntityName,
              &report);
  }
  report.Finish();
  return report;
}

MetricsReport EvalReGold(const std::vector<Doc> &pred,
                         const std::vector<Doc> &gold) {
  MetricsReport report;
  report.task = "re-gold";
  report.config["matching"] = "directed";
  InitLabels(&report, false, true);
  for (const auto &[id, docs] : PairDocs(pred, gold)) {
    const Doc &g = *docs.second;
    // Resolve predicted endpoints against the gold spans.
    Doc resolved = g;
    resolved.relations = docs.first->relations;
    CountSets(RangeEdges(resolved), RangeEdges(g), EdgeName, &report);
  }
  report.Finish();
  return report;
}

MetricsReport EvalJoint(const std::vector<Doc> &pred,
                        const std::vector<Doc> &gold) {
  MetricsReport report;
  report.task = "joint";
  report.config["matching"] = "exact";
  InitLabels(&report, true, true);
  for (const auto &[id, docs] : PairDocs(pred, gold)) {
    const Doc &p = *docs.first;
    const Doc &g = *docs.second;
    const std::set<RangeEdge> pred_edges = RangeEdges(p);
    const std::set<RangeEdge> gold_edges = RangeEdges(g);
    CountSets(pred_edges, gold_edges, EdgeName, &report);

    auto endpoints = [](const std::set<RangeEdge> &edges) {
      std::set<Range> ranges;
      for (const auto &[parent, child, label] : edges) {
        ranges.insert(parent);
        ranges.insert(child);
      }
      return ranges;
    };
    const std::set<Range> pred_ends = endpoints(pred_edges);
    const std::set<Range> gold_ends = endpoints(gold_edges);
    auto remaining = [&](const Doc &doc, const std::set<Range> &own,
                         const std::set<Range> &other) {
      std::set<EntitySpan> spans;
      for (const EntitySpan &s : doc.entities) {
        const Range r{s.token_start, s.token_end};
        if (!own.count(r) && !other.count(r)) spans.insert(s);
      }
      return spans;
    };
    CountSets(remaining(p, pred_ends, gold_ends),
              remaining(g, gold_ends, pred_ends), EntityName, &report);
  }
  report.Finish();
  return report;
}

bool StrictTupleMatch(const EvidenceTuple &pred, const EvidenceTuple &gold) {
  return pred == gold;
}

bool RelaxedTupleMatch(const EvidenceTuple &pred, const EvidenceTuple &gold) {
  for (int k = 0; k < 3; ++k) {
    const std::vector<std::string> gold_tokens = WhitespaceTokens(gold.cell(k));
    if (gold_tokens.empty()) continue;
    const std::vector<std::string> pred_tokens = WhitespaceTokens(pred.cell(k));
    bool shared = false;
    for (const std::string &t : gold_tokens) {
      if (std::find(pred_tokens.begin(), pred_tokens.end(), t) !=
          pred_tokens.end()) {
        shared = true;
        break;
      }
    }
    if (!shared) return false;
  }
  return true;
}

MetricsReport EvalTabStrict(const TableSet &pred, const TableSet &gold) {
  return EvalTables("tab-strict", pred, gold, false, StrictTupleMatch);
}

MetricsReport EvalTabRelaxed(const TableSet &pred, const TableSet &gold) {
  return EvalTables("tab-relaxed", pred, gold, true, RelaxedTupleMatch);
}

double ConfusionMatrix::at(const std::string &gold,
                           const std::string &pred) const {
  auto index = [this](const std::string &label) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      throw Error(ErrorKind::kLookup, "unknown confusion label " + label);
    }
    return static_cast<std::size_t>(it - labels.begin());
  };
  return counts[index(gold)][index(pred)];
}

ConfusionMatrix ConfusionMatrix::Normalized() const {
  ConfusionMatrix out = *this;
  out.normalized = true;
  for (std::vector<double> &row : out.counts) {
    double total = 0.0;
    for (double v : row) total += v;
    if (total <= 0.0) continue;
    for (double &v : row) v /= total;
  }
  return out;
}

std::string ConfusionMatrix::ToCsv() const {
  std::ostringstream out;
  out << "gold\\pred";
  for (const std::string &label : labels) out << ',' << label;
  out << '\n';
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out << labels[r];
    for (double v : counts[r]) {
      if (normalized) {
        out << ',' << Fixed(v);
      } else {
        out << ',' << static_cast<long>(v);
      }
    }
    out << '\n';
  }
  return out.str();
}

ConfusionMatrix ConfusionNer(const std::vector<Doc> &pred,
                             const std::vector<Doc> &gold) {
  ConfusionMatrix matrix;
  for (EntityLabel l : kEntityLabels) matrix.labels.emplace_back(ToString(l));
  matrix.labels.emplace_back(kNone);
  const std::size_t none = kNumEntityLabels;
  matrix.counts.assign(matrix.labels.size(),
                       std::vector<double>(matrix.labels.size(), 0.0));
  auto classes = [none](const Doc &doc) {
    std::vector<std::size_t> out(doc.tokens.size(), none);
    for (const EntitySpan &s : doc.entities) {
      for (int t = s.token_start; t <= s.token_end; ++t) {
        if (t >= 0 && t < static_cast<int>(out.size())) {
          out[t] = static_cast<std::size_t>(s.label);
        }
      }
    }
    return out;
  };
  for (const auto &[id, docs] : PairDocs(pred, gold)) {
    if (docs.first->tokens.size() != docs.second->tokens.size()) {
      throw Error(ErrorKind::kAlignment,
                  id + ": predicted and gold token counts differ");
    }
    const std::vector<std::size_t> p = classes(*docs.first);
    const std::vector<std::size_t> g = classes(*docs.second);
    for (std::size_t t = 0; t < g.size(); ++t) matrix.counts[g[t]][p[t]] += 1;
  }
  return matrix;
}

ConfusionMatrix ConfusionRe(const std::vector<Doc> &pred,
                            const std::vector<Doc> &gold) {
  ConfusionMatrix matrix;
  for (RelationLabel l : kRelationLabels) {
    matrix.labels.emplace_back(ToString(l));
  }
  matrix.labels.emplace_back(kNone);
  const std::size_t none = kNumRelationLabels;
  matrix.counts.assign(matrix.labels.size(),
                       std::vector<double>(matrix.labels.size(), 0.0));
  for (const auto &[id, docs] : PairDocs(pred, gold)) {
    std::map<std::pair<Range, Range>, std::pair<std::size_t, std::size_t>>
        pairs;
    for (const auto &[parent, child, label] : RangeEdges(*docs.second)) {
      pairs[{parent, child}] = {static_cast<std::size_t>(label), none};
    }
    for (const auto &[parent, child, label] : RangeEdges(*docs.first)) {
      auto [it, inserted] = pairs.try_emplace({parent, child}, none, none);
      it->second.second = static_cast<std::size_t>(label);
    }
    for (const auto &[pair, cell] : pairs) {
      matrix.counts[cell.first][cell.second] += 1;
    }
  }
  return matrix;
}

}  // namespace trialtab::eval
