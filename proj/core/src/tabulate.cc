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
#include "trialtab/tabulate.h"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "trialtab/error.h"

namespace trialtab::tabulate {
namespace {

struct MeasurePlacement {
  std::vector<int> outcomes;            // OC parents
  std::vector<int> arm_parents[2];      // INTV parents per arm
};

std::string Describe(const RelationEdge &edge) {
  return std::string(ToString(edge.label)) + " " +
         std::to_string(edge.parent) + "->" + std::to_string(edge.child);
}

std::string JoinCell(const Doc &doc, const std::vector<int> &measures) {
  std::string cell;
  for (int id : measures) {
    if (!cell.empty()) cell += "; ";
    cell += doc.SpanText(*doc.FindSpan(id));
  }
  return cell;
}

bool NeedsQuotes(const std::string &field) {
  return field.find_first_of(",\"\r\n") != std::string::npos;
}

void AppendField(const std::string &field, std::string *out) {
  if (!NeedsQuotes(field)) {
    *out += field;
    return;
  }
  *out += '"';
  for (char c : field) {
    if (c == '"') *out += '"';
    *out += c;
  }
  *out += '"';
}

}  // namespace

EvidenceTable AssembleTable(const Doc &doc) {
  EvidenceTable table;
  table.doc_id = doc.id;

  std::map<int, MeasurePlacement> measures;
  for (const RelationEdge &edge : doc.relations) {
    const EntitySpan *parent = doc.FindSpan(edge.parent);
    const EntitySpan *child = doc.FindSpan(edge.child);
    if (parent == nullptr || child == nullptr) {
      table.diagnostics.push_back("unresolved edge " + Describe(edge));
      continue;
    }
    const EntityLabel want = edge.label == RelationLabel::kOcRes
                                 ? EntityLabel::kOc
                                 : EntityLabel::kIntv;
    if (parent->label != want || child->label != EntityLabel::kMeas) {
      table.diagnostics.push_back("edge with unexpected endpoint labels " +
                                  Describe(edge));
      continue;
    }
    MeasurePlacement &placement = measures[edge.child];
    if (edge.label == RelationLabel::kOcRes) {
      placement.outcomes.push_back(edge.parent);
    } else {
      const int arm = edge.label == RelationLabel::kA1Res ? 0 : 1;
      placement.arm_parents[arm].push_back(edge.parent);
    }
  }

  // Row per OC with an edge; the orphan row (key -1) sorts last.
  std::map<int, std::array<std::vector<int>, 2>> rows;
  std::optional<std::array<std::vector<int>, 2>> orphans;
  std::map<int, int> votes[2];
  for (auto &[measure, placement] : measures) {
    for (auto &parents : placement.arm_parents) {
      std::sort(parents.begin(), parents.end());
    }
    std::sort(placement.outcomes.begin(), placement.outcomes.end());
    for (int oc : placement.outcomes) rows.try_emplace(oc);
    if (placement.outcomes.size() > 1) {
      table.diagnostics.push_back(
          "measure " + std::to_string(measure) +
          " has several outcome parents; using the earliest");
    }
    int arm = -1;
    if (!placement.arm_parents[0].empty()) {
      arm = 0;
      if (!placement.arm_parents[1].empty()) {
        table.diagnostics.push_back("measure " + std::to_string(measure) +
                                    " has edges to both arms; using arm 1");
      }
    } else if (!placement.arm_parents[1].empty()) {
      arm = 1;
    }
    if (arm < 0) {
      table.diagnostics.push_back("measure " + std::to_string(measure) +
                                  " has no arm edge");
      continue;
    }
    if (placement.arm_parents[arm].size() > 1) {
      table.diagnostics.push_back(
          "measure " + std::to_string(measure) +
          " has several intervention parents for one arm");
    }
    for (int intv : placement.arm_parents[arm]) ++votes[arm][intv];
    if (placement.outcomes.empty()) {
      if (!orphans) orphans.emplace();
      (*orphans)[arm].push_back(measure);
    } else {
      rows[placement.outcomes.front()][arm].push_back(measure);
    }
  }

  for (int arm = 0; arm < 2; ++arm) {
    int best = -1;
    int best_votes = 0;
    for (const auto &[intv, count] : votes[arm]) {
      if (count > best_votes) {  // map order gives the earliest on ties
        best = intv;
        best_votes = count;
      }
    }
    if (best >= 0) table.header[arm + 1] = doc.SpanText(*doc.FindSpan(best));
  }

  for (const auto &[oc, cells] : rows) {
    table.rows.push_back({doc.SpanText(*doc.FindSpan(oc)),
                          JoinCell(doc, cells[0]), JoinCell(doc, cells[1])});
  }
  if (orphans) {
    table.rows.push_back(
        {"", JoinCell(doc, (*orphans)[0]), JoinCell(doc, (*orphans)[1])});
  }
  return table;
}

std::string EmitCsv(const EvidenceTable &table) {
  std::string out;
  auto line = [&out](const std::string &a, const std::string &b,
                     const std::string &c) {
    AppendField(a, &out);
    out += ',';
    AppendField(b, &out);
    out += ',';
    AppendField(c, &out);
    out += '\n';
  };
  line(table.header[0], table.header[1], table.header[2]);
  for (const EvidenceTuple &row : table.rows) {
    line(row.outcome, row.arm1, row.arm2);
  }
  return out;
}

EvidenceTable ParseCsv(std::string_view csv, std::string doc_id) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool at_field_start = true;
  int line = 1;
  auto end_record = [&] {
    fields.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(fields));
    fields.clear();
    at_field_start = true;
  };
  for (std::size_t i = 0; i < csv.size(); ++i) {
    const char c = csv[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < csv.size() && csv[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && at_field_start) {
      quoted = true;
      at_field_start = false;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      at_field_start = true;
    } else if (c == '\n') {
      end_record();
      ++line;
    } else if (c == '\r' && i + 1 < csv.size() && csv[i + 1] == '\n') {
      continue;
    } else {
      field += c;
      at_field_start = false;
    }
  }
  if (quoted) {
    throw Error(ErrorKind::kFormat,
                "unterminated quoted field at line " + std::to_string(line));
  }
  if (!field.empty() || !fields.empty()) end_record();

  EvidenceTable table;
  table.doc_id = std::move(doc_id);
  if (records.empty()) {
    throw Error(ErrorKind::kFormat, "missing header line");
  }
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() != 3) {
      throw Error(ErrorKind::kFormat,
                  "line " + std::to_string(r + 1) + ": expected 3 fields, got " +
                      std::to_string(records[r].size()));
    }
    if (r == 0) {
      std::copy(records[r].begin(), records[r].end(), table.header.begin());
    } else {
      table.rows.push_back({records[r][0], records[r][1], records[r][2]});
    }
  }
  return table;
}

}  // namespace trialtab::tabulate
