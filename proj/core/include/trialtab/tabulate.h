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
#ifndef TRIALTAB_TABULATE_H_
#define TRIALTAB_TABULATE_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "trialtab/doc.h"

namespace trialtab::tabulate {

// (outcome, arm 1, arm 2); empty strings mark missing cells.
struct EvidenceTuple {
  std::string outcome;
  std::string arm1;
  std::string arm2;

  const std::string &cell(int k) const {
    return k == 0 ? outcome : k == 1 ? arm1 : arm2;
  }
  bool operator==(const EvidenceTuple &) const = default;
};

inline constexpr char kOutcomeHeader[] = "outcome";

struct EvidenceTable {
  std::string doc_id;
  // "outcome", then the arm-1 and arm-2 intervention texts.
  std::array<std::string, 3> header = {kOutcomeHeader, "", ""};
  std::vector<EvidenceTuple> rows;
  // Anomalies met while assembling (never part of the CSV).
  std::vector<std::string> diagnostics;

  bool operator==(const EvidenceTable &other) const {
    return doc_id == other.doc_id && header == other.header &&
           rows == other.rows;
  }
};

// Builds the table from a doc's entities and edges.
//  * Each OC span taking part in at least one edge owns a row, ordered by
//    span start; rows without placeable measures have empty arm cells.
//  * A MEAS goes to the row of its OC_RES parent and the column of its
//    A1_RES or A2_RES edge; several measures in one cell are joined with
//    "; " in token order.
//  * Measures with an arm edge but no outcome edge share one trailing row
//    with an empty outcome.
//  * Arm header k is the INTV parent of most arm-k measures (earliest span
//    on ties).
// Measures with no arm edge, surplus parents and edges whose endpoints
// have unexpected labels are reported in `diagnostics`.
EvidenceTable AssembleTable(const Doc &doc);

// RFC 4180 style: header line, one line per row, fields with commas,
// quotes or newlines quoted (quotes doubled), "\n" line ends.
std::string EmitCsv(const EvidenceTable &table);

// Inverse of EmitCsv. Throws Error(kFormat) for rows that do not have
// three fields or unterminated quotes.
EvidenceTable ParseCsv(std::string_view csv, std::string doc_id = "");

}  // namespace trialtab::tabulate

#endif  // TRIALTAB_TABULATE_H_
