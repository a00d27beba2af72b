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
#ifndef TRIALTAB_CORPUS_ANNOTATION_IO_H_
#define TRIALTAB_CORPUS_ANNOTATION_IO_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "trialtab/doc.h"

namespace trialtab::corpus {

// Line-delimited annotation records:
//
//   {"answer":"accept",
//    "meta":{"domain":"glaucoma","id":"123:4","pmid":"123"},
//    "relations":[{"child":5,"head":0,"label":"A1_RES"}],
//    "spans":[{"label":"INTV","token_end":0,"token_start":0}],
//    "text":"...",
//    "tokens":[{"end":11,"id":0,"start":0,"text":"Latanoprost"}]}
//
// Keys are written in sorted order without whitespace, which is the
// canonical form. Relation endpoints are span start tokens.

std::string ToRecordLine(const Doc &doc);

// `line_number` is used in error messages. Throws Error(kParse) for
// malformed JSON and Error(kSchema) for missing keys, wrong types and
// unknown labels.
Doc FromRecordLine(std::string_view line, int line_number = 0);

std::vector<Doc> ParseAnnotations(std::istream &in);
std::vector<Doc> ReadAnnotations(const std::string &path);

void WriteAnnotations(const std::vector<Doc> &docs, std::ostream &out);
void WriteAnnotations(const std::vector<Doc> &docs, const std::string &path);

// Drops docs whose answer is reject.
std::vector<Doc> FilterRejected(std::vector<Doc> docs);

}  // namespace trialtab::corpus

#endif  // TRIALTAB_CORPUS_ANNOTATION_IO_H_
