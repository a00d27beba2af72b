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
#ifndef TRIALTAB_CORPUS_SELECT_H_
#define TRIALTAB_CORPUS_SELECT_H_

#include <string>
#include <string_view>
#include <vector>

#include "trialtab/doc.h"
#include "trialtab/tokenizer.h"

namespace trialtab::corpus {

struct AbstractSection {
  std::string label;  // e.g. "RESULTS"; empty for unlabelled text
  std::string text;
};

struct AbstractRecord {
  std::string pmid;
  std::string domain;
  std::vector<AbstractSection> sections;
};

// Splits text carrying inline headers ("METHODS: ... RESULTS: ...") into
// sections. Text without headers yields a single unlabelled section.
std::vector<AbstractSection> SplitSections(std::string_view text);

// Result sentences of one abstract. With section labels, every sentence of
// a RESULTS/RESULT/FINDINGS section is returned. Without any labels, the
// sentences that contain a numeric token are returned with
// meta.low_confidence set. Doc ids use the sentence's index within the
// whole abstract.
std::vector<Doc> SelectResultSentences(const AbstractRecord &abstract,
                                       const Tokenizer &tokenizer);

bool HasNumericToken(const Doc &doc);

}  // namespace trialtab::corpus

#endif  // TRIALTAB_CORPUS_SELECT_H_
