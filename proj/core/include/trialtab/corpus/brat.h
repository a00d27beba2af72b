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
#ifndef TRIALTAB_CORPUS_BRAT_H_
#define TRIALTAB_CORPUS_BRAT_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trialtab/doc.h"
#include "trialtab/labels.h"
#include "trialtab/tokenizer.h"

namespace trialtab::corpus {

// Character-addressed entity from a standoff file. Offsets are byte offsets
// into the UTF-8 text (converted from the code-point offsets brat uses).
struct SourceSpan {
  std::string id;     // "T<k>"
  std::string label;  // source label, or a schema label after mapping
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;

  bool operator==(const SourceSpan &) const = default;
};

// One abstract with character-level spans.
struct BratDocument {
  std::string pmid;
  std::string text;
  std::vector<SourceSpan> spans;
};

// Parses a brat standoff pair. Lines of the form
// "T<k>\t<LABEL> <start> <end>\t<surface>" become spans; relation, event,
// attribute and note lines are skipped.
//
// Throws Error(kParse) naming the line for malformed entries,
// Error(kRange) for offsets outside the text and Error(kIntegrity) when
// the recorded surface differs from the text slice.
BratDocument ParseBrat(std::string_view text, std::string_view ann,
                       std::string pmid = "");

// Reads <stem>.txt and <stem>.ann; the pmid defaults to the file stem.
BratDocument ReadBrat(const std::string &text_path,
                      const std::string &ann_path);

// Source label -> schema label; std::nullopt marks labels to drop.
class LabelMapping {
 public:
  LabelMapping() = default;

  void Map(std::string source, EntityLabel target);
  void Drop(std::string source);

  // Lines "<source>=<INTV|OC|MEAS|drop>", '#' comments allowed.
  static LabelMapping Parse(std::string_view contents);
  static LabelMapping Load(const std::string &path);

  // Broad EBM-NLP labels: Intervention->INTV, Outcome->OC,
  // Participants->drop.
  static LabelMapping EbmNlpDefault();

  const std::map<std::string, std::optional<EntityLabel>> &entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::optional<EntityLabel>> entries_;
};

// Relabels every span with its schema label and removes dropped ones.
// Throws Error(kConfig) for a label the mapping does not mention.
BratDocument MapSourceLabels(const BratDocument &doc,
                             const LabelMapping &mapping);

struct AlignmentReport {
  int dropped_cross_sentence = 0;
  int dropped_overlap = 0;
  int widened = 0;  // spans snapped outwards to token boundaries
};

// Segments a mapped abstract into sentence Docs, projecting spans onto
// tokens. Spans crossing a sentence boundary or overlapping an earlier
// (longer) span are dropped and counted.
std::vector<Doc> AbstractToDocs(const BratDocument &doc,
                                std::string_view domain,
                                const Tokenizer &tokenizer,
                                AlignmentReport *report = nullptr);

}  // namespace trialtab::corpus

#endif  // TRIALTAB_CORPUS_BRAT_H_
