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
#include "trialtab/corpus/select.h"

#include <algorithm>
#include <regex>

#include "trialtab/corpus/segment.h"

namespace trialtab::corpus {
namespace {

bool IsResultsLabel(const std::string &label) {
  std::string upper = label;
  for (char &c : upper) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return upper == "RESULTS" || upper == "RESULT" || upper == "FINDINGS" ||
         upper == "MAIN RESULTS" || upper == "RESULTS AND DISCUSSION";
}

std::string TrimCopy(const std::string &s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<AbstractSection> SplitSections(std::string_view text) {
  static const std::regex kHeader(R"((^|\s)([A-Z][A-Z &/]{2,}[A-Z]):\s)");
  const std::string input(text);
  std::vector<AbstractSection> sections;
  std::string pending_label;
  std::size_t body_start = 0;
  bool any_header = false;
  for (auto it = std::sregex_iterator(input.begin(), input.end(), kHeader);
       it != std::sregex_iterator(); ++it) {
    const std::smatch &m = *it;
    const std::size_t header_start =
        static_cast<std::size_t>(m.position(2));
    std::string body =
        TrimCopy(input.substr(body_start, header_start - body_start));
    if (!body.empty() || any_header) {
      sections.push_back({pending_label, body});
    }
    pending_label = m.str(2);
    body_start = static_cast<std::size_t>(m.position(0) + m.length(0));
    any_header = true;
  }
  sections.push_back({pending_label, TrimCopy(input.substr(body_start))});
  return sections;
}

bool HasNumericToken(const Doc &doc) {
  return std::any_of(doc.tokens.begin(), doc.tokens.end(),
                     [](const Token &tok) {
                       return std::any_of(
                           tok.text.begin(), tok.text.end(),
                           [](char c) { return c >= '0' && c <= '9'; });
                     });
}

std::vector<Doc> SelectResultSentences(const AbstractRecord &abstract,
                                       const Tokenizer &tokenizer) {
  std::vector<AbstractSection> sections = abstract.sections;
  bool labelled = std::any_of(sections.begin(), sections.end(),
                              [](const AbstractSection &s) {
                                return !s.label.empty();
                              });
  if (!labelled) {
    std::string joined;
    for (const AbstractSection &s : sections) {
      if (!joined.empty()) joined += ' ';
      joined += s.text;
    }
    sections = SplitSections(joined);
    labelled = std::any_of(sections.begin(), sections.end(),
                           [](const AbstractSection &s) {
                             return !s.label.empty();
                           });
  }

  std::vector<Doc> selected;
  int sentence_index = 0;
  for (const AbstractSection &section : sections) {
    Segmentation segmentation = SegmentSentences(section.text);
    for (const Sentence &sentence : segmentation.sentences) {
      const int index = sentence_index++;
      if (sentence.text.empty()) continue;
      if (labelled && !IsResultsLabel(section.label)) continue;
      Doc doc = MakeDoc(MakeDocId(abstract.pmid, index), sentence.text,
                        tokenizer);
      doc.meta.pmid = abstract.pmid;
      doc.meta.domain = abstract.domain;
      doc.meta.answer = Answer::kPending;
      if (!labelled) {
        if (!HasNumericToken(doc)) continue;
        doc.meta.low_confidence = true;
      }
      selected.push_back(std::move(doc));
    }
  }
  return selected;
}

}  // namespace trialtab::corpus
