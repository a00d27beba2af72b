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
#ifndef TRIALTAB_CORPUS_SEGMENT_H_
#define TRIALTAB_CORPUS_SEGMENT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "trialtab/lexicon.h"

namespace trialtab::corpus {

struct Sentence {
  std::string text;
  std::size_t start = 0;  // byte offset into the abstract
  std::size_t end = 0;
  std::string trailing;  // whitespace up to the next sentence
};

struct Segmentation {
  std::string leading;  // whitespace before the first sentence
  std::vector<Sentence> sentences;

  // leading + concat(text + trailing) == the segmented input.
  std::string Reconstruct() const;
};

// Rule-based splitter. A sentence ends at '.', '!' or '?' (plus closing
// brackets and quotes) followed by whitespace and then an upper-case
// letter, digit or opening bracket. Decimals, lexicon abbreviations such
// as "vs." and "e.g." and a following lower-case word suppress a split.
Segmentation SegmentSentences(
    std::string_view text,
    const Lexicon &abbreviations = Lexicon::DefaultAbbreviations());

}  // namespace trialtab::corpus

#endif  // TRIALTAB_CORPUS_SEGMENT_H_
