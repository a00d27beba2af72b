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
#ifndef TRIALTAB_TOKENIZER_H_
#define TRIALTAB_TOKENIZER_H_

#include <string_view>
#include <vector>

#include "trialtab/doc.h"
#include "trialtab/lexicon.h"

namespace trialtab {

// Rule-based word tokenizer tuned for trial result sentences: brackets,
// percent signs and comparison operators become their own tokens, while
// decimals ("18.3"), thousands ("1,000"), ratios ("1:2"), slashed units
// ("mg/dl") and lexicon abbreviations ("vs.") stay whole.
class Tokenizer {
 public:
  Tokenizer();
  explicit Tokenizer(const Lexicon &abbreviations);

  std::vector<Token> Tokenize(std::string_view text) const;

 private:
  const Lexicon *abbreviations_;
};

// Builds an unannotated Doc from a raw sentence.
Doc MakeDoc(std::string id, std::string text, const Tokenizer &tokenizer);

}  // namespace trialtab

#endif  // TRIALTAB_TOKENIZER_H_
