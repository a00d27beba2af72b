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
#ifndef TRIALTAB_LEXICON_H_
#define TRIALTAB_LEXICON_H_

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace trialtab {

// A case-insensitive phrase list. Entries may span several tokens.
class Lexicon {
 public:
  Lexicon() = default;

  // One entry per line; blank lines and lines starting with '#' ignored.
  static Lexicon Parse(std::string_view contents);
  static Lexicon Load(const std::string &path);

  // Lists bundled with the library (core/data/*.txt).
  static const Lexicon &DefaultAbbreviations();
  static const Lexicon &DefaultUnits();

  bool Contains(std::string_view phrase) const;

  // True if the token at `index` is covered by any entry, matching
  // multi-word entries against neighbouring tokens.
  bool Covers(const std::vector<std::string> &tokens, int index) const;

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
  std::vector<std::vector<std::string>> multiword_;
};

std::string ToLower(std::string_view text);

}  // namespace trialtab

#endif  // TRIALTAB_LEXICON_H_
