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
#include "trialtab/lexicon.h"

#include <fstream>
#include <sstream>

#include "trialtab/error.h"

namespace trialtab {
namespace {

#include "trialtab/lexicon_data.inc"

std::vector<std::string> SplitWords(std::string_view phrase) {
  std::vector<std::string> words;
  std::string current;
  for (char c : phrase) {
    if (c == ' ' || c == '\t') {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

}  // namespace

std::string ToLower(std::string_view text) {
  std::string out(text);
  for (char &c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Lexicon Lexicon::Parse(std::string_view contents) {
  Lexicon lexicon;
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<std::string> words = SplitWords(ToLower(line.substr(first)));
    std::string joined;
    for (const std::string &w : words) {
      if (!joined.empty()) joined += ' ';
      joined += w;
    }
    lexicon.entries_.insert(joined);
    if (words.size() > 1) lexicon.multiword_.push_back(std::move(words));
  }
  return lexicon;
}

Lexicon Lexicon::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open lexicon " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

const Lexicon &Lexicon::DefaultAbbreviations() {
  static const Lexicon lexicon = Parse(kBundledAbbreviations);
  return lexicon;
}

const Lexicon &Lexicon::DefaultUnits() {
  static const Lexicon lexicon = Parse(kBundledUnits);
  return lexicon;
}

bool Lexicon::Contains(std::string_view phrase) const {
  return entries_.count(ToLower(phrase)) > 0;
}

bool Lexicon::Covers(const std::vector<std::string> &tokens, int index) const {
  if (index < 0 || index >= static_cast<int>(tokens.size())) return false;
  if (Contains(tokens[index])) return true;
  for (const std::vector<std::string> &words : multiword_) {
    const int n = static_cast<int>(words.size());
    // Try every alignment of the entry that places `index` inside it.
    for (int offset = 0; offset < n; ++offset) {
      int begin = index - offset;
      if (begin < 0 || begin + n > static_cast<int>(tokens.size())) continue;
      bool match = true;
      for (int k = 0; k < n && match; ++k) {
        match = ToLower(tokens[begin + k]) == words[k];
      }
      if (match) return true;
    }
  }
  return false;
}

}  // namespace trialtab
