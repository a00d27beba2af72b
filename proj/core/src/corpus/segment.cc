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
#include "trialtab/corpus/segment.h"

namespace trialtab::corpus {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsUpper(char c) { return c >= 'A' && c <= 'Z'; }
bool IsDigit(char c) { return c >= '0' && c <= '9'; }

bool IsCloser(char c) {
  return c == ')' || c == ']' || c == '}' || c == '"' || c == '\'';
}

bool StartsSentence(char c) {
  // Non-ASCII lead bytes (accented capitals, Greek letters) are accepted.
  return IsUpper(c) || IsDigit(c) || c == '(' || c == '[' || c == '"' ||
         (static_cast<unsigned char>(c) >= 0xC0);
}

// The whitespace-delimited word that ends at `end` (exclusive).
std::string_view WordBefore(std::string_view text, std::size_t end) {
  std::size_t begin = end;
  while (begin > 0 && !IsSpace(text[begin - 1])) --begin;
  return text.substr(begin, end - begin);
}

// Two-word abbreviations such as "et al." need the previous word too.
std::string_view TwoWordsBefore(std::string_view text, std::size_t end) {
  std::size_t begin = end;
  while (begin > 0 && !IsSpace(text[begin - 1])) --begin;
  std::size_t gap = begin;
  while (gap > 0 && IsSpace(text[gap - 1])) --gap;
  if (gap == 0) return std::string_view();
  std::size_t prev = gap;
  while (prev > 0 && !IsSpace(text[prev - 1])) --prev;
  return text.substr(prev, end - prev);
}

bool IsProtected(std::string_view text, std::size_t end,
                 const Lexicon &abbreviations) {
  std::string_view word = WordBefore(text, end);
  // Strip opening brackets: "(e.g." should match "e.g.".
  while (!word.empty() && (word.front() == '(' || word.front() == '[')) {
    word.remove_prefix(1);
  }
  if (abbreviations.Contains(word)) return true;
  std::string_view pair = TwoWordsBefore(text, end);
  if (!pair.empty()) {
    std::string normalised;
    bool space = false;
    for (char c : pair) {
      if (IsSpace(c)) {
        space = true;
        continue;
      }
      if (space && !normalised.empty()) normalised += ' ';
      space = false;
      normalised += c;
    }
    if (abbreviations.Contains(normalised)) return true;
  }
  // Single capital initial ("J. Smith").
  return word.size() == 2 && IsUpper(word[0]) && word[1] == '.';
}

}  // namespace

std::string Segmentation::Reconstruct() const {
  std::string out = leading;
  for (const Sentence &s : sentences) {
    out += s.text;
    out += s.trailing;
  }
  return out;
}

Segmentation SegmentSentences(std::string_view text,
                              const Lexicon &abbreviations) {
  Segmentation result;
  const std::size_t n = text.size();
  std::size_t begin = 0;
  while (begin < n && IsSpace(text[begin])) ++begin;
  result.leading = std::string(text.substr(0, begin));

  std::size_t sentence_start = begin;
  auto emit = [&](std::size_t end, std::size_t next_start) {
    Sentence s;
    s.start = sentence_start;
    s.end = end;
    s.text = std::string(text.substr(sentence_start, end - sentence_start));
    s.trailing = std::string(text.substr(end, next_start - end));
    result.sentences.push_back(std::move(s));
    sentence_start = next_start;
  };

  std::size_t i = begin;
  while (i < n) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < n && IsCloser(text[end])) ++end;
    if (end >= n || !IsSpace(text[end])) {
      i = end;
      continue;
    }
    std::size_t next = end;
    while (next < n && IsSpace(text[next])) ++next;
    if (next >= n) break;  // trailing whitespace belongs to the last sentence
    if (!StartsSentence(text[next]) ||
        (c == '.' && IsProtected(text, i + 1, abbreviations))) {
      i = next;
      continue;
    }
    emit(end, next);
    i = next;
  }

  if (sentence_start < n || result.sentences.empty()) {
    std::size_t end = n;
    while (end > sentence_start && IsSpace(text[end - 1])) --end;
    emit(end, n);
  }
  return result;
}

}  // namespace trialtab::corpus
