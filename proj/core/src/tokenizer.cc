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
#include "trialtab/tokenizer.h"

#include <utility>

namespace trialtab {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

// Single-byte characters that always form their own token.
bool IsSplitChar(char c) {
  switch (c) {
    case '(': case ')': case '[': case ']': case '{': case '}':
    case '"': case ';': case '!': case '?': case '%': case '=':
    case '<': case '>':
      return true;
    default:
      return false;
  }
}

// Multi-byte symbols that always form their own token: ± ≤ ≥ – —.
std::size_t SplitSymbolLength(std::string_view text, std::size_t pos) {
  static constexpr std::string_view kSymbols[] = {
      "\xC2\xB1", "\xE2\x89\xA4", "\xE2\x89\xA5", "\xE2\x80\x93",
      "\xE2\x80\x94"};
  for (std::string_view symbol : kSymbols) {
    if (text.substr(pos, symbol.size()) == symbol) return symbol.size();
  }
  return 0;
}

struct Piece {
  std::size_t start;
  std::size_t end;
  bool word;  // false for split characters
};

}  // namespace

Tokenizer::Tokenizer() : abbreviations_(&Lexicon::DefaultAbbreviations()) {}

Tokenizer::Tokenizer(const Lexicon &abbreviations)
    : abbreviations_(&abbreviations) {}

std::vector<Token> Tokenizer::Tokenize(std::string_view text) const {
  std::vector<Piece> pieces;
  std::size_t pos = 0;
  const std::size_t n = text.size();
  while (pos < n) {
    if (IsSpace(text[pos])) {
      ++pos;
      continue;
    }
    std::size_t chunk_end = pos;
    while (chunk_end < n && !IsSpace(text[chunk_end])) ++chunk_end;

    // Whole-chunk abbreviations ("e.g.", "vs.") are kept intact.
    if (abbreviations_->Contains(text.substr(pos, chunk_end - pos))) {
      pieces.push_back({pos, chunk_end, true});
      pos = chunk_end;
      continue;
    }

    std::size_t word_start = pos;
    auto flush = [&](std::size_t upto) {
      if (upto > word_start) pieces.push_back({word_start, upto, true});
    };
    std::size_t i = pos;
    while (i < chunk_end) {
      char c = text[i];
      std::size_t symbol = SplitSymbolLength(text, i);
      bool split = symbol > 0 || IsSplitChar(c);
      if (!split && (c == ',' || c == ':')) {
        bool between_digits = i > pos && i + 1 < chunk_end &&
                              IsDigit(text[i - 1]) && IsDigit(text[i + 1]);
        split = !between_digits;
      }
      if (!split && c == '\'' && (i == word_start || i + 1 == chunk_end)) {
        // Quote marks, but keep possessives such as "patients'".
        split = i == word_start;
      }
      if (split) {
        std::size_t len = symbol > 0 ? symbol : 1;
        flush(i);
        pieces.push_back({i, i + len, false});
        i += len;
        word_start = i;
      } else {
        ++i;
      }
    }
    flush(chunk_end);
    pos = chunk_end;
  }

  // Detach a trailing period from words that are not abbreviations.
  std::vector<Piece> refined;
  refined.reserve(pieces.size());
  for (const Piece &piece : pieces) {
    std::string_view word = text.substr(piece.start, piece.end - piece.start);
    if (piece.word && word.size() > 1 && word.back() == '.' &&
        !abbreviations_->Contains(word)) {
      refined.push_back({piece.start, piece.end - 1, true});
      refined.push_back({piece.end - 1, piece.end, false});
    } else {
      refined.push_back(piece);
    }
  }

  std::vector<Token> tokens;
  tokens.reserve(refined.size());
  for (const Piece &piece : refined) {
    Token token;
    token.text = std::string(text.substr(piece.start, piece.end - piece.start));
    token.start = piece.start;
    token.end = piece.end;
    token.index = static_cast<int>(tokens.size());
    tokens.push_back(std::move(token));
  }
  return tokens;
}

Doc MakeDoc(std::string id, std::string text, const Tokenizer &tokenizer) {
  Doc doc;
  doc.id = std::move(id);
  doc.text = std::move(text);
  doc.tokens = tokenizer.Tokenize(doc.text);
  return doc;
}

}  // namespace trialtab
