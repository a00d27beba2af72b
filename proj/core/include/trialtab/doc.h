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

#ifndef TRIALTAB_DOC_H_
#define TRIALTAB_DOC_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trialtab/labels.h"

namespace trialtab {

struct Token {
  std::string text;
  std::size_t start = 0;  // char offset, inclusive
  std::size_t end = 0;    // char offset, exclusive
  int index = 0;

  bool operator==(const Token &) const = default;
};

// A labelled, inclusive token range. Spans in one Doc never overlap, so
// the start token doubles as the span's identifier.
struct EntitySpan {
  EntityLabel label = EntityLabel::kIntv;
  int token_start = 0;
  int token_end = 0;

  int id() const { return token_start; }
  int length() const { return token_end - token_start + 1; }

  bool operator==(const EntitySpan &) const = default;
  auto operator<=>(const EntitySpan &other) const {
    if (token_start != other.token_start) {
      return token_start <=> other.token_start;
    }
    if (token_end != other.token_end) return token_end <=> other.token_end;
    return static_cast<int>(label) <=> static_cast<int>(other.label);
  }
};

// Directed parent->child link; endpoints are span ids (token_start).
struct RelationEdge {
  RelationLabel label = RelationLabel::kOcRes;
  int parent = 0;
  int child = 0;

  bool operator==(const RelationEdge &) const = default;
  auto operator<=>(const RelationEdge &other) const {
    if (parent != other.parent) return parent <=> other.parent;
    if (child != other.child) return child <=> other.child;
    return static_cast<int>(label) <=> static_cast<int>(other.label);
  }
};

enum class Answer { kAccept, kReject, kPending };

std::string_view ToString(Answer answer);
std::optional<Answer> ParseAnswer(std::string_view name);

struct DocMeta {
  std::string pmid;
  std::string domain;
  Answer answer = Answer::kAccept;
  // Set when the sentence was picked by the numeric fallback rather than a
  // RESULTS section header.
  bool low_confidence = false;

  bool operator==(const DocMeta &) const = default;
};

// One result sentence with its annotations.
struct Doc {
  std::string id;  // "<pmid>:<sentence-index>"
  std::string text;
  std::vector<Token> tokens;
  std::vector<EntitySpan> entities;    // sorted by token_start
  std::vector<RelationEdge> relations;  // sorted by (parent, child, label)
  DocMeta meta;

  int num_tokens() const { return static_cast<int>(tokens.size()); }

  // Span whose id (start token) is `id`, or nullptr.
  const EntitySpan *FindSpan(int id) const;

  // Surface text of a span: the sentence slice from its first to last token.
  std::string SpanText(const EntitySpan &span) const;

  bool operator==(const Doc &) const = default;
};

std::string MakeDocId(std::string_view pmid, int sentence_index);

// Sorts entities and relations into canonical order.
void Canonicalize(Doc &doc);

// Returns one message per broken structural invariant: token offsets,
// entity bounds, overlaps and unresolved relation endpoints. When
// `gold_direction` is set, edges must also run from an INTV or OC parent to
// a MEAS child.
std::vector<std::string> CheckInvariants(const Doc &doc,
                                         bool gold_direction = false);

// Throws Error(kIntegrity) listing every violation.
void ValidateDoc(const Doc &doc, bool gold_direction = false);

}  // namespace trialtab

#endif  // TRIALTAB_DOC_H_
