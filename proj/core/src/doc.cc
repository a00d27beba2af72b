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
#include "trialtab/doc.h"

#include <algorithm>
#include <sstream>

#include "trialtab/error.h"

namespace trialtab {

std::string_view ToString(Answer answer) {
  switch (answer) {
    case Answer::kAccept: return "accept";
    case Answer::kReject: return "reject";
    case Answer::kPending: return "pending";
  }
  return "?";
}

std::optional<Answer> ParseAnswer(std::string_view name) {
  if (name == "accept") return Answer::kAccept;
  if (name == "reject") return Answer::kReject;
  if (name == "pending") return Answer::kPending;
  return std::nullopt;
}

const EntitySpan *Doc::FindSpan(int id) const {
  auto it = std::lower_bound(
      entities.begin(), entities.end(), id,
      [](const EntitySpan &span, int key) { return span.token_start < key; });
  if (it != entities.end() && it->token_start == id) return &*it;
  // Entities may be unsorted while a Doc is being built.
  for (const EntitySpan &span : entities) {
    if (span.token_start == id) return &span;
  }
  return nullptr;
}

std::string Doc::SpanText(const EntitySpan &span) const {
  if (span.token_start < 0 || span.token_end >= num_tokens() ||
      span.token_start > span.token_end) {
    return std::string();
  }
  const Token &first = tokens[span.token_start];
  const Token &last = tokens[span.token_end];
  if (last.end <= text.size() && first.start <= last.end) {
    return text.substr(first.start, last.end - first.start);
  }
  // Fall back to joining token texts when offsets do not address `text`.
  std::string out;
  for (int i = span.token_start; i <= span.token_end; ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

std::string MakeDocId(std::string_view pmid, int sentence_index) {
  return std::string(pmid) + ":" + std::to_string(sentence_index);
}

void Canonicalize(Doc &doc) {
  std::sort(doc.entities.begin(), doc.entities.end());
  std::sort(doc.relations.begin(), doc.relations.end());
}

std::vector<std::string> CheckInvariants(const Doc &doc, bool gold_direction) {
  std::vector<std::string> problems;
  auto report = [&problems](const std::string &message) {
    problems.push_back(message);
  };

  for (int i = 0; i < doc.num_tokens(); ++i) {
    const Token &tok = doc.tokens[i];
    std::ostringstream where;
    where << "token " << i;
    if (tok.index != i) report(where.str() + ": index field is " +
                               std::to_string(tok.index));
    if (tok.start >= tok.end) report(where.str() + ": empty char range");
    if (tok.end > doc.text.size()) {
      report(where.str() + ": char range exceeds text");
    } else if (doc.text.compare(tok.start, tok.end - tok.start, tok.text) !=
               0) {
      report(where.str() + ": text slice differs from token text");
    }
    if (i > 0 && doc.tokens[i - 1].end > tok.start) {
      report(where.str() + ": overlaps or precedes previous token");
    }
  }

  std::vector<int> owner(doc.tokens.size(), -1);
  for (std::size_t k = 0; k < doc.entities.size(); ++k) {
    const EntitySpan &span = doc.entities[k];
    std::string name = std::string(ToString(span.label)) + "(" +
                       std::to_string(span.token_start) + "," +
                       std::to_string(span.token_end) + ")";
    if (span.token_start < 0 || span.token_end >= doc.num_tokens() ||
        span.token_start > span.token_end) {
      report("span " + name + ": out of token bounds");
      continue;
    }
    for (int t = span.token_start; t <= span.token_end; ++t) {
      if (owner[t] >= 0) {
        const EntitySpan &other = doc.entities[owner[t]];
        report("span " + name + ": overlaps span " +
               std::string(ToString(other.label)) + "(" +
               std::to_string(other.token_start) + "," +
               std::to_string(other.token_end) + ")");
        break;
      }
      owner[t] = static_cast<int>(k);
    }
  }

  for (const RelationEdge &edge : doc.relations) {
    std::string name = std::string(ToString(edge.label)) + " " +
                       std::to_string(edge.parent) + "->" +
                       std::to_string(edge.child);
    const EntitySpan *parent = doc.FindSpan(edge.parent);
    const EntitySpan *child = doc.FindSpan(edge.child);
    if (edge.parent == edge.child) {
      report("edge " + name + ": parent equals child");
    }
    if (parent == nullptr) report("edge " + name + ": parent does not resolve");
    if (child == nullptr) report("edge " + name + ": child does not resolve");
    if (gold_direction && parent != nullptr && child != nullptr) {
      if (parent->label == EntityLabel::kMeas) {
        report("edge " + name + ": parent must be INTV or OC");
      }
      if (child->label != EntityLabel::kMeas) {
        report("edge " + name + ": child must be MEAS");
      }
    }
  }
  return problems;
}

void ValidateDoc(const Doc &doc, bool gold_direction) {
  std::vector<std::string> problems = CheckInvariants(doc, gold_direction);
  if (!problems.empty()) {
    throw Error(ErrorKind::kIntegrity,
                "doc " + doc.id + ": " + problems.front(), problems);
  }
}

}  // namespace trialtab
