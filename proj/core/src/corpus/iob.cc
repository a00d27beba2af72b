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
#include "trialtab/corpus/iob.h"

#include "trialtab/error.h"

namespace trialtab::corpus {

std::vector<std::string> ToIob(const Doc &doc) {
  std::vector<std::string> tags(doc.tokens.size(), "O");
  for (const EntitySpan &span : doc.entities) {
    const std::string label(ToString(span.label));
    tags[span.token_start] = "B-" + label;
    for (int t = span.token_start + 1; t <= span.token_end; ++t) {
      tags[t] = "I-" + label;
    }
  }
  return tags;
}

Doc FromIob(const std::vector<Token> &tokens,
            const std::vector<std::string> &tags) {
  if (tokens.size() != tags.size()) {
    throw Error(ErrorKind::kFormat,
                "tag count " + std::to_string(tags.size()) +
                    " differs from token count " +
                    std::to_string(tokens.size()));
  }
  Doc doc;
  doc.tokens = tokens;
  std::optional<EntityLabel> open;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string &tag = tags[i];
    const std::string where = "tag " + std::to_string(i) + " ('" + tag + "')";
    if (tag == "O") {
      open.reset();
      continue;
    }
    if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
      throw Error(ErrorKind::kFormat, where + ": not an IOB tag");
    }
    std::optional<EntityLabel> label = ParseEntityLabel(tag.substr(2));
    if (!label) throw Error(ErrorKind::kFormat, where + ": unknown label");
    const int index = static_cast<int>(i);
    if (tag[0] == 'B') {
      doc.entities.push_back({*label, index, index});
      open = label;
    } else {
      if (!open || *open != *label) {
        throw Error(ErrorKind::kFormat,
                    where + ": I- tag does not continue a " +
                        std::string(ToString(*label)) + " span");
      }
      doc.entities.back().token_end = index;
    }
  }
  return doc;
}

}  // namespace trialtab::corpus
