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
#ifndef TRIALTAB_CORPUS_IOB_H_
#define TRIALTAB_CORPUS_IOB_H_

#include <string>
#include <vector>

#include "trialtab/doc.h"

namespace trialtab::corpus {

// One tag per token: "O", "B-<LABEL>" opening a span, "I-<LABEL>"
// continuing it.
std::vector<std::string> ToIob(const Doc &doc);

// Inverse of ToIob. Throws Error(kFormat) naming the first ill-formed
// index: an I- tag that does not continue a span of the same label, an
// unknown label, or a tag/token count mismatch.
Doc FromIob(const std::vector<Token> &tokens,
            const std::vector<std::string> &tags);

}  // namespace trialtab::corpus

#endif  // TRIALTAB_CORPUS_IOB_H_
