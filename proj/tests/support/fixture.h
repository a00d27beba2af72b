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
#ifndef TRIALTAB_TESTS_SUPPORT_FIXTURE_H_
#define TRIALTAB_TESTS_SUPPORT_FIXTURE_H_

#include <string>
#include <string_view>
#include <vector>

#include "trialtab/doc.h"

namespace trialtab::testing {

// Builds a gold doc from bracket markup, e.g.
//   "[OC:o IOP] fell by [MEAS:m 31%]" with relations "OC_RES o>m".
// Span boundaries must fall on token boundaries.
Doc ParseMarkup(std::string_view pmid, int sentence_index,
                std::string_view domain, std::string_view marked,
                std::string_view relations);

// One doc per non-comment line of a tab-separated markup file.
std::vector<Doc> LoadMarkupFile(const std::string &path);

// Directory holding the checked-in fixture files.
std::string DataDir();

// LoadMarkupFile(DataDir() + "/fixture_markup.tsv").
std::vector<Doc> FixtureCorpus();

std::string ReadFile(const std::string &path);

// Fresh empty directory under the system temp dir.
std::string TempDir(const std::string &name);

}  // namespace trialtab::testing

#endif  // TRIALTAB_TESTS_SUPPORT_FIXTURE_H_
