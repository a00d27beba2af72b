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
#include "support/fixture.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "trialtab/tokenizer.h"

namespace trialtab::testing {
namespace {

struct PendingSpan {
  EntityLabel label;
  std::size_t begin;
  std::size_t end;
};

std::vector<std::string> Split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

int TokenAt(const Doc &doc, std::size_t offset, bool start) {
  for (const Token &token : doc.tokens) {
    if (start ? token.start == offset : token.end == offset) {
      return token.index;
    }
  }
  throw std::invalid_argument("markup boundary at byte " +
                              std::to_string(offset) +
                              " is not a token boundary in: " + doc.text);
}

}  // namespace

Doc ParseMarkup(std::string_view pmid, int sentence_index,
                std::string_view domain, std::string_view marked,
                std::string_view relations) {
  std::string text;
  std::map<std::string, PendingSpan> spans;
  for (std::size_t i = 0; i < marked.size();) {
    if (marked[i] != '[') {
      text += marked[i++];
      continue;
    }
    const std::size_t colon = marked.find(':', i);
    const std::size_t space = marked.find(' ', colon);
    const std::size_t close = marked.find(']', space);
    if (colon == std::string_view::npos || space == std::string_view::npos ||
        close == std::string_view::npos) {
      throw std::invalid_argument("bad markup: " + std::string(marked));
    }
    auto label = ParseEntityLabel(marked.substr(i + 1, colon - i - 1));
    if (!label) throw std::invalid_argument("bad label in markup");
    const std::string ref(marked.substr(colon + 1, space - colon - 1));
    const std::size_t begin = text.size();
    text += marked.substr(space + 1, close - space - 1);
    spans[ref] = {*label, begin, text.size()};
    i = close + 1;
  }

  Doc doc = MakeDoc(MakeDocId(pmid, sentence_index), text, Tokenizer());
  doc.meta.pmid = std::string(pmid);
  doc.meta.domain = std::string(domain);
  std::map<std::string, int> ids;
  for (const auto &[ref, span] : spans) {
    EntitySpan entity{span.label, TokenAt(doc, span.begin, true),
                      TokenAt(doc, span.end, false)};
    ids[ref] = entity.id();
    doc.entities.push_back(entity);
  }
  for (const std::string &item : Split(relations, ';')) {
    if (item.empty()) continue;
    const std::size_t space = item.find(' ');
    const std::size_t arrow = item.find('>');
    auto label = ParseRelationLabel(item.substr(0, space));
    if (!label || arrow == std::string::npos) {
      throw std::invalid_argument("bad relation: " + item);
    }
    const std::string parent = item.substr(space + 1, arrow - space - 1);
    const std::string child = item.substr(arrow + 1);
    if (!ids.count(parent) || !ids.count(child)) {
      throw std::invalid_argument("unknown span ref in: " + item);
    }
    doc.relations.push_back({*label, ids[parent], ids[child]});
  }
  Canonicalize(doc);
  ValidateDoc(doc, /*gold_direction=*/true);
  return doc;
}

std::vector<Doc> LoadMarkupFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Doc> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = Split(line, '\t');
    if (f.size() < 4) throw std::invalid_argument("bad fixture line: " + line);
    docs.push_back(ParseMarkup(f[0], std::stoi(f[1]), f[2], f[3],
                               f.size() > 4 ? f[4] : ""));
  }
  return docs;
}

std::string DataDir() { return TRIALTAB_TEST_DATA_DIR; }

std::vector<Doc> FixtureCorpus() {
  return LoadMarkupFile(DataDir() + "/fixture_markup.tsv");
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string TempDir(const std::string &name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("trialtab_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace trialtab::testing
