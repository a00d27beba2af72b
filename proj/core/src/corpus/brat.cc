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
#include "trialtab/corpus/brat.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trialtab/corpus/segment.h"
#include "trialtab/error.h"

namespace trialtab::corpus {
namespace {

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Byte offset of every code point boundary, plus one past the end.
std::vector<std::size_t> CodePointOffsets(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if ((c & 0xC0) != 0x80) offsets.push_back(i);
  }
  offsets.push_back(text.size());
  return offsets;
}

std::vector<std::string> SplitTabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      fields.emplace_back(line.substr(pos));
      break;
    }
    fields.emplace_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

bool ParseOffset(const std::string &field, std::size_t *value) {
  if (field.empty()) return false;
  std::size_t result = 0;
  for (char c : field) {
    if (c < '0' || c > '9') return false;
    result = result * 10 + static_cast<std::size_t>(c - '0');
  }
  *value = result;
  return true;
}

std::string Trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

BratDocument ParseBrat(std::string_view text, std::string_view ann,
                       std::string pmid) {
  BratDocument doc;
  doc.pmid = std::move(pmid);
  doc.text = std::string(text);
  const std::vector<std::size_t> offsets = CodePointOffsets(text);
  const std::size_t num_code_points = offsets.size() - 1;

  std::istringstream in{std::string(ann)};
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    const std::string where = "ann line " + std::to_string(line_number);
    std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() < 2 || fields[0].empty()) {
      throw Error(ErrorKind::kParse, where + ": expected tab-separated fields");
    }
    const char kind = fields[0][0];
    if (kind != 'T') {
      if (std::string("REAMN#").find(kind) != std::string::npos) continue;
      throw Error(ErrorKind::kParse,
                  where + ": unknown annotation id '" + fields[0] + "'");
    }
    if (fields.size() != 3) {
      throw Error(ErrorKind::kParse,
                  where + ": text-bound annotation needs 3 fields");
    }
    if (fields[1].find(';') != std::string::npos) {
      throw Error(ErrorKind::kParse,
                  where + ": discontinuous spans are not supported");
    }
    std::istringstream header(fields[1]);
    std::string label, start_field, end_field, extra;
    header >> label >> start_field >> end_field;
    std::size_t start = 0, end = 0;
    if (label.empty() || !ParseOffset(start_field, &start) ||
        !ParseOffset(end_field, &end) || (header >> extra)) {
      throw Error(ErrorKind::kParse,
                  where + ": expected '<LABEL> <start> <end>'");
    }
    if (start >= end || end > num_code_points) {
      throw Error(ErrorKind::kRange,
                  where + ": offsets [" + std::to_string(start) + "," +
                      std::to_string(end) + ") outside text of " +
                      std::to_string(num_code_points) + " characters");
    }
    SourceSpan span;
    span.id = fields[0];
    span.label = label;
    span.start = offsets[start];
    span.end = offsets[end];
    span.surface = fields[2];
    std::string_view slice = text.substr(span.start, span.end - span.start);
    if (slice != span.surface) {
      throw Error(ErrorKind::kIntegrity,
                  where + ": surface '" + span.surface +
                      "' differs from text '" + std::string(slice) + "'");
    }
    doc.spans.push_back(std::move(span));
  }
  return doc;
}

BratDocument ReadBrat(const std::string &text_path,
                      const std::string &ann_path) {
  std::string pmid = std::filesystem::path(text_path).stem().string();
  return ParseBrat(ReadFile(text_path), ReadFile(ann_path), pmid);
}

void LabelMapping::Map(std::string source, EntityLabel target) {
  entries_[std::move(source)] = target;
}

void LabelMapping::Drop(std::string source) {
  entries_[std::move(source)] = std::nullopt;
}

LabelMapping LabelMapping::Parse(std::string_view contents) {
  LabelMapping mapping;
  std::istringstream in{std::string(contents)};
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kConfig, "label mapping line " +
                                          std::to_string(line_number) +
                                          ": expected <source>=<target>");
    }
    std::string source = Trim(trimmed.substr(0, eq));
    std::string target = Trim(trimmed.substr(eq + 1));
    if (target == "drop") {
      mapping.Drop(source);
    } else if (auto label = ParseEntityLabel(target)) {
      mapping.Map(source, *label);
    } else {
      throw Error(ErrorKind::kConfig,
                  "label mapping line " + std::to_string(line_number) +
                      ": unknown target '" + target + "'");
    }
  }
  return mapping;
}

LabelMapping LabelMapping::Load(const std::string &path) {
  return Parse(ReadFile(path));
}

LabelMapping LabelMapping::EbmNlpDefault() {
  LabelMapping mapping;
  mapping.Map("Intervention", EntityLabel::kIntv);
  mapping.Map("Outcome", EntityLabel::kOc);
  mapping.Drop("Participants");
  mapping.Drop("Population");
  return mapping;
}

BratDocument MapSourceLabels(const BratDocument &doc,
                             const LabelMapping &mapping) {
  BratDocument out;
  out.pmid = doc.pmid;
  out.text = doc.text;
  for (const SourceSpan &span : doc.spans) {
    auto it = mapping.entries().find(span.label);
    if (it == mapping.entries().end()) {
      throw Error(ErrorKind::kConfig, "no mapping for source label '" +
                                          span.label + "' (" + span.id + ")");
    }
    if (!it->second) continue;
    SourceSpan mapped = span;
    mapped.label = std::string(ToString(*it->second));
    out.spans.push_back(std::move(mapped));
  }
  return out;
}

std::vector<Doc> AbstractToDocs(const BratDocument &doc,
                                std::string_view domain,
                                const Tokenizer &tokenizer,
                                AlignmentReport *report) {
  AlignmentReport local;
  AlignmentReport &stats = report != nullptr ? *report : local;

  Segmentation segmentation = SegmentSentences(doc.text);
  std::vector<Doc> docs;
  docs.reserve(segmentation.sentences.size());
  for (std::size_t i = 0; i < segmentation.sentences.size(); ++i) {
    const Sentence &sentence = segmentation.sentences[i];
    Doc out = MakeDoc(MakeDocId(doc.pmid, static_cast<int>(i)), sentence.text,
                      tokenizer);
    out.meta.pmid = doc.pmid;
    out.meta.domain = std::string(domain);
    docs.push_back(std::move(out));
  }

  // Longest span first among equal starts, so nested spans lose.
  std::vector<const SourceSpan *> order;
  for (const SourceSpan &span : doc.spans) order.push_back(&span);
  std::stable_sort(order.begin(), order.end(),
                   [](const SourceSpan *a, const SourceSpan *b) {
                     if (a->start != b->start) return a->start < b->start;
                     return a->end > b->end;
                   });

  for (const SourceSpan *span : order) {
    std::optional<EntityLabel> label = ParseEntityLabel(span->label);
    if (!label) {
      throw Error(ErrorKind::kConfig, "span " + span->id + " carries label '" +
                                          span->label +
                                          "'; map source labels first");
    }
    auto owner = std::find_if(
        segmentation.sentences.begin(), segmentation.sentences.end(),
        [&](const Sentence &s) {
          return s.start <= span->start && span->end <= s.end;
        });
    if (owner == segmentation.sentences.end()) {
      ++stats.dropped_cross_sentence;
      continue;
    }
    Doc &target = docs[owner - segmentation.sentences.begin()];
    const std::size_t rel_start = span->start - owner->start;
    const std::size_t rel_end = span->end - owner->start;
    int first = -1, last = -1;
    for (const Token &tok : target.tokens) {
      if (tok.end > rel_start && tok.start < rel_end) {
        if (first < 0) first = tok.index;
        last = tok.index;
      }
    }
    if (first < 0) {
      ++stats.dropped_cross_sentence;
      continue;
    }
    bool clash = std::any_of(
        target.entities.begin(), target.entities.end(),
        [&](const EntitySpan &e) {
          return e.token_start <= last && first <= e.token_end;
        });
    if (clash) {
      ++stats.dropped_overlap;
      continue;
    }
    if (target.tokens[first].start != rel_start ||
        target.tokens[last].end != rel_end) {
      ++stats.widened;
    }
    target.entities.push_back({*label, first, last});
  }
  for (Doc &d : docs) Canonicalize(d);
  return docs;
}

}  // namespace trialtab::corpus
