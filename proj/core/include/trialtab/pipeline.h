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
#ifndef TRIALTAB_PIPELINE_H_
#define TRIALTAB_PIPELINE_H_

#include <memory>
#include <string>
#include <vector>

#include "trialtab/doc.h"
#include "trialtab/features.h"
#include "trialtab/ner.h"
#include "trialtab/relex.h"
#include "trialtab/tabulate.h"
#include "trialtab/tokenizer.h"

namespace trialtab {

// NER, then relation extraction, then table assembly.
class Pipeline {
 public:
  // Throws Error(kConfig) when the models and the source disagree on
  // backend or dimension.
  Pipeline(std::shared_ptr<const ner::NerModel> ner,
           std::shared_ptr<const relex::RelexModel> relex,
           std::shared_ptr<const features::FeatureSource> source,
           double threshold = relex::kDefaultThreshold);

  double threshold() const { return threshold_; }

  // Replaces the doc's entities and relations with predictions.
  Doc Annotate(const Doc &doc) const;
  Doc AnnotateText(const std::string &id, const std::string &text) const;

 private:
  std::shared_ptr<const ner::NerModel> ner_;
  std::shared_ptr<const relex::RelexModel> relex_;
  std::shared_ptr<const features::FeatureSource> source_;
  double threshold_;
  Tokenizer tokenizer_;
};

struct TabulateOutput {
  std::string doc_id;
  std::string path;
  tabulate::EvidenceTable table;
};

// Writes <out_dir>/<doc_id>.csv for every doc and a tab-separated
// manifest.tsv (id, path). With a null pipeline the docs' own annotations
// are tabulated. Ids are made file-safe by replacing '/' and ':' with '_'.
// Throws Error(kIo) when a file cannot be written.
std::vector<TabulateOutput> TabulateBatch(const std::vector<Doc> &docs,
                                          const Pipeline *pipeline,
                                          const std::string &out_dir,
                                          int jobs = 1);

std::string SafeFileStem(const std::string &doc_id);

}  // namespace trialtab

#endif  // TRIALTAB_PIPELINE_H_
