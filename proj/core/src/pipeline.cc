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
#include "trialtab/pipeline.h"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "trialtab/error.h"

namespace trialtab {
namespace {

void CheckMatch(const char *what, features::Backend backend, int dim,
                const features::FeatureSource &source) {
  if (backend != source.backend() || dim != source.dim()) {
    throw Error(ErrorKind::kConfig,
                std::string(what) + " model expects " +
                    std::string(features::ToString(backend)) + " dim " +
                    std::to_string(dim) + " but the feature source is " +
                    std::string(features::ToString(source.backend())) +
                    " dim " + std::to_string(source.dim()));
  }
}

}  // namespace

Pipeline::Pipeline(std::shared_ptr<const ner::NerModel> ner,
                   std::shared_ptr<const relex::RelexModel> relex,
                   std::shared_ptr<const features::FeatureSource> source,
                   double threshold)
    : ner_(std::move(ner)),
      relex_(std::move(relex)),
      source_(std::move(source)),
      threshold_(threshold) {
  if (!ner_ || !relex_ || !source_) {
    throw Error(ErrorKind::kConfig, "pipeline needs both models and a source");
  }
  CheckMatch("entity", ner_->backend(), ner_->dim(), *source_);
  CheckMatch("relation", relex_->backend(), relex_->dim(), *source_);
}

Doc Pipeline::Annotate(const Doc &doc) const {
  Doc out = ner::Decode(doc, *ner_, *source_);
  return relex::Annotate(out, *relex_, *source_, threshold_);
}

Doc Pipeline::AnnotateText(const std::string &id,
                           const std::string &text) const {
  return Annotate(MakeDoc(id, text, tokenizer_));
}

std::string SafeFileStem(const std::string &doc_id) {
  std::string stem = doc_id;
  std::replace(stem.begin(), stem.end(), '/', '_');
  std::replace(stem.begin(), stem.end(), ':', '_');
  if (stem.empty() || stem == "." || stem == "..") stem = "_" + stem;
  return stem;
}

std::vector<TabulateOutput> TabulateBatch(const std::vector<Doc> &docs,
                                          const Pipeline *pipeline,
                                          const std::string &out_dir,
                                          int jobs) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorKind::kIo, "cannot create " + out_dir + ": " +
                                    ec.message());
  }
  std::vector<TabulateOutput> outputs(docs.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::string> failures(docs.size());
  auto work = [&] {
    for (std::size_t i = next++; i < docs.size(); i = next++) {
      try {
        const Doc annotated = pipeline ? pipeline->Annotate(docs[i]) : docs[i];
        TabulateOutput &out = outputs[i];
        out.doc_id = docs[i].id;
        out.table = tabulate::AssembleTable(annotated);
        out.path = (fs::path(out_dir) / (SafeFileStem(docs[i].id) + ".csv"))
                       .string();
        std::ofstream file(out.path, std::ios::binary);
        file << tabulate::EmitCsv(out.table);
        if (!file) failures[i] = "cannot write " + out.path;
      } catch (const std::exception &e) {
        failures[i] = docs[i].id + ": " + e.what();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, docs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (std::thread &t : pool) t.join();
  for (const std::string &failure : failures) {
    if (!failure.empty()) throw Error(ErrorKind::kIo, failure);
  }

  const std::string manifest = (fs::path(out_dir) / "manifest.tsv").string();
  std::ofstream file(manifest, std::ios::binary);
  for (const TabulateOutput &out : outputs) {
    file << out.doc_id << '\t' << out.path << '\n';
  }
  if (!file) throw Error(ErrorKind::kIo, "cannot write " + manifest);
  return outputs;
}

}  // namespace trialtab
