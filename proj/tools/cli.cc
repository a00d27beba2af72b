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
#include "cli.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trialtab/corpus/annotation_io.h"
#include "trialtab/corpus/brat.h"
#include "trialtab/corpus/pubmed.h"
#include "trialtab/corpus/segment.h"
#include "trialtab/corpus/select.h"
#include "trialtab/corpus/split.h"
#include "trialtab/error.h"
#include "trialtab/evaluate.h"
#include "trialtab/features.h"
#include "trialtab/ner.h"
#include "trialtab/pipeline.h"
#include "trialtab/relex.h"
#include "trialtab/service.h"
#include "trialtab/tabulate.h"
#include "trialtab/tokenizer.h"

namespace trialtab::cli {
namespace {

namespace fs = std::filesystem;

// Flat key=value run description, written next to a command's outputs.
class ConfigEcho {
 public:
  template <typename T>
  void Set(const std::string &key, const T &value) {
    std::ostringstream text;
    text << value;
    lines_.push_back(key + "=" + text.str());
  }
  void Append(const std::string &lines) {
    std::istringstream in(lines);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) lines_.push_back(line);
    }
  }
  std::string Text() const {
    std::string text;
    for (const std::string &line : lines_) text += line + "\n";
    return text;
  }
  void Emit(const std::string &path, std::ostream &err) const {
    err << Text();
    if (path.empty()) return;
    std::ofstream file(path, std::ios::binary);
    file << Text();
    if (!file) throw Error(ErrorKind::kIo, "cannot write " + path);
  }

 private:
  std::vector<std::string> lines_;
};

std::string ReadText(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void WriteText(const std::string &path, const std::string &text) {
  if (fs::path(path).has_parent_path()) {
    fs::create_directories(fs::path(path).parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
}

std::vector<std::string> ReadLines(const std::string &path) {
  std::istringstream in(ReadText(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> SplitList(const std::string &text, char sep) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<Doc> LoadDocs(const std::string &path) {
  return corpus::FilterRejected(corpus::ReadAnnotations(path));
}

std::string LabelTotals(const std::vector<Doc> &docs) {
  std::map<std::string, long> totals;
  for (EntityLabel l : kEntityLabels) totals[std::string(ToString(l))] = 0;
  for (RelationLabel l : kRelationLabels) totals[std::string(ToString(l))] = 0;
  for (const Doc &doc : docs) {
    for (const EntitySpan &s : doc.entities) ++totals[std::string(ToString(s.label))];
    for (const RelationEdge &e : doc.relations) {
      ++totals[std::string(ToString(e.label))];
    }
  }
  std::string text = "docs=" + std::to_string(docs.size()) + "\n";
  for (const auto &[label, count] : totals) {
    text += "count." + label + "=" + std::to_string(count) + "\n";
  }
  return text;
}

// "hashed" or "embeddings:<path>".
struct BackendSpec {
  std::string text = "hashed";
  int bucket_bits = features::kDefaultBucketBits;

  std::shared_ptr<const features::FeatureSource> Make() const {
    if (text == "hashed") {
      features::HashOptions options;
      options.bucket_bits = bucket_bits;
      return std::make_shared<features::HashedFeatureSource>(options);
    }
    const std::string prefix = "embeddings:";
    if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size()) {
      auto store = std::make_shared<features::EmbeddingStore>(
          features::EmbeddingStore::Load(text.substr(prefix.size())));
      return std::make_shared<features::EmbeddingFeatureSource>(store);
    }
    throw Error(ErrorKind::kConfig, "unknown backend \"" + text +
                                        "\"; use hashed or embeddings:<path>");
  }

  // A source that fits a loaded model: hashed models carry their own
  // bucket count.
  std::shared_ptr<const features::FeatureSource> For(
      features::Backend backend, int dim) const {
    if (backend == features::Backend::kHashed) {
      BackendSpec hashed;
      hashed.bucket_bits = dim;
      return hashed.Make();
    }
    return Make();
  }
};

void AddBackendOptions(CLI::App *app, BackendSpec *spec) {
  app->add_option("--backend", spec->text,
                  "Feature backend: hashed or embeddings:<path>");
  app->add_option("--bucket-bits", spec->bucket_bits,
                  "Hash buckets as a power of two (hashed backend)")
      ->check(CLI::Range(8, 26));
}

struct Models {
  std::shared_ptr<const ner::NerModel> ner;
  std::shared_ptr<const relex::RelexModel> relex;
  std::shared_ptr<const features::FeatureSource> source;
};

Models LoadModels(const std::string &ner_path, const std::string &re_path,
                  const BackendSpec &backend) {
  Models models;
  if (!ner_path.empty()) {
    models.ner = std::make_shared<ner::NerModel>(ner::NerModel::Load(ner_path));
    models.source = backend.For(models.ner->backend(), models.ner->dim());
  }
  if (!re_path.empty()) {
    models.relex =
        std::make_shared<relex::RelexModel>(relex::RelexModel::Load(re_path));
    if (!models.source) {
      models.source = backend.For(models.relex->backend(), models.relex->dim());
    }
  }
  return models;
}

eval::TableSet TablesFromDocs(const std::vector<Doc> &docs) {
  eval::TableSet tables;
  for (const Doc &doc : docs) {
    tables[SafeFileStem(doc.id)] = tabulate::AssembleTable(doc);
  }
  return tables;
}

eval::TableSet TablesFromDir(const std::string &dir) {
  eval::TableSet tables;
  for (const fs::directory_entry &entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".csv") continue;
    const std::string stem = entry.path().stem().string();
    try {
      tables[stem] = tabulate::ParseCsv(ReadText(entry.path().string()), stem);
    } catch (const Error &e) {
      throw Error(e.kind(), entry.path().string() + ": " + e.what());
    }
  }
  return tables;
}

eval::TableSet LoadTables(const std::string &path) {
  if (fs::is_directory(path)) return TablesFromDir(path);
  return TablesFromDocs(LoadDocs(path));
}

// ---------------------------------------------------------------------------

struct IngestBratArgs {
  std::string dir;
  std::string domain;
  std::string mapping;
  std::string out;
};

int IngestBrat(const IngestBratArgs &args, std::ostream &out,
               std::ostream &err) {
  const corpus::LabelMapping mapping =
      args.mapping.empty() ? corpus::LabelMapping::EbmNlpDefault()
                           : corpus::LabelMapping::Load(args.mapping);
  std::vector<fs::path> texts;
  for (const fs::directory_entry &entry : fs::directory_iterator(args.dir)) {
    if (entry.path().extension() == ".txt") texts.push_back(entry.path());
  }
  std::sort(texts.begin(), texts.end());
  const Tokenizer tokenizer;
  corpus::AlignmentReport report;
  std::vector<Doc> docs;
  int abstracts = 0;
  for (const fs::path &text : texts) {
    fs::path ann = text;
    ann.replace_extension(".ann");
    if (!fs::exists(ann)) {
      err << "warning: no annotation file for " << text.string() << "\n";
      continue;
    }
    const corpus::BratDocument brat = corpus::MapSourceLabels(
        corpus::ReadBrat(text.string(), ann.string()), mapping);
    for (Doc &doc : corpus::AbstractToDocs(brat, args.domain, tokenizer,
                                           &report)) {
      docs.push_back(std::move(doc));
    }
    ++abstracts;
  }
  corpus::WriteAnnotations(docs, args.out);
  ConfigEcho echo;
  echo.Set("command", "ingest-brat");
  echo.Set("input", args.dir);
  echo.Set("domain", args.domain);
  echo.Set("mapping", args.mapping.empty() ? "ebm-nlp-default" : args.mapping);
  echo.Set("abstracts", abstracts);
  echo.Set("dropped_cross_sentence", report.dropped_cross_sentence);
  echo.Set("dropped_overlap", report.dropped_overlap);
  echo.Set("widened", report.widened);
  echo.Emit(args.out + ".config", err);
  out << LabelTotals(docs);
  return kExitOk;
}

struct IngestAnnotationsArgs {
  std::vector<std::string> inputs;
  std::string out;
  bool drop_rejected = false;
};

int IngestAnnotations(const IngestAnnotationsArgs &args, std::ostream &out,
                      std::ostream &err) {
  std::vector<Doc> docs;
  std::set<std::string> ids;
  for (const std::string &path : args.inputs) {
    for (Doc &doc : corpus::ReadAnnotations(path)) {
      if (!ids.insert(doc.id).second) {
        throw Error(ErrorKind::kIntegrity,
                    path + ": duplicate doc id " + doc.id);
      }
      docs.push_back(std::move(doc));
    }
  }
  if (args.drop_rejected) docs = corpus::FilterRejected(std::move(docs));
  if (!args.out.empty()) {
    corpus::WriteAnnotations(docs, args.out);
    ConfigEcho echo;
    echo.Set("command", "ingest-annotations");
    echo.Set("inputs", args.inputs.size());
    echo.Set("drop_rejected", args.drop_rejected);
    echo.Emit(args.out + ".config", err);
  }
  out << LabelTotals(docs);
  return kExitOk;
}

struct PartitionArgs {
  std::string pmids;
  std::string term;
  std::string cache;
  std::string out;
  std::string base_url = "https://eutils.ncbi.nlm.nih.gov";
  std::string api_key;
  bool offline = false;
  int batches = 10;
};

int PartitionDomains(const PartitionArgs &args, std::ostream &out,
                     std::ostream &err) {
  const std::vector<std::string> pmids = ReadLines(args.pmids);
  std::optional<corpus::QueryCache> cache;
  if (!args.cache.empty()) cache.emplace(args.cache);
  std::unique_ptr<corpus::EntrezClient> client;
  if (!args.offline) {
    client = std::make_unique<corpus::EntrezClient>(args.base_url,
                                                     args.api_key);
  }
  corpus::PartitionOptions options;
  options.num_batches = args.batches;
  const std::set<std::string> matches = corpus::PartitionByDomain(
      pmids, args.term, client.get(), cache ? &*cache : nullptr, options);
  std::string text;
  for (const std::string &pmid : matches) text += pmid + "\n";
  if (args.out.empty()) {
    out << text;
  } else {
    WriteText(args.out, text);
  }
  ConfigEcho echo;
  echo.Set("command", "partition-domains");
  echo.Set("term", args.term);
  echo.Set("pmids", pmids.size());
  echo.Set("batches", args.batches);
  echo.Set("offline", args.offline);
  echo.Set("matches", matches.size());
  echo.Emit(args.out.empty() ? "" : args.out + ".config", err);
  return kExitOk;
}

struct SegmentArgs {
  std::vector<std::string> inputs;
  std::string domain;
  std::string out;
  bool all_sentences = false;
};

int Segment(const SegmentArgs &args, std::ostream &out, std::ostream &err) {
  const Tokenizer tokenizer;
  std::vector<Doc> docs;
  int low_confidence = 0;
  for (const std::string &path : args.inputs) {
    const std::string pmid = fs::path(path).stem().string();
    const std::string text = ReadText(path);
    if (args.all_sentences) {
      const corpus::Segmentation seg = corpus::SegmentSentences(text);
      for (std::size_t i = 0; i < seg.sentences.size(); ++i) {
        Doc doc = MakeDoc(MakeDocId(pmid, static_cast<int>(i)),
                          seg.sentences[i].text, tokenizer);
        doc.meta.pmid = pmid;
        doc.meta.domain = args.domain;
        doc.meta.answer = Answer::kPending;
        docs.push_back(std::move(doc));
      }
      continue;
    }
    corpus::AbstractRecord record{pmid, args.domain,
                                  corpus::SplitSections(text)};
    for (Doc &doc : corpus::SelectResultSentences(record, tokenizer)) {
      low_confidence += doc.meta.low_confidence ? 1 : 0;
      docs.push_back(std::move(doc));
    }
  }
  corpus::WriteAnnotations(docs, args.out);
  ConfigEcho echo;
  echo.Set("command", "segment");
  echo.Set("abstracts", args.inputs.size());
  echo.Set("domain", args.domain);
  echo.Set("all_sentences", args.all_sentences);
  echo.Set("sentences", docs.size());
  echo.Set("low_confidence", low_confidence);
  echo.Emit(args.out + ".config", err);
  out << "sentences=" << docs.size() << "\n";
  return kExitOk;
}

struct SplitArgs {
  std::string in;
  std::string out_dir;
  std::string ratios = "0.7,0.1,0.2";
  std::uint64_t seed = 0;
};

corpus::SplitRatios ParseRatios(const std::string &text) {
  const std::vector<std::string> parts = SplitList(text, ',');
  if (parts.size() != 3) {
    throw Error(ErrorKind::kConfig, "--ratios needs three comma-separated values");
  }
  try {
    return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
  } catch (const std::exception &) {
    throw Error(ErrorKind::kConfig, "--ratios values must be numbers");
  }
}

int Split(const SplitArgs &args, std::ostream &out, std::ostream &err) {
  const corpus::DatasetSplit split =
      corpus::SplitDataset(LoadDocs(args.in), ParseRatios(args.ratios), args.seed);
  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  corpus::WriteAnnotations(split.train, (dir / "train.jsonl").string());
  corpus::WriteAnnotations(split.dev, (dir / "dev.jsonl").string());
  corpus::WriteAnnotations(split.test, (dir / "test.jsonl").string());
  WriteText((dir / "manifest.tsv").string(), corpus::ManifestText(split));
  for (const std::string &warning : split.warnings) {
    err << "warning: " << warning << "\n";
  }
  ConfigEcho echo;
  echo.Set("command", "split");
  echo.Set("input", args.in);
  echo.Set("seed", args.seed);
  echo.Set("ratios", args.ratios);
  echo.Set("train_docs", split.train.size());
  echo.Set("dev_docs", split.dev.size());
  echo.Set("test_docs", split.test.size());
  echo.Emit((dir / "config.txt").string(), err);
  out << "train=" << split.train.size() << " dev=" << split.dev.size()
      << " test=" << split.test.size() << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string task;
  std::string train;
  std::string dev;
  std::string out;
  std::optional<double> fraction;
  std::string domains;
  int per_domain = 0;
  std::string holdout;
  BackendSpec backend;
  TrainConfig config;
  std::optional<double> learning_rate;
  int max_pair_distance = relex::kDefaultMaxPairDistance;
};

int Train(TrainArgs args, std::ostream &out, std::ostream &err) {
  ConfigEcho echo;
  echo.Set("command", "train");
  echo.Set("task", args.task);
  echo.Set("train_input", args.train);
  args.config.learning_rate = args.learning_rate;
  std::vector<Doc> train = LoadDocs(args.train);
  std::vector<Doc> dev;
  if (!args.dev.empty()) dev = LoadDocs(args.dev);
  const std::uint64_t seed = args.config.seed;

  if (!args.holdout.empty()) {
    corpus::HoldoutSplit holdout = corpus::DomainHoldout(train, args.holdout);
    const std::string test_path = args.out + ".holdout-test.jsonl";
    corpus::WriteAnnotations(holdout.test, test_path);
    echo.Set("holdout", args.holdout);
    echo.Set("holdout_test_docs", holdout.test.size());
    echo.Set("holdout_test_path", test_path);
    if (args.dev.empty()) {
      // Train and dev keep the 70:10 proportion of the default split.
      corpus::DatasetSplit split =
          corpus::SplitDataset(holdout.pool, {0.875, 0.125, 0.0}, seed);
      train = std::move(split.train);
      dev = std::move(split.dev);
    } else {
      train = std::move(holdout.pool);
    }
  }
  if (!args.domains.empty()) {
    const std::vector<std::string> domains = SplitList(args.domains, ',');
    int per_domain = args.per_domain;
    if (per_domain <= 0) {
      per_domain = static_cast<int>(train.size());
      for (const std::string &domain : domains) {
        const int count = static_cast<int>(std::count_if(
            train.begin(), train.end(),
            [&](const Doc &d) { return d.meta.domain == domain; }));
        per_domain = std::min(per_domain, count);
      }
    }
    train = corpus::BuildMixedPool(train, domains, per_domain, seed);
    echo.Set("domains", args.domains);
    echo.Set("per_domain", per_domain);
  }
  if (args.fraction) {
    const std::size_t pool = train.size();
    train = corpus::StratifyFraction(train, *args.fraction, seed);
    echo.Set("fraction", *args.fraction);
    echo.Set("fraction_pool_docs", pool);
  }
  echo.Set("train_docs", train.size());
  echo.Set("dev_docs", dev.size());

  const std::shared_ptr<const features::FeatureSource> source =
      args.backend.Make();
  echo.Set("backend", args.backend.text);
  echo.Set("feature_dim", source->dim());
  echo.Append(args.config.Echo(source->backend()));

  TrainLog log;
  if (args.task == "ner") {
    ner::NerTrainResult result = ner::TrainNer(train, dev, args.config, *source);
    result.model.Save(args.out);
    log = std::move(result.log);
  } else {
    echo.Set("max_pair_distance", args.max_pair_distance);
    relex::RelexTrainResult result = relex::TrainRe(
        train, dev, args.config, *source, args.max_pair_distance);
    result.model.Save(args.out);
    log = std::move(result.log);
  }
  echo.Set("steps_run", log.steps_run);
  echo.Set("best_step", log.best_step);
  echo.Set("stop_reason", log.stop_reason);
  if (log.best_dev_f1) echo.Set("best_dev_f1", *log.best_dev_f1);
  std::ofstream log_file(args.out + ".log.jsonl", std::ios::binary);
  log.Write(log_file);
  echo.Emit(args.out + ".config", err);
  out << "model=" << args.out << " steps=" << log.steps_run << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string task;
  std::string gold;
  std::string pred;
  std::string ner_model;
  std::string re_model;
  std::string out;
  BackendSpec backend;
  double threshold = relex::kDefaultThreshold;
  int jobs = 1;
};

std::vector<Doc> Predict(const std::string &task, const std::vector<Doc> &gold,
                         const Models &models, double threshold, int jobs) {
  const bool need_ner = task != "re-gold";
  const bool need_re = task != "ner";
  if ((need_ner && !models.ner) || (need_re && !models.relex)) {
    throw Error(ErrorKind::kConfig,
                "task " + task + " needs --pred or the " +
                    (need_ner && !models.ner ? "--ner-model" : "--re-model") +
                    " to predict with");
  }
  if (task == "ner") {
    return ner::DecodeAll(gold, *models.ner, *models.source, jobs);
  }
  if (task == "re-gold") {
    std::vector<Doc> pred;
    for (const Doc &doc : gold) {
      pred.push_back(relex::Annotate(doc, *models.relex, *models.source,
                                     threshold));
    }
    return pred;
  }
  const Pipeline pipeline(models.ner, models.relex, models.source, threshold);
  std::vector<Doc> pred;
  for (const Doc &doc : gold) pred.push_back(pipeline.Annotate(doc));
  return pred;
}

int Evaluate(const EvaluateArgs &args, std::ostream &out, std::ostream &err) {
  eval::MetricsReport report;
  const bool tables = args.task == "tab-strict" || args.task == "tab-relaxed";
  if (tables && !args.pred.empty()) {
    const eval::TableSet pred = LoadTables(args.pred);
    const eval::TableSet gold = LoadTables(args.gold);
    report = args.task == "tab-strict" ? eval::EvalTabStrict(pred, gold)
                                       : eval::EvalTabRelaxed(pred, gold);
  } else {
    const std::vector<Doc> gold = LoadDocs(args.gold);
    std::vector<Doc> pred;
    if (!args.pred.empty()) {
      pred = LoadDocs(args.pred);
    } else {
      pred = Predict(args.task, gold,
                     LoadModels(args.ner_model, args.re_model, args.backend),
                     args.threshold, args.jobs);
    }
    if (args.task == "ner") {
      report = eval::EvalNer(pred, gold);
    } else if (args.task == "re-gold") {
      report = eval::EvalReGold(pred, gold);
    } else if (args.task == "joint") {
      report = eval::EvalJoint(pred, gold);
    } else if (args.task == "tab-strict") {
      report = eval::EvalTabStrict(TablesFromDocs(pred), TablesFromDocs(gold));
    } else {
      report = eval::EvalTabRelaxed(TablesFromDocs(pred), TablesFromDocs(gold));
    }
  }
  if (args.pred.empty()) {
    std::ostringstream threshold;
    threshold << args.threshold;
    report.config["threshold"] = threshold.str();
  }
  out << report.FormatTable();
  ConfigEcho echo;
  echo.Set("command", "evaluate");
  echo.Set("task", args.task);
  echo.Set("gold", args.gold);
  echo.Set("pred", args.pred.empty() ? "<models>" : args.pred);
  if (args.pred.empty()) {
    echo.Set("ner_model", args.ner_model);
    echo.Set("re_model", args.re_model);
    echo.Set("threshold", args.threshold);
  }
  if (!args.out.empty()) WriteText(args.out, report.ToJson());
  echo.Emit(args.out.empty() ? "" : args.out + ".config", err);
  return kExitOk;
}

struct TabulateArgs {
  std::string in;
  std::string sentences;
  std::string out_dir;
  std::string ner_model;
  std::string re_model;
  BackendSpec backend;
  double threshold = relex::kDefaultThreshold;
  bool gold = false;
  int jobs = 1;
};

int Tabulate(const TabulateArgs &args, std::ostream &out, std::ostream &err) {
  if (args.in.empty() == args.sentences.empty()) {
    throw Error(ErrorKind::kConfig, "give exactly one of --in or --sentences");
  }
  if (args.gold && args.in.empty()) {
    throw Error(ErrorKind::kConfig, "--gold needs annotated docs via --in");
  }
  std::unique_ptr<Pipeline> pipeline;
  if (!args.gold) {
    if (args.ner_model.empty() || args.re_model.empty()) {
      throw Error(ErrorKind::kConfig,
                  "tabulate needs --ner-model and --re-model, or --gold");
    }
    Models models = LoadModels(args.ner_model, args.re_model, args.backend);
    pipeline = std::make_unique<Pipeline>(models.ner, models.relex,
                                          models.source, args.threshold);
  }
  std::vector<Doc> docs;
  if (!args.in.empty()) {
    docs = LoadDocs(args.in);
  } else {
    const Tokenizer tokenizer;
    const std::vector<std::string> lines = ReadLines(args.sentences);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      docs.push_back(
          MakeDoc(MakeDocId("input", static_cast<int>(i)), lines[i], tokenizer));
    }
  }
  const std::vector<TabulateOutput> outputs =
      TabulateBatch(docs, pipeline.get(), args.out_dir, args.jobs);
  ConfigEcho echo;
  echo.Set("command", "tabulate");
  echo.Set("input", args.in.empty() ? args.sentences : args.in);
  echo.Set("mode", args.gold ? "gold-passthrough" : "pipeline");
  if (!args.gold) {
    echo.Set("ner_model", args.ner_model);
    echo.Set("re_model", args.re_model);
    echo.Set("threshold", args.threshold);
  }
  echo.Set("outputs", outputs.size());
  echo.Emit((fs::path(args.out_dir) / "config.txt").string(), err);
  out << "tables=" << outputs.size() << " dir=" << args.out_dir << "\n";
  return kExitOk;
}

struct ConfusionArgs {
  std::string task;
  std::string gold;
  std::string pred;
  std::string ner_model;
  std::string re_model;
  std::string out;
  BackendSpec backend;
  double threshold = relex::kDefaultThreshold;
  bool normalize = false;
  int jobs = 1;
};

int Confusion(const ConfusionArgs &args, std::ostream &out, std::ostream &err) {
  const std::vector<Doc> gold = LoadDocs(args.gold);
  std::vector<Doc> pred;
  if (!args.pred.empty()) {
    pred = LoadDocs(args.pred);
  } else {
    pred = Predict(args.task == "ner" ? "ner" : "re-gold", gold,
                   LoadModels(args.ner_model, args.re_model, args.backend),
                   args.threshold, args.jobs);
  }
  eval::ConfusionMatrix matrix = args.task == "ner"
                                     ? eval::ConfusionNer(pred, gold)
                                     : eval::ConfusionRe(pred, gold);
  if (args.normalize) matrix = matrix.Normalized();
  out << matrix.ToCsv();
  if (!args.out.empty()) WriteText(args.out, matrix.ToCsv());
  ConfigEcho echo;
  echo.Set("command", "confusion");
  echo.Set("task", args.task);
  echo.Set("gold", args.gold);
  echo.Set("pred", args.pred.empty() ? "<models>" : args.pred);
  echo.Set("normalized", args.normalize);
  echo.Emit(args.out.empty() ? "" : args.out + ".config", err);
  return kExitOk;
}

struct ServeArgs {
  std::string ner_model;
  std::string re_model;
  BackendSpec backend;
  std::string host = "127.0.0.1";
  int port = -1;
  std::string data_dir;
  double threshold = relex::kDefaultThreshold;
  std::size_t max_batch = 10000;
};

int Serve(ServeArgs args, std::ostream &out, std::ostream &err) {
  if (args.port < 0) {
    const char *env = std::getenv("TRIALTAB_PORT");
    args.port = env ? std::atoi(env) : 8080;
  }
  if (args.data_dir.empty()) {
    const char *env = std::getenv("TRIALTAB_DATA_DIR");
    args.data_dir = env ? env : "trialtab-data";
  }
  fs::create_directories(args.data_dir);
  std::shared_ptr<const Pipeline> pipeline;
  if (!args.ner_model.empty() || !args.re_model.empty()) {
    if (args.ner_model.empty() || args.re_model.empty()) {
      throw Error(ErrorKind::kConfig,
                  "serve needs both --ner-model and --re-model, or neither");
    }
    Models models = LoadModels(args.ner_model, args.re_model, args.backend);
    pipeline = std::make_shared<Pipeline>(models.ner, models.relex,
                                          models.source, args.threshold);
  }
  const std::string log_path =
      (fs::path(args.data_dir) / "review_log.jsonl").string();
  service::ServiceOptions options;
  options.max_batch = args.max_batch;
  service::ReviewService review(pipeline, service::RecordStore::Open(log_path),
                                options);
  service::HttpServer server(review);
  const int port = server.Bind(args.host, args.port);
  if (port < 0) {
    throw Error(ErrorKind::kTransport, "cannot bind " + args.host + ":" +
                                           std::to_string(args.port));
  }
  ConfigEcho echo;
  echo.Set("command", "serve");
  echo.Set("host", args.host);
  echo.Set("port", port);
  echo.Set("data_dir", args.data_dir);
  echo.Set("models_loaded", pipeline != nullptr);
  echo.Set("max_batch", args.max_batch);
  echo.Emit((fs::path(args.data_dir) / "serve.config").string(), err);
  out << "listening on " << args.host << ":" << port << std::endl;
  server.ListenAfterBind();
  return kExitOk;
}

void AddTrainConfigOptions(CLI::App *app, TrainArgs *args) {
  TrainConfig &c = args->config;
  app->add_option("--seed", c.seed, "Seed for shuffling, dropout and sampling");
  app->add_option("--batch-size", c.batch_size)->check(CLI::PositiveNumber);
  app->add_option("--dropout", c.dropout)->check(CLI::Range(0.0, 0.99));
  app->add_option("--learning-rate", args->learning_rate)
      ->check(CLI::PositiveNumber);
  app->add_option("--patience", c.patience_steps)->check(CLI::PositiveNumber);
  app->add_option("--max-steps", c.max_steps)->check(CLI::PositiveNumber);
  app->add_option("--eval-interval", c.eval_interval)
      ->check(CLI::PositiveNumber);
}

}  // namespace

int Run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"Extract, relate and tabulate trial result sentences", "trialtab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "trialtab 0.1.0");

  IngestBratArgs brat;
  CLI::App *ingest_brat =
      app.add_subcommand("ingest-brat", "Convert brat .txt/.ann pairs to annotation records");
  ingest_brat->add_option("--dir", brat.dir, "Directory of .txt/.ann pairs")
      ->required()->check(CLI::ExistingDirectory);
  ingest_brat->add_option("--domain", brat.domain, "Domain tag")->required();
  ingest_brat->add_option("--mapping", brat.mapping,
                          "Label mapping file (source=INTV|OC|MEAS|drop)")
      ->check(CLI::ExistingFile);
  ingest_brat->add_option("--out", brat.out)->required();

  IngestAnnotationsArgs ingest;
  CLI::App *ingest_annotations = app.add_subcommand(
      "ingest-annotations", "Validate, merge and count annotation files");
  ingest_annotations->add_option("--in", ingest.inputs)
      ->required()->check(CLI::ExistingFile);
  ingest_annotations->add_option("--out", ingest.out);
  ingest_annotations->add_flag("--drop-rejected", ingest.drop_rejected);

  PartitionArgs partition;
  CLI::App *partition_domains = app.add_subcommand(
      "partition-domains", "Select pmids whose indexed record matches a term");
  partition_domains->add_option("--pmids", partition.pmids, "One pmid per line")
      ->required()->check(CLI::ExistingFile);
  partition_domains->add_option("--term", partition.term)->required();
  partition_domains->add_option("--cache", partition.cache, "Query cache directory");
  partition_domains->add_option("--out", partition.out);
  partition_domains->add_option("--batches", partition.batches)
      ->check(CLI::PositiveNumber);
  partition_domains->add_option("--base-url", partition.base_url);
  partition_domains->add_option("--api-key", partition.api_key);
  partition_domains->add_flag("--offline", partition.offline,
                              "Answer from the cache only");

  SegmentArgs segment;
  CLI::App *segment_cmd = app.add_subcommand(
      "segment", "Split abstracts (<pmid>.txt) into result-sentence records");
  segment_cmd->add_option("abstracts", segment.inputs)
      ->required()->check(CLI::ExistingFile);
  segment_cmd->add_option("--domain", segment.domain)->required();
  segment_cmd->add_option("--out", segment.out)->required();
  segment_cmd->add_flag("--all-sentences", segment.all_sentences,
                        "Keep every sentence, not only results");

  SplitArgs split;
  CLI::App *split_cmd =
      app.add_subcommand("split", "Seeded train/dev/test split with manifest");
  split_cmd->add_option("--in", split.in)->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--out-dir", split.out_dir)->required();
  split_cmd->add_option("--seed", split.seed);
  split_cmd->add_option("--ratios", split.ratios, "train,dev,test");

  TrainArgs train;
  CLI::App *train_cmd = app.add_subcommand("train", "Train the ner or re model");
  train_cmd->add_option("task", train.task)
      ->required()->check(CLI::IsMember({"ner", "re"}));
  train_cmd->add_option("--train", train.train)
      ->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--dev", train.dev)->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Model file")->required();
  train_cmd->add_option("--fraction", train.fraction,
                        "Train on this share of the training docs")
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--domains", train.domains,
                        "Comma-separated domains for a capped mixed pool");
  train_cmd->add_option("--per-domain", train.per_domain,
                        "Docs per domain in the mixed pool");
  train_cmd->add_option("--holdout", train.holdout,
                        "Hold this domain out as the test set");
  train_cmd->add_option("--max-pair-distance", train.max_pair_distance)
      ->check(CLI::PositiveNumber);
  AddBackendOptions(train_cmd, &train.backend);
  AddTrainConfigOptions(train_cmd, &train);

  EvaluateArgs evaluate;
  CLI::App *evaluate_cmd = app.add_subcommand(
      "evaluate", "Score predictions (files or fresh model runs) against gold");
  evaluate_cmd->add_option("--task", evaluate.task)
      ->required()
      ->check(CLI::IsMember({"ner", "re-gold", "joint", "tab-strict",
                             "tab-relaxed"}));
  evaluate_cmd->add_option("--gold", evaluate.gold,
                           "Gold records, or a CSV directory for tab tasks")
      ->required()->check(CLI::ExistingPath);
  evaluate_cmd->add_option("--pred", evaluate.pred,
                           "Predicted records, or a CSV directory for tab tasks")
      ->check(CLI::ExistingPath);
  evaluate_cmd->add_option("--ner-model", evaluate.ner_model)
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--re-model", evaluate.re_model)
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--threshold", evaluate.threshold)
      ->check(CLI::Range(0.0, 1.0));
  evaluate_cmd->add_option("--out", evaluate.out, "Report record (JSON)");
  evaluate_cmd->add_option("--jobs", evaluate.jobs)->check(CLI::PositiveNumber);
  AddBackendOptions(evaluate_cmd, &evaluate.backend);

  TabulateArgs tab;
  CLI::App *tabulate_cmd = app.add_subcommand(
      "tabulate", "Write one evidence-table CSV per sentence");
  tabulate_cmd->add_option("--in", tab.in, "Annotation records")
      ->check(CLI::ExistingFile);
  tabulate_cmd->add_option("--sentences", tab.sentences,
                           "Raw sentences, one per line")
      ->check(CLI::ExistingFile);
  tabulate_cmd->add_option("--out-dir", tab.out_dir)->required();
  tabulate_cmd->add_option("--ner-model", tab.ner_model)->check(CLI::ExistingFile);
  tabulate_cmd->add_option("--re-model", tab.re_model)->check(CLI::ExistingFile);
  tabulate_cmd->add_option("--threshold", tab.threshold)
      ->check(CLI::Range(0.0, 1.0));
  tabulate_cmd->add_flag("--gold", tab.gold,
                         "Tabulate the input annotations without models");
  tabulate_cmd->add_option("--jobs", tab.jobs)->check(CLI::PositiveNumber);
  AddBackendOptions(tabulate_cmd, &tab.backend);

  ConfusionArgs confusion;
  CLI::App *confusion_cmd =
      app.add_subcommand("confusion", "Token-level ner or pair-level re confusion matrix");
  confusion_cmd->add_option("task", confusion.task)
      ->required()->check(CLI::IsMember({"ner", "re"}));
  confusion_cmd->add_option("--gold", confusion.gold)
      ->required()->check(CLI::ExistingFile);
  confusion_cmd->add_option("--pred", confusion.pred)->check(CLI::ExistingFile);
  confusion_cmd->add_option("--ner-model", confusion.ner_model)
      ->check(CLI::ExistingFile);
  confusion_cmd->add_option("--re-model", confusion.re_model)
      ->check(CLI::ExistingFile);
  confusion_cmd->add_option("--threshold", confusion.threshold)
      ->check(CLI::Range(0.0, 1.0));
  confusion_cmd->add_flag("--normalize", confusion.normalize,
                          "Divide each gold row by its total");
  confusion_cmd->add_option("--out", confusion.out, "CSV file");
  confusion_cmd->add_option("--jobs", confusion.jobs)->check(CLI::PositiveNumber);
  AddBackendOptions(confusion_cmd, &confusion.backend);

  ServeArgs serve;
  CLI::App *serve_cmd = app.add_subcommand(
      "serve", "Run the extraction and review service (TRIALTAB_PORT, TRIALTAB_DATA_DIR)");
  serve_cmd->add_option("--ner-model", serve.ner_model)->check(CLI::ExistingFile);
  serve_cmd->add_option("--re-model", serve.re_model)->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", serve.host);
  serve_cmd->add_option("--port", serve.port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--data-dir", serve.data_dir);
  serve_cmd->add_option("--threshold", serve.threshold)
      ->check(CLI::Range(0.0, 1.0));
  serve_cmd->add_option("--max-batch", serve.max_batch)
      ->check(CLI::PositiveNumber);
  AddBackendOptions(serve_cmd, &serve.backend);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest_brat->parsed()) return IngestBrat(brat, out, err);
    if (ingest_annotations->parsed()) return IngestAnnotations(ingest, out, err);
    if (partition_domains->parsed()) return PartitionDomains(partition, out, err);
    if (segment_cmd->parsed()) return Segment(segment, out, err);
    if (split_cmd->parsed()) return Split(split, out, err);
    if (train_cmd->parsed()) return Train(train, out, err);
    if (evaluate_cmd->parsed()) return Evaluate(evaluate, out, err);
    if (tabulate_cmd->parsed()) return Tabulate(tab, out, err);
    if (confusion_cmd->parsed()) return Confusion(confusion, out, err);
    if (serve_cmd->parsed()) return Serve(serve, out, err);
  } catch (const Error &e) {
    err << "error [" << ErrorKindName(e.kind()) << "]: " << e.what() << "\n";
    for (const std::string &detail : e.details()) err << "  " << detail << "\n";
    return kExitFailure;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace trialtab::cli
