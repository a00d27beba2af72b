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
#include "trialtab/features.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trialtab/error.h"

namespace trialtab::features {
namespace {

using json = nlohmann::json;

char ShapeClass(char c) {
  if (c >= '0' && c <= '9') return 'd';
  if (c >= 'A' && c <= 'Z') return 'X';
  if (c >= 'a' && c <= 'z') return 'x';
  if (static_cast<unsigned char>(c) >= 0x80) return 'x';
  return c;
}

std::string Prefix(const std::string &s, std::size_t n) {
  return s.substr(0, std::min(n, s.size()));
}

std::string Suffix(const std::string &s, std::size_t n) {
  return s.size() <= n ? s : s.substr(s.size() - n);
}

void CheckIndex(const Doc &doc, int index) {
  if (index < 0 || index >= doc.num_tokens()) {
    throw Error(ErrorKind::kRange,
                "token index " + std::to_string(index) + " outside doc " +
                    doc.id + " of " + std::to_string(doc.num_tokens()) +
                    " tokens");
  }
}

// Feature names for every token, sharing the lower-cased token list.
std::vector<std::string> NamesFor(const std::vector<std::string> &lower,
                                  const Doc &doc, int index,
                                  const HashOptions &options) {
  const Lexicon &units =
      options.units != nullptr ? *options.units : Lexicon::DefaultUnits();
  const std::string &word = lower[index];
  std::vector<std::string> names;
  names.reserve(8 + 2 * options.window);
  names.push_back("w=" + word);
  names.push_back("shape=" + WordShape(doc.tokens[index].text));
  names.push_back("pre=" + Prefix(word, 3));
  names.push_back("suf=" + Suffix(word, 3));
  if (IsNumeric(word)) names.push_back("numeric");
  if (units.Covers(lower, index)) names.push_back("unit");
  const int n = static_cast<int>(lower.size());
  for (int offset = -options.window; offset <= options.window; ++offset) {
    if (offset == 0) continue;
    const int j = index + offset;
    std::string form = j < 0 ? "<s>" : j >= n ? "</s>" : lower[j];
    names.push_back("w" + std::string(offset > 0 ? "+" : "") +
                    std::to_string(offset) + "=" + form);
  }
  return names;
}

std::vector<std::string> LowerForms(const Doc &doc) {
  std::vector<std::string> lower;
  lower.reserve(doc.tokens.size());
  for (const Token &tok : doc.tokens) lower.push_back(ToLower(tok.text));
  return lower;
}

SparseVector Bucketize(const std::vector<std::uint64_t> &hashes,
                       int bucket_bits) {
  const std::uint64_t mask = (std::uint64_t{1} << bucket_bits) - 1;
  SparseVector out;
  out.reserve(hashes.size());
  for (std::uint64_t h : hashes) {
    out.push_back({static_cast<std::uint32_t>(h & mask), 1.0f});
  }
  std::sort(out.begin(), out.end(),
            [](const SparseEntry &a, const SparseEntry &b) {
              return a.bucket < b.bucket;
            });
  SparseVector merged;
  for (const SparseEntry &e : out) {
    if (!merged.empty() && merged.back().bucket == e.bucket) {
      merged.back().weight += e.weight;
    } else {
      merged.push_back(e);
    }
  }
  return merged;
}

}  // namespace

std::string_view ToString(Backend backend) {
  return backend == Backend::kHashed ? "hashed" : "dense";
}

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t MixSlot(std::uint64_t hash, std::uint32_t slot) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= (hash >> (8 * i)) & 0xFF;
    h *= 0x100000001b3ULL;
  }
  for (int i = 0; i < 4; ++i) {
    h ^= (slot >> (8 * i)) & 0xFF;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string WordShape(std::string_view word) {
  std::string shape;
  char last = 0;
  int run = 0;
  for (char c : word) {
    char cls = ShapeClass(c);
    if (cls == last) {
      ++run;
    } else {
      run = 0;
      last = cls;
    }
    if (run < 4) shape += cls;
  }
  return shape;
}

bool IsNumeric(std::string_view word) {
  if (!word.empty() && (word.front() == '-' || word.front() == '+')) {
    word.remove_prefix(1);
  }
  bool digit = false;
  for (char c : word) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return digit;
}

std::vector<std::string> TokenFeatureNames(const Doc &doc, int index,
                                           const HashOptions &options) {
  CheckIndex(doc, index);
  return NamesFor(LowerForms(doc), doc, index, options);
}

SparseVector HashTokenFeatures(const Doc &doc, int index,
                               const HashOptions &options) {
  std::vector<std::uint64_t> hashes;
  for (const std::string &name : TokenFeatureNames(doc, index, options)) {
    hashes.push_back(Fnv1a64(name));
  }
  return Bucketize(hashes, options.bucket_bits);
}

SparseVector PoolMean(std::span<const SparseVector> vectors) {
  if (vectors.empty()) {
    throw Error(ErrorKind::kContract, "cannot pool an empty vector list");
  }
  std::map<std::uint32_t, double> sums;
  for (const SparseVector &v : vectors) {
    for (const SparseEntry &e : v) sums[e.bucket] += e.weight;
  }
  const double n = static_cast<double>(vectors.size());
  SparseVector out;
  out.reserve(sums.size());
  for (const auto &[bucket, sum] : sums) {
    out.push_back({bucket, static_cast<float>(sum / n)});
  }
  return out;
}

DenseVector PoolMean(std::span<const DenseVector> vectors) {
  if (vectors.empty()) {
    throw Error(ErrorKind::kContract, "cannot pool an empty vector list");
  }
  const std::size_t dim = vectors.front().size();
  std::vector<double> sums(dim, 0.0);
  for (const DenseVector &v : vectors) {
    if (v.size() != dim) {
      throw Error(ErrorKind::kContract, "dense vectors differ in dimension");
    }
    for (std::size_t i = 0; i < dim; ++i) sums[i] += v[i];
  }
  DenseVector out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    out[i] = static_cast<float>(sums[i] / static_cast<double>(vectors.size()));
  }
  return out;
}

TokenVector PoolMean(std::span<const TokenVector> vectors) {
  if (vectors.empty()) {
    throw Error(ErrorKind::kContract, "cannot pool an empty vector list");
  }
  if (std::holds_alternative<SparseVector>(vectors.front())) {
    std::vector<SparseVector> sparse;
    for (const TokenVector &v : vectors) {
      if (!std::holds_alternative<SparseVector>(v)) {
        throw Error(ErrorKind::kContract, "cannot pool mixed representations");
      }
      sparse.push_back(std::get<SparseVector>(v));
    }
    return PoolMean(std::span<const SparseVector>(sparse));
  }
  std::vector<DenseVector> dense;
  for (const TokenVector &v : vectors) {
    if (!std::holds_alternative<DenseVector>(v)) {
      throw Error(ErrorKind::kContract, "cannot pool mixed representations");
    }
    dense.push_back(std::get<DenseVector>(v));
  }
  return PoolMean(std::span<const DenseVector>(dense));
}

EmbeddingStore EmbeddingStore::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

EmbeddingStore EmbeddingStore::Parse(std::string_view contents) {
  EmbeddingStore store;
  std::istringstream in{std::string(contents)};
  std::string line;
  int line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "embedding line " + std::to_string(line_number);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error &e) {
      throw Error(ErrorKind::kFormat, where + ": " + e.what());
    }
    try {
      if (!header_seen) {
        if (!record.contains("format_version")) {
          throw Error(ErrorKind::kFormat, where + ": missing header record");
        }
        if (record.at("format_version").get<int>() != 1) {
          throw Error(ErrorKind::kFormat, where + ": unsupported version");
        }
        store.dim_ = record.at("dim").get<int>();
        if (store.dim_ <= 0) {
          throw Error(ErrorKind::kFormat, where + ": dim must be positive");
        }
        header_seen = true;
        continue;
      }
      if (record.at("dim").get<int>() != store.dim_) {
        throw Error(ErrorKind::kFormat,
                    where + ": record dim differs from header dim " +
                        std::to_string(store.dim_));
      }
      std::vector<DenseVector> vectors;
      for (const json &v : record.at("vectors")) {
        DenseVector dense = v.get<DenseVector>();
        if (static_cast<int>(dense.size()) != store.dim_) {
          throw Error(ErrorKind::kFormat,
                      where + ": vector of length " +
                          std::to_string(dense.size()) + ", expected " +
                          std::to_string(store.dim_));
        }
        vectors.push_back(std::move(dense));
      }
      store.entries_[record.at("id").get<std::string>()] = std::move(vectors);
    } catch (const json::exception &e) {
      throw Error(ErrorKind::kFormat, where + ": " + e.what());
    }
  }
  return store;
}

void EmbeddingStore::Add(std::string id, std::vector<DenseVector> vectors) {
  for (const DenseVector &v : vectors) {
    if (static_cast<int>(v.size()) != dim_) {
      throw Error(ErrorKind::kFormat, "vector for " + id + " has length " +
                                          std::to_string(v.size()));
    }
  }
  entries_[std::move(id)] = std::move(vectors);
}

const std::vector<DenseVector> *EmbeddingStore::Find(
    std::string_view id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

const std::vector<DenseVector> &EmbeddingStore::Aligned(const Doc &doc) const {
  const std::vector<DenseVector> *vectors = Find(doc.id);
  if (vectors == nullptr) {
    throw Error(ErrorKind::kAlignment, "no embeddings for doc " + doc.id);
  }
  if (vectors->size() != doc.tokens.size()) {
    throw Error(ErrorKind::kAlignment,
                "doc " + doc.id + " has " + std::to_string(doc.tokens.size()) +
                    " tokens but " + std::to_string(vectors->size()) +
                    " embedding vectors");
  }
  return *vectors;
}

TokenVector FeatureSource::TokenAt(const DocFeatures &features,
                                   int index) const {
  if (index < 0 || index >= features.num_tokens()) {
    throw Error(ErrorKind::kRange, "token index " + std::to_string(index) +
                                       " outside extracted features");
  }
  if (features.backend == Backend::kDense) return features.vectors[index];
  return Bucketize(features.hashes[index], dim());
}

HashedFeatureSource::HashedFeatureSource(HashOptions options)
    : options_(options) {
  if (options_.bucket_bits < 1 || options_.bucket_bits > 30) {
    throw Error(ErrorKind::kConfig, "bucket bits must lie in [1, 30]");
  }
}

DocFeatures HashedFeatureSource::Extract(const Doc &doc) const {
  DocFeatures features;
  features.backend = Backend::kHashed;
  const std::vector<std::string> lower = LowerForms(doc);
  features.hashes.resize(doc.tokens.size());
  for (int i = 0; i < doc.num_tokens(); ++i) {
    for (const std::string &name : NamesFor(lower, doc, i, options_)) {
      features.hashes[i].push_back(Fnv1a64(name));
    }
  }
  return features;
}

EmbeddingFeatureSource::EmbeddingFeatureSource(
    std::shared_ptr<const EmbeddingStore> store)
    : store_(std::move(store)) {
  if (store_ == nullptr || store_->dim() <= 0) {
    throw Error(ErrorKind::kConfig, "embedding store has no dimension");
  }
}

DocFeatures EmbeddingFeatureSource::Extract(const Doc &doc) const {
  DocFeatures features;
  features.backend = Backend::kDense;
  features.vectors = store_->Aligned(doc);
  return features;
}

}  // namespace trialtab::features
