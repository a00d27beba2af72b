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
#ifndef TRIALTAB_FEATURES_H_
#define TRIALTAB_FEATURES_H_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "trialtab/doc.h"
#include "trialtab/lexicon.h"

namespace trialtab::features {

inline constexpr int kDefaultBucketBits = 20;

struct SparseEntry {
  std::uint32_t bucket = 0;
  float weight = 0.0f;

  bool operator==(const SparseEntry &) const = default;
};

// Sorted by bucket, one entry per bucket.
using SparseVector = std::vector<SparseEntry>;
using DenseVector = std::vector<float>;
using TokenVector = std::variant<SparseVector, DenseVector>;

// Which representation a model consumes. Models never mix backends.
enum class Backend { kHashed, kDense };

std::string_view ToString(Backend backend);

std::uint64_t Fnv1a64(std::string_view data);

// Combines a raw feature hash with a slot tag (e.g. "buffer[1]").
std::uint64_t MixSlot(std::uint64_t hash, std::uint32_t slot);

// spaCy-style word shape: digits -> d, upper -> X, lower -> x, other
// characters kept, runs of one class capped at four ("18.3" -> "dd.d",
// "Latanoprost" -> "Xxxxx").
std::string WordShape(std::string_view word);

bool IsNumeric(std::string_view word);

struct HashOptions {
  int bucket_bits = kDefaultBucketBits;
  int window = 2;
  const Lexicon *units = nullptr;  // defaults to Lexicon::DefaultUnits()
};

// Readable feature strings for one token: lower-case form, shape, 3-char
// prefix and suffix, numeric and unit-lexicon flags and the lower-case
// forms of neighbours within the window. Throws Error(kRange) for a bad
// index.
std::vector<std::string> TokenFeatureNames(const Doc &doc, int index,
                                           const HashOptions &options = {});

// TokenFeatureNames hashed with FNV-1a into 2^bucket_bits buckets.
SparseVector HashTokenFeatures(const Doc &doc, int index,
                               const HashOptions &options = {});

// Elementwise mean; for sparse vectors, the bucketwise mean with absent
// buckets counting as zero. Throws Error(kContract) on empty input or
// mixed representations.
TokenVector PoolMean(std::span<const TokenVector> vectors);
SparseVector PoolMean(std::span<const SparseVector> vectors);
DenseVector PoolMean(std::span<const DenseVector> vectors);

// Precomputed dense vectors keyed by doc id.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(int dim) : dim_(dim) {}

  // Header record {"format_version":1,"dim":D} then one record per
  // sentence {"id":..., "dim":D, "vectors":[[...], ...]}. An empty file is
  // an empty store. Throws Error(kFormat) on dimension mismatches.
  static EmbeddingStore Load(const std::string &path);
  static EmbeddingStore Parse(std::string_view contents);

  void Add(std::string id, std::vector<DenseVector> vectors);

  // nullptr when absent; missing ids are never treated as zero vectors.
  const std::vector<DenseVector> *Find(std::string_view id) const;

  // Throws Error(kAlignment) if the doc has no entry or a different
  // number of vectors than tokens.
  const std::vector<DenseVector> &Aligned(const Doc &doc) const;

  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

 private:
  int dim_ = 0;
  std::map<std::string, std::vector<DenseVector>, std::less<>> entries_;
};

// Per-token scorer inputs of one doc.
struct DocFeatures {
  Backend backend = Backend::kHashed;
  // kHashed: raw 64-bit feature hashes per token.
  std::vector<std::vector<std::uint64_t>> hashes;
  // kDense: one vector per token.
  std::vector<DenseVector> vectors;

  int num_tokens() const {
    return static_cast<int>(backend == Backend::kHashed ? hashes.size()
                                                        : vectors.size());
  }
};

// The one interface both classifiers read token representations from.
class FeatureSource {
 public:
  virtual ~FeatureSource() = default;

  virtual Backend backend() const = 0;
  // Bucket bits for kHashed, embedding dimension for kDense.
  virtual int dim() const = 0;
  virtual DocFeatures Extract(const Doc &doc) const = 0;

  // Token representation in TokenVector form (bucketed for kHashed).
  TokenVector TokenAt(const DocFeatures &features, int index) const;
};

class HashedFeatureSource : public FeatureSource {
 public:
  explicit HashedFeatureSource(HashOptions options = {});

  Backend backend() const override { return Backend::kHashed; }
  int dim() const override { return options_.bucket_bits; }
  DocFeatures Extract(const Doc &doc) const override;

 private:
  HashOptions options_;
};

class EmbeddingFeatureSource : public FeatureSource {
 public:
  explicit EmbeddingFeatureSource(std::shared_ptr<const EmbeddingStore> store);

  Backend backend() const override { return Backend::kDense; }
  int dim() const override { return store_->dim(); }
  DocFeatures Extract(const Doc &doc) const override;

 private:
  std::shared_ptr<const EmbeddingStore> store_;
};

}  // namespace trialtab::features

#endif  // TRIALTAB_FEATURES_H_
