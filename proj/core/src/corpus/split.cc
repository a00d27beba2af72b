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
#include "trialtab/corpus/split.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "trialtab/error.h"
#include "trialtab/rng.h"

namespace trialtab::corpus {

std::string_view ToString(Partition partition) {
  switch (partition) {
    case Partition::kTrain: return "train";
    case Partition::kDev: return "dev";
    case Partition::kTest: return "test";
  }
  return "?";
}

SplitSizes ComputeSplitSizes(int n, const SplitRatios &ratios) {
  SplitSizes sizes;
  // A small epsilon keeps exact products (10 * 0.1) from flooring low.
  sizes.dev = static_cast<int>(std::floor(n * ratios.dev + 1e-9));
  sizes.test = static_cast<int>(std::floor(n * ratios.test + 1e-9));
  sizes.train = n - sizes.dev - sizes.test;
  return sizes;
}

DatasetSplit SplitDataset(const std::vector<Doc> &docs,
                          const SplitRatios &ratios, std::uint64_t seed) {
  if (docs.size() < 3) {
    throw Error(ErrorKind::kSize, "need at least 3 docs to split, got " +
                                      std::to_string(docs.size()));
  }
  if (ratios.train < 0 || ratios.dev < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9) {
    throw Error(ErrorKind::kRange, "split ratios must be non-negative and sum to 1");
  }
  const int n = static_cast<int>(docs.size());
  SplitSizes sizes = ComputeSplitSizes(n, ratios);

  std::vector<int> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(order);

  DatasetSplit split;
  split.seed = seed;
  for (int k = 0; k < n; ++k) {
    const Doc &doc = docs[order[k]];
    Partition part = k < sizes.train               ? Partition::kTrain
                     : k < sizes.train + sizes.dev ? Partition::kDev
                                                   : Partition::kTest;
    switch (part) {
      case Partition::kTrain: split.train.push_back(doc); break;
      case Partition::kDev: split.dev.push_back(doc); break;
      case Partition::kTest: split.test.push_back(doc); break;
    }
    split.manifest.emplace_back(doc.id, part);
  }
  if (split.dev.empty()) {
    split.warnings.push_back("dev set is empty for " + std::to_string(n) +
                             " docs");
  }
  if (split.test.empty()) {
    split.warnings.push_back("test set is empty for " + std::to_string(n) +
                             " docs");
  }
  return split;
}

std::vector<Doc> StratifyFraction(const std::vector<Doc> &train,
                                  double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error(ErrorKind::kRange,
                "fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  if (fraction == 1.0) return train;
  const std::size_t n = train.size();
  const std::size_t k = std::min(
      n, static_cast<std::size_t>(std::ceil(fraction * n - 1e-9)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(order);
  order.resize(k);
  std::sort(order.begin(), order.end());
  std::vector<Doc> out;
  out.reserve(k);
  for (std::size_t i : order) out.push_back(train[i]);
  return out;
}

HoldoutSplit DomainHoldout(const std::vector<Doc> &docs,
                           const std::string &holdout_domain) {
  HoldoutSplit split;
  for (const Doc &doc : docs) {
    if (doc.meta.domain == holdout_domain) {
      split.test.push_back(doc);
    } else {
      split.pool.push_back(doc);
    }
  }
  if (split.test.empty()) {
    throw Error(ErrorKind::kLookup,
                "no docs in holdout domain '" + holdout_domain + "'");
  }
  return split;
}

std::vector<Doc> BuildMixedPool(const std::vector<Doc> &docs,
                                const std::vector<std::string> &domains,
                                int per_domain, std::uint64_t seed) {
  std::map<std::string, std::vector<const Doc *>> by_domain;
  for (const Doc &doc : docs) by_domain[doc.meta.domain].push_back(&doc);
  std::vector<Doc> pool;
  Rng rng(seed);
  for (const std::string &domain : domains) {
    auto it = by_domain.find(domain);
    if (it == by_domain.end()) {
      throw Error(ErrorKind::kLookup, "unknown domain '" + domain + "'");
    }
    std::vector<const Doc *> members = it->second;
    if (static_cast<int>(members.size()) < per_domain) {
      throw Error(ErrorKind::kSize,
                  "domain '" + domain + "' has " +
                      std::to_string(members.size()) + " docs, need " +
                      std::to_string(per_domain));
    }
    rng.Shuffle(members);
    for (int i = 0; i < per_domain; ++i) pool.push_back(*members[i]);
  }
  rng.Shuffle(pool);
  return pool;
}

void WriteManifest(const DatasetSplit &split, std::ostream &out) {
  out << "seed=" << split.seed << '\n';
  for (const auto &[id, part] : split.manifest) {
    out << id << '\t' << ToString(part) << '\n';
  }
}

std::string ManifestText(const DatasetSplit &split) {
  std::ostringstream out;
  WriteManifest(split, out);
  return out.str();
}

}  // namespace trialtab::corpus
