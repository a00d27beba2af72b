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
#ifndef TRIALTAB_CORPUS_SPLIT_H_
#define TRIALTAB_CORPUS_SPLIT_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "trialtab/doc.h"

namespace trialtab::corpus {

enum class Partition { kTrain, kDev, kTest };

struct SplitRatios {
  double train = 0.7;
  double dev = 0.1;
  double test = 0.2;
};

struct SplitSizes {
  int train = 0;
  int dev = 0;
  int test = 0;

  bool operator==(const SplitSizes &) const = default;
};

struct DatasetSplit {
  std::vector<Doc> train;
  std::vector<Doc> dev;
  std::vector<Doc> test;
  std::uint64_t seed = 0;
  // Doc id and assigned partition, in shuffled order.
  std::vector<std::pair<std::string, Partition>> manifest;
  std::vector<std::string> warnings;
};

// dev = floor(n * ratios.dev), test = floor(n * ratios.test), and train
// takes the remainder.
SplitSizes ComputeSplitSizes(int n, const SplitRatios &ratios);

// Shuffles with `seed` and cuts into train/dev/test. Throws Error(kSize)
// below three docs and Error(kRange) when the ratios do not sum to one.
// An empty dev or test set is reported in `warnings`.
DatasetSplit SplitDataset(const std::vector<Doc> &docs,
                          const SplitRatios &ratios, std::uint64_t seed);

// ceil(fraction * n) docs drawn without replacement, in input order.
// Throws Error(kRange) unless 0 < fraction <= 1.
std::vector<Doc> StratifyFraction(const std::vector<Doc> &train,
                                  double fraction, std::uint64_t seed);

struct HoldoutSplit {
  std::vector<Doc> pool;  // every other domain, for train + dev
  std::vector<Doc> test;  // the held-out domain
};

// Throws Error(kLookup) when no doc carries `holdout_domain`.
HoldoutSplit DomainHoldout(const std::vector<Doc> &docs,
                           const std::string &holdout_domain);

// Mixed-domain training pool: `per_domain` randomly chosen docs from each
// listed domain. Throws Error(kLookup) for an absent domain and
// Error(kSize) when a domain has fewer docs than requested.
std::vector<Doc> BuildMixedPool(const std::vector<Doc> &docs,
                                const std::vector<std::string> &domains,
                                int per_domain, std::uint64_t seed);

std::string_view ToString(Partition partition);

// "seed=<n>" header followed by "<doc-id>\t<train|dev|test>" lines.
void WriteManifest(const DatasetSplit &split, std::ostream &out);
std::string ManifestText(const DatasetSplit &split);

}  // namespace trialtab::corpus

#endif  // TRIALTAB_CORPUS_SPLIT_H_
