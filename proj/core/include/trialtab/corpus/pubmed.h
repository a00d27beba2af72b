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
#ifndef TRIALTAB_CORPUS_PUBMED_H_
#define TRIALTAB_CORPUS_PUBMED_H_

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace trialtab::corpus {

// Literature index that can filter a batch of ids by a search term.
class LiteratureIndexClient {
 public:
  virtual ~LiteratureIndexClient() = default;

  // Returns the subset of `pmids` whose indexed record matches `term`.
  // Throws Error(kTransport) when the index cannot be reached.
  virtual std::vector<std::string> Search(
      const std::string &term, const std::vector<std::string> &pmids) = 0;
};

// NCBI E-utilities esearch client. The query restricts the term to the
// batch: "(<id>[uid] OR ...) AND (<term>)".
class EntrezClient : public LiteratureIndexClient {
 public:
  explicit EntrezClient(
      std::string base_url = "https://eutils.ncbi.nlm.nih.gov",
      std::string api_key = "");

  std::vector<std::string> Search(
      const std::string &term, const std::vector<std::string> &pmids) override;

 private:
  std::string base_url_;
  std::string api_key_;
};

// Content-addressed store of query responses. Each (term, batch) pair maps
// to one JSON file named by its hash; writes go through a temporary file
// and an atomic rename.
class QueryCache {
 public:
  explicit QueryCache(std::string directory);

  static std::string Key(const std::string &term,
                         const std::vector<std::string> &pmids);

  bool Lookup(const std::string &term, const std::vector<std::string> &pmids,
              std::vector<std::string> *matches) const;
  void Store(const std::string &term, const std::vector<std::string> &pmids,
             const std::vector<std::string> &matches) const;

  const std::string &directory() const { return directory_; }

 private:
  std::string PathFor(const std::string &key) const;

  std::string directory_;
};

struct PartitionOptions {
  int num_batches = 10;
};

// Splits `pmids` into num_batches contiguous query groups, answers each
// from the cache when possible and otherwise from `client` (which may be
// null for offline runs), caching fresh responses. Any batch that cannot
// be answered fails the whole call with Error(kTransport) listing the
// failed batch numbers.
std::set<std::string> PartitionByDomain(const std::vector<std::string> &pmids,
                                        const std::string &term,
                                        LiteratureIndexClient *client,
                                        const QueryCache *cache,
                                        const PartitionOptions &options = {});

}  // namespace trialtab::corpus

#endif  // TRIALTAB_CORPUS_PUBMED_H_
