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
#include "trialtab/corpus/pubmed.h"

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "trialtab/error.h"

namespace trialtab::corpus {
namespace {

using json = nlohmann::json;

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string UrlEncode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' ||
        c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

}  // namespace

EntrezClient::EntrezClient(std::string base_url, std::string api_key)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {}

std::vector<std::string> EntrezClient::Search(
    const std::string &term, const std::vector<std::string> &pmids) {
  if (pmids.empty()) return {};
  std::string query = "(";
  for (std::size_t i = 0; i < pmids.size(); ++i) {
    if (i > 0) query += " OR ";
    query += pmids[i] + "[uid]";
  }
  query += ") AND (" + term + ")";

  httplib::Params params = {{"db", "pubmed"},
                            {"retmode", "json"},
                            {"retmax", std::to_string(pmids.size())},
                            {"term", query}};
  if (!api_key_.empty()) params.emplace("api_key", api_key_);

  httplib::Client client(base_url_);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  std::string body;
  for (const auto &[key, value] : params) {
    if (!body.empty()) body += '&';
    body += key + "=" + UrlEncode(value);
  }
  auto response = client.Post("/entrez/eutils/esearch.fcgi", body,
                              "application/x-www-form-urlencoded");
  if (!response) {
    throw Error(ErrorKind::kTransport,
                "esearch request to " + base_url_ + " failed: " +
                    httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw Error(ErrorKind::kTransport,
                "esearch returned HTTP " + std::to_string(response->status));
  }
  std::vector<std::string> ids;
  try {
    json reply = json::parse(response->body);
    for (const auto &id : reply.at("esearchresult").at("idlist")) {
      ids.push_back(id.get<std::string>());
    }
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kTransport,
                std::string("malformed esearch reply: ") + e.what());
  }
  return ids;
}

QueryCache::QueryCache(std::string directory)
    : directory_(std::move(directory)) {}

std::string QueryCache::Key(const std::string &term,
                            const std::vector<std::string> &pmids) {
  std::string material = term;
  material += '\n';
  for (const std::string &id : pmids) {
    material += id;
    material += ',';
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(material)));
  return hex;
}

std::string QueryCache::PathFor(const std::string &key) const {
  return (std::filesystem::path(directory_) / (key + ".json")).string();
}

bool QueryCache::Lookup(const std::string &term,
                        const std::vector<std::string> &pmids,
                        std::vector<std::string> *matches) const {
  std::ifstream in(PathFor(Key(term, pmids)));
  if (!in) return false;
  try {
    json entry = json::parse(in);
    // Guard against hash collisions.
    if (entry.at("term") != term ||
        entry.at("pmids").get<std::vector<std::string>>() != pmids) {
      return false;
    }
    *matches = entry.at("matches").get<std::vector<std::string>>();
    return true;
  } catch (const json::exception &) {
    return false;
  }
}

void QueryCache::Store(const std::string &term,
                       const std::vector<std::string> &pmids,
                       const std::vector<std::string> &matches) const {
  static std::atomic<unsigned> counter{0};
  std::filesystem::create_directories(directory_);
  const std::string path = PathFor(Key(term, pmids));
  const std::string temp = path + ".tmp." + std::to_string(::getpid()) + "." +
                           std::to_string(counter++);
  {
    std::ofstream out(temp);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + temp);
    json entry = {{"term", term}, {"pmids", pmids}, {"matches", matches}};
    out << entry.dump() << '\n';
  }
  std::filesystem::rename(temp, path);
}

std::set<std::string> PartitionByDomain(const std::vector<std::string> &pmids,
                                        const std::string &term,
                                        LiteratureIndexClient *client,
                                        const QueryCache *cache,
                                        const PartitionOptions &options) {
  std::set<std::string> result;
  if (pmids.empty()) return result;
  const std::size_t n = pmids.size();
  const std::size_t batches =
      static_cast<std::size_t>(std::max(1, options.num_batches));

  std::vector<std::string> failures;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = b * n / batches;
    const std::size_t hi = (b + 1) * n / batches;
    if (lo == hi) continue;
    std::vector<std::string> batch(pmids.begin() + lo, pmids.begin() + hi);
    std::vector<std::string> matches;
    bool answered = cache != nullptr && cache->Lookup(term, batch, &matches);
    if (!answered) {
      if (client == nullptr) {
        failures.push_back("batch " + std::to_string(b + 1) +
                           ": not cached and no client");
        continue;
      }
      try {
        matches = client->Search(term, batch);
        answered = true;
      } catch (const Error &e) {
        failures.push_back("batch " + std::to_string(b + 1) + ": " + e.what());
        continue;
      }
      if (cache != nullptr) cache->Store(term, batch, matches);
    }
    std::set<std::string> members(batch.begin(), batch.end());
    for (const std::string &id : matches) {
      if (members.count(id)) result.insert(id);
    }
  }
  if (!failures.empty()) {
    std::string message = "literature index query failed for " +
                          std::to_string(failures.size()) + " batch(es)";
    throw Error(ErrorKind::kTransport, message, failures);
  }
  return result;
}

}  // namespace trialtab::corpus
