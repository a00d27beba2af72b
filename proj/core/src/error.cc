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
#include "trialtab/error.h"

#include <utility>

namespace trialtab {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kIntegrity: return "integrity";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kSize: return "size";
    case ErrorKind::kLookup: return "lookup";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kAlignment: return "alignment";
    case ErrorKind::kPairing: return "pairing";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string &message)
    : std::runtime_error(message), kind_(kind) {}

Error::Error(ErrorKind kind, const std::string &message,
             std::vector<std::string> details)
    : std::runtime_error(message), kind_(kind), details_(std::move(details)) {}

}  // namespace trialtab
