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

#ifndef TRIALTAB_ERROR_H_
#define TRIALTAB_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trialtab {

// Category of a failure. Each module documents which kinds it raises.
enum class ErrorKind {
  kParse,
  kRange,
  kIntegrity,
  kConfig,
  kFormat,
  kSchema,
  kSize,
  kLookup,
  kTransport,
  kContract,
  kAlignment,
  kPairing,
  kValidation,
  kConflict,
  kNotFound,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message);
  Error(ErrorKind kind, const std::string &message,
        std::vector<std::string> details);

  ErrorKind kind() const { return kind_; }

  // Itemised problems, e.g. each violated invariant of a correction.
  const std::vector<std::string> &details() const { return details_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> details_;
};

}  // namespace trialtab

#endif  // TRIALTAB_ERROR_H_
