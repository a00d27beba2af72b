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
#include "trialtab/labels.h"

namespace trialtab {

std::string_view ToString(EntityLabel label) {
  switch (label) {
    case EntityLabel::kIntv: return "INTV";
    case EntityLabel::kOc: return "OC";
    case EntityLabel::kMeas: return "MEAS";
  }
  return "?";
}

std::string_view ToString(RelationLabel label) {
  switch (label) {
    case RelationLabel::kOcRes: return "OC_RES";
    case RelationLabel::kA1Res: return "A1_RES";
    case RelationLabel::kA2Res: return "A2_RES";
  }
  return "?";
}

std::optional<EntityLabel> ParseEntityLabel(std::string_view name) {
  for (EntityLabel label : kEntityLabels) {
    if (ToString(label) == name) return label;
  }
  return std::nullopt;
}

std::optional<RelationLabel> ParseRelationLabel(std::string_view name) {
  for (RelationLabel label : kRelationLabels) {
    if (ToString(label) == name) return label;
  }
  return std::nullopt;
}

}  // namespace trialtab
