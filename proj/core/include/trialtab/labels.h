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

#ifndef TRIALTAB_LABELS_H_
#define TRIALTAB_LABELS_H_

#include <array>
#include <optional>
#include <string_view>

namespace trialtab {

// Entity labels: intervention (either arm), outcome description and
// numeric outcome measure.
enum class EntityLabel { kIntv = 0, kOc = 1, kMeas = 2 };

// Directed measure links: measure to its outcome, to the arm-1
// intervention, or to the arm-2 intervention.
enum class RelationLabel { kOcRes = 0, kA1Res = 1, kA2Res = 2 };

inline constexpr int kNumEntityLabels = 3;
inline constexpr int kNumRelationLabels = 3;

inline constexpr std::array<EntityLabel, 3> kEntityLabels = {
    EntityLabel::kIntv, EntityLabel::kOc, EntityLabel::kMeas};
inline constexpr std::array<RelationLabel, 3> kRelationLabels = {
    RelationLabel::kOcRes, RelationLabel::kA1Res, RelationLabel::kA2Res};

std::string_view ToString(EntityLabel label);
std::string_view ToString(RelationLabel label);

std::optional<EntityLabel> ParseEntityLabel(std::string_view name);
std::optional<RelationLabel> ParseRelationLabel(std::string_view name);

}  // namespace trialtab

#endif  // TRIALTAB_LABELS_H_
