// Copyright 2026 The pdhmm Authors
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

#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pdhmm/filter.hpp"
#include "pdhmm/mixture.hpp"

namespace pdhmm {

using Json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json to_json(const Partition& p);
Partition partition_from_json(const Json& j);
Json to_json(const MixtureState& s);
MixtureState mixture_from_json(const Json& j);
Json to_json(const std::vector<MixtureState>& states);
std::vector<MixtureState> mixtures_from_json(const Json& j);

// One {"t": ..., "partition": [...]} object per line; blank lines are skipped.
std::string observations_to_jsonl(const ObservationSequence& seq);
ObservationSequence observations_from_jsonl(std::istream& in);

struct SummaryRow {
  double time = 0.0;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> truth;
};

// Header is "time,mean,qLLL,qUUU[,truth]" with the quantile levels of kappa
// in thousandths, so kappa = 0.05 gives q025 and q975.
std::string summary_to_csv(const std::vector<SummaryRow>& rows, double kappa = 0.05);
std::vector<SummaryRow> summary_from_csv(std::istream& in);

std::string read_file(const std::string& path);
// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

ObservationSequence load_observations(const std::string& path);
void save_observations(const std::string& path, const ObservationSequence& seq);

}  // namespace pdhmm
