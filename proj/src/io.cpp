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

#include "pdhmm/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace pdhmm {

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j, double fallback) {
  if (j.is_null()) return fallback;
  return j.get<double>();
}

std::string quantile_label(double level) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%03d", static_cast<int>(std::lround(level * 1000.0)));
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

Json to_json(const Partition& p) { return Json(p.parts()); }

Partition partition_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("partition must be a JSON array of positive integers");
  std::vector<Part> parts;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() <= 0)
      throw IoError("partition entries must be positive integers");
    parts.push_back(static_cast<Part>(v.get<long long>()));
  }
  return Partition(parts);
}

Json to_json(const MixtureState& s) {
  Json comps = Json::array();
  for (const auto& c : s.components) comps.push_back({{"partition", to_json(c.partition)}, {"weight", c.weight}});
  return {{"time", s.time}, {"kind", s.kind}, {"log_evidence", number_or_null(s.log_evidence)}, {"components", comps}};
}

MixtureState mixture_from_json(const Json& j) {
  try {
    MixtureState s;
    s.time = j.at("time").get<double>();
    s.kind = j.value("kind", std::string("filtered"));
    s.log_evidence = number_from(j.value("log_evidence", Json(0.0)), -std::numeric_limits<double>::infinity());
    for (const auto& c : j.at("components"))
      s.components.push_back({partition_from_json(c.at("partition")), c.at("weight").get<double>()});
    return s;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed mixture state: ") + e.what());
  }
}

Json to_json(const std::vector<MixtureState>& states) {
  Json arr = Json::array();
  for (const auto& s : states) arr.push_back(to_json(s));
  return {{"states", arr}};
}

std::vector<MixtureState> mixtures_from_json(const Json& j) {
  std::vector<MixtureState> out;
  const Json& arr = j.is_object() ? j.at("states") : j;
  for (const auto& s : arr) out.push_back(mixture_from_json(s));
  return out;
}

std::string observations_to_jsonl(const ObservationSequence& seq) {
  std::string out;
  for (std::size_t k = 0; k < seq.size(); ++k)
    out += Json{{"t", seq.times[k]}, {"partition", to_json(seq.observations[k])}}.dump() + "\n";
  return out;
}

ObservationSequence observations_from_jsonl(std::istream& in) {
  ObservationSequence seq;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Json j = Json::parse(line);
      seq.times.push_back(j.at("t").get<double>());
      seq.observations.push_back(partition_from_json(j.at("partition")));
    } catch (const std::exception& e) {
      throw IoError("observation line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return seq;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows, double kappa) {
  bool truth = !rows.empty() && rows.front().truth.has_value();
  std::string out = "time,mean," + quantile_label(kappa / 2) + "," + quantile_label(1 - kappa / 2);
  out += truth ? ",truth\n" : "\n";
  for (const auto& r : rows) {
    out += format_double(r.time) + "," + format_double(r.mean) + "," + format_double(r.lower) + "," +
           format_double(r.upper);
    if (truth) out += "," + (r.truth ? format_double(*r.truth) : std::string());
    out += "\n";
  }
  return out;
}

std::vector<SummaryRow> summary_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("summary file is empty");
  auto header = split(line, ',');
  if (header.size() < 4 || header[0] != "time" || header[1] != "mean")
    throw IoError("summary header must start with time,mean,lower,upper");
  const bool truth = header.size() >= 5 && header[4] == "truth";
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() < 4) throw IoError("summary row has fewer than four fields: " + line);
    try {
      SummaryRow r{std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::nullopt};
      if (truth && f.size() >= 5 && !f[4].empty()) r.truth = std::stod(f[4]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw IoError("summary row is not numeric: " + line);
    }
  }
  return rows;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path + ": " + ec.message());
}

ObservationSequence load_observations(const std::string& path) {
  std::istringstream in(read_file(path));
  return observations_from_jsonl(in);
}

void save_observations(const std::string& path, const ObservationSequence& seq) {
  write_file_atomic(path, observations_to_jsonl(seq));
}

}  // namespace pdhmm
