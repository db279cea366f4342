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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "pdhmm/bpf.hpp"
#include "pdhmm/experiment.hpp"
#include "pdhmm/filter.hpp"
#include "pdhmm/ingest.hpp"
#include "pdhmm/io.hpp"
#include "pdhmm/smoother.hpp"

using namespace pdhmm;

namespace {

// Values given on the command line; each one overrides the config file.
struct Overrides {
  std::string config;
  std::optional<double> alpha, theta, epsilon, kappa;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> draws, particles;
  std::optional<std::string> mode, prune, observations, truth, out;
  std::vector<double> times;
  std::vector<std::string> grid;
  std::optional<std::uint32_t> sample_size;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON configuration file");
  app->add_option("--alpha", o.alpha, "discount parameter");
  app->add_option("--theta", o.theta, "concentration parameter");
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--mode", o.mode, "prediction mode: exact, montecarlo[:M] or auto[:M]");
  app->add_option("--prune", o.prune, "pruning: none, top:K or mass:RHO");
  app->add_option("--epsilon", o.epsilon, "truncation level for PD draws");
  app->add_option("--draws", o.draws, "posterior draws per summary");
  app->add_option("--kappa", o.kappa, "interval level; 0.05 gives 95% intervals");
  app->add_option("--observations", o.observations, "observations file (JSON lines)");
  app->add_option("--truth", o.truth, "CSV with time,truth columns");
  app->add_option("--out", o.out, "output directory");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config);
  if (o.alpha) c.params.alpha = *o.alpha;
  if (o.theta) c.params.theta = *o.theta;
  if (o.seed) c.seed = *o.seed;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.kappa) c.kappa = *o.kappa;
  if (o.draws) c.draws = *o.draws;
  if (o.particles) c.bpf_particles = *o.particles;
  try {
    if (o.mode) c.prediction = PredictionMode::parse(*o.mode);
    if (o.prune) c.pruning = PruningStrategy::parse(*o.prune);
    for (const auto& g : o.grid) {
      std::string name;
      auto values = parse_grid_axis(g, &name);
      if (name == "alpha") c.grid_alpha = values;
      else if (name == "theta") c.grid_theta = values;
      else throw ConfigError("grid axis must be alpha=... or theta=...");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (o.observations) c.observations = *o.observations;
  if (o.truth) c.truth = *o.truth;
  if (o.out) c.out_dir = *o.out;
  if (!o.times.empty()) c.query_times = o.times;
  if (o.sample_size) c.forecast_size = *o.sample_size;
  c.validate();
  return c;
}

std::string out_path(const ExperimentConfig& c, const std::string& name) {
  return (std::filesystem::path(c.out_dir) / name).string();
}

ObservationSequence observations_of(const ExperimentConfig& c) {
  if (c.observations.empty()) throw ConfigError("no observations file given");
  auto seq = load_observations(c.observations);
  try {
    seq.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(c.observations + ": " + e.what());
  }
  return seq;
}

std::vector<std::pair<double, double>> read_truth(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<double, double>> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(path + ": expected time,truth rows");
    try {
      out.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw IoError(path + ": non-numeric row " + line);
    }
  }
  return out;
}

// Attaches truth values whose time matches a summary row.
void attach_truth(std::vector<SummaryRow>& rows, const ExperimentConfig& c) {
  if (c.truth.empty()) return;
  auto truth = read_truth(c.truth);
  for (auto& r : rows)
    for (auto& [t, v] : truth)
      if (std::abs(t - r.time) <= 1e-9 * std::max(1.0, std::abs(t))) r.truth = v;
  bool all = std::all_of(rows.begin(), rows.end(), [](const SummaryRow& r) { return r.truth.has_value(); });
  if (!all)
    for (auto& r : rows) r.truth.reset();
}

void write_states(const ExperimentConfig& c, const std::string& stem, const std::vector<MixtureState>& states) {
  write_file_atomic(out_path(c, stem + "_states.json"), to_json(states).dump(1) + "\n");
  auto rows = summarize_states(states, c.params, c.epsilon, c.draws, c.kappa, c.seed);
  attach_truth(rows, c);
  write_file_atomic(out_path(c, stem + "_summary.csv"), summary_to_csv(rows, c.kappa));
}

void print(const Json& j) { std::cout << j.dump() << std::endl; }

int run_simulate(const ExperimentConfig& c) {
  auto sim = simulate_experiment(c);
  std::string obs = c.observations.empty() ? out_path(c, "observations.jsonl") : c.observations;
  std::string truth = c.truth.empty() ? out_path(c, "truth.csv") : c.truth;
  save_observations(obs, sim.sequence);
  std::ostringstream t;
  t.precision(17);
  t << "time,truth\n";
  for (std::size_t k = 0; k < sim.truth.size(); ++k) t << sim.sequence.times[k] << "," << sim.truth[k] << "\n";
  write_file_atomic(truth, t.str());
  print({{"observations", obs}, {"truth", truth}, {"count", sim.sequence.size()}});
  return 0;
}

int run_filter(const ExperimentConfig& c) {
  auto seq = observations_of(c);
  auto r = filter(seq, c.params, c.filter_options());
  std::vector<MixtureState> states;
  for (auto& s : r.steps) states.push_back(s.updated);
  write_states(c, "filter", states);
  print({{"log_evidence", r.log_evidence}, {"states", out_path(c, "filter_states.json")},
         {"summary", out_path(c, "filter_summary.csv")}});
  return 0;
}

int run_smooth(const ExperimentConfig& c) {
  auto seq = observations_of(c);
  auto r = smooth_all(seq, c.params, c.filter_options());
  write_states(c, "smooth", r.smoothed);
  print({{"log_evidence", r.forward.log_evidence}, {"states", out_path(c, "smooth_states.json")},
         {"summary", out_path(c, "smooth_summary.csv")}});
  return 0;
}

int run_interpolate(const ExperimentConfig& c) {
  if (c.query_times.empty()) throw ConfigError("interpolate needs at least one --time");
  auto seq = observations_of(c);
  auto opts = c.filter_options();
  auto r = smooth_all(seq, c.params, opts);
  std::vector<MixtureState> states;
  for (double t : c.query_times) states.push_back(interpolate(r, seq, t, c.params, opts));
  write_states(c, "interpolate", states);
  print({{"log_evidence", r.forward.log_evidence}, {"states", out_path(c, "interpolate_states.json")}});
  return 0;
}

int run_forecast(const ExperimentConfig& c) {
  if (c.query_times.empty()) throw ConfigError("forecast needs at least one --time");
  auto seq = observations_of(c);
  auto opts = c.filter_options();
  auto last = filter(seq, c.params, opts).steps.back().updated;
  std::vector<MixtureState> states;
  for (double t : c.query_times) {
    if (t < last.time) throw ConfigError("forecast time precedes the last observation");
    states.push_back(forecast_state(last, t, c.params, opts));
  }
  write_states(c, "forecast", states);
  Json out{{"states", out_path(c, "forecast_states.json")}};
  if (c.forecast_size > 0) {
    std::ostringstream law;
    law.precision(17);
    law << "time,partition,probability\n";
    for (auto& s : states)
      for (auto& [g, p] : predictive_partition_law(s, c.forecast_size, c.params))
        law << s.time << ",\"" << g.to_string() << "\"," << p << "\n";
    write_file_atomic(out_path(c, "forecast_partitions.csv"), law.str());
    out["partitions"] = out_path(c, "forecast_partitions.csv");
  }
  print(out);
  return 0;
}

int run_fit(const ExperimentConfig& c, unsigned threads) {
  auto seq = observations_of(c);
  auto fit = fit_grid(seq, c.grid(), c.filter_options(), threads);
  std::ostringstream csv;
  csv.precision(17);
  csv << "alpha,theta,log_evidence\n";
  for (auto& e : fit.evaluations) csv << e.params.alpha << "," << e.params.theta << "," << e.log_evidence << "\n";
  write_file_atomic(out_path(c, "fit_evidence.csv"), csv.str());
  print({{"alpha", fit.best.alpha}, {"theta", fit.best.theta}, {"log_evidence", fit.best_log_evidence},
         {"table", out_path(c, "fit_evidence.csv")}});
  return 0;
}

int run_bpf(const ExperimentConfig& c) {
  auto seq = observations_of(c);
  BpfOptions o;
  o.particles = c.bpf_particles;
  o.epsilon = c.epsilon;
  o.seed = c.seed;
  o.keep_particles = true;
  auto r = bpf_filter(seq, c.params, o);
  auto rows = summarize_bpf(r, c.draws, c.kappa, c.seed);
  attach_truth(rows, c);
  write_file_atomic(out_path(c, "bpf_summary.csv"), summary_to_csv(rows, c.kappa));
  print({{"log_evidence", r.log_evidence}, {"summary", out_path(c, "bpf_summary.csv")}});
  return 0;
}

int run_score(const ExperimentConfig& c, const std::vector<std::string>& summaries) {
  if (summaries.empty()) throw ConfigError("score needs at least one --summary file");
  Json out = Json::array();
  for (const auto& path : summaries) {
    std::istringstream in(read_file(path));
    auto rows = summary_from_csv(in);
    attach_truth(rows, c);
    auto s = score_series(rows, c.kappa);
    std::ostringstream csv;
    csv.precision(17);
    csv << "time,lower,upper,truth,score\n";
    for (std::size_t k = 0; k < s.scores.size(); ++k)
      csv << s.time[k] << "," << s.lower[k] << "," << s.upper[k] << "," << s.truth[k] << "," << s.scores[k] << "\n";
    std::string dest = out_path(c, std::filesystem::path(path).stem().string() + "_scores.csv");
    write_file_atomic(dest, csv.str());
    out.push_back({{"summary", path}, {"aggregate", s.aggregate}, {"scores", dest}});
  }
  print(out.size() == 1 ? out[0] : out);
  return 0;
}

struct IngestArgs {
  std::string edges, output;
  std::optional<double> window, time_unit, origin;
  bool include_singletons = false, drop_empty = false;
  std::vector<long> days;
};

int run_ingest(ExperimentConfig c, const IngestArgs& a) {
  if (a.edges.empty()) throw ConfigError("ingest-graph needs --edges");
  if (a.window) c.ingest.window = *a.window;
  if (a.time_unit) c.ingest.time_unit = *a.time_unit;
  if (a.origin) c.ingest.origin = *a.origin;
  if (a.include_singletons) c.ingest.include_singletons = true;
  if (a.drop_empty) c.ingest.keep_empty = false;
  if (!a.days.empty()) c.ingest.days = a.days;
  std::istringstream in(read_file(a.edges));
  std::vector<Edge> edges;
  try {
    edges = read_edge_list(in);
  } catch (const std::invalid_argument& e) {
    throw IoError(a.edges + ": " + e.what());
  }
  IngestResult r = ingest_graph(edges, c.ingest);
  for (const auto& w : r.warnings) std::cerr << Json{{"warning", w}}.dump() << std::endl;
  std::string dest = !a.output.empty() ? a.output : !c.observations.empty() ? c.observations : out_path(c, "observations.jsonl");
  save_observations(dest, r.sequence);
  print({{"observations", dest}, {"count", r.sequence.size()}, {"warnings", r.warnings.size()}});
  return 0;
}

int fail(const std::string& type, const std::string& message, int code) {
  std::cerr << Json{{"error", {{"type", type}, {"message", message}}}}.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact filtering, smoothing and forecasting for Poisson-Dirichlet hidden Markov models"};
  app.require_subcommand(1);
  Overrides o;
  unsigned threads = 0;
  std::vector<std::string> summaries;
  IngestArgs ingest;

  auto* simulate = app.add_subcommand("simulate", "simulate a latent trajectory and its partitions");
  auto* filt = app.add_subcommand("filter", "filtering distributions at each observation time");
  auto* smooth = app.add_subcommand("smooth", "smoothing distributions at each observation time");
  auto* interp = app.add_subcommand("interpolate", "posterior at arbitrary times given all observations");
  auto* forecast = app.add_subcommand("forecast", "forecast beyond the last observation");
  auto* fit = app.add_subcommand("fit", "grid search for the maximum-evidence parameters");
  auto* bpf = app.add_subcommand("bpf", "bootstrap particle filter baseline");
  auto* score = app.add_subcommand("score", "interval scores of summary files");
  auto* ing = app.add_subcommand("ingest-graph", "partitions from a timestamped edge list");
  for (auto* sub : {simulate, filt, smooth, interp, forecast, fit, bpf, score, ing}) add_common(sub, o);
  for (auto* sub : {interp, forecast}) sub->add_option("--time", o.times, "query time")->expected(1, -1);
  forecast->add_option("--sample-size", o.sample_size, "also emit the law of a future sample partition of this size");
  fit->add_option("--grid", o.grid, "alpha=start:step:stop theta=start:step:stop")->expected(1, 2);
  fit->add_option("--threads", threads, "parallel grid evaluations (0 = all cores)");
  bpf->add_option("--particles", o.particles, "particle count");
  score->add_option("--summary", summaries, "summary CSV to score")->expected(1, -1);
  ing->add_option("--edges", ingest.edges, "edge list: timestamp,node_a,node_b");
  ing->add_option("--output", ingest.output, "observations file to write");
  ing->add_option("--window", ingest.window, "window length in timestamp units");
  ing->add_option("--time-unit", ingest.time_unit, "diffusion time per window");
  ing->add_option("--origin", ingest.origin, "start of the first window");
  ing->add_flag("--include-singletons", ingest.include_singletons, "count isolated nodes as blocks");
  ing->add_flag("--drop-empty", ingest.drop_empty, "drop windows without edges");
  ing->add_option("--day", ingest.days, "keep only these day indices")->expected(1, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what(), 2);
  }

  try {
    ExperimentConfig c = resolve(o);
    if (*simulate) return run_simulate(c);
    if (*filt) return run_filter(c);
    if (*smooth) return run_smooth(c);
    if (*interp) return run_interpolate(c);
    if (*forecast) return run_forecast(c);
    if (*fit) return run_fit(c, threads);
    if (*bpf) return run_bpf(c);
    if (*score) return run_score(c, summaries);
    if (*ing) return run_ingest(c, ingest);
  } catch (const ConfigError& e) {
    return fail("invalid_config", e.what(), 2);
  } catch (const IoError& e) {
    return fail("io", e.what(), 3);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what(), 3);
  } catch (const NumericalInstability& e) {
    return fail("numerical_instability", e.what(), 4);
  } catch (const WeightDegeneracy& e) {
    return fail("weight_degeneracy", e.what(), 5);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 1;
}
