// Copyright 2026 The hwnas Authors.
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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csv.hpp"
#include "hwnas/analysis.hpp"
#include "hwnas/benchmark_store.hpp"
#include "hwnas/errors.hpp"
#include "hwnas/measurement.hpp"
#include "hwnas/predictors.hpp"
#include "hwnas/search.hpp"
#include "hwnas/training.hpp"
#include "manifest.hpp"

namespace hwnas::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Every flag of every command; each subcommand binds the ones it reads.
struct Options {
  std::string space = "nb201";
  std::string table;
  std::string device;
  std::string kind = "latency";
  std::string transfer_from;
  std::string algo = "brp";
  int budget_k = 100;
  int iterations = 5;
  double alpha = 0.5;
  int total_m = 140;
  std::optional<double> latency_limit;
  std::uint64_t seed = 0;
  int repeat = 1;
  std::string out;

  // gen-synthetic
  double noise_sd = 0.4;
  int num_seeds = 3;
  // train-predictor
  std::optional<int> train_size;
  std::optional<int> val_size;
  std::optional<int> max_epochs;
  bool save_all = false;
  // search / analyze predictor sources
  std::string predictor;
  std::string predictions;
  bool layerwise = false;
  std::string op_costs;
  int calibration_size = 900;
  std::string thresholds;
  // analyze relation
  int relation_models = 1000;
  int cycle_models = 20;
  std::int64_t cycle_cutoff = kDefaultCycleCutoff;
  // aggregate
  std::string samples;
  std::size_t group_size = kDefaultGroupSize;
  // replay
  std::string manifest;
};

fs::path require_out(const Options& o) {
  if (o.out.empty()) throw UsageError("--out DIR is required");
  fs::create_directories(o.out);
  return fs::path(o.out);
}

BenchmarkTable load_input_table(const Options& o, RunManifest& m) {
  if (o.table.empty())
    throw UsageError("--table PATH is required (a table CSV with its .meta.json sidecar)");
  if (!fs::exists(o.table)) throw UsageError("table not found: " + o.table);
  m.add_input(o.table);
  if (fs::exists(sidecar_path(o.table))) m.add_input(sidecar_path(o.table));
  return load_table(o.table);
}

std::string resolve_device(const BenchmarkTable& table, const std::string& device) {
  if (device.empty()) {
    if (table.devices().empty()) throw UsageError("the table has no latency columns");
    return table.devices().front();
  }
  if (!table.has_device(device)) throw LookupError("unknown device '" + device + "'");
  return device;
}

json table_config(const Options& o, const std::string& device) {
  json j;
  j["table"] = o.table;
  j["device"] = device;
  j["seed"] = o.seed;
  return j;
}

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

Split make_split(std::size_t n, std::size_t n_train, std::size_t n_val, std::uint64_t seed) {
  if (n_train + n_val >= n)
    throw ConfigError("split of " + std::to_string(n_train) + "/" + std::to_string(n_val) +
                      " leaves no test models in a table of " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = make_rng(seed, "split");
  std::shuffle(perm.begin(), perm.end(), rng);
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
               perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  return s;
}

double table_accuracy(const SearchSpaceIndex& index, std::size_t i) {
  return query_accuracy(index.table(), index.arch_id(i), AccuracyMode::kFixedSeed,
                        AccuracyMetric::kValidation);
}

// Unary predictions for every index position, computed once per encoding.
std::vector<double> predict_all(const GcnModel& model, const SearchSpaceIndex& index) {
  std::vector<const EncodedGraph*> ptrs;
  for (const EncodedGraph& g : index.unique_graphs()) ptrs.push_back(&g);
  const Eigen::VectorXd unique = predict_unary(model, ptrs);
  std::vector<double> out(index.size());
  for (std::size_t i = 0; i < index.size(); ++i)
    out[i] = unique(static_cast<Eigen::Index>(index.encoding_of(i)));
  return out;
}

std::string format_or_empty(std::optional<double> v) {
  return v ? csv::format_double(*v) : std::string();
}

// ---------------------------------------------------------------- gen-synthetic

int cmd_gen_synthetic(const Options& o, RunManifest& m) {
  const fs::path dir = require_out(o);
  SyntheticSpec spec = default_synthetic_spec(o.seed);
  spec.noise_sd = o.noise_sd;
  spec.num_seeds = o.num_seeds;
  validate(spec);
  const SearchSpace space = parse_search_space(o.space);
  const BenchmarkTable table = synth_table(spec, space);
  const fs::path path = dir / "table.csv";
  save_table(table, path);
  // Round-trip through the loader so a bad file never leaves this command.
  if (!(load_table(path) == table)) throw Error("generated table failed to reload");

  m.config["space"] = o.space;
  m.config["seed"] = o.seed;
  m.config["noise_sd"] = spec.noise_sd;
  m.config["num_seeds"] = spec.num_seeds;
  m.config["devices"] = json::array();
  for (const DeviceProfile& d : spec.devices) m.config["devices"].push_back(d.name);
  m.seeds["generator"] = spec.seed;
  m.add_output(path);
  m.add_output(sidecar_path(path));
  std::cout << "wrote " << table.size() << " models to " << path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train-predictor

struct TrialMetrics {
  int trial = 0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
  TrainReport report;
  std::optional<double> test_mse;
  std::optional<double> spearman_rho;
  std::optional<ErrorBoundReport> bounds;
};

constexpr const char* kMetricsHeader =
    "trial,kind,seed,n_train,n_val,n_test,epochs_run,best_epoch,best_val_loss,"
    "test_mse,spearman,within_1pct,within_5pct,within_10pct\n";

int cmd_train_predictor(const Options& o, RunManifest& m) {
  if (o.kind != "latency" && o.kind != "accuracy" && o.kind != "binary")
    throw UsageError("--kind must be latency, accuracy or binary");
  if (o.repeat < 1) throw ConfigError("--repeat must be >= 1");
  const fs::path dir = require_out(o);
  const BenchmarkTable table = load_input_table(o, m);
  const bool latency = o.kind == "latency";
  const std::string device = latency ? resolve_device(table, o.device) : std::string();
  const SearchSpaceIndex index(table, device);

  const int n_train = o.train_size.value_or(latency ? 900 : 100);
  const int n_val = o.val_size.value_or(100);
  if (n_train < 2 || n_val < 0) throw ConfigError("split sizes must be positive");

  std::shared_ptr<const GcnModel> source;
  if (!o.transfer_from.empty()) {
    if (latency) throw UsageError("--transfer-from applies to accuracy and binary predictors");
    m.add_input(o.transfer_from);
    source = std::make_shared<const GcnModel>(load_unary(o.transfer_from));
  }

  m.config = table_config(o, device);
  m.config["kind"] = o.kind;
  m.config["train_size"] = n_train;
  m.config["val_size"] = n_val;
  m.config["repeat"] = o.repeat;
  m.config["transfer_from"] = o.transfer_from;
  m.config["max_epochs"] = o.max_epochs ? json(*o.max_epochs) : json(nullptr);
  m.config["save_all"] = o.save_all;

  std::vector<TrialMetrics> trials;
  std::vector<ErrorBoundReport> bound_reports;
  for (int t = 0; t < o.repeat; ++t) {
    const std::uint64_t trial_seed = derive_seed(o.seed, "trial", static_cast<std::uint64_t>(t));
    m.seeds["trial-" + std::to_string(t)] = trial_seed;
    const Split split = make_split(index.size(), static_cast<std::size_t>(n_train),
                                   static_cast<std::size_t>(n_val), trial_seed);
    TrialMetrics tm;
    tm.trial = t;
    tm.seed = trial_seed;
    tm.n_train = split.train.size();
    tm.n_val = split.val.size();
    tm.n_test = split.test.size();
    const fs::path ckpt = dir / (o.save_all ? "predictor-" + std::to_string(t) + ".ckpt"
                                            : std::string("predictor.ckpt"));
    const bool save = o.save_all || t == 0;
    json meta;
    meta["trial"] = t;
    meta["seed"] = trial_seed;
    meta["device"] = device;

    if (o.kind == "binary") {
      auto rated = [&](const std::vector<std::size_t>& pos) {
        std::vector<RatedModel> out;
        for (std::size_t i : pos)
          out.push_back({index.arch_id(i), index.graph(i), table_accuracy(index, i)});
        return out;
      };
      const PairDataset train = build_pair_dataset(rated(split.train));
      std::optional<PairDataset> val;
      if (split.val.size() >= 2) val = build_pair_dataset(rated(split.val));
      TrainConfig cfg = accuracy_train_config(n_train, true, derive_seed(trial_seed, "init"));
      if (o.max_epochs) cfg.max_epochs = *o.max_epochs;
      Rng init_rng = make_rng(cfg.rng_seed, "binary-init");
      BinaryPredictor bp = make_binary_predictor(cfg.shape, BinaryHeadKind::kSoftmax, init_rng);
      if (source) transfer_trunk(bp, *source);
      BinaryTrainResult res = train_binary(bp, train, cfg, {}, val ? &*val : nullptr);
      tm.report = res.report;

      std::vector<const EncodedGraph*> ptrs;
      std::vector<double> truth;
      for (std::size_t i : split.test) {
        ptrs.push_back(&index.graph(i));
        truth.push_back(table_accuracy(index, i));
      }
      const Eigen::MatrixXd emb = embed(res.predictor.trunk, ptrs);
      const RankingResult ranking = rank_candidates(res.predictor, emb);
      std::vector<double> score(ptrs.size());
      for (std::size_t r = 0; r < ranking.order.size(); ++r)
        score[ranking.order[r]] = -static_cast<double>(r);
      tm.spearman_rho = spearman(score, truth);
      if (save) save_binary(ckpt, res.predictor, meta.dump());
    } else {
      auto examples = [&](const std::vector<std::size_t>& pos) {
        std::vector<UnaryExample> out;
        for (std::size_t i : pos)
          out.push_back({index.graph(i),
                         latency ? index.measured_latency(i) : table_accuracy(index, i)});
        return out;
      };
      const std::vector<UnaryExample> train = examples(split.train);
      const std::vector<UnaryExample> val = examples(split.val);
      TrainConfig cfg = latency
                            ? latency_train_config(derive_seed(trial_seed, "init"))
                            : accuracy_train_config(n_train, false, derive_seed(trial_seed, "init"));
      if (o.max_epochs) cfg.max_epochs = *o.max_epochs;
      std::optional<GcnModel> init;
      if (source) {
        Rng rng = make_rng(cfg.rng_seed, "transfer");
        init = transfer_init(make_gcn(cfg.shape, rng), *source, rng);
      }
      UnaryTrainResult res = train_unary(train, val, cfg, init ? &*init : nullptr);
      tm.report = res.report;

      std::vector<const EncodedGraph*> ptrs;
      std::vector<double> truth;
      for (std::size_t i : split.test) {
        ptrs.push_back(&index.graph(i));
        truth.push_back(latency ? index.measured_latency(i) : table_accuracy(index, i));
      }
      const Eigen::VectorXd pred = predict_unary(res.model, ptrs);
      const std::vector<double> preds(pred.data(), pred.data() + pred.size());
      double mse = 0.0;
      for (std::size_t i = 0; i < preds.size(); ++i)
        mse += (preds[i] - truth[i]) * (preds[i] - truth[i]);
      tm.test_mse = mse / static_cast<double>(preds.size());
      tm.spearman_rho = spearman(preds, truth);
      tm.bounds = error_bound_report(preds, truth);
      bound_reports.push_back(*tm.bounds);
      if (save)
        save_unary(ckpt, res.model, latency ? kKindUnaryLatency : kKindUnaryAccuracy,
                   meta.dump());
    }
    if (save) m.add_output(ckpt);
    std::cout << "trial " << t << ": epochs " << tm.report.epochs_run << ", best val loss "
              << tm.report.best_val_loss << ", spearman " << tm.spearman_rho.value_or(0.0);
    if (tm.bounds)
      std::cout << ", within 1/5/10%: " << tm.bounds->fraction_within[0] << " / "
                << tm.bounds->fraction_within[1] << " / " << tm.bounds->fraction_within[2];
    std::cout << "\n";
    trials.push_back(std::move(tm));
  }

  std::ostringstream metrics;
  metrics << kMetricsHeader;
  for (const TrialMetrics& tm : trials) {
    auto bound = [&](std::size_t k) -> std::optional<double> {
      if (!tm.bounds) return std::nullopt;
      return tm.bounds->fraction_within[k];
    };
    metrics << tm.trial << ',' << o.kind << ',' << tm.seed << ',' << tm.n_train << ','
            << tm.n_val << ',' << tm.n_test << ',' << tm.report.epochs_run << ','
            << tm.report.best_epoch << ',' << csv::format_double(tm.report.best_val_loss)
            << ',' << format_or_empty(tm.test_mse) << ',' << format_or_empty(tm.spearman_rho)
            << ',' << format_or_empty(bound(0)) << ',' << format_or_empty(bound(1)) << ','
            << format_or_empty(bound(2)) << '\n';
  }
  csv::write_file_atomic(dir / "metrics.csv", metrics.str());
  m.add_output(dir / "metrics.csv");
  if (!bound_reports.empty()) {
    write_error_bound_csv(dir / "errorbound.csv", bound_reports);
    m.add_output(dir / "errorbound.csv");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- search

int cmd_search(const Options& o, RunManifest& m) {
  if (o.repeat < 1) throw ConfigError("--repeat must be >= 1");
  const fs::path dir = require_out(o);
  const BenchmarkTable table = load_input_table(o, m);
  const bool needs_device = o.latency_limit.has_value() || !o.device.empty();
  const std::string device = needs_device ? resolve_device(table, o.device) : std::string();
  const SearchSpaceIndex index(table, device);

  SearchConfig config;
  config.budget_k = o.budget_k;
  config.iterations = o.iterations;
  config.alpha = o.alpha;
  config.total_m = o.total_m;
  config.latency_limit_ms = o.latency_limit;
  if (!o.predictor.empty()) {
    m.add_input(o.predictor);
    config.predicted_latency =
        std::make_shared<const std::vector<double>>(predict_all(load_unary(o.predictor), index));
  }
  std::shared_ptr<const GcnModel> source;
  if (!o.transfer_from.empty()) {
    m.add_input(o.transfer_from);
    source = std::make_shared<const GcnModel>(load_unary(o.transfer_from));
  }
  if (o.algo != "brp" && o.algo != "ae" && o.algo != "ae-cached" && o.algo != "random")
    throw UsageError("--algo must be brp, ae, ae-cached or random");
  if (o.algo == "brp") config.validate();
  if (config.latency_limit_ms) {
    // Reject a limit no model can meet before any work is done.
    SearchConfig measured = config;
    measured.predicted_latency.reset();
    if (feasible_candidates(index, measured).empty())
      throw InfeasibleError("no model meets the latency limit of " +
                            csv::format_double(*config.latency_limit_ms) + " ms");
  }

  m.config = table_config(o, device);
  m.config["algo"] = o.algo;
  m.config["K"] = o.budget_k;
  m.config["I"] = o.iterations;
  m.config["alpha"] = o.alpha;
  m.config["M"] = o.total_m;
  m.config["latency_limit_ms"] = o.latency_limit ? json(*o.latency_limit) : json(nullptr);
  m.config["repeat"] = o.repeat;
  m.config["predictor"] = o.predictor;
  m.config["transfer_from"] = o.transfer_from;

  std::vector<SearchResult> results;
  std::ostringstream summary;
  summary << "run,seed,best_arch_id,best_accuracy,trained,final_phase_shortfall,"
             "comparator_calls\n";
  for (int r = 0; r < o.repeat; ++r) {
    config.rng_seed = derive_seed(o.seed, "search", static_cast<std::uint64_t>(r));
    m.seeds["run-" + std::to_string(r)] = config.rng_seed;
    SearchResult result;
    if (o.algo == "brp") {
      BinaryRankerConfig rc;
      rc.transfer_from = source;
      BinaryRelationRanker ranker(rc, config.budget_k, derive_seed(config.rng_seed, "ranker"));
      result = brp_nas_search(index, config, &ranker);
    } else if (o.algo == "random") {
      result = random_search(index, config);
    } else {
      EvolutionConfig evo;
      evo.cached = o.algo == "ae-cached";
      result = aging_evolution(index, config, evo);
    }
    const fs::path log = dir / ("run-" + std::to_string(r) + ".jsonl");
    csv::write_file_atomic(log, to_jsonl(result));
    m.add_output(log);
    summary << r << ',' << config.rng_seed << ',' << result.best_arch_id << ','
            << csv::format_double(result.best_accuracy) << ',' << result.trained_set.size()
            << ',' << result.final_phase_shortfall << ',' << result.comparator_calls << '\n';
    std::cout << "run " << r << ": best " << (result.best_arch_id.empty() ? "-" : result.best_arch_id)
              << " accuracy " << result.best_accuracy << "\n";
    results.push_back(std::move(result));
  }
  csv::write_file_atomic(dir / "summary.csv", summary.str());
  write_trajectory_csv(dir / "trajectory.csv", trajectory_aggregate(results));
  m.add_output(dir / "summary.csv");
  m.add_output(dir / "trajectory.csv");
  return kExitOk;
}

// ---------------------------------------------------------------- analyze

// Latency predictions for every index position from whichever source the
// flags name, or nullopt when none was given.
std::optional<std::vector<double>> latency_predictions(const Options& o,
                                                       const SearchSpaceIndex& index,
                                                       RunManifest& m) {
  const int sources = static_cast<int>(!o.predictor.empty()) +
                      static_cast<int>(!o.predictions.empty()) + static_cast<int>(o.layerwise);
  if (sources > 1) throw UsageError("give only one of --predictor, --predictions, --layerwise");
  if (!o.predictor.empty()) {
    m.add_input(o.predictor);
    return predict_all(load_unary(o.predictor), index);
  }
  if (!o.predictions.empty()) {
    if (!fs::exists(o.predictions)) throw UsageError("predictions not found: " + o.predictions);
    m.add_input(o.predictions);
    const auto rows = csv::read_file(o.predictions);
    if (rows.empty() || rows.front().fields != std::vector<std::string>{"arch_id", "predicted_ms"})
      throw SchemaError("predictions header must be arch_id,predicted_ms");
    std::vector<double> out(index.size(), std::nan(""));
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      double v = 0.0;
      if (row.fields.size() != 2 || !csv::parse_double(row.fields[1], v))
        throw SchemaError("bad predictions row", row.line);
      const auto pos = index.find(row.fields[0]);
      if (!pos) throw SchemaError("unknown arch_id " + row.fields[0], row.line);
      out[*pos] = v;
    }
    if (std::any_of(out.begin(), out.end(), [](double v) { return std::isnan(v); }))
      throw SchemaError("predictions do not cover every model of the table");
    return out;
  }
  if (o.layerwise) {
    LayerwiseCostModel base;
    if (!o.op_costs.empty()) {
      m.add_input(o.op_costs);
      base = load_op_costs(o.op_costs, index.device());
    } else {
      const auto& gen = index.table().generator();
      if (!gen) throw UsageError("--layerwise needs --op-costs for tables without a generator");
      const auto it = std::find_if(gen->devices.begin(), gen->devices.end(),
                                   [&](const DeviceProfile& d) { return d.name == index.device(); });
      if (it == gen->devices.end()) throw LookupError("no profile for device " + index.device());
      base = layerwise_from_profile(*it);
    }
    std::vector<std::size_t> perm(index.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = make_rng(o.seed, "calibration");
    std::shuffle(perm.begin(), perm.end(), rng);
    perm.resize(std::min<std::size_t>(perm.size(), static_cast<std::size_t>(o.calibration_size)));
    std::vector<CalibrationPoint> points;
    for (std::size_t i : perm) points.push_back({index.cell(i), index.measured_latency(i)});
    const LayerwiseCostModel cal = layerwise_calibrate(base, points);
    std::vector<double> out(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) out[i] = layerwise_predict(cal, index.cell(i));
    return out;
  }
  return std::nullopt;
}

std::vector<double> parse_thresholds(const std::string& text, const SearchSpaceIndex& index) {
  if (text.empty()) {
    double lo = index.measured_latency(0);
    double hi = lo;
    for (std::size_t i = 1; i < index.size(); ++i) {
      lo = std::min(lo, index.measured_latency(i));
      hi = std::max(hi, index.measured_latency(i));
    }
    if (hi == lo) return {lo};
    return threshold_sweep(lo, hi, (hi - lo) / 60.0);
  }
  std::vector<std::string> fields;
  std::stringstream ss(text);
  for (std::string f; std::getline(ss, f, ':');) fields.push_back(f);
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
  if (fields.size() != 3 || !csv::parse_double(fields[0], lo) ||
      !csv::parse_double(fields[1], hi) || !csv::parse_double(fields[2], step))
    throw ParseError("--thresholds expects LO:HI:STEP");
  return threshold_sweep(lo, hi, step);
}

int cmd_analyze(const std::string& sub, const Options& o, RunManifest& m) {
  const fs::path dir = require_out(o);
  const BenchmarkTable table = load_input_table(o, m);
  m.config = table_config(o, "");
  m.config["analysis"] = sub;

  if (sub == "relation") {
    if (o.predictor.empty())
      throw UsageError("analyze relation needs --predictor (a binary predictor checkpoint)");
    m.add_input(o.predictor);
    const BinaryPredictor bp = load_binary(o.predictor);
    const SearchSpaceIndex index(table, "");
    std::vector<std::size_t> perm(index.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = make_rng(o.seed, "relation-sample");
    std::shuffle(perm.begin(), perm.end(), rng);
    perm.resize(std::min<std::size_t>(perm.size(), static_cast<std::size_t>(o.relation_models)));
    std::vector<const EncodedGraph*> ptrs;
    for (std::size_t i : perm) ptrs.push_back(&index.graph(i));
    const RelationFn rel = relation_fn(bp, embed(bp.trunk, ptrs));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < ptrs.size(); ++a)
      for (std::size_t b = a + 1; b < ptrs.size(); ++b) pairs.emplace_back(a, b);
    const double rate = antisymmetry_rate(rel, pairs);
    const std::size_t n_cycle = std::min<std::size_t>(ptrs.size(), static_cast<std::size_t>(o.cycle_models));
    const CycleProbeResult cycles = cycle_probe(rel, n_cycle, o.cycle_cutoff);
    std::ostringstream out;
    out << "n_models,n_pairs,antisymmetry_rate,cycle_models,cycles,saturated\n"
        << ptrs.size() << ',' << pairs.size() << ',' << csv::format_double(rate) << ','
        << n_cycle << ',' << cycles.cycles << ',' << (cycles.saturated ? 1 : 0) << '\n';
    csv::write_file_atomic(dir / "relation.csv", out.str());
    m.add_output(dir / "relation.csv");
    m.config["relation_models"] = o.relation_models;
    m.config["cycle_models"] = o.cycle_models;
    m.config["cycle_cutoff"] = o.cycle_cutoff;
    std::cout << "antisymmetry " << rate << ", cycles " << cycles.cycles
              << (cycles.saturated ? " (saturated)" : "") << "\n";
    return kExitOk;
  }

  const std::string device = resolve_device(table, o.device);
  m.config["device"] = device;
  const SearchSpaceIndex index(table, device);
  const std::optional<std::vector<double>> pred = latency_predictions(o, index, m);
  m.config["predictor"] = o.predictor;
  m.config["predictions"] = o.predictions;
  m.config["layerwise"] = o.layerwise;
  m.config["op_costs"] = o.op_costs;
  m.config["calibration_size"] = o.calibration_size;
  if (!pred && sub != "pareto")
    throw UsageError("analyze " + sub +
                     " needs a latency source: --predictor CKPT, --predictions CSV "
                     "(arch_id,predicted_ms) or --layerwise");

  if (sub == "oracle") {
    std::vector<OracleInput> models;
    for (std::size_t i = 0; i < index.size(); ++i)
      models.push_back({index.arch_id(i), table_accuracy(index, i), index.measured_latency(i),
                        (*pred)[i]});
    const std::vector<double> thresholds = parse_thresholds(o.thresholds, index);
    m.config["thresholds"] = thresholds;
    const auto reports = oracle_nas_analysis(models, thresholds);
    write_oracle_csv(dir / "oracle.csv", reports);
    m.add_output(dir / "oracle.csv");
    std::cout << "mean missed accuracy " << mean_missed_accuracy(reports) << "\n";
  } else if (sub == "pareto") {
    std::vector<ParetoPoint> measured;
    std::vector<ParetoPoint> predicted;
    for (std::size_t i = 0; i < index.size(); ++i) {
      measured.push_back({index.arch_id(i), table_accuracy(index, i), index.measured_latency(i)});
      if (pred) predicted.push_back({index.arch_id(i), table_accuracy(index, i), (*pred)[i]});
    }
    write_pareto_csv(dir / "pareto_measured.csv", pareto_front(measured));
    m.add_output(dir / "pareto_measured.csv");
    if (pred) {
      write_pareto_csv(dir / "pareto_predicted.csv", pareto_front(predicted));
      m.add_output(dir / "pareto_predicted.csv");
      const double recovery = pareto_recovery(measured, predicted);
      csv::write_file_atomic(dir / "pareto_summary.csv",
                             "recovery\n" + csv::format_double(recovery) + "\n");
      m.add_output(dir / "pareto_summary.csv");
      std::cout << "pareto recovery " << recovery << "\n";
    }
  } else if (sub == "errorbound") {
    std::vector<double> meas;
    for (std::size_t i = 0; i < index.size(); ++i) meas.push_back(index.measured_latency(i));
    const std::vector<ErrorBoundReport> report = {error_bound_report(*pred, meas)};
    write_error_bound_csv(dir / "errorbound.csv", report);
    m.add_output(dir / "errorbound.csv");
  } else {
    throw UsageError("analyze expects oracle, pareto, errorbound or relation");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- aggregate

int cmd_aggregate(const Options& o, RunManifest& m) {
  const fs::path dir = require_out(o);
  if (o.samples.empty())
    throw UsageError("--samples PATH is required (CSV arch_id,device,sample_ms)");
  if (!fs::exists(o.samples)) throw UsageError("samples not found: " + o.samples);
  m.add_input(o.samples);
  m.config["samples"] = o.samples;
  m.config["group_size"] = o.group_size;
  const SampleLog log = read_sample_log(o.samples);
  std::ostringstream out;
  out << "arch_id,device,mean_ms,kept_fraction,n_groups,warning\n";
  for (const auto& [key, samples] : log) {
    const AggregatedLatency a = aggregate({samples, o.group_size});
    out << key.first << ',' << key.second << ',' << csv::format_double(a.mean_ms) << ','
        << csv::format_double(a.kept_fraction) << ',' << a.n_groups << ','
        << (a.warning ? 1 : 0) << '\n';
  }
  csv::write_file_atomic(dir / "aggregated.csv", out.str());
  m.add_output(dir / "aggregated.csv");
  return kExitOk;
}

// ---------------------------------------------------------------- dispatch

int dispatch(const std::vector<std::string>& args);

int cmd_replay(const Options& o) {
  if (o.manifest.empty()) throw UsageError("--manifest PATH is required");
  const RunManifest recorded = read_manifest(o.manifest);
  for (const auto& [path, digest] : recorded.inputs)
    if (sha256_file(path) != digest) throw ValidationError("input changed since the run: " + path);
  std::vector<std::string> argv = recorded.argv;
  fs::path out_dir;
  for (std::size_t i = 0; i + 1 < argv.size(); ++i)
    if (argv[i] == "--out") {
      if (!o.out.empty()) argv[i + 1] = o.out;
      out_dir = argv[i + 1];
    }
  const int code = dispatch(argv);
  if (code != kExitOk) return code;
  bool same = true;
  for (const auto& [name, digest] : recorded.outputs) {
    if (sha256_file(out_dir / name) != digest) {
      std::cerr << "replay: output differs: " << name << "\n";
      same = false;
    }
  }
  std::cout << (same ? "replay: outputs identical\n" : "replay: outputs differ\n");
  return same ? kExitOk : kExitFailure;
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Hardware-aware architecture search toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_table = [&](CLI::App* c) {
    c->add_option("--table", o.table, "Benchmark table CSV");
    c->add_option("--device", o.device, "Latency device column");
  };
  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    c->add_option("--out", o.out, "Output directory");
  };

  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic benchmark table");
  gen->add_option("--space", o.space, "nb201 or nb101")
      ->check(CLI::IsMember({"nb201", "nb101"}))->capture_default_str();
  gen->add_option("--noise-sd", o.noise_sd, "Accuracy noise per pseudo-seed (percent)")
      ->capture_default_str();
  gen->add_option("--num-seeds", o.num_seeds, "Accuracy values per model")->capture_default_str();
  add_common(gen);

  auto* train = app.add_subcommand("train-predictor", "Train and evaluate a predictor");
  add_table(train);
  add_common(train);
  train->add_option("--kind", o.kind, "latency, accuracy or binary")
      ->check(CLI::IsMember({"latency", "accuracy", "binary"}))->capture_default_str();
  train->add_option("--transfer-from", o.transfer_from, "Latency checkpoint for trunk init");
  train->add_option("--repeat", o.repeat, "Independent trials")->capture_default_str();
  train->add_option("--train-size", o.train_size, "Training models (900 latency, 100 otherwise)");
  train->add_option("--val-size", o.val_size, "Validation models (100)");
  train->add_option("--max-epochs", o.max_epochs, "Override the epoch cap");
  train->add_flag("--save-all", o.save_all, "Keep a checkpoint per trial");

  auto* search = app.add_subcommand("search", "Run an architecture search");
  add_table(search);
  add_common(search);
  search->add_option("--algo", o.algo, "brp, ae, ae-cached or random")
      ->check(CLI::IsMember({"brp", "ae", "ae-cached", "random"}))->capture_default_str();
  search->add_option("--K", o.budget_k, "Models trained during the iterations")->capture_default_str();
  search->add_option("--I", o.iterations, "Predictor iterations")->capture_default_str();
  search->add_option("--alpha", o.alpha, "Share of top-ranked picks per iteration")
      ->capture_default_str();
  search->add_option("--M", o.total_m, "Total trained models")->capture_default_str();
  search->add_option("--latency-limit", o.latency_limit, "Latency constraint in ms");
  search->add_option("--repeat", o.repeat, "Independent runs")->capture_default_str();
  search->add_option("--predictor", o.predictor, "Latency checkpoint for the candidate filter");
  search->add_option("--transfer-from", o.transfer_from, "Latency checkpoint for trunk init");

  auto* analyze = app.add_subcommand("analyze", "Analyses over a benchmark table");
  analyze->require_subcommand(1);
  std::vector<CLI::App*> analyses;
  for (const char* name : {"oracle", "pareto", "errorbound", "relation"}) {
    auto* a = analyze->add_subcommand(name);
    add_table(a);
    add_common(a);
    a->add_option("--predictor", o.predictor, "Predictor checkpoint");
    if (std::string(name) != "relation") {
      a->add_option("--predictions", o.predictions, "CSV arch_id,predicted_ms");
      a->add_flag("--layerwise", o.layerwise, "Use the calibrated layer-wise model");
      a->add_option("--op-costs", o.op_costs, "Per-op costs CSV op_name,device,cost_ms");
      a->add_option("--calibration-size", o.calibration_size, "Models used to calibrate")
          ->capture_default_str();
    }
    if (std::string(name) == "oracle")
      a->add_option("--thresholds", o.thresholds, "LO:HI:STEP in ms (default: 61 points)");
    if (std::string(name) == "relation") {
      a->add_option("--models", o.relation_models, "Sampled models")->capture_default_str();
      a->add_option("--cycle-models", o.cycle_models, "Models in the cycle probe")
          ->capture_default_str();
      a->add_option("--cutoff", o.cycle_cutoff, "Cycle count cap")->capture_default_str();
    }
    analyses.push_back(a);
  }

  auto* agg = app.add_subcommand("aggregate", "Aggregate raw latency samples");
  agg->add_option("--samples", o.samples, "CSV arch_id,device,sample_ms");
  agg->add_option("--group-size", o.group_size, "Samples per group")->capture_default_str();
  add_common(agg);

  auto* replay = app.add_subcommand("replay", "Rerun a manifest and compare outputs");
  replay->add_option("--manifest", o.manifest, "Manifest JSON");
  replay->add_option("--out", o.out, "Output directory override");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (replay->parsed()) return cmd_replay(o);

  RunManifest m;
  m.argv = args;
  int code = kExitOk;
  std::string manifest_name;
  if (gen->parsed()) {
    m.command = "gen-synthetic";
    code = cmd_gen_synthetic(o, m);
  } else if (train->parsed()) {
    m.command = "train-predictor";
    code = cmd_train_predictor(o, m);
  } else if (search->parsed()) {
    m.command = "search";
    code = cmd_search(o, m);
  } else if (agg->parsed()) {
    m.command = "aggregate";
    code = cmd_aggregate(o, m);
  } else {
    for (CLI::App* a : analyses)
      if (a->parsed()) {
        m.command = "analyze-" + a->get_name();
        code = cmd_analyze(a->get_name(), o, m);
      }
  }
  m.seeds.emplace("master", o.seed);
  if (code == kExitOk) write_manifest(fs::path(o.out) / (m.command + ".manifest.json"), m);
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    // Usage, config, parse, lookup, dimension and unsupported-space errors.
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace hwnas::cli
