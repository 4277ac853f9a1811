#include "tgsl/app/run.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tgsl/app/snapshot.hpp"
#include "tgsl/error.hpp"
#include "tgsl/graph/jodie_csv.hpp"
#include "tgsl/graph/synth.hpp"

namespace tgsl::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kVersion = "tgsl 0.1.0";
constexpr const char* kReportPrefix = "report_";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

// Readers never observe a partially written file.
void write_file_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, text);
  fs::rename(tmp, path);
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

// FNV-1a over the version string and the resolved config text.
std::string fingerprint(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  feed(kVersion);
  feed(config_text(config));
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

std::string dataset_name(const RunConfig& config) {
  if (config.dataset == "synth") return "synth";
  return fs::path(config.dataset).stem().string();
}

std::string run_id(const RunConfig& config, std::uint64_t seed) {
  std::string id = dataset_name(config) + "-";
  if (config.train.use_tgsl) {
    id += std::string(structure::strategy_name(config.strategy)) + "-K" +
          std::to_string(config.k);
  } else {
    id += "base";
  }
  return id + "-s" + std::to_string(seed);
}

std::string report_file(graph::Setting setting, bool original) {
  return kReportPrefix + std::string(training::setting_name(setting)) +
         (original ? "_original" : "") + ".json";
}

ordered_json report_object(const training::MetricsReport& r, bool augmented) {
  return {{"setting", training::setting_name(r.setting)},
          {"inference", augmented ? "augmented" : "original"},
          {"acc", r.acc},
          {"ap", r.ap},
          {"positives", r.positives}};
}

// Missing when the protocol leaves no event in the test range.
std::optional<training::MetricsReport> try_evaluate(
    const training::TrainingData& data, const training::Model& model,
    graph::Setting setting, bool augmented, const RunConfig& config,
    std::uint64_t seed) {
  training::EvalOptions options;
  options.setting = setting;
  options.augmented = augmented;
  options.batch_size = config.train.batch_size;
  if (graph::evaluation_events(*data.store, *data.split, data.split->test,
                               setting)
          .empty()) {
    return std::nullopt;
  }
  return training::evaluate(data, model, data.split->test, options, seed);
}

training::Model build_model(const RunConfig& config,
                            const graph::EventStore& store,
                            std::uint64_t seed) {
  return training::Model::init(encoder_config(config, store.edge_dim()),
                               structure_config(config), seed);
}

RunConfig config_from_manifest(const ordered_json& manifest) {
  RunConfig config;
  if (!manifest.contains("config") || !manifest["config"].is_object()) {
    throw DataError("manifest: missing config");
  }
  for (const auto& [key, value] : manifest["config"].items()) {
    set_value(config, key, value.get<std::string>());
  }
  validate(config);
  return config;
}

}  // namespace

LoadedData load_data(const RunConfig& config) {
  graph::EventStore store;
  if (config.dataset == "synth") {
    graph::SynthConfig synth = config.synth;
    synth.node_dim = config.node_dim;
    store = graph::synth_generate(synth);
  } else {
    store = graph::load_jodie_csv(config.dataset, config.node_dim);
  }
  auto split = graph::chronological_split(store, {0.70, 0.15, 0.15},
                                          config.mask_frac, config.split_seed);
  LoadedData out;
  out.train_events_before_sparsify = split.train.size();
  if (config.sparsify > 1) {
    auto sparse = graph::sparsify(store, split, config.sparsify);
    out.store = std::move(sparse.store);
    out.split = std::move(sparse.split);
  } else {
    out.store = std::move(store);
    out.split = std::move(split);
  }
  return out;
}

SeedOutcome run_seed(const RunConfig& config, const LoadedData& loaded,
                     std::uint64_t seed) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  auto data = training::TrainingData::prepare(loaded.store, loaded.split);
  auto initial = build_model(config, loaded.store, seed);

  SeedOutcome out;
  out.seed = seed;
  out.fit = training::fit(data, initial, config.train, seed,
                          [&](const training::EpochRecord&) {
                            out.epoch_seconds.push_back(
                                std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() - start)
                                    .count());
                          });
  const bool tgsl = config.train.use_tgsl;
  for (auto setting :
       {graph::Setting::kTransductive, graph::Setting::kInductive}) {
    auto report = try_evaluate(data, out.fit.best, setting, tgsl, config, seed);
    std::optional<training::MetricsReport> original;
    if (tgsl) {
      original = try_evaluate(data, out.fit.best, setting, false, config, seed);
    }
    if (setting == graph::Setting::kTransductive) {
      out.transductive = report;
      out.transductive_original = original;
    } else {
      out.inductive = report;
      out.inductive_original = original;
    }
  }
  out.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return out;
}

std::string report_json(const training::MetricsReport& report, bool augmented) {
  return report_object(report, augmented).dump(1) + "\n";
}

std::string metrics_json(const RunConfig& config, const LoadedData& data,
                         const SeedOutcome& outcome) {
  ordered_json doc;
  doc["run_id"] = run_id(config, outcome.seed);
  doc["seed"] = outcome.seed;
  doc["dataset"] = dataset_name(config);
  doc["use_tgsl"] = config.train.use_tgsl;
  doc["strategy"] = structure::strategy_name(config.strategy);
  doc["K"] = config.k;
  doc["alpha"] = config.train.alpha;
  doc["train_events"] = data.split.train.size();
  doc["best_epoch"] = outcome.fit.best_epoch;
  ordered_json epochs = ordered_json::array();
  for (const auto& r : outcome.fit.history) {
    epochs.push_back({{"epoch", r.epoch},
                      {"loss_task_ori", r.loss_task_ori},
                      {"loss_task_aug", r.loss_task_aug},
                      {"loss_cl", r.loss_cl},
                      {"loss_total", r.loss_total},
                      {"val_ap", r.val_ap}});
  }
  doc["epochs"] = std::move(epochs);
  ordered_json test = ordered_json::object();
  const bool tgsl = config.train.use_tgsl;
  auto put = [&](const char* key, const auto& report, bool augmented) {
    test[key] = report ? report_object(*report, augmented) : ordered_json();
  };
  put("transductive", outcome.transductive, tgsl);
  put("inductive", outcome.inductive, tgsl);
  if (tgsl) {
    put("transductive_original", outcome.transductive_original, false);
    put("inductive_original", outcome.inductive_original, false);
  }
  doc["test"] = std::move(test);
  return doc.dump(1) + "\n";
}

std::string seed_directory(const RunConfig& config, std::uint64_t seed) {
  return (fs::path(config.out) / ("seed_" + std::to_string(seed))).string();
}

namespace {

std::string metrics_csv(const RunConfig& config, const SeedOutcome& outcome) {
  std::ostringstream ss;
  ss << "run_id,seed,dataset,strategy,K,alpha,setting,epoch,loss_task_ori,"
        "loss_task_aug,loss_cl,val_ap,test_acc,test_ap,wall_seconds\n";
  const std::string id = run_id(config, outcome.seed);
  auto row = [&](std::string_view setting,
                 const std::optional<training::MetricsReport>& report) {
    for (std::size_t e = 0; e < outcome.fit.history.size(); ++e) {
      const auto& r = outcome.fit.history[e];
      ss << id << ',' << outcome.seed << ',' << dataset_name(config) << ','
         << structure::strategy_name(config.strategy) << ',' << config.k << ','
         << format_double(config.train.alpha) << ',' << setting << ','
         << r.epoch << ',' << format_double(r.loss_task_ori) << ','
         << format_double(r.loss_task_aug) << ','
         << format_double(r.loss_cl) << ',' << format_double(r.val_ap) << ','
         << (report ? format_double(report->acc) : "") << ','
         << (report ? format_double(report->ap) : "") << ','
         << format_double(outcome.epoch_seconds[e]) << '\n';
    }
  };
  row("transductive", outcome.transductive);
  row("inductive", outcome.inductive);
  if (config.train.use_tgsl) {
    row("transductive_original", outcome.transductive_original);
    row("inductive_original", outcome.inductive_original);
  }
  return ss.str();
}

}  // namespace

std::vector<std::string> cmd_train(const RunConfig& config, std::ostream& log) {
  validate(config);
  LoadedData data = load_data(config);
  log << "data: " << data.store.num_events() << " events, "
      << data.store.num_nodes() << " nodes, train " << data.split.train.size()
      << " (before sparsify " << data.train_events_before_sparsify << ")\n";
  std::vector<std::string> manifests;
  for (std::uint64_t seed : config.seeds) {
    const std::string started = utc_now();
    log << "seed " << seed << ": training\n";
    SeedOutcome outcome = run_seed(config, data, seed);
    for (const auto& r : outcome.fit.history) {
      log << "  epoch " << r.epoch << " loss " << format_double(r.loss_total)
          << " val_ap " << format_double(r.val_ap) << "\n";
    }
    const fs::path dir = seed_directory(config, seed);
    fs::create_directories(dir);
    write_file(dir / "params.json", snapshot_json(outcome.fit.best));
    write_file(dir / "metrics.json", metrics_json(config, data, outcome));
    write_file(dir / "metrics.csv", metrics_csv(config, outcome));

    const bool tgsl = config.train.use_tgsl;
    ordered_json reports = ordered_json::object();
    auto emit = [&](const std::optional<training::MetricsReport>& report,
                    graph::Setting setting, bool original) {
      if (!report) {
        log << "  " << training::setting_name(setting)
            << (original ? " (original graph)" : "")
            << ": no test events under this protocol\n";
        return;
      }
      const std::string file = report_file(setting, original);
      write_file(dir / file, report_json(*report, tgsl && !original));
      reports[file.substr(0, file.size() - 5)] = file;
      log << "  test " << training::setting_name(setting)
          << (original ? " (original graph)" : "")
          << ": acc " << format_double(report->acc) << " ap "
          << format_double(report->ap) << "\n";
    };
    emit(outcome.transductive, graph::Setting::kTransductive, false);
    emit(outcome.inductive, graph::Setting::kInductive, false);
    if (tgsl) {
      emit(outcome.transductive_original, graph::Setting::kTransductive, true);
      emit(outcome.inductive_original, graph::Setting::kInductive, true);
    }

    ordered_json manifest;
    manifest["version"] = kVersion;
    manifest["fingerprint"] = fingerprint(config);
    ordered_json resolved = ordered_json::object();
    for (const auto& [key, value] : config_entries(config)) {
      resolved[key] = value;
    }
    manifest["config"] = std::move(resolved);
    manifest["seed"] = seed;
    manifest["seeds"] = config.seeds;
    manifest["started_at"] = started;
    manifest["finished_at"] = utc_now();
    manifest["train_events"] = data.split.train.size();
    manifest["train_events_before_sparsify"] = data.train_events_before_sparsify;
    manifest["best_epoch"] = outcome.fit.best_epoch;
    manifest["epochs"] = outcome.fit.history.size();
    manifest["params"] = "params.json";
    manifest["metrics"] = "metrics.json";
    manifest["metrics_csv"] = "metrics.csv";
    manifest["reports"] = std::move(reports);
    const fs::path path = dir / "manifest.json";
    write_file_atomic(path, manifest.dump(1) + "\n");
    manifests.push_back(path.string());
  }
  return manifests;
}

std::vector<std::string> cmd_sweep(
    const RunConfig& config, const std::vector<structure::Strategy>& strategies,
    const std::vector<std::size_t>& ks, std::ostream& log) {
  if (strategies.empty() || ks.empty()) {
    throw ConfigError("sweep: needs at least one strategy and one K");
  }
  std::vector<std::string> manifests;
  for (auto strategy : strategies) {
    for (std::size_t k : ks) {
      RunConfig run = config;
      run.strategy = strategy;
      run.k = k;
      run.out = (fs::path(config.out) /
                 (std::string(structure::strategy_name(strategy)) + "_K" +
                  std::to_string(k)))
                    .string();
      log << "sweep: " << structure::strategy_name(strategy) << " K=" << k
          << "\n";
      auto paths = cmd_train(run, log);
      manifests.insert(manifests.end(), paths.begin(), paths.end());
    }
  }
  return manifests;
}

std::string cmd_eval(const std::string& manifest_path, graph::Setting setting,
                     bool original_graph) {
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(read_file(manifest_path));
  } catch (const ordered_json::exception& e) {
    throw DataError("manifest " + manifest_path + ": " + e.what());
  }
  RunConfig config = config_from_manifest(manifest);
  if (!manifest.contains("seed")) throw DataError("manifest: missing seed");
  const auto seed = manifest["seed"].get<std::uint64_t>();
  const fs::path dir = fs::path(manifest_path).parent_path();
  const fs::path params = dir / manifest.value("params", "params.json");
  if (!fs::exists(params)) {
    throw DataError("eval: parameter snapshot " + params.string() +
                    " does not exist");
  }
  LoadedData loaded = load_data(config);
  auto data = training::TrainingData::prepare(loaded.store, loaded.split);
  auto model = build_model(config, loaded.store, seed);
  restore_snapshot(model, read_file(params));
  const bool augmented = config.train.use_tgsl && !original_graph;
  training::EvalOptions options;
  options.setting = setting;
  options.augmented = augmented;
  options.batch_size = config.train.batch_size;
  auto report =
      training::evaluate(data, model, loaded.split.test, options, seed);
  return report_json(report, augmented);
}

void cmd_synth(const RunConfig& config, const std::string& path) {
  graph::SynthConfig synth = config.synth;
  synth.node_dim = config.node_dim;
  graph::save_jodie_csv(path, graph::synth_generate(synth));
}

}  // namespace tgsl::app
