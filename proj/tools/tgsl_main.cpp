#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tgsl/app/config.hpp"
#include "tgsl/app/run.hpp"
#include "tgsl/app/verify.hpp"
#include "tgsl/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> seeds;
  std::string out;
  int sparsify = 0;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--config", o.config_path, "Config file (key = value lines)");
  cmd.add_option("--set", o.overrides, "Override key=value (repeatable)")
      ->take_all();
  cmd.add_option("--seed", o.seeds, "Seed(s); replaces the configured list");
  cmd.add_option("--out", o.out, "Output directory (train) or file (synth)");
  cmd.add_option("--sparsify", o.sparsify,
                 "Keep one training event in every N");
}

tgsl::app::RunConfig resolve(const CommonOptions& o) {
  tgsl::app::RunConfig config = o.config_path.empty()
                                    ? tgsl::app::RunConfig{}
                                    : tgsl::app::load_config(o.config_path);
  for (const auto& kv : o.overrides) tgsl::app::apply_override(config, kv);
  if (!o.seeds.empty()) config.seeds = o.seeds;
  if (!o.out.empty()) config.out = o.out;
  if (o.sparsify != 0) config.sparsify = o.sparsify;
  tgsl::app::validate(config);
  return config;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tgsl::DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
std::vector<T> parse_csv_list(const std::string& text,
                              T (*parse)(const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse(item));
  return out;
}

tgsl::structure::Strategy strategy_from(const std::string& s) {
  auto parsed = tgsl::structure::parse_strategy(s);
  if (!parsed) {
    throw tgsl::ConfigError("unknown strategy '" + s +
                            "' (valid: one-hop, third-hop, random)");
  }
  return *parsed;
}

std::size_t size_from(const std::string& s) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used == s.size()) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw tgsl::ConfigError("'" + s + "' is not a non-negative integer");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal graph structure learning for link prediction"};
  app.require_subcommand(1);

  CommonOptions train_opts;
  auto* train = app.add_subcommand("train", "Train, evaluate and write a run");
  add_common(*train, train_opts);

  CommonOptions sweep_opts;
  std::string sweep_strategies = "one-hop,third-hop,random";
  std::string sweep_ks = "2,4,8,16,32";
  auto* sweep = app.add_subcommand("sweep", "Train over strategies and K values");
  add_common(*sweep, sweep_opts);
  sweep->add_option("--strategies", sweep_strategies, "Comma separated");
  sweep->add_option("--ks", sweep_ks, "Comma separated K values");

  std::string manifest, setting_name = "transductive";
  bool original_graph = false, check = false;
  auto* eval = app.add_subcommand("eval", "Re-evaluate a run from its manifest");
  eval->add_option("manifest", manifest, "Path to manifest.json")->required();
  eval->add_option("--setting", setting_name, "transductive or inductive");
  eval->add_flag("--original-graph", original_graph,
                 "Infer on the original graph instead of the augmented one");
  eval->add_flag("--check", check,
                 "Compare with the report recorded at training time");

  CommonOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Write a synthetic jodie-csv file");
  add_common(*synth, synth_opts);

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "Run verification suites");
  verify->add_option("--suite", suite, "grad, gumbel, metrics, leakage or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) {
      auto paths = tgsl::app::cmd_train(resolve(train_opts), std::cerr);
      for (const auto& p : paths) std::cout << p << "\n";
    } else if (*sweep) {
      auto strategies = parse_csv_list(sweep_strategies, strategy_from);
      auto ks = parse_csv_list(sweep_ks, size_from);
      auto paths = tgsl::app::cmd_sweep(resolve(sweep_opts), strategies, ks,
                                        std::cerr);
      for (const auto& p : paths) std::cout << p << "\n";
    } else if (*eval) {
      auto setting = tgsl::training::parse_setting(setting_name);
      if (!setting) {
        throw tgsl::ConfigError("unknown setting '" + setting_name +
                                "' (valid: transductive, inductive)");
      }
      const std::string report =
          tgsl::app::cmd_eval(manifest, *setting, original_graph);
      std::cout << report;
      if (check) {
        auto dir = std::filesystem::path(manifest).parent_path();
        auto recorded = dir / ("report_" + setting_name +
                               (original_graph ? "_original" : "") + ".json");
        if (read_text(recorded.string()) != report) {
          std::cerr << "eval: report differs from " << recorded.string() << "\n";
          return kExitCheckFailed;
        }
        std::cerr << "eval: identical to " << recorded.string() << "\n";
      }
    } else if (*synth) {
      if (synth_opts.out.empty()) {
        throw tgsl::ConfigError("synth: --out PATH is required");
      }
      const std::string path = synth_opts.out;
      synth_opts.out.clear();
      tgsl::app::cmd_synth(resolve(synth_opts), path);
      std::cout << path << "\n";
    } else if (*verify) {
      auto checks = tgsl::app::run_suite(suite);
      std::cout << tgsl::app::format_checks(checks);
      for (const auto& c : checks) {
        if (!c.passed) return kExitCheckFailed;
      }
    }
  } catch (const tgsl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tgsl::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const tgsl::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}
