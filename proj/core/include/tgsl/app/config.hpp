#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tgsl/encoder/tgat.hpp"
#include "tgsl/graph/synth.hpp"
#include "tgsl/structure/structure_learner.hpp"
#include "tgsl/training/trainer.hpp"

namespace tgsl::app {

// Everything a run needs. Text form is flat `key = value` lines; `#` starts
// a comment. List values are comma separated.
struct RunConfig {
  // "synth" or a jodie-csv path.
  std::string dataset = "synth";
  graph::SynthConfig synth;
  std::uint64_t split_seed = 0;
  double mask_frac = 0.1;
  int sparsify = 1;

  structure::Strategy strategy = structure::Strategy::kThirdHop;
  std::size_t k = 8;
  std::size_t n_can = 30;
  std::size_t n_rnn = 20;
  double tau_gumbel = 1.0;
  int etgnn_layers = 2;
  std::size_t etgnn_fanout = 20;
  std::vector<int> hop_fanouts = {2, 4, 4};

  ad::Index node_dim = 0;
  ad::Index time_dim = 100;
  ad::Index hidden_dim = 100;
  int heads = 2;
  int layers = 2;
  std::size_t n_nb = 20;
  bool uniform_neighbors = false;
  encoder::WeightInjection injection = encoder::WeightInjection::kValue;

  training::TrainConfig train;
  std::vector<std::uint64_t> seeds = {0};
  std::string out = "out";
};

// Every accepted key, in canonical order.
const std::vector<std::string>& config_keys();

// Sets one key from its text value. Throws ConfigError naming the key and
// listing the valid keys when the key is unknown.
void set_value(RunConfig& config, std::string_view key, std::string_view value);
// Applies a `key=value` override.
void apply_override(RunConfig& config, std::string_view assignment);

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

// Resolved (key, value) pairs in canonical order; parsing them back yields
// an equal config.
std::vector<std::pair<std::string, std::string>> config_entries(
    const RunConfig& config);
std::string config_text(const RunConfig& config);

// Throws ConfigError on the first violated constraint.
void validate(const RunConfig& config);

encoder::EncoderConfig encoder_config(const RunConfig& config,
                                      ad::Index edge_dim);
structure::StructureConfig structure_config(const RunConfig& config);

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace tgsl::app
