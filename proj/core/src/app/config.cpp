#include "tgsl/app/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "tgsl/error.hpp"

namespace tgsl::app {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view expected) {
  throw ConfigError("config: " + std::string(key) + " = '" +
                    std::string(value) + "' is not " + std::string(expected));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(key, value, "a number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true or false");
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view value) {
  std::vector<T> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.push_back(parse_number<T>(key, trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  if (out.empty()) bad_value(key, value, "a non-empty list");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

struct Field {
  std::string name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field integer_field(std::string name, T RunConfig::*member) {
  return {name,
          [name, member](RunConfig& c, std::string_view v) {
            c.*member = parse_number<T>(name, v);
          },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

template <typename T, typename Getter>
Field nested_integer(std::string name, Getter ref) {
  return {name,
          [name, ref](RunConfig& c, std::string_view v) {
            ref(c) = parse_number<T>(name, v);
          },
          [ref](const RunConfig& c) {
            return std::to_string(ref(c));
          }};
}

template <typename Getter>
Field nested_real(std::string name, Getter ref) {
  return {name,
          [name, ref](RunConfig& c, std::string_view v) {
            ref(c) = parse_number<double>(name, v);
          },
          [ref](const RunConfig& c) {
            return format_double(ref(c));
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"dataset",
                 [](RunConfig& c, std::string_view v) { c.dataset = v; },
                 [](const RunConfig& c) { return c.dataset; }});
    f.push_back(nested_integer<int>(
        "synth_communities", [](auto& c) -> auto& { return c.synth.communities; }));
    f.push_back(nested_integer<graph::NodeId>(
        "synth_users", [](auto& c) -> auto& { return c.synth.users; }));
    f.push_back(nested_integer<graph::NodeId>(
        "synth_items", [](auto& c) -> auto& { return c.synth.items; }));
    f.push_back(nested_integer<graph::EventId>(
        "synth_events", [](auto& c) -> auto& { return c.synth.events; }));
    f.push_back(nested_real("synth_noise",
                            [](auto& c) -> auto& { return c.synth.noise; }));
    f.push_back(nested_real("synth_jitter",
                            [](auto& c) -> auto& { return c.synth.jitter; }));
    f.push_back(nested_integer<std::uint64_t>(
        "synth_seed", [](auto& c) -> auto& { return c.synth.seed; }));
    f.push_back(integer_field("split_seed", &RunConfig::split_seed));
    f.push_back(nested_real("mask_frac",
                            [](auto& c) -> auto& { return c.mask_frac; }));
    f.push_back(integer_field("sparsify", &RunConfig::sparsify));
    f.push_back({"strategy",
                 [](RunConfig& c, std::string_view v) {
                   auto s = structure::parse_strategy(v);
                   if (!s) bad_value("strategy", v, "one-hop, third-hop or random");
                   c.strategy = *s;
                 },
                 [](const RunConfig& c) {
                   return std::string(structure::strategy_name(c.strategy));
                 }});
    f.push_back(integer_field("K", &RunConfig::k));
    f.push_back(integer_field("n_can", &RunConfig::n_can));
    f.push_back(integer_field("n_rnn", &RunConfig::n_rnn));
    f.push_back(nested_real("tau_gumbel",
                            [](auto& c) -> auto& { return c.tau_gumbel; }));
    f.push_back(integer_field("etgnn_layers", &RunConfig::etgnn_layers));
    f.push_back(integer_field("etgnn_fanout", &RunConfig::etgnn_fanout));
    f.push_back({"hop_fanouts",
                 [](RunConfig& c, std::string_view v) {
                   c.hop_fanouts = parse_list<int>("hop_fanouts", v);
                 },
                 [](const RunConfig& c) { return join(c.hop_fanouts); }});
    f.push_back(integer_field("node_dim", &RunConfig::node_dim));
    f.push_back(integer_field("time_dim", &RunConfig::time_dim));
    f.push_back(integer_field("hidden_dim", &RunConfig::hidden_dim));
    f.push_back(integer_field("heads", &RunConfig::heads));
    f.push_back(integer_field("layers", &RunConfig::layers));
    f.push_back(integer_field("n_nb", &RunConfig::n_nb));
    f.push_back({"uniform_neighbors",
                 [](RunConfig& c, std::string_view v) {
                   c.uniform_neighbors = parse_bool("uniform_neighbors", v);
                 },
                 [](const RunConfig& c) {
                   return std::string(c.uniform_neighbors ? "true" : "false");
                 }});
    f.push_back({"injection",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "value") {
                     c.injection = encoder::WeightInjection::kValue;
                   } else if (v == "logit") {
                     c.injection = encoder::WeightInjection::kLogit;
                   } else {
                     bad_value("injection", v, "value or logit");
                   }
                 },
                 [](const RunConfig& c) {
                   return std::string(c.injection == encoder::WeightInjection::kValue
                                          ? "value"
                                          : "logit");
                 }});
    f.push_back(nested_integer<std::size_t>(
        "batch_size", [](auto& c) -> auto& { return c.train.batch_size; }));
    f.push_back(nested_real("lr", [](auto& c) -> auto& { return c.train.lr; }));
    f.push_back(nested_integer<int>(
        "max_epochs", [](auto& c) -> auto& { return c.train.max_epochs; }));
    f.push_back(nested_integer<int>(
        "patience", [](auto& c) -> auto& { return c.train.patience; }));
    f.push_back(nested_real("tolerance",
                            [](auto& c) -> auto& { return c.train.tolerance; }));
    f.push_back(nested_real("alpha",
                            [](auto& c) -> auto& { return c.train.alpha; }));
    f.push_back(nested_real("tau_cl",
                            [](auto& c) -> auto& { return c.train.tau_cl; }));
    f.push_back(nested_real("moco_momentum", [](auto& c) -> auto& {
      return c.train.moco_momentum;
    }));
    f.push_back(nested_integer<std::size_t>(
        "queue_size", [](auto& c) -> auto& { return c.train.queue_size; }));
    f.push_back({"use_tgsl",
                 [](RunConfig& c, std::string_view v) {
                   c.train.use_tgsl = parse_bool("use_tgsl", v);
                 },
                 [](const RunConfig& c) {
                   return std::string(c.train.use_tgsl ? "true" : "false");
                 }});
    f.push_back({"seeds",
                 [](RunConfig& c, std::string_view v) {
                   c.seeds = parse_list<std::uint64_t>("seeds", v);
                 },
                 [](const RunConfig& c) { return join(c.seeds); }});
    f.push_back({"out", [](RunConfig& c, std::string_view v) { c.out = v; },
                 [](const RunConfig& c) { return c.out; }});
    return f;
  }();
  return table;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.name);
    return k;
  }();
  return keys;
}

void set_value(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (f.name == key) {
      f.set(config, trim(value));
      return;
    }
  }
  std::string valid;
  for (const auto& k : config_keys()) valid += (valid.empty() ? "" : ", ") + k;
  throw ConfigError("config: unknown key '" + std::string(key) +
                    "'; valid keys: " + valid);
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("config: override '" + std::string(assignment) +
                      "' is not key=value");
  }
  set_value(config, trim(assignment.substr(0, eq)),
            trim(assignment.substr(eq + 1)));
}

RunConfig parse_config(std::istream& in) {
  RunConfig config;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    if (view.find('=') == std::string_view::npos) {
      throw ConfigError("config: line " + std::to_string(number) +
                        " is not key = value");
    }
    apply_override(config, view);
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in);
}

std::vector<std::pair<std::string, std::string>> config_entries(
    const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.name, f.get(config));
  return out;
}

std::string config_text(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  require(!c.dataset.empty(), "dataset must be set");
  if (c.dataset == "synth") {
    require(c.synth.communities >= 1, "synth_communities must be >= 1");
    require(c.synth.users >= 1 && c.synth.items >= 1,
            "synth_users and synth_items must be >= 1");
    require(c.synth.events >= 1, "synth_events must be >= 1");
    require(c.synth.noise >= 0.0 && c.synth.noise <= 1.0,
            "synth_noise must lie in [0, 1]");
    require(c.synth.jitter >= 0.0, "synth_jitter must be >= 0");
  }
  require(c.mask_frac >= 0.0 && c.mask_frac < 1.0, "mask_frac must lie in [0, 1)");
  require(c.sparsify >= 1, "sparsify must be >= 1");
  require(c.k >= 1, "K must be >= 1");
  require(c.n_can >= 1, "n_can must be >= 1");
  require(c.n_rnn >= 1, "n_rnn must be >= 1");
  require(c.tau_gumbel > 0.0, "tau_gumbel must be > 0");
  require(c.etgnn_layers >= 1, "etgnn_layers must be >= 1");
  require(c.etgnn_fanout >= 1, "etgnn_fanout must be >= 1");
  for (int f : c.hop_fanouts) require(f >= 1, "hop_fanouts must all be >= 1");
  require(c.node_dim >= 0, "node_dim must be >= 0");
  require(c.time_dim >= 1 && c.hidden_dim >= 1,
          "time_dim and hidden_dim must be >= 1");
  require(c.heads >= 1 && c.hidden_dim % c.heads == 0,
          "hidden_dim must be divisible by heads");
  require(c.layers >= 1, "layers must be >= 1");
  require(c.n_nb >= 1, "n_nb must be >= 1");
  const auto& t = c.train;
  require(t.batch_size >= 1, "batch_size must be >= 1");
  require(t.lr > 0.0, "lr must be > 0");
  require(t.max_epochs >= 1, "max_epochs must be >= 1");
  require(t.patience >= 1, "patience must be >= 1");
  require(t.tolerance >= 0.0, "tolerance must be >= 0");
  require(t.alpha >= 0.0 && t.alpha <= 1.0, "alpha must lie in [0, 1]");
  require(t.tau_cl > 0.0, "tau_cl must be > 0");
  require(t.moco_momentum >= 0.0 && t.moco_momentum <= 1.0,
          "moco_momentum must lie in [0, 1]");
  require(t.queue_size >= 1, "queue_size must be >= 1");
  require(!c.seeds.empty(), "seeds must list at least one seed");
  require(!c.out.empty(), "out must be set");
}

encoder::EncoderConfig encoder_config(const RunConfig& c, ad::Index edge_dim) {
  encoder::EncoderConfig e;
  e.node_dim = c.node_dim;
  e.edge_dim = edge_dim;
  e.time_dim = c.time_dim;
  e.hidden_dim = c.hidden_dim;
  e.heads = c.heads;
  e.layers = c.layers;
  e.neighbors = c.n_nb;
  e.uniform_neighbors = c.uniform_neighbors;
  e.injection = c.injection;
  return e;
}

structure::StructureConfig structure_config(const RunConfig& c) {
  structure::StructureConfig s;
  s.candidates.strategy = c.strategy;
  s.candidates.per_source = c.n_can;
  s.candidates.hop_fanouts = c.hop_fanouts;
  s.k = c.k;
  s.n_rnn = c.n_rnn;
  s.tau = c.tau_gumbel;
  s.etgnn_layers = c.etgnn_layers;
  s.etgnn_fanout = c.etgnn_fanout;
  return s;
}

}  // namespace tgsl::app
