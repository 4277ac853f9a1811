#include "tgsl/app/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "tgsl/app/config.hpp"
#include "tgsl/autodiff/ops.hpp"
#include "tgsl/autodiff/tape.hpp"
#include "tgsl/encoder/tgat.hpp"
#include "tgsl/error.hpp"
#include "tgsl/graph/neighbor_index.hpp"
#include "tgsl/structure/context_predictor.hpp"
#include "tgsl/structure/etgnn.hpp"
#include "tgsl/structure/selection.hpp"
#include "tgsl/training/metrics.hpp"

namespace tgsl::app {
namespace {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

std::string_view relation_text(Relation r) {
  switch (r) {
    case Relation::kAtMost:
      return "<=";
    case Relation::kAtLeast:
      return ">=";
    case Relation::kGreater:
      return ">";
    case Relation::kEqual:
      return "==";
  }
  return "?";
}

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng,
                     double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Tensor param(Matrix m, std::string name) {
  return Tensor::parameter(std::move(m), std::move(name));
}

// Values bounded away from zero, so relu and clamp never sit on a kink
// within the finite-difference step.
Matrix off_kink(Index rows, Index cols, std::mt19937_64& rng) {
  Matrix m = random_matrix(rows, cols, rng, 0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (Index i = 0; i < m.size(); ++i) {
    if (sign(rng)) m.data()[i] = -m.data()[i];
  }
  return m;
}

struct PrimitiveSpec {
  std::vector<Tensor> inputs;
  std::function<Tensor()> output;
};

PrimitiveSpec make_primitive(std::string_view name, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> dim(2, 4);
  const Index m = dim(rng), n = dim(rng), k = dim(rng);
  auto a = param(random_matrix(m, n, rng), "a");
  PrimitiveSpec s;
  auto unary = [&](auto op) {
    s.inputs = {a};
    s.output = [a, op] { return op(a); };
  };
  if (name == "matmul") {
    auto b = param(random_matrix(n, k, rng), "b");
    s.inputs = {a, b};
    s.output = [a, b] { return ad::matmul(a, b); };
  } else if (name == "transpose") {
    unary([](const Tensor& x) { return ad::transpose(x); });
  } else if (name == "add" || name == "sub" || name == "mul") {
    auto b = param(random_matrix(m, n, rng), "b");
    s.inputs = {a, b};
    const std::string op(name);
    s.output = [a, b, op] {
      if (op == "add") return ad::add(a, b);
      if (op == "sub") return ad::sub(a, b);
      return ad::mul(a, b);
    };
  } else if (name == "affine") {
    unary([](const Tensor& x) { return ad::affine(x, -1.7, 0.3); });
  } else if (name == "add_row") {
    auto r = param(random_matrix(1, n, rng), "row");
    s.inputs = {a, r};
    s.output = [a, r] { return ad::add_row(a, r); };
  } else if (name == "mul_col") {
    auto c = param(random_matrix(m, 1, rng), "col");
    s.inputs = {a, c};
    s.output = [a, c] { return ad::mul_col(a, c); };
  } else if (name == "sigmoid") {
    unary([](const Tensor& x) { return ad::sigmoid(x); });
  } else if (name == "relu") {
    a.mutable_value() = off_kink(m, n, rng);
    unary([](const Tensor& x) { return ad::relu(x); });
  } else if (name == "tanh") {
    unary([](const Tensor& x) { return ad::tanh(x); });
  } else if (name == "sin") {
    unary([](const Tensor& x) { return ad::sin(x); });
  } else if (name == "cos") {
    unary([](const Tensor& x) { return ad::cos(x); });
  } else if (name == "exp") {
    unary([](const Tensor& x) { return ad::exp(x); });
  } else if (name == "log") {
    a.mutable_value() = random_matrix(m, n, rng, 0.2, 2.0);
    unary([](const Tensor& x) { return ad::log(x); });
  } else if (name == "clamp") {
    a.mutable_value() = off_kink(m, n, rng);
    unary([](const Tensor& x) { return ad::clamp(x, -0.5, 0.5); });
    // Keep every coordinate at least 0.05 from a clamp edge.
    for (Index i = 0; i < a.size(); ++i) {
      double& v = a.mutable_value().data()[i];
      if (std::abs(std::abs(v) - 0.5) < 0.05) v *= 1.2;
    }
  } else if (name == "reduce_sum") {
    unary([](const Tensor& x) { return ad::reduce_sum(x); });
  } else if (name == "reduce_mean") {
    unary([](const Tensor& x) { return ad::reduce_mean(x); });
  } else if (name == "row_sum") {
    unary([](const Tensor& x) { return ad::row_sum(x); });
  } else if (name == "logsumexp_rows") {
    a.mutable_value() *= 3.0;
    unary([](const Tensor& x) { return ad::logsumexp_rows(x); });
  } else if (name == "masked_softmax_rows") {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(m * n));
    std::bernoulli_distribution keep(0.7);
    for (auto& v : mask) v = keep(rng) ? 1 : 0;
    s.inputs = {a};
    s.output = [a, mask] { return ad::masked_softmax_rows(a, mask); };
  } else if (name == "normalize_rows") {
    unary([](const Tensor& x) { return ad::normalize_rows(x); });
  } else if (name == "concat_cols" || name == "concat_rows") {
    const bool cols = name == "concat_cols";
    auto b = param(cols ? random_matrix(m, k, rng) : random_matrix(k, n, rng),
                   "b");
    s.inputs = {a, b};
    s.output = [a, b, cols] {
      return cols ? ad::concat_cols({a, b}) : ad::concat_rows({a, b});
    };
  } else if (name == "slice_cols") {
    unary([n](const Tensor& x) { return ad::slice_cols(x, 1, n - 1); });
  } else if (name == "slice_rows") {
    unary([m](const Tensor& x) { return ad::slice_rows(x, 1, m - 1); });
  } else if (name == "reshape") {
    unary([m, n](const Tensor& x) { return ad::reshape(x, n, m); });
  } else if (name == "gather_rows") {
    std::uniform_int_distribution<Index> row(-1, m - 1);
    std::vector<Index> index(static_cast<std::size_t>(k + 2));
    for (auto& i : index) i = row(rng);
    s.inputs = {a};
    s.output = [a, index] { return ad::gather_rows(a, index); };
  } else if (name == "segment_mean") {
    // Segments over m rows, one of them empty.
    std::vector<Index> offsets = {0, 1, 1, m};
    s.inputs = {a};
    s.output = [a, offsets] { return ad::segment_mean(a, offsets); };
  } else if (name == "group_dot" || name == "group_weighted_sum") {
    const bool dot = name == "group_dot";
    auto q = param(random_matrix(m, dot ? n : k, rng), "q");
    auto grid = param(random_matrix(m * k, n, rng), "grid");
    s.inputs = {q, grid};
    s.output = [q, grid, dot] {
      return dot ? ad::group_dot(q, grid) : ad::group_weighted_sum(q, grid);
    };
  } else if (name == "linear") {
    auto w = param(random_matrix(n, k, rng), "w");
    auto b = param(random_matrix(1, k, rng), "b");
    s.inputs = {a, w, b};
    s.output = [a, w, b] { return ad::linear(a, w, b); };
  } else {
    throw ConfigError("verify: unknown primitive '" + std::string(name) + "'");
  }
  return s;
}

}  // namespace

CheckResult make_check(std::string suite, std::string name, double measured,
                       Relation relation, double threshold) {
  bool passed = false;
  switch (relation) {
    case Relation::kAtMost:
      passed = measured <= threshold;
      break;
    case Relation::kAtLeast:
      passed = measured >= threshold;
      break;
    case Relation::kGreater:
      passed = measured > threshold;
      break;
    case Relation::kEqual:
      passed = measured == threshold;
      break;
  }
  return {std::move(suite), std::move(name), measured, threshold, relation,
          passed};
}

const std::vector<std::string>& primitive_names() {
  static const std::vector<std::string> names = {
      "matmul",      "transpose",      "add",
      "sub",         "mul",            "affine",
      "add_row",     "mul_col",        "sigmoid",
      "relu",        "tanh",           "sin",
      "cos",         "exp",            "log",
      "clamp",       "reduce_sum",     "reduce_mean",
      "row_sum",     "logsumexp_rows", "masked_softmax_rows",
      "normalize_rows", "concat_cols", "concat_rows",
      "slice_cols",  "slice_rows",     "reshape",
      "gather_rows", "segment_mean",   "group_dot",
      "group_weighted_sum", "linear"};
  return names;
}

ad::GradCheckReport check_primitive(std::string_view name, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PrimitiveSpec spec = make_primitive(name, rng);
  // The weighting grid is drawn lazily once the output shape is known.
  Tensor weights;
  auto fn = [&]() {
    Tensor out = spec.output();
    if (!weights.defined()) {
      weights = Tensor::constant(random_matrix(out.rows(), out.cols(), rng));
    }
    return ad::reduce_sum(ad::mul(out, weights));
  };
  return ad::grad_check(fn, spec.inputs);
}

namespace {

graph::EventStore toy_store(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Users 0..2, items 3..5; the first seven events touch every node.
  const std::pair<int, int> pairs[] = {{0, 3}, {1, 4}, {2, 5}, {0, 4}, {1, 3},
                                       {2, 4}, {0, 5}, {1, 5}, {2, 3}, {0, 3}};
  std::uniform_real_distribution<double> gap(0.3, 1.0);
  std::vector<graph::TemporalEvent> events;
  double t = 0.0;
  for (std::size_t i = 0; i < std::size(pairs); ++i) {
    t += gap(rng);
    events.push_back({pairs[i].first, pairs[i].second, t,
                      static_cast<graph::EventId>(i)});
  }
  return graph::EventStore(std::move(events), random_matrix(6, 2, rng),
                           random_matrix(10, 3, rng), 3);
}

training::Model toy_model(std::uint64_t seed) {
  encoder::EncoderConfig enc;
  enc.node_dim = 2;
  enc.edge_dim = 3;
  enc.time_dim = 4;
  enc.hidden_dim = 4;
  enc.heads = 2;
  enc.layers = 2;
  enc.neighbors = 3;
  structure::StructureConfig st;
  st.candidates.strategy = structure::Strategy::kOneHop;
  st.candidates.per_source = 4;
  st.k = 2;
  st.n_rnn = 3;
  st.etgnn_layers = 2;
  st.etgnn_fanout = 3;
  return training::Model::init(enc, st, seed);
}

}  // namespace

ToyProblem::ToyProblem(std::uint64_t seed_)
    : seed(seed_),
      store(toy_store(seed_)),
      split(graph::chronological_split(store, {0.70, 0.15, 0.15}, 0.0, seed_)),
      data(training::TrainingData::prepare(store, split)),
      model(toy_model(seed_)),
      moco(training::moco_init(model.encoder, 8, 0.9, 0.2)),
      batch{5, 6} {
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  Matrix keys = random_matrix(6, model.encoder.config.hidden_dim, rng);
  keys.rowwise().normalize();
  moco.queue.push(keys);
}

ad::Tensor ToyProblem::loss() const {
  return training::batch_loss(data, model, moco, config, batch, seed).total;
}

std::vector<ad::Tensor> ToyProblem::parameters() const {
  return model.parameters(true);
}

namespace {

struct RandomGraph {
  std::vector<graph::TemporalEvent> events;
  Matrix node_features;
  Matrix edge_features;
};

RandomGraph random_graph(std::mt19937_64& rng, graph::NodeId nodes,
                         std::size_t events, Index node_dim, Index edge_dim) {
  RandomGraph g;
  std::uniform_int_distribution<graph::NodeId> node(0, nodes - 1);
  std::uniform_real_distribution<double> time(0.0, 100.0);
  std::vector<double> times(events);
  for (auto& t : times) t = time(rng);
  std::sort(times.begin(), times.end());
  for (std::size_t i = 0; i < events; ++i) {
    g.events.push_back({node(rng), node(rng), times[i],
                        static_cast<graph::EventId>(i)});
  }
  g.node_features = random_matrix(nodes, node_dim, rng);
  g.edge_features = random_matrix(static_cast<Index>(events), edge_dim, rng);
  return g;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

struct LeakageOutputs {
  Matrix encoder;
  Matrix etgnn_edges;
  Matrix etgnn_nodes;
  Matrix context;
};

LeakageOutputs leakage_outputs(const graph::EventStore& store, double t,
                               const encoder::EncoderParams& enc_params,
                               const structure::StructureParams& st_params) {
  ad::NoGradScope no_grad;
  auto index = graph::NeighborIndex::build(store);
  encoder::TgatEncoder enc(enc_params);
  std::vector<encoder::EncodeQuery> queries;
  std::vector<graph::NodeId> nodes;
  for (graph::NodeId v = 0; v < store.num_nodes(); ++v) {
    queries.push_back({v, t});
    nodes.push_back(v);
  }
  LeakageOutputs out;
  out.encoder = enc.encode(queries, {&store, &index}).values.value();
  std::vector<graph::EventId> past;
  for (graph::EventId e = 0; e < store.lower_bound(t); ++e) past.push_back(e);
  auto et = structure::etgnn_forward(past, nodes, store, index, t,
                                     st_params.etgnn, 4, enc.time_encoding());
  out.etgnn_edges = et.edges.values.value();
  out.etgnn_nodes = et.nodes.value();
  out.context = structure::context_predict(nodes, index, t, 5, et.edges,
                                           st_params.lstm)
                    .value();
  return out;
}

}  // namespace

LeakageDelta leakage_trial(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const graph::NodeId nodes = 12;
  RandomGraph g = random_graph(rng, nodes, 80, 3, 4);
  std::uniform_int_distribution<std::size_t> pivot(20, 70);
  const double t = g.events[pivot(rng)].timestamp;

  // Future events get new endpoints, new features or vanish, and new
  // future events appear.
  std::uniform_int_distribution<graph::NodeId> node(0, nodes - 1);
  std::uniform_int_distribution<int> action(0, 3);
  std::uniform_real_distribution<double> later(t, t + 20.0);
  std::vector<graph::TemporalEvent> events;
  std::vector<Matrix> features;
  for (const auto& e : g.events) {
    Matrix f = g.edge_features.row(e.edge_feature_id);
    graph::TemporalEvent copy = e;
    if (e.timestamp >= t) {
      switch (action(rng)) {
        case 0:
          continue;
        case 1:
          f = random_matrix(1, f.cols(), rng);
          break;
        case 2:
          copy.src = node(rng);
          copy.dst = node(rng);
          break;
        default:
          copy.timestamp = later(rng);
          break;
      }
    }
    copy.edge_feature_id = static_cast<graph::EventId>(features.size());
    features.push_back(f);
    events.push_back(copy);
  }
  for (int i = 0; i < 6; ++i) {
    events.push_back({node(rng), node(rng), later(rng),
                      static_cast<graph::EventId>(features.size())});
    features.push_back(random_matrix(1, g.edge_features.cols(), rng));
  }
  Matrix perturbed_features(static_cast<Index>(features.size()),
                            g.edge_features.cols());
  for (std::size_t i = 0; i < features.size(); ++i) {
    perturbed_features.row(static_cast<Index>(i)) = features[i];
  }
  graph::EventStore original(g.events, g.node_features, g.edge_features);
  graph::EventStore perturbed(std::move(events), g.node_features,
                              std::move(perturbed_features));

  encoder::EncoderConfig enc;
  enc.node_dim = 3;
  enc.edge_dim = 4;
  enc.time_dim = 4;
  enc.hidden_dim = 4;
  enc.heads = 2;
  enc.layers = 2;
  enc.neighbors = 4;
  enc.uniform_neighbors = (seed % 2) == 1;
  enc.neighbor_seed = seed;
  auto enc_params = encoder::EncoderParams::init(enc, seed);
  structure::StructureConfig st;
  auto st_params = structure::StructureParams::init(st, 3, 4, 4, seed);

  auto a = leakage_outputs(original, t, enc_params, st_params);
  auto b = leakage_outputs(perturbed, t, enc_params, st_params);
  return {max_abs_diff(a.encoder, b.encoder),
          max_abs_diff(a.etgnn_edges, b.etgnn_edges),
          max_abs_diff(a.etgnn_nodes, b.etgnn_nodes),
          max_abs_diff(a.context, b.context)};
}

namespace {

std::vector<CheckResult> grad_suite() {
  std::vector<CheckResult> out;
  double worst = 0.0;
  for (const auto& name : primitive_names()) {
    double err = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      err = std::max(err, check_primitive(name, s).max_rel_error);
    }
    worst = std::max(worst, err);
    out.push_back(make_check("grad", "primitive." + name, err,
                             Relation::kAtMost, 1e-4));
  }
  ToyProblem toy(7);
  auto params = toy.parameters();
  auto report = ad::grad_check([&] { return toy.loss(); }, params);
  out.push_back(make_check("grad", "composite_loss.max_rel_error",
                           report.max_rel_error, Relation::kAtMost, 1e-4));
  // Most coordinates must actually be compared, not skipped at kinks.
  const double total =
      static_cast<double>(report.checked + report.skipped.size());
  out.push_back(make_check("grad", "composite_loss.checked_fraction",
                           static_cast<double>(report.checked) / total,
                           Relation::kAtLeast, 0.9));
  return out;
}

// Selection frequency of each of n candidates over `draws` independent
// groups, with shared noise for a fixed seed.
std::vector<double> selection_frequencies(const std::vector<double>& logits,
                                          std::size_t k, double tau,
                                          std::size_t draws,
                                          std::uint64_t seed,
                                          std::vector<std::size_t>* selected) {
  const std::size_t n = logits.size();
  Matrix grid(static_cast<Index>(n * draws), 1);
  std::vector<std::size_t> offsets(draws + 1);
  for (std::size_t d = 0; d < draws; ++d) {
    offsets[d] = d * n;
    for (std::size_t i = 0; i < n; ++i) grid(static_cast<Index>(d * n + i), 0) = logits[i];
  }
  offsets[draws] = n * draws;
  std::mt19937_64 rng(seed);
  auto sel = structure::gumbel_topk_select(Tensor::constant(grid), offsets, k,
                                           tau, structure::SelectionMode::kStochastic,
                                           rng);
  std::vector<double> freq(n, 0.0);
  for (std::size_t idx : sel.selected) freq[idx % n] += 1.0;
  for (auto& f : freq) f /= static_cast<double>(draws);
  if (selected) *selected = std::move(sel.selected);
  return freq;
}

// P(candidate i has the largest logit + logistic noise), by quadrature.
std::vector<double> logistic_argmax_probabilities(const std::vector<double>& m) {
  auto cdf = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  auto pdf = [&](double x) {
    const double s = cdf(x);
    return s * (1.0 - s);
  };
  const int steps = 40000;
  const double lo = -60.0, hi = 60.0, dx = (hi - lo) / steps;
  std::vector<double> p(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    double acc = 0.0;
    for (int s = 0; s <= steps; ++s) {
      const double x = lo + s * dx;
      double v = pdf(x - m[i]);
      for (std::size_t j = 0; j < m.size(); ++j) {
        if (j != i) v *= cdf(x - m[j]);
      }
      const double w = (s == 0 || s == steps) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
      acc += w * v;
    }
    p[i] = acc * dx / 3.0;
  }
  return p;
}

std::vector<CheckResult> gumbel_suite() {
  std::vector<CheckResult> out;
  const std::size_t draws = 100000;
  std::vector<double> equal(10, 0.0);
  std::vector<std::size_t> base_sel, raised_sel, tempered_sel;
  auto freq = selection_frequencies(equal, 3, 1.0, draws, 11, &base_sel);
  double dev = 0.0;
  for (double f : freq) dev = std::max(dev, std::abs(f - 0.3));
  out.push_back(make_check("gumbel", "equal_logits.max_deviation_from_K/n",
                           dev, Relation::kAtMost, 0.01));

  std::vector<double> raised = equal;
  raised[0] += 2.0;
  auto freq_raised = selection_frequencies(raised, 3, 1.0, draws, 11, &raised_sel);
  out.push_back(make_check("gumbel", "raised_logit.frequency_increase",
                           freq_raised[0] - freq[0], Relation::kGreater, 0.0));

  auto tempered = selection_frequencies(equal, 3, 0.25, draws, 11, &tempered_sel);
  (void)tempered;
  out.push_back(make_check("gumbel", "temperature.rank_invariance_mismatches",
                           base_sel == tempered_sel ? 0.0 : 1.0,
                           Relation::kEqual, 0.0));

  const std::vector<double> skewed = {0.0, 0.5, 1.0, -1.0};
  auto p = logistic_argmax_probabilities(skewed);
  auto freq_top1 = selection_frequencies(skewed, 1, 1.0, draws, 13, nullptr);
  double dev1 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dev1 = std::max(dev1, std::abs(freq_top1[i] - p[i]));
  }
  out.push_back(make_check("gumbel", "top1.max_deviation_from_quadrature",
                           dev1, Relation::kAtMost, 0.01));

  // Noise-free mode: exact top-k of the logits, rho = sigmoid(logit / tau).
  std::mt19937_64 rng(5);
  Matrix logits = random_matrix(12, 1, rng, -3.0, 3.0);
  std::vector<std::size_t> offsets = {0, 5, 12};
  auto sel = structure::gumbel_topk_select(Tensor::constant(logits), offsets,
                                           2, 0.5,
                                           structure::SelectionMode::kNoiseFree,
                                           rng);
  double rho_err = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    const double expect = 1.0 / (1.0 + std::exp(-logits(i, 0) / 0.5));
    rho_err = std::max(rho_err, std::abs(sel.rho.value()(i, 0) - expect));
  }
  std::vector<std::size_t> expect_sel;
  for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
    std::vector<std::size_t> idx;
    for (std::size_t i = offsets[g]; i < offsets[g + 1]; ++i) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return logits(static_cast<Index>(a), 0) > logits(static_cast<Index>(b), 0);
    });
    idx.resize(2);
    std::sort(idx.begin(), idx.end());
    expect_sel.insert(expect_sel.end(), idx.begin(), idx.end());
  }
  out.push_back(make_check("gumbel", "noise_free.rho_error", rho_err,
                           Relation::kAtMost, 1e-15));
  out.push_back(make_check("gumbel", "noise_free.selection_mismatches",
                           sel.selected == expect_sel ? 0.0 : 1.0,
                           Relation::kEqual, 0.0));
  return out;
}

double brute_average_precision(const std::vector<double>& s,
                               const std::vector<std::uint8_t>& y) {
  const std::size_t n = s.size();
  double sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!y[i]) continue;
    ++positives;
    std::size_t rank = 0, hits = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool ahead = s[j] > s[i] || (s[j] == s[i] && j <= i);
      if (ahead) {
        ++rank;
        hits += y[j];
      }
    }
    sum += static_cast<double>(hits) / static_cast<double>(rank);
  }
  return sum / static_cast<double>(positives);
}

std::vector<CheckResult> metrics_suite() {
  std::mt19937_64 rng(3);
  // Quantized scores produce ties and survive the affine map exactly.
  std::uniform_int_distribution<int> level(0, 15);
  double ap_err = 0.0, acc_err = 0.0, monotone_err = 0.0;
  double missing_throw = 0.0;
  for (std::size_t n = 1; n <= 12; ++n) {
    std::vector<double> s(n);
    for (auto& v : s) v = level(rng) / 16.0;
    std::vector<double> s_exp(n), s_affine(n);
    for (std::size_t i = 0; i < n; ++i) {
      s_exp[i] = std::exp(s[i]);
      s_affine[i] = 2.0 * s[i] + 1.0;
    }
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<std::uint8_t> y(n);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = (mask >> i) & 1u;
        correct += ((s[i] > 0.5) == (y[i] == 1)) ? 1 : 0;
      }
      acc_err = std::max(
          acc_err, std::abs(training::accuracy(s, y) -
                            static_cast<double>(correct) / static_cast<double>(n)));
      if (mask == 0) {
        bool threw = false;
        try {
          (void)training::average_precision(s, y);
        } catch (const std::invalid_argument&) {
          threw = true;
        }
        if (!threw) missing_throw = 1.0;
        continue;
      }
      const double ap = training::average_precision(s, y);
      ap_err = std::max(ap_err, std::abs(ap - brute_average_precision(s, y)));
      monotone_err = std::max(
          {monotone_err, std::abs(training::average_precision(s_exp, y) - ap),
           std::abs(training::average_precision(s_affine, y) - ap)});
    }
  }
  return {make_check("metrics", "ap.max_error_vs_brute_force", ap_err,
                     Relation::kAtMost, 1e-12),
          make_check("metrics", "acc.max_error_vs_brute_force", acc_err,
                     Relation::kAtMost, 1e-12),
          make_check("metrics", "ap.monotone_transform_change", monotone_err,
                     Relation::kAtMost, 1e-12),
          make_check("metrics", "ap.no_positive_rejected_failures",
                     missing_throw, Relation::kEqual, 0.0)};
}

std::vector<CheckResult> leakage_suite() {
  LeakageDelta worst;
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto d = leakage_trial(s);
    worst.encoder = std::max(worst.encoder, d.encoder);
    worst.etgnn_edges = std::max(worst.etgnn_edges, d.etgnn_edges);
    worst.etgnn_nodes = std::max(worst.etgnn_nodes, d.etgnn_nodes);
    worst.context = std::max(worst.context, d.context);
  }
  return {make_check("leakage", "encoder.max_delta", worst.encoder,
                     Relation::kEqual, 0.0),
          make_check("leakage", "etgnn_edges.max_delta", worst.etgnn_edges,
                     Relation::kEqual, 0.0),
          make_check("leakage", "etgnn_nodes.max_delta", worst.etgnn_nodes,
                     Relation::kEqual, 0.0),
          make_check("leakage", "context.max_delta", worst.context,
                     Relation::kEqual, 0.0)};
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"grad", "gumbel", "metrics",
                                                 "leakage"};
  return names;
}

std::vector<CheckResult> run_suite(std::string_view suite) {
  if (suite == "all") {
    std::vector<CheckResult> out;
    for (const auto& name : suite_names()) {
      auto part = run_suite(name);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (suite == "grad") return grad_suite();
  if (suite == "gumbel") return gumbel_suite();
  if (suite == "metrics") return metrics_suite();
  if (suite == "leakage") return leakage_suite();
  std::string valid = "all";
  for (const auto& name : suite_names()) valid += ", " + name;
  throw ConfigError("verify: unknown suite '" + std::string(suite) +
                    "' (valid: " + valid + ")");
}

std::string format_checks(const std::vector<CheckResult>& checks) {
  std::ostringstream ss;
  for (const auto& c : checks) {
    ss << (c.passed ? "PASS " : "FAIL ") << c.suite << '/' << c.name
       << "  measured=" << format_double(c.measured) << ' '
       << relation_text(c.relation) << ' ' << format_double(c.threshold)
       << '\n';
  }
  return ss.str();
}

}  // namespace tgsl::app
