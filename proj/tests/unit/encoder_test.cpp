#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tgsl/autodiff/grad_check.hpp"
#include "tgsl/autodiff/ops.hpp"
#include "tgsl/error.hpp"
#include "tgsl/encoder/tgat.hpp"
#include "tgsl/encoder/time_encoding.hpp"
#include "tgsl/graph/neighbor_index.hpp"
#include "test_support.hpp"

namespace tgsl::encoder {
namespace {

using ad::Matrix;
using ad::RowVector;
using ad::Tensor;
using graph::EventStore;
using graph::NeighborIndex;

TEST(TimeEncoding, ZeroTimeIsAllOnes) {
  for (ad::Index d : {1, 2, 7, 100}) {
    TimeEncoding te(d);
    EXPECT_EQ(te.encode(0.0), RowVector::Ones(d));
    EXPECT_EQ(te.context(0.0), RowVector::Ones(d));
  }
}

TEST(TimeEncoding, DefaultFrequencyLadder) {
  TimeEncoding te(100);
  EXPECT_EQ(te.alpha(), 10.0);
  EXPECT_EQ(te.beta(), 10.0);
  EXPECT_EQ(te.omega()(0), 1.0);
  EXPECT_NEAR(te.omega()(99) / std::pow(10.0, -9.9), 1.0, 1e-12);
  for (ad::Index i = 1; i < 100; ++i) EXPECT_LT(te.omega()(i), te.omega()(i - 1));
}

TEST(TimeEncoding, RangesAndContextSymmetry) {
  TimeEncoding te(16);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> delta(-1e4, 1e4);
  for (int trial = 0; trial < 200; ++trial) {
    const double d = delta(rng);
    const RowVector c = te.encode(d);
    const RowVector s = te.context(d);
    EXPECT_LE(c.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_GE(s.minCoeff(), 0.0);
    EXPECT_LE(s.maxCoeff(), 2.0);
    EXPECT_LE((te.context(-d) - (RowVector::Constant(16, 2.0) - s))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-15);
    EXPECT_EQ(te.encode(-d), c);
  }
}

TEST(TimeEncoding, RowHelpersMatchSingleRows) {
  TimeEncoding te(5, 3.0, 2.0);
  const double times[] = {0.0, 1.5, -2.0};
  const Matrix enc = te.encode_rows(times);
  const Matrix ctx = te.context_rows(times);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(RowVector(enc.row(i)), te.encode(times[i]));
    EXPECT_EQ(RowVector(ctx.row(i)), te.context(times[i]));
  }
  EXPECT_NEAR(te.omega()(1), std::pow(3.0, -0.5), 1e-15);
}

EncoderConfig tiny_config() {
  return {.node_dim = 1, .edge_dim = 1, .time_dim = 2, .hidden_dim = 2,
          .heads = 1, .layers = 1, .neighbors = 2};
}

// Node 0 talks to node 1 at t = 1 and node 2 at t = 2.
EventStore tiny_store() {
  std::vector<graph::TemporalEvent> events = {{0, 1, 1.0, 0}, {0, 2, 2.0, 1}};
  return EventStore(std::move(events), testing::matrix(3, 1, {0.5, -1.0, 2.0}),
                    testing::matrix(2, 1, {0.3, -0.7}));
}

TEST(Tgat, OneLayerAttentionMatchesHandComputation) {
  const auto store = tiny_store();
  const auto index = NeighborIndex::build(store);
  const auto params = EncoderParams::init(tiny_config(), 11);
  TgatEncoder encoder(params);
  const graph::NodeId node = 0;
  const double t = 3.0;
  const EncodeQuery query[] = {{node, t}};
  const Matrix got = encoder.encode(query, {&store, &index}).values.value();

  // Frequencies for d = 2: alpha = beta = sqrt(2).
  const double root2 = std::numbers::sqrt2;
  const double w[2] = {1.0, std::pow(root2, -1.0 / root2)};
  auto te = [&](double dt) {
    RowVector r(2);
    r << std::cos(dt * w[0]), std::cos(dt * w[1]);
    return r;
  };
  const auto& p = params.layers[0];
  RowVector q_in(3);
  q_in << 0.5, 1.0, 1.0;
  const RowVector q = q_in * p.w_query.value();
  Matrix k_in(2, 4);
  k_in << -1.0, 0.3, te(2.0)(0), te(2.0)(1),
          2.0, -0.7, te(1.0)(0), te(1.0)(1);
  const Matrix keys = k_in * p.w_key.value();
  const Matrix values = k_in * p.w_value.value();
  const double s0 = q.dot(keys.row(0)) / root2;
  const double s1 = q.dot(keys.row(1)) / root2;
  const double a0 = 1.0 / (1.0 + std::exp(s1 - s0));
  const RowVector context = a0 * values.row(0) + (1.0 - a0) * values.row(1);
  RowVector merged(3);
  merged << context, 0.5;
  RowVector hidden = merged * p.merge_w1.value() + p.merge_b1.value();
  hidden = hidden.cwiseMax(0.0);
  const RowVector expected = hidden * p.merge_w2.value() + p.merge_b2.value();
  EXPECT_LE((got.row(0) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tgat, EmptyHistoryGivesFiniteEmbedding) {
  const auto store = tiny_store();
  const auto index = NeighborIndex::build(store);
  auto config = tiny_config();
  config.layers = 2;
  config.heads = 2;
  const auto params = EncoderParams::init(config, 3);
  TgatEncoder encoder(params);
  const EncodeQuery query[] = {{0, 0.5}, {1, 0.0}, {2, 100.0}};
  const Matrix out = encoder.encode(query, {&store, &index}).values.value();
  EXPECT_TRUE(out.allFinite());
}

TEST(Tgat, UnitWeightsMatchNoWeights) {
  std::mt19937_64 rng(1);
  std::vector<graph::TemporalEvent> events;
  std::uniform_int_distribution<graph::NodeId> node(0, 5);
  for (int i = 0; i < 30; ++i) events.push_back({node(rng), node(rng), 0.5 * i, i});
  EventStore store(std::move(events), testing::random_matrix(6, 2, rng),
                   testing::random_matrix(30, 3, rng));
  const auto index = NeighborIndex::build(store);
  for (auto injection : {WeightInjection::kValue, WeightInjection::kLogit}) {
    EncoderConfig config{.node_dim = 2, .edge_dim = 3, .time_dim = 4,
                         .hidden_dim = 4, .heads = 2, .layers = 2,
                         .neighbors = 4, .injection = injection};
    const auto params = EncoderParams::init(config, 2);
    TgatEncoder encoder(params);
    const EncodeQuery query[] = {{0, 14.0}, {3, 9.2}, {5, 16.0}};
    const Tensor ones = Tensor::constant(Matrix::Ones(30, 1));
    EncodeInputs weighted{&store, &index};
    weighted.event_weights = &ones;
    EXPECT_EQ(encoder.encode(query, {&store, &index}).values.value(),
              encoder.encode(query, weighted).values.value());
  }
}

TEST(Tgat, AttentionRowsAreDistributions) {
  std::mt19937_64 rng(6);
  std::vector<graph::TemporalEvent> events;
  std::uniform_int_distribution<graph::NodeId> node(0, 9);
  for (int i = 0; i < 60; ++i) events.push_back({node(rng), node(rng), 1.0 * i, i});
  EventStore store(std::move(events), testing::random_matrix(10, 2, rng),
                   testing::random_matrix(60, 2, rng));
  const auto index = NeighborIndex::build(store);
  EncoderConfig config{.node_dim = 2, .edge_dim = 2, .time_dim = 4,
                       .hidden_dim = 6, .heads = 3, .layers = 2, .neighbors = 5};
  const auto params = EncoderParams::init(config, 9);
  TgatEncoder encoder(params);
  std::vector<EncodeQuery> queries;
  for (graph::NodeId v = 0; v < 10; ++v) queries.push_back({v, 3.0 + 5.0 * v});
  AttentionTrace trace;
  encoder.encode(queries, {&store, &index}, &trace);
  ASSERT_EQ(trace.probabilities.size(), 3u);
  for (const auto& probs : trace.probabilities) {
    for (ad::Index i = 0; i < probs.rows(); ++i) {
      double total = 0.0;
      bool any = false;
      for (ad::Index j = 0; j < probs.cols(); ++j) {
        const bool real = trace.mask[i * probs.cols() + j] != 0;
        if (!real) {
          EXPECT_EQ(probs(i, j), 0.0);
        } else {
          EXPECT_GE(probs(i, j), 0.0);
          any = true;
        }
        total += probs(i, j);
      }
      EXPECT_NEAR(total, any ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(Tgat, FutureEventsDoNotChangeEmbeddings) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<graph::NodeId> node(0, 7);
    std::vector<graph::TemporalEvent> events;
    for (int i = 0; i < 40; ++i) events.push_back({node(rng), node(rng), 1.0 * i, i});
    const Matrix nodes = testing::random_matrix(8, 2, rng);
    const Matrix feats = testing::random_matrix(40, 2, rng);
    const double t = 20.0;
    std::vector<graph::TemporalEvent> altered = events;
    Matrix altered_feats = feats;
    for (int i = 20; i < 40; ++i) {
      altered[i].src = node(rng);
      altered[i].dst = node(rng);
      altered_feats.row(i) = testing::random_matrix(1, 2, rng);
    }
    EventStore a(events, nodes, feats), b(altered, nodes, altered_feats);
    const auto ia = NeighborIndex::build(a);
    const auto ib = NeighborIndex::build(b);
    EncoderConfig config{.node_dim = 2, .edge_dim = 2, .time_dim = 4,
                         .hidden_dim = 4, .heads = 2, .layers = 2,
                         .neighbors = 6, .uniform_neighbors = seed % 2 == 1,
                         .neighbor_seed = seed};
    const auto params = EncoderParams::init(config, seed);
    TgatEncoder encoder(params);
    std::vector<EncodeQuery> queries;
    for (graph::NodeId v = 0; v < 8; ++v) queries.push_back({v, t});
    EXPECT_EQ(encoder.encode(queries, {&a, &ia}).values.value(),
              encoder.encode(queries, {&b, &ib}).values.value());
  }
}

TEST(Tgat, CutoffCapsLookupTime) {
  const auto store = tiny_store();
  const auto index = NeighborIndex::build(store);
  const auto params = EncoderParams::init(tiny_config(), 5);
  TgatEncoder encoder(params);
  const EncodeQuery late[] = {{0, 3.0}};
  EncodeInputs capped{&store, &index};
  capped.cutoff = 1.5;
  // With the cutoff only the t = 1 event is visible, so dropping the t = 2
  // event from the store must not matter.
  std::vector<graph::TemporalEvent> first = {{0, 1, 1.0, 0}};
  EventStore trimmed(first, store.node_features(),
                     Matrix(store.edge_features().topRows(1)));
  const auto trimmed_index = NeighborIndex::build(trimmed);
  EXPECT_EQ(encoder.encode(late, capped).values.value(),
            encoder.encode(late, {&trimmed, &trimmed_index}).values.value());
}

TEST(Tgat, RejectsMismatchedFeatureWidths) {
  const auto store = tiny_store();
  const auto index = NeighborIndex::build(store);
  auto config = tiny_config();
  config.edge_dim = 2;
  const auto params = EncoderParams::init(config, 0);
  TgatEncoder encoder(params);
  const EncodeQuery query[] = {{0, 1.0}};
  EXPECT_THROW(encoder.encode(query, {&store, &index}), ConfigError);
  config.heads = 3;
  EXPECT_THROW(EncoderParams::init(config, 0), ConfigError);
}

TEST(LinkHead, ZeroWeightsScoreOneHalf) {
  auto params = EncoderParams::init(tiny_config(), 1);
  for (auto* t : {&params.head.w1, &params.head.b1, &params.head.w2, &params.head.b2}) {
    t->mutable_value().setZero();
  }
  NodeEmbeddings u{Tensor::constant(testing::matrix(2, 2, {1, 2, 3, 4})), {0, 1}, {1.0, 2.0}};
  NodeEmbeddings v{Tensor::constant(testing::matrix(2, 2, {-1, 0, 5, 6})), {2, 2}, {1.0, 2.0}};
  const Matrix p = link_score(u, v, params).value();
  EXPECT_EQ(p, Matrix::Constant(2, 1, 0.5));
}

TEST(LinkHead, HandSetWeights) {
  auto params = EncoderParams::init(tiny_config(), 1);
  // hidden = relu([u || v] W1 + b1) with W1 picking u0 and v1.
  params.head.w1.mutable_value() = testing::matrix(4, 2, {1, 0, 0, 0, 0, 0, 0, 1});
  params.head.b1.mutable_value() = testing::matrix(1, 2, {0, -1});
  params.head.w2.mutable_value() = testing::matrix(2, 1, {2, 3});
  params.head.b2.mutable_value() = testing::matrix(1, 1, {-0.5});
  NodeEmbeddings u{Tensor::constant(testing::matrix(1, 2, {0.25, 9.0})), {0}, {4.0}};
  NodeEmbeddings v{Tensor::constant(testing::matrix(1, 2, {9.0, 1.5})), {1}, {4.0}};
  const double logit = 2.0 * 0.25 + 3.0 * 0.5 - 0.5;
  EXPECT_NEAR(link_score(u, v, params).item(), 1.0 / (1.0 + std::exp(-logit)), 1e-15);
  v.times = {5.0};
  EXPECT_THROW(link_score(u, v, params), ConfigError);
}

TEST(Tgat, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<graph::NodeId> node(0, 4);
  std::vector<graph::TemporalEvent> events;
  for (int i = 0; i < 15; ++i) events.push_back({node(rng), node(rng), 0.7 * i, i});
  EventStore store(std::move(events), testing::random_matrix(5, 2, rng),
                   testing::random_matrix(15, 2, rng));
  const auto index = NeighborIndex::build(store);
  for (auto injection : {WeightInjection::kValue, WeightInjection::kLogit}) {
    EncoderConfig config{.node_dim = 2, .edge_dim = 2, .time_dim = 3,
                         .hidden_dim = 4, .heads = 2, .layers = 2,
                         .neighbors = 3, .injection = injection};
    const auto params = EncoderParams::init(config, 4);
    TgatEncoder encoder(params);
    Tensor weights = Tensor::parameter(
        testing::random_matrix(15, 1, rng, 0.2, 1.0), "weights");
    const EncodeQuery src[] = {{0, 9.0}, {2, 10.0}};
    const EncodeQuery dst[] = {{1, 9.0}, {3, 10.0}};
    auto fn = [&] {
      EncodeInputs in{&store, &index};
      in.event_weights = &weights;
      auto u = encoder.encode(src, in);
      auto v = encoder.encode(dst, in);
      return ad::reduce_sum(ad::log(link_score(u, v, params)));
    };
    auto list = params.parameters();
    list.push_back(weights);
    const auto report = ad::grad_check(fn, list);
    EXPECT_LE(report.max_rel_error, 1e-6) << report.worst_parameter;
    EXPECT_GT(report.checked, 0u);
  }
}

}  // namespace
}  // namespace tgsl::encoder
