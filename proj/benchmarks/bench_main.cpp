#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tgsl/autodiff/ops.hpp"
#include "tgsl/autodiff/tape.hpp"
#include "tgsl/encoder/tgat.hpp"
#include "tgsl/graph/neighbor_index.hpp"
#include "tgsl/graph/synth.hpp"
#include "tgsl/structure/selection.hpp"

namespace {

using namespace tgsl;

ad::Matrix random_matrix(ad::Index rows, ad::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ad::Matrix m(rows, cols);
  for (ad::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

const graph::EventStore& synthetic_store() {
  static const graph::EventStore store = graph::synth_generate(
      {.communities = 2, .users = 400, .items = 400, .events = 20000, .seed = 1});
  return store;
}

void BM_MatmulForwardBackward(benchmark::State& state) {
  const auto n = static_cast<ad::Index>(state.range(0));
  auto a = ad::Tensor::parameter(random_matrix(n, n, 1), "a");
  auto b = ad::Tensor::parameter(random_matrix(n, n, 2), "b");
  for (auto _ : state) {
    a.zero_grad();
    b.zero_grad();
    ad::Tape tape;
    ad::TapeScope scope(tape);
    auto loss = ad::reduce_sum(ad::relu(ad::matmul(a, b)));
    tape.backward(loss);
    benchmark::DoNotOptimize(a.grad().data());
  }
}
BENCHMARK(BM_MatmulForwardBackward)->Arg(16)->Arg(64)->Arg(128);

void BM_NeighborQuery(benchmark::State& state) {
  const auto& store = synthetic_store();
  const auto index = graph::NeighborIndex::build(store);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<graph::NodeId> node(0, store.num_nodes() - 1);
  std::uniform_real_distribution<double> time(0.0, store.events().back().timestamp);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.neighbors_before(node(rng), time(rng), n).size());
  }
}
BENCHMARK(BM_NeighborQuery)->Arg(10)->Arg(20);

void BM_EncoderForward(benchmark::State& state) {
  const auto& store = synthetic_store();
  const auto index = graph::NeighborIndex::build(store);
  const auto params = encoder::EncoderParams::init(
      {.node_dim = store.node_dim(), .edge_dim = store.edge_dim(),
       .time_dim = 16, .hidden_dim = 16, .heads = 2,
       .layers = static_cast<int>(state.range(0)), .neighbors = 10},
      7);
  const encoder::TgatEncoder encoder(params);
  std::vector<encoder::EncodeQuery> queries;
  for (graph::EventId id = 10000; id < 10200; ++id) {
    const auto& e = store.event(id);
    queries.push_back({e.src, e.timestamp});
    queries.push_back({e.dst, e.timestamp});
  }
  ad::NoGradScope no_grad;
  for (auto _ : state) {
    auto out = encoder.encode(queries, {.store = &store, .neighbors = &index});
    benchmark::DoNotOptimize(out.values.value().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(queries.size()));
}
BENCHMARK(BM_EncoderForward)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_GumbelTopK(benchmark::State& state) {
  const std::size_t groups = 200;
  const auto per_group = static_cast<std::size_t>(state.range(0));
  const auto logits = ad::Tensor::constant(
      random_matrix(static_cast<ad::Index>(groups * per_group), 1, 4));
  std::vector<std::size_t> offsets;
  for (std::size_t g = 0; g <= groups; ++g) offsets.push_back(g * per_group);
  std::mt19937_64 rng(5);
  ad::NoGradScope no_grad;
  for (auto _ : state) {
    auto sel = structure::gumbel_topk_select(logits, offsets, 4, 1.0,
                                             structure::SelectionMode::kStochastic, rng);
    benchmark::DoNotOptimize(sel.selected.data());
  }
}
BENCHMARK(BM_GumbelTopK)->Arg(10)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
