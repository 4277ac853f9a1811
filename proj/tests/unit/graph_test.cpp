#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "tgsl/error.hpp"
#include "tgsl/graph/event_store.hpp"
#include "tgsl/graph/jodie_csv.hpp"
#include "tgsl/graph/neighbor_index.hpp"
#include "tgsl/graph/sampling.hpp"
#include "tgsl/graph/split.hpp"
#include "tgsl/graph/synth.hpp"
#include "test_support.hpp"

namespace tgsl::graph {
namespace {

using ad::Matrix;
using testing::store_from;

EventStore random_store(std::uint64_t seed, NodeId nodes, EventId events,
                        bool integer_times = false) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeId> node(0, nodes - 1);
  std::uniform_real_distribution<double> time(0.0, 50.0);
  std::vector<TemporalEvent> ev;
  for (EventId i = 0; i < events; ++i) {
    const double t = integer_times ? std::floor(time(rng)) : time(rng);
    ev.push_back({node(rng), node(rng), t, i});
  }
  return EventStore(std::move(ev), Matrix::Zero(nodes, 1),
                    testing::random_matrix(events, 2, rng));
}

TEST(EventStore, SortsStablyByTimestamp) {
  auto store = store_from({{0, 1, 3.0}, {1, 2, 1.0}, {2, 0, 3.0}, {0, 2, 1.0}}, 3);
  ASSERT_EQ(store.num_events(), 4);
  EXPECT_EQ(store.event(0).src, 1);
  EXPECT_EQ(store.event(1).src, 0);
  EXPECT_EQ(store.event(2).src, 0);
  EXPECT_EQ(store.event(3).src, 2);
  // Event i owns feature row i after repacking.
  EXPECT_EQ(store.edge_features()(0, 0), 1.0);
  EXPECT_EQ(store.edge_features()(3, 0), 2.0);
  for (EventId i = 0; i < store.num_events(); ++i) {
    EXPECT_EQ(store.event(i).edge_feature_id, i);
  }
  EXPECT_EQ(store.lower_bound(2.0), 2);
  EXPECT_EQ(store.lower_bound(3.0), 2);
  EXPECT_EQ(store.lower_bound(3.5), 4);
}

TEST(EventStore, RejectsInvalidRows) {
  const Matrix nodes = Matrix::Zero(2, 1);
  const Matrix feats = Matrix::Zero(1, 1);
  EXPECT_THROW(EventStore({{0, 2, 1.0, 0}}, nodes, feats), DataError);
  EXPECT_THROW(EventStore({{-1, 1, 1.0, 0}}, nodes, feats), DataError);
  EXPECT_THROW(EventStore({{0, 1, -1.0, 0}}, nodes, feats), DataError);
  EXPECT_THROW(EventStore({{0, 1, std::nan(""), 0}}, nodes, feats), DataError);
  EXPECT_THROW(EventStore({{0, 1, 1.0, 1}}, nodes, feats), DataError);
  Matrix bad = feats;
  bad(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(EventStore({{0, 1, 1.0, 0}}, nodes, bad), DataError);
}

TEST(JodieCsv, ParsesRowsAndOffsetsItems) {
  std::istringstream in(
      "user_id,item_id,timestamp,state_label,f1,f2\n"
      "0,0,1.5,0,0.1,0.2\n"
      "1,2,2.5,0,0.3,0.4\n"
      "0,1,3.5,1,0.5,0.6\n");
  auto store = read_jodie_csv(in, 4);
  EXPECT_EQ(store.num_events(), 3);
  EXPECT_EQ(store.edge_features().rows(), 3);
  EXPECT_EQ(store.edge_features().cols(), 2);
  EXPECT_EQ(store.num_users(), 2);
  EXPECT_EQ(store.num_nodes(), 5);
  EXPECT_EQ(store.node_features(), Matrix::Zero(5, 4));
  EXPECT_EQ(store.event(1).src, 1);
  EXPECT_EQ(store.event(1).dst, 2 + 2);
  EXPECT_EQ(store.edge_features()(2, 1), 0.6);
}

TEST(JodieCsv, DetectsWideFeatureRows) {
  std::ostringstream text;
  text << "user_id,item_id,timestamp,state_label,features\n";
  for (int r = 0; r < 4; ++r) {
    text << r % 2 << ',' << r << ',' << r << ",0";
    for (int c = 0; c < 172; ++c) text << ',' << (r + c) * 0.01;
    text << '\n';
  }
  std::istringstream in(text.str());
  EXPECT_EQ(read_jodie_csv(in, 0).edge_dim(), 172);
}

TEST(JodieCsv, OutOfOrderRowsMatchPresortedFile) {
  std::vector<std::string> rows = {"0,0,3,0,1", "1,1,1,0,2", "0,1,2,0,3",
                                   "1,0,1,0,4", "2,2,0.5,0,5"};
  auto text = [](std::vector<std::string> r) {
    std::string s = "h\n";
    for (auto& line : r) s += line + "\n";
    return s;
  };
  std::vector<std::string> sorted = rows;
  // External stable sort by the timestamp column.
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    auto ts = [](const std::string& row) {
      auto p1 = row.find(',');
      auto p2 = row.find(',', p1 + 1);
      auto p3 = row.find(',', p2 + 1);
      return std::stod(row.substr(p2 + 1, p3 - p2 - 1));
    };
    return ts(a) < ts(b);
  });
  std::istringstream a(text(rows)), b(text(sorted));
  EXPECT_EQ(read_jodie_csv(a, 0), read_jodie_csv(b, 0));
}

TEST(JodieCsv, ErrorsNameTheLine) {
  auto fails_on = [](const std::string& body, const std::string& needle) {
    std::istringstream in("h\n" + body);
    try {
      read_jodie_csv(in, 0);
    } catch (const DataError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  EXPECT_TRUE(fails_on("0,0,1,0,1\n0,0,2,0\n", "line 3"));
  EXPECT_TRUE(fails_on("0,0,1,0,1\n0,x,2,0,1\n", "line 3"));
  EXPECT_TRUE(fails_on("0,0,-1,0,1\n", "line 2"));
  EXPECT_TRUE(fails_on("0,0,1,0,abc\n", "not numeric"));
}

TEST(JodieCsv, RoundTripsThroughWriter) {
  auto store = synth_generate({.communities = 2, .users = 5, .items = 6,
                               .events = 400, .seed = 3});
  // The format only records nodes that occur in some event.
  std::set<NodeId> present;
  for (const auto& e : store.events()) {
    present.insert(e.src);
    present.insert(e.dst);
  }
  ASSERT_EQ(static_cast<NodeId>(present.size()), store.num_nodes());
  std::ostringstream out;
  write_jodie_csv(out, store);
  std::istringstream in(out.str());
  EXPECT_EQ(read_jodie_csv(in, 0), store);
}

TEST(Split, TenEventsGiveSevenOneTwo) {
  auto store = random_store(1, 6, 10);
  auto split = chronological_split(store);
  EXPECT_EQ(split.train, (EventRange{0, 7}));
  EXPECT_EQ(split.val, (EventRange{7, 8}));
  EXPECT_EQ(split.test, (EventRange{8, 10}));
  double t_max = 0.0;
  for (EventId i = 0; i < 7; ++i) t_max = std::max(t_max, store.event(i).timestamp);
  EXPECT_EQ(split.t_max_train, t_max);
}

TEST(Split, ZeroMaskFractionMasksExactlyUnseenNodes) {
  auto store = random_store(2, 40, 60);
  auto split = chronological_split(store, {0.7, 0.15, 0.15}, 0.0, 0);
  std::set<NodeId> train_nodes, eval_nodes;
  for (EventId i = 0; i < store.num_events(); ++i) {
    auto& set = split.train.contains(i) ? train_nodes : eval_nodes;
    set.insert(store.event(i).src);
    set.insert(store.event(i).dst);
  }
  std::vector<NodeId> unseen;
  for (NodeId v : eval_nodes) {
    if (!train_nodes.count(v)) unseen.push_back(v);
  }
  EXPECT_EQ(split.inductive_masked_nodes, unseen);
}

TEST(Split, MaskedSetIsReproducibleAndAbsentFromUsableTraining) {
  auto store = random_store(3, 30, 100);
  auto a = chronological_split(store, {0.7, 0.15, 0.15}, 0.1, 42);
  auto b = chronological_split(store, {0.7, 0.15, 0.15}, 0.1, 42);
  EXPECT_EQ(a.inductive_masked_nodes, b.inductive_masked_nodes);
  EXPECT_FALSE(a.inductive_masked_nodes.empty());
  auto usable = training_usable(store, a);
  for (EventId i = 0; i < store.num_events(); ++i) {
    if (!usable[i]) continue;
    EXPECT_TRUE(a.train.contains(i));
    EXPECT_FALSE(a.is_masked(store.event(i).src));
    EXPECT_FALSE(a.is_masked(store.event(i).dst));
  }
}

TEST(Split, RejectsBadInputs) {
  EventStore empty(std::vector<TemporalEvent>{}, Matrix::Zero(2, 1),
                   Matrix::Zero(0, 1));
  EXPECT_THROW(chronological_split(empty), DataError);
  auto store = random_store(4, 5, 10);
  EXPECT_THROW(chronological_split(store, {0.5, 0.2, 0.2}), ConfigError);
  EXPECT_THROW(chronological_split(store, {0.7, 0.15, 0.15}, 1.0), ConfigError);
}

TEST(Split, EvaluationProtocolsPartitionByObservation) {
  auto store = random_store(5, 30, 200);
  auto split = chronological_split(store, {0.7, 0.15, 0.15}, 0.2, 1);
  auto seen = observed_in_training(store, split);
  auto trans = evaluation_events(store, split, split.test, Setting::kTransductive);
  auto ind = evaluation_events(store, split, split.test, Setting::kInductive);
  for (EventId id : trans) {
    EXPECT_TRUE(seen[store.event(id).src] && seen[store.event(id).dst]);
  }
  for (EventId id : ind) {
    EXPECT_TRUE(split.is_masked(store.event(id).src) ||
                split.is_masked(store.event(id).dst));
  }
  std::vector<EventId> both;
  std::set_intersection(trans.begin(), trans.end(), ind.begin(), ind.end(),
                        std::back_inserter(both));
  EXPECT_TRUE(both.empty());
}

TEST(NeighborIndex, StrictlyBeforeQueries) {
  auto store = store_from({{0, 1, 1.0}, {0, 2, 2.0}, {0, 3, 3.0}}, 4);
  auto index = NeighborIndex::build(store);
  EXPECT_TRUE(index.neighbors_before(0, 0.0, 5).empty());
  auto got = index.neighbors_before(0, 3.0, 5);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].timestamp, 1.0);
  EXPECT_EQ(got[1].timestamp, 2.0);
  auto last = index.neighbors_before(0, 10.0, 1);
  ASSERT_EQ(last.size(), 1u);
  EXPECT_EQ(last[0].neighbor, 3);
  // Undirected listing.
  ASSERT_EQ(index.all(2).size(), 1u);
  EXPECT_EQ(index.all(2)[0].neighbor, 0);
  EXPECT_EQ(index.all(2)[0].event, 1);
}

TEST(NeighborIndex, MatchesBruteForceOnRandomStores) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto store = random_store(seed, 8, 60, seed % 2 == 0);
    auto index = NeighborIndex::build(store);
    std::mt19937_64 rng(seed + 100);
    std::uniform_int_distribution<NodeId> node(0, 7);
    std::uniform_real_distribution<double> time(0.0, 55.0);
    std::uniform_int_distribution<std::size_t> count(0, 12);
    for (int q = 0; q < 30; ++q) {
      const NodeId v = node(rng);
      const double t = seed % 2 == 0 ? std::floor(time(rng)) : time(rng);
      const std::size_t n = count(rng);
      std::vector<NeighborEntry> brute;
      for (EventId id = 0; id < store.num_events(); ++id) {
        const auto& e = store.event(id);
        if (e.timestamp >= t) continue;
        if (e.src == v) brute.push_back({e.dst, id, e.timestamp});
        else if (e.dst == v) brute.push_back({e.src, id, e.timestamp});
      }
      if (brute.size() > n) brute.erase(brute.begin(), brute.end() - n);
      auto got = index.neighbors_before(v, t, n);
      ASSERT_EQ(std::vector<NeighborEntry>(got.begin(), got.end()), brute);
      std::vector<NeighborEntry> via_interface;
      index.recent_before(v, t, n, via_interface);
      EXPECT_EQ(via_interface, brute);
    }
  }
}

TEST(NeighborIndex, RebuildIsEqual) {
  auto store = random_store(9, 10, 80);
  auto a = NeighborIndex::build(store);
  auto b = NeighborIndex::build(store);
  ASSERT_EQ(a.num_nodes(), b.num_nodes());
  for (NodeId v = 0; v < a.num_nodes(); ++v) {
    EXPECT_TRUE(std::ranges::equal(a.all(v), b.all(v)));
  }
}

TEST(NeighborIndex, UsableMaskLeavesEventsOut) {
  auto store = store_from({{0, 1, 1.0}, {0, 2, 2.0}}, 3);
  std::vector<std::uint8_t> usable = {0, 1};
  auto index = NeighborIndex::build(store, usable);
  ASSERT_EQ(index.all(0).size(), 1u);
  EXPECT_EQ(index.all(0)[0].event, 1);
  EXPECT_TRUE(index.all(1).empty());
}

TEST(KhopSample, PathGraphReachesTheThirdHop) {
  // a=0, b=1, c=2, d=3
  auto store = store_from({{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 3.0}}, 4);
  auto index = NeighborIndex::build(store);
  const int fanouts[] = {4, 4, 4};
  auto got = khop_sample(index, 0, 10.0, fanouts, 7);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].dst, 3);
  EXPECT_EQ(got[0].borrowed_event, 2);
}

TEST(KhopSample, StarGraphHasNoThirdHop) {
  auto store = store_from(
      {{0, 1, 1.0}, {0, 2, 2.0}, {0, 3, 3.0}, {0, 4, 4.0}}, 5);
  auto index = NeighborIndex::build(store);
  const int fanouts[] = {4, 4, 4};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_TRUE(khop_sample(index, 0, 10.0, fanouts, seed).empty());
  }
}

TEST(KhopSample, DeterministicAndChronological) {
  auto store = random_store(11, 12, 150);
  auto index = NeighborIndex::build(store);
  const int fanouts[] = {2, 4, 4};
  for (NodeId v = 0; v < 12; ++v) {
    auto a = khop_sample(index, v, 30.0, fanouts, 5);
    auto b = khop_sample(index, v, 30.0, fanouts, 5);
    EXPECT_EQ(a, b);
    std::set<NodeId> seen;
    for (const auto& h : a) {
      EXPECT_NE(h.dst, v);
      EXPECT_TRUE(seen.insert(h.dst).second);
      EXPECT_LT(store.event(h.borrowed_event).timestamp, 30.0);
    }
  }
}

TEST(KhopSample, RejectsBadFanouts) {
  auto store = store_from({{0, 1, 1.0}}, 2);
  auto index = NeighborIndex::build(store);
  const int zero[] = {2, 0, 1};
  EXPECT_THROW(khop_sample(index, 0, 2.0, zero, 0), ConfigError);
  EXPECT_THROW(khop_sample(index, 0, 2.0, std::span<const int>{}, 0), ConfigError);
}

TEST(Sparsify, IdentityForOne) {
  auto store = random_store(12, 10, 50);
  auto split = chronological_split(store);
  auto out = sparsify(store, split, 1);
  EXPECT_EQ(out.store, store);
  EXPECT_EQ(out.split.train, split.train);
}

TEST(Sparsify, KeepsEveryNthTrainingEvent) {
  auto store = random_store(13, 10, 15);
  SplitSpec split = chronological_split(store, {10.0 / 15.0, 3.0 / 15.0, 2.0 / 15.0});
  ASSERT_EQ(split.train.size(), 10);
  auto out = sparsify(store, split, 3);
  EXPECT_EQ(out.split.train.size(), 4);
  for (EventId i = 0; i < 4; ++i) {
    EXPECT_EQ(out.store.event(i).timestamp, store.event(3 * i).timestamp);
    EXPECT_EQ(out.store.edge_features().row(i), store.edge_features().row(3 * i));
  }
  // Validation and test events are untouched.
  for (EventId k = 0; k < 5; ++k) {
    const auto& a = out.store.event(4 + k);
    const auto& b = store.event(10 + k);
    EXPECT_EQ(a.src, b.src);
    EXPECT_EQ(a.dst, b.dst);
    EXPECT_EQ(a.timestamp, b.timestamp);
    EXPECT_EQ(out.store.edge_features().row(4 + k), store.edge_features().row(10 + k));
  }
  EXPECT_EQ(out.split.val.size(), split.val.size());
  EXPECT_EQ(out.split.test.size(), split.test.size());
  EXPECT_EQ(out.split.inductive_masked_nodes, split.inductive_masked_nodes);
}

TEST(Sparsify, TrainCountIsCeilingOfRatio) {
  auto store = random_store(14, 20, 137);
  auto split = chronological_split(store);
  for (int n = 1; n <= 7; ++n) {
    auto out = sparsify(store, split, n);
    EXPECT_EQ(out.split.train.size(), (split.train.size() + n - 1) / n) << n;
    double t_max = 0.0;
    for (EventId i = out.split.train.begin; i < out.split.train.end; ++i) {
      t_max = std::max(t_max, out.store.event(i).timestamp);
    }
    EXPECT_EQ(out.split.t_max_train, t_max);
  }
  EXPECT_THROW(sparsify(store, split, 0), ConfigError);
}

TEST(Synth, NoiseFreeStreamStaysInCommunity) {
  SynthConfig cfg{.communities = 3, .users = 30, .items = 30, .events = 2000,
                  .noise = 0.0, .seed = 5};
  auto store = synth_generate(cfg);
  for (const auto& e : store.events()) {
    EXPECT_EQ(synth_community(store, e.src, 3), synth_community(store, e.dst, 3));
  }
}

TEST(Synth, SeedDeterminesStore) {
  SynthConfig cfg{.events = 500, .seed = 8};
  EXPECT_EQ(synth_generate(cfg), synth_generate(cfg));
  SynthConfig other = cfg;
  other.seed = 9;
  EXPECT_FALSE(synth_generate(cfg) == synth_generate(other));
}

TEST(Synth, CrossCommunityFractionMatchesNoise) {
  SynthConfig cfg{.communities = 2, .events = 10000, .noise = 0.1, .seed = 1};
  auto store = synth_generate(cfg);
  std::size_t cross = 0;
  double last = 0.0;
  for (const auto& e : store.events()) {
    cross += synth_community(store, e.src, 2) != synth_community(store, e.dst, 2);
    EXPECT_GE(e.timestamp, last);
    last = e.timestamp;
  }
  EXPECT_NEAR(static_cast<double>(cross) / 10000.0, 0.10, 0.01);
  EXPECT_EQ(store.edge_dim(), 2);
}

TEST(Synth, FeaturesCarryTheItemCommunity) {
  SynthConfig cfg{.communities = 2, .events = 2000, .jitter = 0.0, .seed = 2};
  auto store = synth_generate(cfg);
  for (EventId i = 0; i < store.num_events(); ++i) {
    const int c = synth_community(store, store.event(i).dst, 2);
    EXPECT_EQ(store.edge_features()(i, c), 1.0);
    EXPECT_EQ(store.edge_features()(i, 1 - c), 0.0);
  }
}

TEST(Negatives, SingletonPoolAlwaysReturnsIt) {
  std::vector<TemporalEvent> pos = {{0, 1, 1.0, 0}, {2, 3, 2.0, 1}};
  const NodeId pool[] = {5};
  auto got = sample_negatives(pos, pool, 3);
  EXPECT_EQ(got, (std::vector<NodeId>{5, 5}));
  const NodeId own[] = {1};
  EXPECT_THROW(sample_negatives(pos, own, 3), ConfigError);
  EXPECT_THROW(sample_negatives(pos, std::span<const NodeId>{}, 3), ConfigError);
}

TEST(Negatives, ReproducibleAndNeverThePositive) {
  std::vector<TemporalEvent> pos;
  for (int i = 0; i < 50; ++i) pos.push_back({0, 10 + i % 5, 1.0 * i, i});
  std::vector<NodeId> pool;
  for (NodeId v = 10; v < 15; ++v) pool.push_back(v);
  auto a = sample_negatives(pos, pool, 17);
  EXPECT_EQ(a, sample_negatives(pos, pool, 17));
  for (std::size_t i = 0; i < pos.size(); ++i) EXPECT_NE(a[i], pos[i].dst);
}

TEST(Negatives, UniformOverPool) {
  std::vector<NodeId> pool(100);
  for (NodeId v = 0; v < 100; ++v) pool[v] = 1000 + v;
  std::vector<TemporalEvent> pos(100000, TemporalEvent{0, 1, 0.0, 0});
  auto got = sample_negatives(pos, pool, 23);
  std::map<NodeId, int> counts;
  for (NodeId v : got) ++counts[v];
  ASSERT_EQ(counts.size(), 100u);
  for (const auto& [v, c] : counts) {
    EXPECT_NEAR(c / 100000.0, 0.01, 0.003) << v;
  }
}

}  // namespace
}  // namespace tgsl::graph
