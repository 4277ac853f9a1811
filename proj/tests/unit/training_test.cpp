#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <random>

#include "tgsl/app/verify.hpp"
#include "tgsl/autodiff/adam.hpp"
#include "tgsl/autodiff/ops.hpp"
#include "tgsl/autodiff/tape.hpp"
#include "tgsl/error.hpp"
#include "tgsl/graph/split.hpp"
#include "tgsl/graph/synth.hpp"
#include "tgsl/training/early_stop.hpp"
#include "tgsl/training/losses.hpp"
#include "tgsl/training/metrics.hpp"
#include "tgsl/training/moco.hpp"
#include "tgsl/training/trainer.hpp"
#include "test_support.hpp"

namespace tgsl::training {
namespace {

using ad::Matrix;
using ad::Tensor;

Tensor column(std::initializer_list<double> values) {
  return Tensor::constant(
      testing::matrix(static_cast<ad::Index>(values.size()), 1, values));
}

TEST(BceLoss, HalfScoresGiveLnTwo) {
  EXPECT_NEAR(bce_link_loss(column({0.5}), column({0.5})).item(), std::log(2.0), 1e-15);
}

TEST(BceLoss, PerfectScoresClampNearZero) {
  bool clamped = false;
  const double loss = bce_link_loss(column({1.0, 1.0}), column({0.0, 0.0}), &clamped).item();
  EXPECT_TRUE(clamped);
  EXPECT_GT(loss, 0.0);
  EXPECT_LT(loss, 2e-7);
}

TEST(BceLoss, MatchesLongDoubleOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix pos = testing::random_matrix(7, 1, rng, 0.01, 0.99);
    const Matrix neg = testing::random_matrix(7, 1, rng, 0.01, 0.99);
    long double expected = 0.0L;
    for (int i = 0; i < 7; ++i) {
      expected -= std::log(static_cast<long double>(pos(i, 0)));
      expected -= std::log1p(-static_cast<long double>(neg(i, 0)));
    }
    // Mean over the 14 scored pairs of label and probability.
    expected /= 14.0L;
    EXPECT_NEAR(bce_link_loss(Tensor::constant(pos), Tensor::constant(neg)).item(),
                static_cast<double>(expected), 1e-13);
  }
}

TEST(InfoNce, UniformSimilaritiesGiveLogOfCount) {
  std::mt19937_64 rng(2);
  Matrix key = testing::random_matrix(1, 6, rng);
  key.rowwise().normalize();
  for (int m : {1, 4, 32}) {
    const Matrix queue = key.replicate(m, 1);
    const double loss =
        info_nce_loss(Tensor::constant(key), Tensor::constant(key), queue, 0.2).item();
    EXPECT_NEAR(loss, std::log(m + 1.0), 1e-6);
  }
}

TEST(InfoNce, OrthogonalQueueClosedForm) {
  Matrix q = Matrix::Zero(1, 4);
  q(0, 0) = 3.0;
  Matrix queue = Matrix::Zero(3, 4);
  queue(0, 1) = queue(1, 2) = queue(2, 3) = 1.0;
  const double loss =
      info_nce_loss(Tensor::constant(q), Tensor::constant(q), queue, 1.0).item();
  EXPECT_NEAR(loss, std::log(1.0 + 3.0 / std::exp(1.0)), 1e-12);
}

TEST(InfoNce, LowerTemperatureSharpensAlignedPairs) {
  std::mt19937_64 rng(3);
  Matrix q = testing::random_matrix(4, 5, rng);
  Matrix queue = testing::random_matrix(10, 5, rng);
  queue.rowwise().normalize();
  double previous = std::numeric_limits<double>::infinity();
  for (double tau : {1.0, 0.5, 0.2, 0.1}) {
    const double loss =
        info_nce_loss(Tensor::constant(q), Tensor::constant(q), queue, tau).item();
    EXPECT_LT(loss, previous);
    previous = loss;
  }
}

TEST(InfoNce, EmptyQueueIsFlagged) {
  bool empty = false;
  const Matrix q = Matrix::Ones(2, 3);
  const double loss = info_nce_loss(Tensor::constant(q), Tensor::constant(q),
                                    Matrix(0, 3), 0.2, &empty)
                          .item();
  EXPECT_TRUE(empty);
  EXPECT_EQ(loss, 0.0);
  EXPECT_THROW(info_nce_loss(Tensor::constant(q), Tensor::constant(q), Matrix::Ones(1, 4), 0.2),
               ShapeError);
}

encoder::EncoderParams small_encoder(std::uint64_t seed) {
  return encoder::EncoderParams::init({.node_dim = 1, .edge_dim = 2, .time_dim = 3,
                                       .hidden_dim = 4, .heads = 2, .layers = 1,
                                       .neighbors = 3},
                                      seed);
}

TEST(MoCo, MomentumExtremes) {
  const auto query = small_encoder(1);
  auto frozen = moco_init(query, 8, 1.0, 0.2);
  const auto before = frozen_copy(frozen.key_params);
  const auto other = small_encoder(2);
  moco_step(frozen, other, Matrix::Zero(1, 4));
  auto copying = moco_init(query, 8, 0.0, 0.2);
  moco_step(copying, other, Matrix::Zero(1, 4));
  const auto k1 = frozen.key_params.parameters();
  const auto k0 = copying.key_params.parameters();
  const auto b = before.parameters();
  const auto o = other.parameters();
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(k1[i].value(), b[i].value());
    EXPECT_EQ(k0[i].value(), o[i].value());
    EXPECT_FALSE(k0[i].requires_grad());
  }
}

TEST(MoCo, QueueMatchesFifoOracle) {
  KeyQueue queue(512, 2);
  std::deque<std::pair<double, double>> oracle;
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> chunk(1, 70);
  int pushed = 0;
  while (pushed < 600) {
    const int n = std::min(chunk(rng), 600 - pushed);
    Matrix keys(n, 2);
    for (int i = 0; i < n; ++i) {
      keys(i, 0) = pushed + i;
      keys(i, 1) = -(pushed + i);
      oracle.emplace_back(keys(i, 0), keys(i, 1));
      if (oracle.size() > 512) oracle.pop_front();
    }
    queue.push(keys);
    pushed += n;
    const Matrix got = queue.keys();
    ASSERT_EQ(static_cast<std::size_t>(got.rows()), oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      ASSERT_EQ(got(static_cast<ad::Index>(i), 0), oracle[i].first);
      ASSERT_EQ(got(static_cast<ad::Index>(i), 1), oracle[i].second);
    }
  }
  EXPECT_EQ(queue.size(), 512u);
  EXPECT_EQ(queue.keys()(0, 0), 88.0);
  EXPECT_THROW(queue.push(Matrix::Zero(1, 3)), ShapeError);
}

TEST(BatchLoss, DecomposesIntoItsTerms) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    app::ToyProblem toy(seed);
    const auto losses = batch_loss(toy.data, toy.model, toy.moco, toy.config, toy.batch, seed);
    const double expected = losses.task_original.item() + losses.task_augmented.item() +
                            toy.config.alpha * losses.contrastive.item();
    EXPECT_NEAR(losses.total.item(), expected, 1e-6);
    EXPECT_GT(losses.contrastive.item(), 0.0);
    EXPECT_GT(losses.added_edges, 0u);
  }
}

TEST(BatchLoss, ZeroAlphaDropsContrastiveGradient) {
  app::ToyProblem toy(1);
  toy.config.alpha = 0.0;
  auto params = toy.parameters();
  auto total = testing::tape_gradient([&] { return toy.loss(); }, params);
  auto tasks = testing::tape_gradient(
      [&] {
        auto l = batch_loss(toy.data, toy.model, toy.moco, toy.config, toy.batch, toy.seed);
        return ad::add(l.task_original, l.task_augmented);
      },
      params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    EXPECT_EQ(total[i], tasks[i]) << params[i].name();
  }
}

TEST(BatchLoss, EmptySelectionMakesTaskTermsCoincide) {
  app::ToyProblem toy(2);
  toy.model.structure_config.k = 0;
  const auto l = batch_loss(toy.data, toy.model, toy.moco, toy.config, toy.batch, 2);
  EXPECT_EQ(l.added_edges, 0u);
  EXPECT_EQ(l.task_original.item(), l.task_augmented.item());
}

TEST(BatchLoss, KeyEncoderStaysOffTheTape) {
  app::ToyProblem toy(3);
  auto params = toy.parameters();
  testing::tape_gradient([&] { return toy.loss(); }, params);
  for (const auto& k : toy.moco.key_params.parameters()) {
    EXPECT_FALSE(k.requires_grad());
    EXPECT_FALSE(k.has_grad());
  }
}

TEST(BatchLoss, BaselineUsesOnlyTheOriginalTerm) {
  app::ToyProblem toy(4);
  toy.config.use_tgsl = false;
  const auto l = batch_loss(toy.data, toy.model, toy.moco, toy.config, toy.batch, 4);
  EXPECT_EQ(l.total.item(), l.task_original.item());
  EXPECT_FALSE(l.contrastive.defined());
}

struct SmallRun {
  graph::EventStore store;
  graph::SplitSpec split;
  TrainingData data;
  Model model;
  TrainConfig config;

  explicit SmallRun(bool use_tgsl)
      : store(graph::synth_generate({.communities = 2, .users = 30, .items = 30,
                                     .events = 600, .seed = 7})),
        split(graph::chronological_split(store, {0.7, 0.15, 0.15}, 0.1, 7)),
        data(TrainingData::prepare(store, split)),
        model(Model::init({.node_dim = 0, .edge_dim = 2, .time_dim = 4,
                           .hidden_dim = 4, .heads = 1, .layers = 1, .neighbors = 5},
                          {.candidates = {.strategy = structure::Strategy::kOneHop,
                                          .per_source = 5},
                           .k = 2, .n_rnn = 3, .etgnn_layers = 1, .etgnn_fanout = 5},
                          7)) {
    config.batch_size = 50;
    config.lr = 1e-2;
    config.max_epochs = 3;
    config.patience = 5;
    config.use_tgsl = use_tgsl;
  }
};

TEST(Training, TwoEpochsLowerTheLoss) {
  for (bool use_tgsl : {false, true}) {
    SmallRun run(use_tgsl);
    auto moco = moco_init(run.model.encoder, run.config.queue_size,
                          run.config.moco_momentum, run.config.tau_cl);
    ad::AdamState adam;
    adam.lr = run.config.lr;
    const auto first = train_epoch(run.data, run.model, moco, adam, run.config, 1);
    const auto second = train_epoch(run.data, run.model, moco, adam, run.config, 2);
    EXPECT_LT(second.loss_task_ori, first.loss_task_ori) << use_tgsl;
    // The contrastive term grows while the key queue fills, so only the task
    // terms are compared.
    if (use_tgsl) {
      EXPECT_LT(second.loss_task_aug, first.loss_task_aug);
    }
  }
}

TEST(Training, FitIsDeterministic) {
  SmallRun a(true), b(true);
  const auto ra = fit(a.data, a.model, a.config, 11);
  const auto rb = fit(b.data, b.model, b.config, 11);
  ASSERT_EQ(ra.history.size(), rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    EXPECT_EQ(ra.history[i].loss_total, rb.history[i].loss_total);
    EXPECT_EQ(ra.history[i].val_ap, rb.history[i].val_ap);
  }
  EXPECT_EQ(ra.best_epoch, rb.best_epoch);
  const EvalOptions opts{.setting = graph::Setting::kTransductive};
  const auto ea = evaluate(a.data, ra.best, a.split.test, opts, 3);
  const auto eb = evaluate(b.data, rb.best, b.split.test, opts, 3);
  EXPECT_EQ(ea.ap, eb.ap);
  EXPECT_EQ(ea.acc, eb.acc);
  EXPECT_GT(ea.positives, 0u);
}

TEST(Metrics, PerfectRanking) {
  const double scores[] = {0.9, 0.8, 0.2, 0.1};
  const std::uint8_t labels[] = {1, 1, 0, 0};
  EXPECT_EQ(accuracy(scores, labels), 1.0);
  EXPECT_EQ(average_precision(scores, labels), 1.0);
}

TEST(Metrics, ChanceLevelScores) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(100000);
  std::vector<std::uint8_t> labels(100000);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = u(rng);
    labels[i] = i % 2;
  }
  EXPECT_NEAR(accuracy(scores, labels), 0.5, 0.01);
  EXPECT_NEAR(average_precision(scores, labels), 0.5, 0.01);
}

TEST(Metrics, MatchBruteForce) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_int_distribution<int> level(0, 4);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 15;
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = level(rng) / 4.0;
      labels[i] = static_cast<std::uint8_t>(bit(rng));
    }
    labels[0] = 1;
    // Rank of item i: items with a higher score, or an equal score earlier.
    double ap = 0.0, positives = 0.0, correct = 0.0;
    for (int i = 0; i < n; ++i) {
      correct += (scores[i] > 0.5) == (labels[i] == 1);
      if (!labels[i]) continue;
      positives += 1.0;
      double above = 0.0, hits = 0.0;
      for (int j = 0; j < n; ++j) {
        if (scores[j] > scores[i] || (scores[j] == scores[i] && j <= i)) {
          above += 1.0;
          hits += labels[j];
        }
      }
      ap += hits / above;
    }
    EXPECT_NEAR(average_precision(scores, labels), ap / positives, 1e-12);
    EXPECT_NEAR(accuracy(scores, labels), correct / n, 1e-15);
  }
  const double s[] = {0.3};
  const std::uint8_t none[] = {0};
  EXPECT_THROW(average_precision(s, none), std::invalid_argument);
}

TEST(EarlyStop, StopsAfterPatienceWithoutImprovement) {
  EarlyStopState s{.patience = 2, .tolerance = 1e-3, .max_epochs = 50};
  const double aps[] = {0.60, 0.70, 0.7005, 0.69, 0.70};
  std::vector<StopDecision> got;
  for (double ap : aps) got.push_back(early_stop_update(s, ap));
  EXPECT_EQ(got, (std::vector<StopDecision>{StopDecision::kContinue, StopDecision::kContinue,
                                            StopDecision::kContinue, StopDecision::kContinue,
                                            StopDecision::kStop}));
  EXPECT_EQ(s.best_epoch, 2);
  EXPECT_EQ(s.best, 0.70);
}

TEST(EarlyStop, StopsAtMaxEpochs) {
  EarlyStopState s{.patience = 10, .tolerance = 0.0, .max_epochs = 3};
  EXPECT_EQ(early_stop_update(s, 0.1), StopDecision::kContinue);
  EXPECT_EQ(early_stop_update(s, 0.2), StopDecision::kContinue);
  EXPECT_EQ(early_stop_update(s, 0.3), StopDecision::kStop);
  EXPECT_EQ(s.best_epoch, 3);
}

TEST(EarlyStop, ImprovementResetsTheCounter) {
  EarlyStopState s{.patience = 1, .tolerance = 0.01, .max_epochs = 50};
  EXPECT_EQ(early_stop_update(s, 0.5), StopDecision::kContinue);
  EXPECT_EQ(early_stop_update(s, 0.505), StopDecision::kContinue);
  EXPECT_EQ(early_stop_update(s, 0.52), StopDecision::kContinue);
  EXPECT_EQ(s.since_improvement, 0);
  EXPECT_EQ(s.best_epoch, 3);
  EXPECT_EQ(early_stop_update(s, 0.52), StopDecision::kContinue);
  EXPECT_EQ(early_stop_update(s, 0.52), StopDecision::kStop);
}

}  // namespace
}  // namespace tgsl::training
