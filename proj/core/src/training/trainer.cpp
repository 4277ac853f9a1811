#include "tgsl/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tgsl/autodiff/ops.hpp"
#include "tgsl/autodiff/tape.hpp"
#include "tgsl/error.hpp"
#include "tgsl/graph/sampling.hpp"
#include "tgsl/training/early_stop.hpp"
#include "tgsl/training/losses.hpp"
#include "tgsl/training/metrics.hpp"

namespace tgsl::training {

using ad::Index;
using ad::Tensor;

namespace {

// Independent stream per (seed, purpose, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t purpose,
                          std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), purpose,
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

enum Purpose : std::uint32_t {
  kTrainNegatives = 1,
  kTrainStructure,
  kEpoch,
  kEvalNegatives,
  kEvalStructure,
  kValidation,
  kEvalOrder,
};

std::vector<graph::NodeId> sorted_unique(std::vector<graph::NodeId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

encoder::NodeEmbeddings take_rows(const encoder::NodeEmbeddings& e,
                                  std::size_t begin, std::size_t count) {
  encoder::NodeEmbeddings out;
  out.values = ad::slice_rows(e.values, static_cast<Index>(begin),
                              static_cast<Index>(count));
  out.nodes.assign(e.nodes.begin() + begin, e.nodes.begin() + begin + count);
  out.times.assign(e.times.begin() + begin, e.times.begin() + begin + count);
  return out;
}

// Queries laid out as [sources; destinations; negatives], each at the
// positive's timestamp.
struct LinkBatch {
  std::vector<graph::TemporalEvent> positives;
  std::vector<graph::NodeId> negatives;
  std::vector<encoder::EncodeQuery> queries;
  double cutoff = 0.0;

  std::size_t size() const { return positives.size(); }
  std::vector<graph::NodeId> endpoints() const {
    std::vector<graph::NodeId> v;
    for (const auto& p : positives) {
      v.push_back(p.src);
      v.push_back(p.dst);
    }
    v.insert(v.end(), negatives.begin(), negatives.end());
    return sorted_unique(std::move(v));
  }
};

LinkBatch make_batch(const graph::EventStore& store,
                     std::span<const graph::EventId> ids,
                     std::span<const graph::NodeId> pool, std::uint64_t seed) {
  LinkBatch b;
  for (auto id : ids) b.positives.push_back(store.event(id));
  b.negatives = graph::sample_negatives(b.positives, pool, seed);
  b.cutoff = b.positives.front().timestamp;
  for (const auto& p : b.positives) b.cutoff = std::min(b.cutoff, p.timestamp);
  for (const auto& p : b.positives) b.queries.push_back({p.src, p.timestamp});
  for (const auto& p : b.positives) b.queries.push_back({p.dst, p.timestamp});
  for (std::size_t i = 0; i < b.size(); ++i)
    b.queries.push_back({b.negatives[i], b.positives[i].timestamp});
  return b;
}

struct LinkScores {
  Tensor positive;
  Tensor negative;
};

LinkScores score_batch(const encoder::NodeEmbeddings& emb, std::size_t n,
                       const encoder::EncoderParams& params) {
  auto src = take_rows(emb, 0, n);
  auto dst = take_rows(emb, n, n);
  auto neg = take_rows(emb, 2 * n, n);
  return {encoder::link_score(src, dst, params),
          encoder::link_score(src, neg, params)};
}

std::vector<graph::NodeId> destinations(const graph::EventStore& store,
                                        std::span<const std::uint8_t> keep) {
  std::vector<graph::NodeId> v;
  for (graph::EventId id = 0; id < store.num_events(); ++id) {
    if (keep.empty() || keep[id]) v.push_back(store.event(id).dst);
  }
  return sorted_unique(std::move(v));
}

}  // namespace

Model Model::init(const encoder::EncoderConfig& encoder_config,
                  const structure::StructureConfig& structure_config,
                  std::uint64_t seed) {
  Model m;
  m.encoder =
      encoder::EncoderParams::init(encoder_config, derive_seed(seed, 11, 0));
  m.structure = structure::StructureParams::init(
      structure_config, encoder_config.node_dim, encoder_config.edge_dim,
      encoder_config.time_dim, derive_seed(seed, 12, 0));
  m.structure_config = structure_config;
  return m;
}

std::vector<Tensor> Model::parameters(bool with_structure) const {
  auto out = encoder.parameters();
  if (with_structure) {
    for (auto& t : structure.parameters()) out.push_back(t);
  }
  return out;
}

Model Model::clone() const {
  return {encoder.clone(), structure.clone(), structure_config};
}

TrainingData TrainingData::prepare(const graph::EventStore& store,
                                   const graph::SplitSpec& split) {
  TrainingData d;
  d.store = &store;
  d.split = &split;
  d.usable = graph::training_usable(store, split);
  d.train_index = graph::NeighborIndex::build(store, d.usable);
  d.full_index = graph::NeighborIndex::build(store);
  d.train_destinations = destinations(store, d.usable);
  d.all_destinations = destinations(store, {});
  auto observed = graph::observed_in_training(store, split);
  for (graph::NodeId v = 0; v < store.num_nodes(); ++v)
    if (observed[v]) d.train_nodes.push_back(v);
  return d;
}

structure::StructureData TrainingData::structure_data() const {
  return {store, &train_index, train_nodes, split->t_max_train};
}

BatchLosses batch_loss(const TrainingData& data, const Model& model,
                       const MoCoState& moco, const TrainConfig& config,
                       std::span<const graph::EventId> batch,
                       std::uint64_t seed) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  const auto& store = *data.store;
  LinkBatch b = make_batch(store, batch, data.train_destinations,
                           derive_seed(seed, kTrainNegatives, 0));
  const std::size_t n = b.size();
  encoder::TgatEncoder enc(model.encoder);
  encoder::EncodeInputs original{&store, &data.train_index, b.cutoff};

  BatchLosses out;
  auto emb = enc.encode(b.queries, original);
  auto scores = score_batch(emb, n, model.encoder);
  out.task_original = bce_link_loss(scores.positive, scores.negative);
  if (!config.use_tgsl) {
    out.total = out.task_original;
    return out;
  }

  auto sources = b.endpoints();
  auto aug = structure::augment(
      sources, b.cutoff, data.train_index, data.structure_data(),
      model.structure, model.structure_config,
      structure::SelectionMode::kStochastic,
      derive_seed(seed, kTrainStructure, 0), enc.time_encoding());
  out.added_edges = aug.view.added().size();
  encoder::EncodeInputs augmented{&store, &aug.view, b.cutoff, nullptr,
                                  &aug.view.weights()};
  auto emb_aug = enc.encode(b.queries, augmented);
  auto scores_aug = score_batch(emb_aug, n, model.encoder);
  out.task_augmented = bce_link_loss(scores_aug.positive, scores_aug.negative);

  // Contrastive instances: batch sources and destinations at event time.
  std::span<const encoder::EncodeQuery> endpoints(b.queries.data(), 2 * n);
  Tensor keys;
  {
    ad::NoGradScope no_grad;
    encoder::TgatEncoder key_enc(moco.key_params);
    keys = ad::normalize_rows(key_enc.encode(endpoints, original).values);
  }
  Tensor queries =
      ad::slice_rows(emb_aug.values, 0, static_cast<Index>(2 * n));
  out.contrastive =
      info_nce_loss(queries, keys, moco.queue.keys(), moco.tau);
  out.keys = keys.value();
  out.total = ad::add(
      ad::add(out.task_original, out.task_augmented),
      ad::scale(out.contrastive, config.alpha));
  return out;
}

EpochRecord train_epoch(const TrainingData& data, Model& model,
                        MoCoState& moco, ad::AdamState& adam,
                        const TrainConfig& config, std::uint64_t seed) {
  if (config.batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  const auto range = data.split->train;
  auto params = model.parameters(config.use_tgsl);
  EpochRecord rec;
  std::size_t batches = 0;
  std::vector<graph::EventId> ids;
  for (graph::EventId begin = range.begin; begin < range.end;
       begin += static_cast<graph::EventId>(config.batch_size)) {
    const graph::EventId end = std::min<graph::EventId>(
        range.end, begin + static_cast<graph::EventId>(config.batch_size));
    ids.clear();
    for (graph::EventId id = begin; id < end; ++id)
      if (data.usable[id]) ids.push_back(id);
    if (ids.empty()) continue;

    for (auto& p : params) p.zero_grad();
    ad::Tape tape;
    BatchLosses losses;
    {
      ad::TapeScope scope(tape);
      losses = batch_loss(data, model, moco, config, ids,
                          derive_seed(seed, kEpoch, batches));
    }
    const double total = losses.total.item();
    if (!std::isfinite(total)) {
      throw NumericError("train: non-finite loss in batch " +
                         std::to_string(batches));
    }
    tape.backward(losses.total);
    ad::adam_step(params, adam);
    if (config.use_tgsl) moco_step(moco, model.encoder, losses.keys);

    rec.loss_total += total;
    rec.loss_task_ori += losses.task_original.item();
    if (config.use_tgsl) {
      rec.loss_task_aug += losses.task_augmented.item();
      rec.loss_cl += losses.contrastive.item();
    }
    ++batches;
  }
  if (batches == 0) throw DataError("train: no usable training events");
  const double inv = 1.0 / static_cast<double>(batches);
  rec.loss_total *= inv;
  rec.loss_task_ori *= inv;
  rec.loss_task_aug *= inv;
  rec.loss_cl *= inv;
  return rec;
}

std::string_view setting_name(graph::Setting setting) {
  return setting == graph::Setting::kTransductive ? "transductive"
                                                  : "inductive";
}

std::optional<graph::Setting> parse_setting(std::string_view name) {
  if (name == "transductive") return graph::Setting::kTransductive;
  if (name == "inductive") return graph::Setting::kInductive;
  return std::nullopt;
}

MetricsReport evaluate(const TrainingData& data, const Model& model,
                       graph::EventRange range, const EvalOptions& options,
                       std::uint64_t seed) {
  if (options.batch_size == 0) throw ConfigError("eval: batch_size must be >= 1");
  const auto& store = *data.store;
  auto ids = graph::evaluation_events(store, *data.split, range, options.setting);
  if (ids.empty()) {
    throw DataError("eval: no " + std::string(setting_name(options.setting)) +
                    " events in range [" + std::to_string(range.begin) + ", " +
                    std::to_string(range.end) + ")");
  }
  ad::NoGradScope no_grad;
  encoder::TgatEncoder enc(model.encoder);
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  std::size_t batch_index = 0;
  for (std::size_t begin = 0; begin < ids.size();
       begin += options.batch_size, ++batch_index) {
    const std::size_t count = std::min(options.batch_size, ids.size() - begin);
    std::span<const graph::EventId> chunk(ids.data() + begin, count);
    LinkBatch b = make_batch(store, chunk, data.all_destinations,
                             derive_seed(seed, kEvalNegatives, batch_index));
    encoder::EncodeInputs inputs{&store, &data.full_index, b.cutoff};
    LinkScores s;
    if (options.augmented) {
      auto sources = b.endpoints();
      auto aug = structure::augment(
          sources, b.cutoff, data.full_index, data.structure_data(),
          model.structure, model.structure_config,
          structure::SelectionMode::kNoiseFree,
          derive_seed(seed, kEvalStructure, batch_index), enc.time_encoding());
      encoder::EncodeInputs view_inputs{&store, &aug.view, b.cutoff, nullptr,
                                        &aug.view.weights()};
      s = score_batch(enc.encode(b.queries, view_inputs), count, model.encoder);
    } else {
      s = score_batch(enc.encode(b.queries, inputs), count, model.encoder);
    }
    for (Index i = 0; i < static_cast<Index>(count); ++i) {
      scores.push_back(s.positive.value()(i, 0));
      labels.push_back(1);
    }
    for (Index i = 0; i < static_cast<Index>(count); ++i) {
      scores.push_back(s.negative.value()(i, 0));
      labels.push_back(0);
    }
  }
  // Score ties keep list order in AP, so the list is put in a seeded
  // random order that favours neither label.
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 order_rng(derive_seed(seed, kEvalOrder, 0));
  std::shuffle(order.begin(), order.end(), order_rng);
  std::vector<double> shuffled_scores(scores.size());
  std::vector<std::uint8_t> shuffled_labels(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled_scores[i] = scores[order[i]];
    shuffled_labels[i] = labels[order[i]];
  }
  scores = std::move(shuffled_scores);
  labels = std::move(shuffled_labels);

  MetricsReport report;
  report.setting = options.setting;
  report.acc = accuracy(scores, labels);
  report.ap = average_precision(scores, labels);
  report.positives = ids.size();
  return report;
}

FitResult fit(const TrainingData& data, const Model& initial,
              const TrainConfig& config, std::uint64_t seed,
              const std::function<void(const EpochRecord&)>& on_epoch) {
  if (config.patience < 1) throw ConfigError("fit: patience must be >= 1");
  if (config.max_epochs < 1) throw ConfigError("fit: max_epochs must be >= 1");
  Model model = initial.clone();
  MoCoState moco = moco_init(model.encoder, config.queue_size,
                             config.moco_momentum, config.tau_cl);
  ad::AdamState adam;
  adam.lr = config.lr;
  EarlyStopState stop;
  stop.patience = config.patience;
  stop.tolerance = config.tolerance;
  stop.max_epochs = config.max_epochs;

  FitResult result;
  result.best = model.clone();
  EvalOptions val_options;
  val_options.augmented = config.use_tgsl;
  val_options.batch_size = config.batch_size;
  const std::uint64_t val_seed = derive_seed(seed, kValidation, 0);
  for (int epoch = 1;; ++epoch) {
    EpochRecord rec = train_epoch(data, model, moco, adam, config,
                                  derive_seed(seed, kEpoch + 100, epoch));
    rec.epoch = epoch;
    rec.val_ap =
        evaluate(data, model, data.split->val, val_options, val_seed).ap;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    const auto decision = early_stop_update(stop, rec.val_ap);
    if (stop.best_epoch == epoch) {
      result.best = model.clone();
      result.best_epoch = epoch;
    }
    if (decision == StopDecision::kStop) break;
  }
  return result;
}

}  // namespace tgsl::training
