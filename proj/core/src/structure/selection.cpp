#include "tgsl/structure/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tgsl/autodiff/ops.hpp"
#include "tgsl/autodiff/tape.hpp"
#include "tgsl/error.hpp"

namespace tgsl::structure {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

ProjectedPair time_map(const Tensor& context, const Tensor& feature,
                       std::span<const double> t_new, double t_max,
                       std::span<const double> t_sample,
                       const encoder::TimeEncoding& time_encoding) {
  const std::size_t n = t_new.size();
  if (static_cast<std::size_t>(context.rows()) != n ||
      static_cast<std::size_t>(feature.rows()) != n || t_sample.size() != n) {
    throw ShapeError("time_map: row counts differ");
  }
  std::vector<double> to_context(n), to_feature(n);
  for (std::size_t i = 0; i < n; ++i) {
    to_context[i] = t_new[i] - t_max;
    to_feature[i] = t_new[i] - t_sample[i];
  }
  return {ad::mul(context,
                  Tensor::constant(time_encoding.context_rows(to_context))),
          ad::mul(feature,
                  Tensor::constant(time_encoding.context_rows(to_feature)))};
}

Tensor candidate_logits(const Tensor& contexts, const EdgeEmbeddings& edges,
                        const CandidateSet& candidates, double t_max,
                        const encoder::TimeEncoding& time_encoding) {
  const std::size_t n = candidates.edges.size();
  std::vector<Index> source_rows(n), feature_rows(n);
  std::vector<double> t_new(n), t_sample(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = candidates.edges[i];
    source_rows[i] = static_cast<Index>(c.source);
    feature_rows[i] = -1;
    if (c.feature_event != graph::kNoEvent) {
      feature_rows[i] = edges.row_of(c.feature_event);
      if (feature_rows[i] < 0) {
        throw std::invalid_argument("candidate_logits: no embedding for event " +
                                    std::to_string(c.feature_event));
      }
    }
    t_new[i] = c.t_new;
    t_sample[i] = c.t_sample;
  }
  Tensor features = edges.values.defined()
                        ? ad::gather_rows(edges.values, feature_rows)
                        : Tensor::zeros(static_cast<Index>(n), contexts.cols());
  auto projected =
      time_map(ad::gather_rows(contexts, source_rows), features, t_new, t_max,
               t_sample, time_encoding);
  return ad::row_sum(ad::mul(projected.context, projected.feature));
}

double logistic_noise(double u) { return std::log(u) - std::log1p(-u); }

double open_uniform(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(
      std::nextafter(0.0, 1.0), 1.0);
  return dist(rng);
}

std::vector<std::size_t> top_k_per_group(std::span<const double> scores,
                                         std::span<const std::size_t> offsets,
                                         std::size_t k) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> order;
  for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
    const std::size_t lo = offsets[g], hi = offsets[g + 1];
    order.resize(hi - lo);
    std::iota(order.begin(), order.end(), lo);
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return scores[a] > scores[b] ||
                               (scores[a] == scores[b] && a < b);
                      });
    order.resize(take);
    std::sort(order.begin(), order.end());
    out.insert(out.end(), order.begin(), order.end());
  }
  return out;
}

Selection gumbel_topk_select(const Tensor& logits,
                             std::span<const std::size_t> offsets,
                             std::size_t k, double tau, SelectionMode mode,
                             std::mt19937_64& rng) {
  if (!(tau > 0.0)) {
    throw ConfigError("gumbel_topk: tau must be > 0, got " +
                      std::to_string(tau));
  }
  if (logits.cols() != 1 || offsets.empty() ||
      offsets.back() != static_cast<std::size_t>(logits.rows())) {
    throw ShapeError("gumbel_topk: logits " + logits.shape_string() +
                     " do not match the candidate offsets");
  }
  const Index n = logits.rows();
  Matrix noise = Matrix::Zero(n, 1);
  if (mode == SelectionMode::kStochastic) {
    for (Index i = 0; i < n; ++i) noise(i, 0) = logistic_noise(open_uniform(rng));
  }
  Tensor perturbed = ad::add(logits, Tensor::constant(noise));
  std::vector<double> scores(perturbed.value().data(),
                             perturbed.value().data() + n);
  Selection out;
  out.selected = top_k_per_group(scores, offsets, k);
  if (ad::branch_tracing()) {
    std::vector<std::int8_t> chosen(static_cast<std::size_t>(n), 0);
    for (auto i : out.selected) chosen[i] = 1;
    for (auto c : chosen) ad::trace_branch(c);
  }
  out.rho = ad::sigmoid(ad::scale(perturbed, 1.0 / tau));
  return out;
}

}  // namespace tgsl::structure
