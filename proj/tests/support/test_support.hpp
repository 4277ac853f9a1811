#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "tgsl/autodiff/tape.hpp"
#include "tgsl/autodiff/tensor.hpp"
#include "tgsl/graph/event_store.hpp"

namespace tgsl::testing {

inline ad::Matrix random_matrix(ad::Index rows, ad::Index cols,
                                std::mt19937_64& rng, double lo = -1.0,
                                double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  ad::Matrix m(rows, cols);
  for (ad::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

inline ad::Matrix matrix(ad::Index rows, ad::Index cols,
                         std::initializer_list<double> values) {
  ad::Matrix m(rows, cols);
  auto it = values.begin();
  for (ad::Index i = 0; i < m.size(); ++i) m.data()[i] = *it++;
  return m;
}

// Central differences of a scalar function, computed without the tape.
inline std::vector<ad::Matrix> numeric_gradient(
    const std::function<double()>& fn, std::vector<ad::Tensor>& params,
    double h = 1e-5) {
  std::vector<ad::Matrix> out;
  for (auto& p : params) {
    ad::Matrix g(p.rows(), p.cols());
    for (ad::Index i = 0; i < p.size(); ++i) {
      double& x = p.mutable_value().data()[i];
      const double x0 = x;
      x = x0 + h;
      const double plus = fn();
      x = x0 - h;
      const double minus = fn();
      x = x0;
      g.data()[i] = (plus - minus) / (2.0 * h);
    }
    out.push_back(std::move(g));
  }
  return out;
}

// Tape gradient of `loss_fn` with respect to `params`.
inline std::vector<ad::Matrix> tape_gradient(
    const std::function<ad::Tensor()>& loss_fn,
    std::vector<ad::Tensor>& params) {
  for (auto& p : params) p.zero_grad();
  ad::Tape tape;
  {
    ad::TapeScope scope(tape);
    ad::Tensor loss = loss_fn();
    tape.backward(loss);
  }
  std::vector<ad::Matrix> out;
  for (auto& p : params) out.push_back(p.grad());
  return out;
}

inline double max_relative_error(const std::vector<ad::Matrix>& analytic,
                                 const std::vector<ad::Matrix>& numeric) {
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    for (ad::Index i = 0; i < analytic[k].size(); ++i) {
      const double n = numeric[k].data()[i];
      worst = std::max(worst, std::abs(analytic[k].data()[i] - n) /
                                  std::max(1.0, std::abs(n)));
    }
  }
  return worst;
}

// Store from (src, dst, t) triples with a one-column edge feature equal to
// the row index and zero node features of width `node_dim`.
inline graph::EventStore store_from(
    std::initializer_list<std::tuple<graph::NodeId, graph::NodeId, double>> rows,
    graph::NodeId nodes, ad::Index node_dim = 1, graph::NodeId users = 0) {
  std::vector<graph::TemporalEvent> events;
  ad::Matrix features(static_cast<ad::Index>(rows.size()), 1);
  graph::EventId id = 0;
  for (const auto& [u, v, t] : rows) {
    events.push_back({u, v, t, id});
    features(id, 0) = static_cast<double>(id);
    ++id;
  }
  return graph::EventStore(std::move(events), ad::Matrix::Zero(nodes, node_dim),
                           std::move(features), users);
}

}  // namespace tgsl::testing
