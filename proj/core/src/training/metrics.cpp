#include "tgsl/training/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tgsl::training {
namespace {

void check_sizes(std::span<const double> scores,
                 std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("metrics: score and label counts differ");
  }
  if (scores.empty()) throw std::invalid_argument("metrics: empty score set");
}

}  // namespace

double accuracy(std::span<const double> scores,
                std::span<const std::uint8_t> labels, double threshold) {
  check_sizes(scores, labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] > threshold;
    if (predicted == (labels[i] != 0)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels) {
  check_sizes(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  if (hits == 0) throw std::invalid_argument("metrics: AP needs a positive");
  return sum / static_cast<double>(hits);
}

}  // namespace tgsl::training
