#include "tgsl/autodiff/init.hpp"

#include <cmath>

namespace tgsl::ad {

Tensor uniform_parameter(Index rows, Index cols, Index fan_in,
                         std::mt19937_64& rng, std::string name) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Index>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return Tensor::parameter(std::move(m), std::move(name));
}

}  // namespace tgsl::ad
