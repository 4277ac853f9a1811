#pragma once

#include <cstdint>
#include <span>

namespace tgsl::training {

// Fraction of items whose decision (score > threshold) matches the label.
double accuracy(std::span<const double> scores,
                std::span<const std::uint8_t> labels, double threshold = 0.5);

// Area under the precision-recall step function: items ranked by descending
// score (ties keep input order), AP = mean over positives of the precision
// at their rank. Throws std::invalid_argument without any positive.
double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels);

}  // namespace tgsl::training
