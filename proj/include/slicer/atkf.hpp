#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "slicer/tensor.hpp"

namespace slicer {

/// floor((1 - sparsity) * total), snapped to the nearest integer when the
/// double product lands within 1e-12 * total of it (so s = 0.05 on T = 100
/// yields 95, not 94).
std::size_t keep_count(double sparsity, std::size_t total);

struct AtkfResult {
  DenseTensor filtered;
  /// Ascending flat indices of the retained positions; size() == k_keep.
  std::vector<std::size_t> kept_indices;
  /// k_keep-th largest |x|. When k_keep == 0 no order statistic exists; tau
  /// then holds the largest |x| and tau_defined is false.
  double tau = 0.0;
  double tau_plus = 0.0;
  double tau_minus = 0.0;
  bool tau_defined = false;
  std::size_t k_keep = 0;
  /// |{i : x_i > tau_plus or x_i < tau_minus}|.
  std::size_t strict_count = 0;
};

/// Asymmetric top-K filter: retains exactly keep_count(sparsity, T) positions.
///
/// Elements of the strict set (x > (1+lambda) tau or x < -(1-lambda) tau) are
/// ranked first, then every other element by descending |x|. Exact-magnitude
/// ties are ordered by mix64(seed + (i + 1) * 0x9E3779B97F4A7C15), i.e. a
/// seeded uniform permutation. If the strict set alone exceeds k_keep (only
/// possible for lambda > 0) its largest-magnitude members are kept.
///
/// Throws InvalidArgument unless 0 <= sparsity <= 1 and 0 <= lambda < 1.
AtkfResult atkf_filter(const DenseTensor& x, double sparsity, double lambda,
                       std::uint64_t seed);

}  // namespace slicer
