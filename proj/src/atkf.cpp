#include "slicer/atkf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "slicer/error.hpp"

namespace slicer {

std::size_t keep_count(double sparsity, std::size_t total) {
  const double exact = (1.0 - sparsity) * static_cast<double>(total);
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-12 * static_cast<double>(std::max<std::size_t>(total, 1))) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::floor(exact));
}

AtkfResult atkf_filter(const DenseTensor& x, double sparsity, double lambda,
                       std::uint64_t seed) {
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw InvalidArgument("sparsity must lie in [0, 1], got " + std::to_string(sparsity));
  }
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw InvalidArgument("lambda must lie in [0, 1), got " + std::to_string(lambda));
  }

  const std::size_t total = x.size();
  const auto values = x.values();
  AtkfResult result{.filtered = DenseTensor(x.rows(), x.cols())};
  result.k_keep = keep_count(sparsity, total);
  const std::size_t k = result.k_keep;

  std::vector<float> magnitudes(total);
  std::transform(values.begin(), values.end(), magnitudes.begin(),
                 [](float v) { return std::abs(v); });

  if (k == 0) {
    result.tau = *std::max_element(magnitudes.begin(), magnitudes.end());
    result.tau_plus = (1.0 + lambda) * result.tau;
    result.tau_minus = -(1.0 - lambda) * result.tau;
    return result;
  }

  {
    std::vector<float> scratch = magnitudes;
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     scratch.end(), std::greater<>());
    result.tau = scratch[k - 1];
  }
  result.tau_defined = true;
  result.tau_plus = (1.0 + lambda) * result.tau;
  result.tau_minus = -(1.0 - lambda) * result.tau;

  std::vector<std::uint8_t> strict(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double v = values[i];
    strict[i] = (v > result.tau_plus || v < result.tau_minus) ? 1 : 0;
  }
  result.strict_count = static_cast<std::size_t>(std::count(strict.begin(), strict.end(), 1));

  std::vector<std::uint64_t> tie_key(total);
  for (std::size_t i = 0; i < total; ++i) {
    tie_key[i] = mix64(seed + (static_cast<std::uint64_t>(i) + 1) * 0x9E3779B97F4A7C15ULL);
  }

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto ranks_before = [&](std::size_t a, std::size_t b) {
    if (strict[a] != strict[b]) return strict[a] > strict[b];
    if (magnitudes[a] != magnitudes[b]) return magnitudes[a] > magnitudes[b];
    if (tie_key[a] != tie_key[b]) return tie_key[a] < tie_key[b];
    return a < b;
  };
  if (k < total) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                     order.end(), ranks_before);
  }
  order.resize(k);
  std::sort(order.begin(), order.end());

  std::vector<float> filtered(total, 0.0f);
  for (std::size_t idx : order) {
    filtered[idx] = values[idx];
  }
  result.filtered = DenseTensor(x.rows(), x.cols(), std::move(filtered));
  result.kept_indices = std::move(order);
  return result;
}

}  // namespace slicer
