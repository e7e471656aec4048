#include "slicer/profile.hpp"

#include <numeric>

#include "slicer/error.hpp"

namespace slicer {

namespace {

void check_split(const ModelProfile& p, std::size_t ell) {
  if (ell > p.depth()) {
    throw InvalidArgument("split " + std::to_string(ell) + " exceeds model depth " +
                          std::to_string(p.depth()));
  }
}

}  // namespace

double ModelProfile::memory_bytes(std::size_t ell) const {
  check_split(*this, ell);
  return ell == 0 ? 0.0 : layer(ell).memory_bytes;
}

double ModelProfile::device_ms(std::size_t ell) const {
  check_split(*this, ell);
  return ell == 0 ? 0.0 : layer(ell).device_ms;
}

double ModelProfile::compressed_device_ms(std::size_t ell) const {
  check_split(*this, ell);
  if (ell == 0) return 0.0;
  const auto& t = layer(ell).compressed_device_ms;
  if (!t) {
    throw InvalidArgument("profile lacks compressed-network timing for layer " +
                          std::to_string(ell));
  }
  return *t;
}

double ModelProfile::compressed_full_ms() const {
  if (compressed_full_pass_ms) return *compressed_full_pass_ms;
  return compressed_device_ms(depth());
}

double ModelProfile::back_end_ms(std::size_t ell) const {
  check_split(*this, ell);
  return std::accumulate(layers.begin() + static_cast<std::ptrdiff_t>(ell), layers.end(), 0.0,
                         [](double acc, const LayerProfile& l) { return acc + l.server_ms; });
}

std::uint64_t ModelProfile::dense_bits(std::size_t ell) const {
  check_split(*this, ell);
  return ell == 0 ? input_bits : layer(ell).dense_if_bits();
}

bool ModelProfile::has_compressed_timings() const noexcept {
  if (layers.empty()) return false;
  for (const auto& l : layers) {
    if (!l.compressed_device_ms) return false;
  }
  return true;
}

void ModelProfile::validate() const {
  if (layers.empty()) {
    throw InvalidArgument("profile has no layers");
  }
  const LayerProfile* prev = nullptr;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string where = "layer " + std::to_string(i + 1);
    if (l.if_rows == 0 || l.if_cols == 0) {
      throw InvalidArgument(where + ": IF shape must be positive");
    }
    if (l.memory_bytes < 0 || l.device_ms < 0 || l.server_ms < 0) {
      throw InvalidArgument(where + ": negative cost");
    }
    if (prev) {
      if (l.memory_bytes < prev->memory_bytes || l.device_ms < prev->device_ms) {
        throw InvalidArgument(where + ": cumulative memory/time decreases");
      }
      if (l.compressed_device_ms && prev->compressed_device_ms &&
          *l.compressed_device_ms < *prev->compressed_device_ms) {
        throw InvalidArgument(where + ": cumulative compressed time decreases");
      }
    }
    prev = &l;
  }
}

}  // namespace slicer
