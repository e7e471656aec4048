#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slicer {

/// One layer of a profiled model. memory_bytes, device_ms and
/// compressed_device_ms are cumulative over layers 1..l; server_ms is the
/// back-end cost of this layer alone.
struct LayerProfile {
  std::string name;
  double memory_bytes = 0.0;
  double device_ms = 0.0;
  std::optional<double> compressed_device_ms;
  double server_ms = 0.0;
  std::uint32_t if_rows = 1;
  std::uint32_t if_cols = 1;

  std::uint64_t dense_if_bits() const noexcept {
    return static_cast<std::uint64_t>(if_rows) * if_cols * 32;
  }
};

/// Entry of the offline quality table used to choose a network-wide
/// compression parameter.
struct PerfEntry {
  double param = 0.0;
  double score = 0.0;
  double compressed_memory_bytes = 0.0;
};

/// Split index l runs over 0..depth(); l = 0 is raw-input offload.
struct ModelProfile {
  std::string name;
  std::uint64_t input_bits = 0;
  /// Per-step time of the whole compressed network on the front-end device.
  std::optional<double> compressed_full_pass_ms;
  std::vector<LayerProfile> layers;
  std::vector<PerfEntry> perf_table;

  std::size_t depth() const noexcept { return layers.size(); }
  const LayerProfile& layer(std::size_t ell) const { return layers.at(ell - 1); }

  double memory_bytes(std::size_t ell) const;
  double device_ms(std::size_t ell) const;
  /// Throws InvalidArgument when compressed timings are missing.
  double compressed_device_ms(std::size_t ell) const;
  double compressed_full_ms() const;
  /// Server time to finish the model after split l (layers l+1..depth).
  double back_end_ms(std::size_t ell) const;
  /// Bits shipped at split l: the raw input for l = 0, else the dense IF.
  std::uint64_t dense_bits(std::size_t ell) const;
  bool has_compressed_timings() const noexcept;

  /// Throws InvalidArgument if cumulative fields decrease, shapes are zero or
  /// the profile has no layers.
  void validate() const;
};

}  // namespace slicer
