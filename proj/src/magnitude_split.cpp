#include "slicer/magnitude_split.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "slicer/error.hpp"

namespace slicer {

const char* to_string(Sign sign) { return sign == Sign::kPlus ? "plus" : "minus"; }

std::pair<PlaneSource, PlaneSource> sign_separate(const DenseTensor& x) {
  PlaneSource plus{.sign = Sign::kPlus};
  PlaneSource minus{.sign = Sign::kMinus};
  const auto values = x.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (v > 0.0f) {
      plus.entries.push_back({i, v});
    } else if (v < 0.0f) {
      minus.entries.push_back({i, -v});
    }
  }
  return {std::move(plus), std::move(minus)};
}

SignPlane sort_nonzeros(const PlaneSource& source) {
  std::vector<PlaneSource::Entry> entries = source.entries;
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    return a.index < b.index;
  });
  SignPlane plane{.sign = source.sign};
  plane.sorted_values.reserve(entries.size());
  plane.perm.reserve(entries.size());
  for (const auto& e : entries) {
    plane.sorted_values.push_back(e.magnitude);
    plane.perm.push_back(e.index);
  }
  return plane;
}

BlockPartition partition_equal(const SignPlane& plane, std::size_t blocks) {
  if (blocks == 0) {
    throw InvalidArgument("block count must be at least 1");
  }
  const std::size_t n = plane.size();
  const std::size_t effective = std::max<std::size_t>(1, std::min(blocks, n));
  BlockPartition part;
  part.requested_blocks = blocks;
  part.base_cardinality = n / effective;
  part.ranges.reserve(effective);
  for (std::size_t m = 0; m < effective; ++m) {
    const std::size_t begin = m * part.base_cardinality;
    const std::size_t end = (m + 1 == effective) ? n : begin + part.base_cardinality;
    part.ranges.push_back({begin, end});
  }
  return part;
}

CsrBlock to_csr(const SignPlane& plane, IndexRange range, std::size_t rows, std::size_t cols) {
  if (range.begin > range.end || range.end > plane.size()) {
    throw InvalidArgument("block range [" + std::to_string(range.begin) + ", " +
                          std::to_string(range.end) + ") exceeds plane of size " +
                          std::to_string(plane.size()));
  }
  const std::size_t total = rows * cols;
  std::vector<std::size_t> order(range.size());
  std::iota(order.begin(), order.end(), range.begin);
  for (std::size_t i : order) {
    if (plane.perm[i] >= total) {
      throw InvalidArgument("flat index " + std::to_string(plane.perm[i]) +
                            " out of bounds for " + std::to_string(rows) + "x" +
                            std::to_string(cols));
    }
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return plane.perm[a] < plane.perm[b]; });

  CsrBlock block;
  block.row_ptr.assign(rows + 1, 0);
  block.cols.reserve(order.size());
  block.values.reserve(order.size());
  for (std::size_t i : order) {
    const std::size_t flat = plane.perm[i];
    ++block.row_ptr[flat / cols + 1];
    block.cols.push_back(static_cast<std::uint32_t>(flat % cols));
    block.values.push_back(plane.sorted_values[i]);
  }
  std::partial_sum(block.row_ptr.begin(), block.row_ptr.end(), block.row_ptr.begin());
  return block;
}

std::vector<float> densify(const CsrBlock& block, std::size_t rows, std::size_t cols) {
  std::vector<float> dense(rows * cols, 0.0f);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::uint32_t j = block.row_ptr[r]; j < block.row_ptr[r + 1]; ++j) {
      dense[r * cols + block.cols[j]] = block.values[j];
    }
  }
  return dense;
}

}  // namespace slicer
