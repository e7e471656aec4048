#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "slicer/tensor.hpp"

namespace slicer {

enum class Sign : std::uint8_t { kPlus, kMinus };

const char* to_string(Sign sign);

/// Nonzero entries of one sign plane in ascending flat-index order.
/// Magnitudes are strictly positive (the minus plane stores -x).
struct PlaneSource {
  struct Entry {
    std::size_t index;
    float magnitude;
    bool operator==(const Entry&) const = default;
  };
  Sign sign = Sign::kPlus;
  std::vector<Entry> entries;
};

/// X+ = max(x, 0), X- = max(-x, 0). Zeros (including -0.0) belong to neither.
std::pair<PlaneSource, PlaneSource> sign_separate(const DenseTensor& x);

/// Nonzeros of one plane sorted by descending magnitude; ties keep ascending
/// flat index. perm[i] is the flat index of sorted_values[i].
struct SignPlane {
  Sign sign = Sign::kPlus;
  std::vector<float> sorted_values;
  std::vector<std::size_t> perm;

  std::size_t size() const noexcept { return sorted_values.size(); }
};

SignPlane sort_nonzeros(const PlaneSource& source);

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const IndexRange&) const = default;
};

/// Equal-cardinality split of a sorted plane. Blocks 1..M-1 hold
/// base_cardinality entries and the last block also takes the remainder.
/// When the plane has fewer entries than requested blocks, the effective
/// count drops to max(1, |plane|); an empty plane yields one empty range.
struct BlockPartition {
  std::vector<IndexRange> ranges;
  std::size_t requested_blocks = 0;
  std::size_t base_cardinality = 0;

  std::size_t block_count() const noexcept { return ranges.size(); }
};

/// Throws InvalidArgument when blocks == 0.
BlockPartition partition_equal(const SignPlane& plane, std::size_t blocks);

/// CSR scatter of one block over an N x K grid.
struct CsrBlock {
  std::vector<std::uint32_t> row_ptr;  // N + 1 offsets
  std::vector<std::uint32_t> cols;
  std::vector<float> values;

  std::size_t nnz() const noexcept { return values.size(); }
  bool operator==(const CsrBlock&) const = default;
};

/// Builds the CSR form of plane[range] at (perm / K, perm % K). Entries are
/// emitted in row-major order. Throws InvalidArgument if the range exceeds the
/// plane or a flat index falls outside rows * cols.
CsrBlock to_csr(const SignPlane& plane, IndexRange range, std::size_t rows, std::size_t cols);

/// Dense rows x cols scatter of a CSR block (values as stored).
std::vector<float> densify(const CsrBlock& block, std::size_t rows, std::size_t cols);

}  // namespace slicer
