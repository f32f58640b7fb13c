#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rphgnn {

// Compressed sparse rows, oriented destination-major: row r lists the
// *sources* of edges arriving at destination vertex r.  This makes the
// degree-normalized product a plain row-wise mean over in-neighbors.
struct CsrAdjacency {
  std::size_t rows = 0;  // destination vertex count
  std::size_t cols = 0;  // source vertex count
  std::vector<std::size_t> row_offsets;  // size rows + 1
  std::vector<std::uint32_t> col_indices;

  std::size_t nnz() const { return col_indices.size(); }
  std::size_t degree(std::size_t r) const {
    return row_offsets[r + 1] - row_offsets[r];
  }
};

}  // namespace rphgnn
