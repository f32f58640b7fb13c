#pragma once

#include <cmath>
#include <cstdint>

#include "rphgnn/csr.hpp"
#include "rphgnn/matrix.hpp"

// Dense and sparse kernels used throughout the pipeline.  Every parallel
// kernel partitions work by output row and keeps a fixed accumulation order
// inside each row, so results are bitwise identical for any thread count
// (and bitwise identical to the serial reference implementations below,
// which are kept for testing and benchmarking).

namespace rphgnn {
namespace kernels {

// out = a * b
template <typename T>
void matmul(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  if (a.cols() != b.rows()) throw ConfigError("matmul: inner dimensions differ");
  out = Matrix<T>(a.rows(), b.cols());
  const std::int64_t n = static_cast<std::int64_t>(a.rows());
  const std::int64_t kk = static_cast<std::int64_t>(a.cols());
  const std::int64_t m = static_cast<std::int64_t>(b.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    T* orow = out.row(i);
    const T* arow = a.row(i);
    for (std::int64_t k = 0; k < kk; ++k) {
      const T av = arow[k];
      if (av == T(0)) continue;
      const T* brow = b.row(k);
      for (std::int64_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> out;
  matmul(a, b, out);
  return out;
}

// out = a^T * b   (a: r x n, b: r x m, out: n x m)
template <typename T>
void matmul_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  if (a.rows() != b.rows())
    throw ConfigError("matmul_tn: row counts differ");
  out = Matrix<T>(a.cols(), b.cols());
  const std::int64_t n = static_cast<std::int64_t>(a.cols());
  const std::int64_t r = static_cast<std::int64_t>(a.rows());
  const std::int64_t m = static_cast<std::int64_t>(b.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    T* orow = out.row(i);
    for (std::int64_t k = 0; k < r; ++k) {
      const T av = a(static_cast<std::size_t>(k), static_cast<std::size_t>(i));
      if (av == T(0)) continue;
      const T* brow = b.row(k);
      for (std::int64_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

// out = a * b^T   (a: r x m, b: n x m, out: r x n)
template <typename T>
void matmul_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  if (a.cols() != b.cols())
    throw ConfigError("matmul_nt: column counts differ");
  out = Matrix<T>(a.rows(), b.rows());
  const std::int64_t r = static_cast<std::int64_t>(a.rows());
  const std::int64_t n = static_cast<std::int64_t>(b.rows());
  const std::int64_t m = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < r; ++i) {
    T* orow = out.row(i);
    const T* arow = a.row(i);
    for (std::int64_t j = 0; j < n; ++j) {
      const T* brow = b.row(j);
      T acc = T(0);
      for (std::int64_t k = 0; k < m; ++k) acc += arow[k] * brow[k];
      orow[j] = acc;
    }
  }
}

// out[r] = mean of src rows listed for destination r; zero for isolated rows.
template <typename T>
void spmm_mean(const CsrAdjacency& adj, const Matrix<T>& src, Matrix<T>& out) {
  if (src.rows() != adj.cols)
    throw ConfigError("spmm_mean: state rows do not match source vertex count");
  out = Matrix<T>(adj.rows, src.cols());
  const std::int64_t n = static_cast<std::int64_t>(adj.rows);
  const std::int64_t m = static_cast<std::int64_t>(src.cols());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t begin = adj.row_offsets[i];
    const std::size_t end = adj.row_offsets[i + 1];
    if (begin == end) continue;
    T* orow = out.row(i);
    for (std::size_t e = begin; e < end; ++e) {
      const T* srow = src.row(adj.col_indices[e]);
      for (std::int64_t j = 0; j < m; ++j) orow[j] += srow[j];
    }
    const T inv = T(1) / static_cast<T>(end - begin);
    for (std::int64_t j = 0; j < m; ++j) orow[j] *= inv;
  }
}

template <typename T>
Matrix<T> spmm_mean(const CsrAdjacency& adj, const Matrix<T>& src) {
  Matrix<T> out;
  spmm_mean(adj, src, out);
  return out;
}

// Row-wise L2 normalization; all-zero rows are left untouched.
template <typename T>
void l2_normalize_rows(Matrix<T>& m) {
  const std::int64_t n = static_cast<std::int64_t>(m.rows());
  const std::int64_t c = static_cast<std::int64_t>(m.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    T* row = m.row(i);
    T sq = T(0);
    for (std::int64_t j = 0; j < c; ++j) sq += row[j] * row[j];
    if (sq == T(0)) continue;
    const T inv = T(1) / std::sqrt(sq);
    for (std::int64_t j = 0; j < c; ++j) row[j] *= inv;
  }
}

template <typename T>
void add_inplace(Matrix<T>& a, const Matrix<T>& b) {
  check_same_shape(a.rows(), a.cols(), b.rows(), b.cols(), "add_inplace");
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

// Serial reference implementations.  Same arithmetic, no OpenMP; unit tests
// assert bitwise agreement with the parallel kernels and the benchmark tool
// compares their throughput.
namespace serial {

template <typename T>
void matmul(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out) {
  if (a.cols() != b.rows()) throw ConfigError("matmul: inner dimensions differ");
  out = Matrix<T>(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T* orow = out.row(i);
    const T* arow = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T av = arow[k];
      if (av == T(0)) continue;
      const T* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += av * brow[j];
    }
  }
}

template <typename T>
void spmm_mean(const CsrAdjacency& adj, const Matrix<T>& src, Matrix<T>& out) {
  if (src.rows() != adj.cols)
    throw ConfigError("spmm_mean: state rows do not match source vertex count");
  out = Matrix<T>(adj.rows, src.cols());
  for (std::size_t i = 0; i < adj.rows; ++i) {
    const std::size_t begin = adj.row_offsets[i];
    const std::size_t end = adj.row_offsets[i + 1];
    if (begin == end) continue;
    T* orow = out.row(i);
    for (std::size_t e = begin; e < end; ++e) {
      const T* srow = src.row(adj.col_indices[e]);
      for (std::size_t j = 0; j < src.cols(); ++j) orow[j] += srow[j];
    }
    const T inv = T(1) / static_cast<T>(end - begin);
    for (std::size_t j = 0; j < src.cols(); ++j) orow[j] *= inv;
  }
}

template <typename T>
void l2_normalize_rows(Matrix<T>& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    T* row = m.row(i);
    T sq = T(0);
    for (std::size_t j = 0; j < m.cols(); ++j) sq += row[j] * row[j];
    if (sq == T(0)) continue;
    const T inv = T(1) / std::sqrt(sq);
    for (std::size_t j = 0; j < m.cols(); ++j) row[j] *= inv;
  }
}

}  // namespace serial
}  // namespace kernels
}  // namespace rphgnn
