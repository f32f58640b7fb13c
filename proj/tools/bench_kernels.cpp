// Benchmarks the OpenMP kernels against their serial reference
// implementations and checks that both produce bitwise-identical output.
//
// Usage: bench_kernels [--rows N] [--cols N] [--inner N] [--reps N]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rphgnn/csr.hpp"
#include "rphgnn/hetgraph.hpp"
#include "rphgnn/kernels.hpp"
#include "rphgnn/rng.hpp"

using rphgnn::CsrAdjacency;
using rphgnn::Matrix;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename F>
double best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    fn();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

bool bitwise_equal(const Matrix<float>& a, const Matrix<float>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

CsrAdjacency random_csr(std::size_t rows, std::size_t cols, std::size_t per_row,
                        std::uint64_t seed) {
  CsrAdjacency adj;
  adj.rows = rows;
  adj.cols = cols;
  adj.row_offsets.assign(rows + 1, 0);
  rphgnn::Rng rng(seed);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t deg = 1 + rng.next_below(per_row * 2);
    adj.row_offsets[i + 1] = adj.row_offsets[i] + deg;
    for (std::size_t e = 0; e < deg; ++e)
      adj.col_indices.push_back(
          static_cast<std::uint32_t>(rng.next_below(cols)));
  }
  return adj;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t rows = 2048, cols = 256, inner = 256;
  int reps = 3;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const long v = std::strtol(argv[i + 1], nullptr, 10);
    if (flag == "--rows") rows = static_cast<std::size_t>(v);
    else if (flag == "--cols") cols = static_cast<std::size_t>(v);
    else if (flag == "--inner") inner = static_cast<std::size_t>(v);
    else if (flag == "--reps") reps = static_cast<int>(v);
    else {
      std::fprintf(stderr, "unknown flag: %s\n", flag.c_str());
      return 3;
    }
  }

#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp disabled (serial build)\n");
#endif
  std::printf("shapes: %zux%zu * %zux%zu, csr %zu rows ~8 nbrs, %d reps\n\n",
              rows, inner, inner, cols, rows, reps);

  const Matrix<float> a = rphgnn::gaussian_matrix(rows, inner, 11);
  const Matrix<float> b = rphgnn::gaussian_matrix(inner, cols, 12);
  const Matrix<float> state = rphgnn::gaussian_matrix(inner, cols, 13);
  const CsrAdjacency adj = random_csr(rows, inner, 8, 14);

  int failures = 0;
  const auto report = [&](const char* name, double serial_s, double parallel_s,
                          bool equal) {
    std::printf("%-18s serial %8.4fs   parallel %8.4fs   speedup %5.2fx   %s\n",
                name, serial_s, parallel_s, serial_s / parallel_s,
                equal ? "bitwise-equal" : "MISMATCH");
    if (!equal) ++failures;
  };

  {
    Matrix<float> ref, par;
    const double ts = best_of(reps, [&] { rphgnn::kernels::serial::matmul(a, b, ref); });
    const double tp = best_of(reps, [&] { rphgnn::kernels::matmul(a, b, par); });
    report("matmul", ts, tp, bitwise_equal(ref, par));
  }
  {
    Matrix<float> ref, par;
    const double ts =
        best_of(reps, [&] { rphgnn::kernels::serial::spmm_mean(adj, state, ref); });
    const double tp = best_of(reps, [&] { rphgnn::kernels::spmm_mean(adj, state, par); });
    report("spmm_mean", ts, tp, bitwise_equal(ref, par));
  }
  {
    Matrix<float> ref = a, par = a;
    const double ts =
        best_of(reps, [&] { ref = a; rphgnn::kernels::serial::l2_normalize_rows(ref); });
    const double tp =
        best_of(reps, [&] { par = a; rphgnn::kernels::l2_normalize_rows(par); });
    report("l2_normalize_rows", ts, tp, bitwise_equal(ref, par));
  }

  if (failures) {
    std::printf("\n%d kernel(s) disagreed with the serial reference\n", failures);
    return 1;
  }
  std::printf("\nall kernels bitwise-equal to the serial reference\n");
  return 0;
}
