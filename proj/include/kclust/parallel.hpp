#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kclust {

// All hot loops run over fixed-size index chunks. Chunk boundaries depend
// only on the problem size, never on the thread count, and every output
// element is written by exactly one chunk, so parallel and serial execution
// produce bit-identical results.
inline constexpr int kChunkRows = 256;

/// Runs f(lo, hi) over [0, n) in chunks of kChunkRows rows.
/// parallel == false is the serial reference path used by the tests and the
/// benchmark target.
template <class F>
void for_each_chunk(int n, bool parallel, F&& f) {
  const int nchunks = (n + kChunkRows - 1) / kChunkRows;
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < nchunks; ++c) {
      const int lo = c * kChunkRows;
      const int hi = lo + kChunkRows < n ? lo + kChunkRows : n;
      f(lo, hi);
    }
    return;
  }
#else
  (void)parallel;
#endif
  for (int c = 0; c < nchunks; ++c) {
    const int lo = c * kChunkRows;
    const int hi = lo + kChunkRows < n ? lo + kChunkRows : n;
    f(lo, hi);
  }
}

}  // namespace kclust
