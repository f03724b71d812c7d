// AVX2 variants.  Compiled with -mavx2 and only reached through dispatch
// after a CPUID check.

#include <immintrin.h>

#include "grf/kernels.hpp"

namespace grf::simd {

const KernelTable& scalar_kernels() noexcept;

namespace {

// Label counts above this fall back to the scalar loop: the compare-and-count
// scheme costs O(K^2) mask operations per 32 pixels.
constexpr int kMaxVectorLabels = 8;

void accumulate_rows_avx2(const double* const* rows, std::size_t n_rows, std::size_t width,
                          double* out) {
  for (std::size_t j = 0; j < width; j += 4) {
    __m256d acc = _mm256_loadu_pd(out + j);
    for (std::size_t i = 0; i < n_rows; ++i) acc = _mm256_add_pd(acc, _mm256_loadu_pd(rows[i] + j));
    _mm256_storeu_pd(out + j, acc);
  }
}

void pair_histogram_avx2(const Label* a, const Label* b, std::size_t n, int labels,
                         std::uint64_t* hist) {
  if (labels > kMaxVectorLabels) {
    scalar_kernels().pair_histogram(a, b, n, labels, hist);
    return;
  }
  const auto k = static_cast<std::size_t>(labels);
  __m256i probe[kMaxVectorLabels];
  for (std::size_t j = 0; j < k; ++j) probe[j] = _mm256_set1_epi8(static_cast<char>(j));

  std::size_t i = 0;
  __m256i eq_a[kMaxVectorLabels];
  __m256i eq_b[kMaxVectorLabels];
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    for (std::size_t j = 0; j < k; ++j) {
      eq_a[j] = _mm256_cmpeq_epi8(va, probe[j]);
      eq_b[j] = _mm256_cmpeq_epi8(vb, probe[j]);
    }
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) {
        const auto mask = static_cast<unsigned>(_mm256_movemask_epi8(_mm256_and_si256(eq_a[p], eq_b[q])));
        hist[p * k + q] += static_cast<std::uint64_t>(__builtin_popcount(mask));
      }
  }
  for (; i < n; ++i) ++hist[a[i] * k + b[i]];
}

void label_histogram_avx2(const Label* a, std::size_t n, int labels, std::uint64_t* hist) {
  if (labels > kMaxVectorLabels) {
    scalar_kernels().label_histogram(a, n, labels, hist);
    return;
  }
  const auto k = static_cast<std::size_t>(labels);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    for (std::size_t j = 0; j < k; ++j) {
      const auto mask = static_cast<unsigned>(
          _mm256_movemask_epi8(_mm256_cmpeq_epi8(va, _mm256_set1_epi8(static_cast<char>(j)))));
      hist[j] += static_cast<std::uint64_t>(__builtin_popcount(mask));
    }
  }
  for (; i < n; ++i) ++hist[a[i]];
}

}  // namespace

const KernelTable& avx2_kernel_table() noexcept {
  static const KernelTable table{Isa::Avx2, &accumulate_rows_avx2, &pair_histogram_avx2,
                                 &label_histogram_avx2};
  return table;
}

}  // namespace grf::simd
