#pragma once

// Data-parallel inner loops with a portable scalar reference and optional
// SIMD variants chosen at runtime.  Every variant must produce identical
// results for identical inputs: histogram counts are integers, and the row
// accumulation adds rows in the given order lane by lane.

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "grf/grid_model.hpp"

namespace grf::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  Isa isa;

  /// out[j] += rows[0][j] + rows[1][j] + ... (left to right) for j < width.
  /// width is a multiple of 4.
  void (*accumulate_rows)(const double* const* rows, std::size_t n_rows,
                          std::size_t width, double* out);

  /// hist[a[i] * labels + b[i]] += 1 for i < n.
  void (*pair_histogram)(const Label* a, const Label* b, std::size_t n, int labels,
                         std::uint64_t* hist);

  /// hist[a[i]] += 1 for i < n.
  void (*label_histogram)(const Label* a, std::size_t n, int labels, std::uint64_t* hist);
};

const KernelTable& scalar_kernels() noexcept;
/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels() noexcept;

/// The table used by the library.  Defaults to the widest supported ISA;
/// the environment variable GRF_SIMD=scalar forces the reference path.
const KernelTable& kernels() noexcept;
void force_isa(Isa isa);

/// Round up to the padded row width used with accumulate_rows.
constexpr std::size_t padded_width(int labels) noexcept {
  return (static_cast<std::size_t>(labels) + 3u) & ~std::size_t{3};
}

}  // namespace grf::simd
