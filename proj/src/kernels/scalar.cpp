#include "grf/kernels.hpp"

namespace grf::simd {
namespace {

void accumulate_rows_scalar(const double* const* rows, std::size_t n_rows, std::size_t width,
                            double* out) {
  for (std::size_t j = 0; j < width; ++j) {
    double s = out[j];
    for (std::size_t i = 0; i < n_rows; ++i) s += rows[i][j];
    out[j] = s;
  }
}

void pair_histogram_scalar(const Label* a, const Label* b, std::size_t n, int labels,
                           std::uint64_t* hist) {
  const auto k = static_cast<std::size_t>(labels);
  for (std::size_t i = 0; i < n; ++i) ++hist[a[i] * k + b[i]];
}

void label_histogram_scalar(const Label* a, std::size_t n, int /*labels*/, std::uint64_t* hist) {
  for (std::size_t i = 0; i < n; ++i) ++hist[a[i]];
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{Isa::Scalar, &accumulate_rows_scalar, &pair_histogram_scalar,
                                 &label_histogram_scalar};
  return table;
}

}  // namespace grf::simd
