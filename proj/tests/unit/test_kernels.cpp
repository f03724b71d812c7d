// Equivalence of every SIMD variant with the scalar reference.

#include <vector>

#include "doctest.h"
#include "grf/kernels.hpp"
#include "grf/rng.hpp"

using namespace grf;

namespace {

std::vector<const simd::KernelTable*> variants() {
  std::vector<const simd::KernelTable*> v{&simd::scalar_kernels()};
  if (const auto* avx2 = simd::avx2_kernels()) v.push_back(avx2);
  return v;
}

}  // namespace

TEST_CASE("dispatch selects a supported variant") {
  const auto& k = simd::kernels();
  CHECK((k.isa == simd::Isa::Scalar || k.isa == simd::Isa::Avx2));
  MESSAGE("active kernels: " << simd::isa_name(k.isa));
  simd::force_isa(simd::Isa::Scalar);
  CHECK(simd::kernels().isa == simd::Isa::Scalar);
  if (simd::avx2_kernels() != nullptr) {
    simd::force_isa(simd::Isa::Avx2);
    CHECK(simd::kernels().isa == simd::Isa::Avx2);
  } else {
    CHECK_THROWS_AS(simd::force_isa(simd::Isa::Avx2), Error);
  }
}

TEST_CASE("pair and label histograms agree across variants") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int labels = 1 + static_cast<int>(rng.below(trial % 3 == 0 ? 20 : 8));
    const std::size_t n = rng.below(300);
    std::vector<Label> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<Label>(rng.below(static_cast<std::uint64_t>(labels)));
      b[i] = static_cast<Label>(rng.below(static_cast<std::uint64_t>(labels)));
    }
    const auto k2 = static_cast<std::size_t>(labels * labels);
    std::vector<std::uint64_t> ref(k2, 0), ref1(static_cast<std::size_t>(labels), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++ref[a[i] * static_cast<std::size_t>(labels) + b[i]];
      ++ref1[a[i]];
    }
    for (const auto* v : variants()) {
      std::vector<std::uint64_t> hist(k2, 3), hist1(static_cast<std::size_t>(labels), 5);
      v->pair_histogram(a.data(), b.data(), n, labels, hist.data());
      v->label_histogram(a.data(), n, labels, hist1.data());
      for (std::size_t j = 0; j < k2; ++j) REQUIRE(hist[j] == ref[j] + 3);
      for (std::size_t j = 0; j < ref1.size(); ++j) REQUIRE(hist1[j] == ref1[j] + 5);
    }
  }
}

TEST_CASE("row accumulation is bitwise identical across variants") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int labels = 1 + static_cast<int>(rng.below(13));
    const std::size_t width = simd::padded_width(labels);
    const std::size_t n_rows = rng.below(400);
    std::vector<std::vector<double>> storage(n_rows, std::vector<double>(width));
    std::vector<const double*> rows;
    for (auto& r : storage) {
      for (double& x : r) x = (rng.uniform() - 0.5) * 20.0;
      rows.push_back(r.data());
    }
    std::vector<double> init(width);
    for (double& x : init) x = rng.uniform();
    std::vector<double> expected = init;
    simd::scalar_kernels().accumulate_rows(rows.data(), n_rows, width, expected.data());
    for (const auto* v : variants()) {
      std::vector<double> out = init;
      v->accumulate_rows(rows.data(), n_rows, width, out.data());
      for (std::size_t j = 0; j < width; ++j) REQUIRE(out[j] == expected[j]);
    }
  }
}
