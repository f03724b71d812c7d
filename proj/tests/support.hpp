#pragma once

// Shared helpers for the test suites: random models and brute-force
// reference computations that do not go through the library's fast paths.

#include <cmath>
#include <vector>

#include "grf/grid_model.hpp"
#include "grf/rng.hpp"

namespace grf::testing {

inline PotentialTable random_potentials(const NeighborhoodStructure& s, int labels, Rng& rng, double lo = -1.0,
                                        double hi = 1.0) {
  PotentialTable u(s, labels);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (double& v : u.table(i)) v = lo + (hi - lo) * rng.uniform();
  return u;
}

inline GrfModel random_model(int w, int h, int labels, const std::vector<Offset>& offsets, Rng& rng,
                             bool canonical = true) {
  NeighborhoodStructure s(offsets);
  PotentialTable u = random_potentials(s, labels, rng);
  if (canonical) u = normalize_potentials(u);
  return build_model(GridDomain(w, h), LabelSet(labels), s, u);
}

inline Labelling random_labelling(const GridDomain& d, int labels, Rng& rng) {
  Labelling y(d);
  for (auto& v : y.labels) v = static_cast<Label>(rng.below(static_cast<std::uint64_t>(labels)));
  return y;
}

/// n_a(k,k') by direct definition: visit every node pair.
inline double brute_pair_count(const Labelling& y, Offset a, int k, int kk) {
  double n = 0;
  for (int y0 = 0; y0 < y.height; ++y0)
    for (int x0 = 0; x0 < y.width; ++x0)
      for (int y1 = 0; y1 < y.height; ++y1)
        for (int x1 = 0; x1 < y.width; ++x1)
          if (x1 - x0 == a.dx && y1 - y0 == a.dy && y.at(x0, y0) == k && y.at(x1, y1) == kk) n += 1;
  return n;
}

}  // namespace grf::testing
