#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "grf/appearance.hpp"
#include "grf/fields.hpp"
#include "grf/sampler.hpp"

namespace grf {

struct SegmentationResult {
  Labelling labelling;
  MarginalField marginals;
  /// Max marginal per node.
  std::vector<double> confidence;
};

/// Per-node argmax; ties go to the smallest label.
Labelling decode_max_marginal(const MarginalField& marginals);

/// Number of nodes where the labellings differ.
std::size_t hamming_loss(const Labelling& a, const Labelling& b);

/// sum_t (1 - marginals[t][y_t]).
double expected_risk(const MarginalField& marginals, const Labelling& y);

/// Estimates posterior marginals by sampling and decodes them.
SegmentationResult segment(const GrfModel& model, const AppearanceModel& appearance, const Image& image,
                           const std::optional<ClampMask>& clamps, const SamplerConfig& config);

}  // namespace grf
