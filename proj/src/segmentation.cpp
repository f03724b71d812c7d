#include "grf/segmentation.hpp"

#include <string>

namespace grf {
namespace {

void check_same(const MarginalField& m, const Labelling& y) {
  if (m.width != y.width || m.height != y.height)
    throw Error(Errc::DimensionMismatch, "labelling does not match the marginal field");
}

}  // namespace

Labelling decode_max_marginal(const MarginalField& marginals) {
  Labelling y(marginals.width, marginals.height);
  for (std::size_t t = 0; t < marginals.nodes(); ++t) {
    const auto p = marginals.node(t);
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.size(); ++k)
      if (p[k] > p[best]) best = k;
    y.labels[t] = static_cast<Label>(best);
  }
  return y;
}

std::size_t hamming_loss(const Labelling& a, const Labelling& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error(Errc::DimensionMismatch, std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                                             std::to_string(b.width) + "x" + std::to_string(b.height));
  std::size_t n = 0;
  for (std::size_t t = 0; t < a.labels.size(); ++t) n += a.labels[t] != b.labels[t];
  return n;
}

double expected_risk(const MarginalField& marginals, const Labelling& y) {
  check_same(marginals, y);
  double r = 0.0;
  for (std::size_t t = 0; t < y.labels.size(); ++t) {
    if (y.labels[t] >= marginals.labels) throw Error(Errc::InvalidLabel, "label outside the marginal field");
    r += 1.0 - marginals.at(t, y.labels[t]);
  }
  return r;
}

SegmentationResult segment(const GrfModel& model, const AppearanceModel& appearance, const Image& image,
                           const std::optional<ClampMask>& clamps, const SamplerConfig& config) {
  const Evidence ev{image, clamps};
  validate_evidence(ev, model.domain, model.labels);
  SegmentationResult r;
  r.marginals = estimate_marginals(model, ev, &appearance, config);
  r.labelling = decode_max_marginal(r.marginals);
  r.confidence.resize(r.marginals.nodes());
  for (std::size_t t = 0; t < r.confidence.size(); ++t) r.confidence[t] = r.marginals.at(t, r.labelling.labels[t]);
  return r;
}

}  // namespace grf
