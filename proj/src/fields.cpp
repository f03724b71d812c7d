#include "grf/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grf {

ClampMask ClampMask::from_labelling(const Labelling& y) {
  ClampMask m(y.width, y.height);
  for (std::size_t t = 0; t < y.labels.size(); ++t) m.labels[t] = y.labels[t];
  return m;
}

std::size_t ClampMask::clamped_count() const {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int v) { return v != kFree; }));
}

void validate_evidence(const Evidence& evidence, const GridDomain& domain, const LabelSet& labels) {
  if (evidence.image) {
    const Image& img = *evidence.image;
    if (img.width != domain.width || img.height != domain.height)
      throw Error(Errc::DimensionMismatch, "image is " + std::to_string(img.width) + "x" +
                                               std::to_string(img.height) + ", domain is " +
                                               std::to_string(domain.width) + "x" + std::to_string(domain.height));
    if (img.values.size() != img.pixels() * static_cast<std::size_t>(img.channels))
      throw Error(Errc::DimensionMismatch, "image buffer size does not match its header");
  }
  if (evidence.clamps) {
    const ClampMask& c = *evidence.clamps;
    if (c.width != domain.width || c.height != domain.height || c.labels.size() != domain.size())
      throw Error(Errc::DimensionMismatch, "clamp mask does not match the domain");
    for (const int v : c.labels)
      if (v != ClampMask::kFree && !labels.valid(v))
        throw Error(Errc::InvalidLabel, "clamp label " + std::to_string(v) + " out of range");
  }
}

double MarginalField::max_abs_difference(const MarginalField& other) const {
  if (other.p.size() != p.size()) throw Error(Errc::DimensionMismatch, "marginal fields differ in size");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(p[i] - other.p[i]));
  return d;
}

}  // namespace grf
