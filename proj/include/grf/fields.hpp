#pragma once

#include <optional>
#include <span>
#include <vector>

#include "grf/grid_model.hpp"

namespace grf {

/// Colour image with values normalised to [0,1], channel-interleaved rows.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> values;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {}

  GridDomain domain() const { return {width, height}; }
  std::size_t pixels() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  std::span<const double> pixel(std::size_t t) const {
    return std::span<const double>(values).subspan(t * static_cast<std::size_t>(channels),
                                                   static_cast<std::size_t>(channels));
  }
  std::span<double> pixel(std::size_t t) {
    return std::span<double>(values).subspan(t * static_cast<std::size_t>(channels),
                                             static_cast<std::size_t>(channels));
  }
  double& at(int x, int y, int c = 0) {
    return values[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
                      static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
  }
  double at(int x, int y, int c = 0) const {
    return values[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
                      static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
  }
};

/// Per-node clamp markers: kFree or a label id.
struct ClampMask {
  static constexpr int kFree = -1;

  int width = 0;
  int height = 0;
  std::vector<int> labels;

  ClampMask() = default;
  ClampMask(int w, int h)
      : width(w), height(h), labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), kFree) {}
  static ClampMask from_labelling(const Labelling& y);

  bool clamped(std::size_t t) const { return labels[t] != kFree; }
  std::size_t clamped_count() const;
  int& at(int x, int y) { return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
};

/// An observed event: optional image and optional partial labelling.
struct Evidence {
  std::optional<Image> image;
  std::optional<ClampMask> clamps;

  static Evidence clamped(const Labelling& y) { return Evidence{std::nullopt, ClampMask::from_labelling(y)}; }
  bool empty() const { return !image && !clamps; }
  bool clamped(std::size_t t) const { return clamps && clamps->clamped(t); }
};

/// Throws DimensionMismatch / InvalidLabel when the evidence does not fit the domain.
void validate_evidence(const Evidence& evidence, const GridDomain& domain, const LabelSet& labels);

/// Per-node label distributions, node-major (t * K + k).
struct MarginalField {
  int width = 0;
  int height = 0;
  int labels = 0;
  std::vector<double> p;

  MarginalField() = default;
  MarginalField(int w, int h, int k)
      : width(w), height(h), labels(k),
        p(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(k), 0.0) {}

  std::size_t nodes() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  std::span<const double> node(std::size_t t) const {
    return std::span<const double>(p).subspan(t * static_cast<std::size_t>(labels), static_cast<std::size_t>(labels));
  }
  std::span<double> node(std::size_t t) {
    return std::span<double>(p).subspan(t * static_cast<std::size_t>(labels), static_cast<std::size_t>(labels));
  }
  double at(std::size_t t, int k) const { return p[t * static_cast<std::size_t>(labels) + static_cast<std::size_t>(k)]; }

  double max_abs_difference(const MarginalField& other) const;
};

}  // namespace grf
