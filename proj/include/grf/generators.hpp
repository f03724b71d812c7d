#pragma once

// Synthetic models and images for experiments and tests.

#include <cstdint>
#include <string>
#include <vector>

#include "grf/fields.hpp"
#include "grf/grid_model.hpp"

namespace grf {

/// Two-label blob prior: supermodular short edges {(1,0),(0,1),(1,1),(-1,1)}
/// with u = +alpha on equal labels and -alpha otherwise, and long edges at
/// scale 5 carrying the negated short table plus a density term
/// diag(beta, -beta).
GrfModel gen_blob_model(double alpha, double beta, const GridDomain& domain = {64, 64});

/// Potts baseline on the 4- or 8-neighbourhood.  strengths holds one value
/// per offset (anisotropic) or a single value for all; the diagonal gets the
/// strength and the table is put in canonical gauge.  Empty strengths give
/// all-zero (free) tables.
GrfModel gen_potts_baseline(int labels, int neighbourhood, const std::vector<double>& strengths,
                            const GridDomain& domain = {64, 64});

enum class FigureClass { Upright, Lying };

struct FigureSample {
  Image image;
  Labelling truth;
};

/// Axis-aligned part rectangle of a figure layout, in figure coordinates.
struct PartRect {
  int part = 1;
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;
};

/// Fixed layout of an articulated figure with parts-1 part labels (label 0
/// is background).  Upright: torso, head, arms, legs, feet.  Lying: body,
/// head, tail, front leg, hind leg, ear, front paw, hind paw.
std::vector<PartRect> figure_layout(FigureClass cls, int parts);
/// Bounding box (w, h) of a layout.
std::pair<int, int> layout_size(const std::vector<PartRect>& layout);

/// Grey level of a part label: background 0.15, parts spread over [0.4, 0.9].
double part_grey(int part, int parts);

/// One figure on a background margin of 4 pixels, plus additive Gaussian
/// noise sigma (clipped to [0,1]).  parts counts labels including the
/// background: 2 <= parts <= 9.
FigureSample gen_composite_figure(int parts = 7, double sigma = 0.1, std::uint64_t seed = 0,
                                  FigureClass cls = FigureClass::Upright);

/// Non-overlapping instances of one class on a canvas, labels 0..parts-1.
FigureSample gen_scene(int parts, FigureClass cls, int instances, const GridDomain& canvas, double sigma,
                       std::uint64_t seed);

/// Non-overlapping instances of both classes on a width x height canvas.
/// Truth labels: 0 background, 1..parts-1 for the first class and
/// parts..2(parts-1) for the second.  Part grey levels are shared.
FigureSample gen_collage(int parts, int instances_a, int instances_b, const GridDomain& canvas, double sigma,
                         std::uint64_t seed, FigureClass class_a = FigureClass::Upright,
                         FigureClass class_b = FigureClass::Lying);

/// Round cells with thin straight artefacts of the same grey level.  Truth
/// labels: 1 on cells, 0 elsewhere (artefacts count as background).
struct CellsOptions {
  int cells = 6;
  double radius_min = 6.0;
  double radius_max = 9.0;
  int artefacts = 5;
  double artefact_length_min = 18.0;
  double artefact_length_max = 36.0;
  double artefact_width = 2.0;
  double background = 0.35;
  double foreground = 0.65;
  double sigma = 0.1;
};

FigureSample gen_cells(const GridDomain& domain, const CellsOptions& options, std::uint64_t seed);

}  // namespace grf
