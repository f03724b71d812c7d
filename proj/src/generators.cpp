#include "grf/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "grf/rng.hpp"

namespace grf {
namespace {

void add_noise(Image& img, double sigma, Rng& rng) {
  if (sigma <= 0.0) return;
  for (double& v : img.values) v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
}

void check_parts(int parts) {
  if (parts < 2 || parts > 9) throw Error(Errc::InvalidArgument, "figure parts must lie in 2..9 (labels incl. background)");
}

}  // namespace

GrfModel gen_blob_model(double alpha, double beta, const GridDomain& domain) {
  const std::vector<Offset> short_edges{{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
  std::vector<Offset> all = short_edges;
  for (const Offset a : short_edges) all.push_back({5 * a.dx, 5 * a.dy});
  const NeighborhoodStructure s(all);
  PotentialTable u(s, 2);
  for (std::size_t i = 1; i <= short_edges.size(); ++i) u.set_table(i, {alpha, -alpha, -alpha, alpha});
  for (std::size_t i = short_edges.size() + 1; i < s.size(); ++i)
    u.set_table(i, {-alpha + beta, alpha, alpha, -alpha - beta});
  return build_model(domain, LabelSet(2, {"background", "blob"}), s, u);
}

GrfModel gen_potts_baseline(int labels, int neighbourhood, const std::vector<double>& strengths,
                            const GridDomain& domain) {
  if (neighbourhood != 4 && neighbourhood != 8) throw Error(Errc::InvalidArgument, "neighbourhood must be 4 or 8");
  std::vector<Offset> offsets{{1, 0}, {0, 1}};
  if (neighbourhood == 8) {
    offsets.push_back({1, 1});
    offsets.push_back({-1, 1});
  }
  if (!strengths.empty() && strengths.size() != 1 && strengths.size() != offsets.size())
    throw Error(Errc::DimensionMismatch, "expected 1 or " + std::to_string(offsets.size()) + " Potts strengths");
  const NeighborhoodStructure s(offsets);
  PotentialTable u(s, labels);
  if (!strengths.empty())
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double g = strengths.size() == 1 ? strengths[0] : strengths[i - 1];
      for (int k = 0; k < labels; ++k) u.pair(i, k, k) = g;
    }
  return build_model(domain, LabelSet(labels), s, normalize_potentials(u));
}

std::vector<PartRect> figure_layout(FigureClass cls, int parts) {
  check_parts(parts);
  std::vector<PartRect> all;
  if (cls == FigureClass::Upright) {
    all = {{1, 5, 5, 7, 10},  {2, 6, 0, 5, 5},   {3, 2, 5, 3, 10}, {4, 12, 5, 3, 10},
           {5, 5, 15, 3, 11}, {6, 9, 15, 3, 11}, {7, 3, 26, 5, 2}, {8, 9, 26, 5, 2}};
  } else {
    all = {{1, 6, 4, 16, 7},  {2, 22, 2, 6, 6},  {3, 0, 4, 6, 2},  {4, 18, 11, 3, 4},
           {5, 7, 11, 3, 4},  {6, 23, 0, 2, 2},  {7, 17, 15, 4, 2}, {8, 6, 15, 4, 2}};
  }
  all.resize(static_cast<std::size_t>(parts - 1));
  return all;
}

std::pair<int, int> layout_size(const std::vector<PartRect>& layout) {
  int w = 0, h = 0;
  for (const auto& r : layout) {
    w = std::max(w, r.x + r.w);
    h = std::max(h, r.y + r.h);
  }
  return {w, h};
}

double part_grey(int part, int parts) {
  if (part == 0) return 0.15;
  return 0.4 + 0.5 * (part - 1) / std::max(1, parts - 2);
}

namespace {

void render(const std::vector<PartRect>& layout, int ox, int oy, int parts, int label_base, FigureSample& out) {
  for (const auto& r : layout)
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x) {
        out.truth.at(ox + x, oy + y) = static_cast<Label>(label_base + r.part);
        out.image.at(ox + x, oy + y) = part_grey(r.part, parts);
      }
}

}  // namespace

FigureSample gen_composite_figure(int parts, double sigma, std::uint64_t seed, FigureClass cls) {
  const auto layout = figure_layout(cls, parts);
  const auto [w, h] = layout_size(layout);
  constexpr int kMargin = 4;
  FigureSample out{Image(w + 2 * kMargin, h + 2 * kMargin, 1, part_grey(0, parts)),
                   Labelling(w + 2 * kMargin, h + 2 * kMargin)};
  render(layout, kMargin, kMargin, parts, 0, out);
  Rng rng(derive_seed(seed, 0));
  add_noise(out.image, sigma, rng);
  return out;
}

namespace {

struct Placement {
  const std::vector<PartRect>* layout;
  int label_base;
};

FigureSample place_all(int parts, const std::vector<Placement>& items, const GridDomain& canvas, double sigma,
                       std::uint64_t seed) {
  FigureSample out{Image(canvas.width, canvas.height, 1, part_grey(0, parts)), Labelling(canvas)};
  Rng rng(derive_seed(seed, 0));
  struct Box {
    int x, y, w, h;
  };
  std::vector<Box> placed;
  constexpr int kGap = 2;
  for (const auto& item : items) {
    const auto [w, h] = layout_size(*item.layout);
    if (w > canvas.width || h > canvas.height) throw Error(Errc::PlacementFailure, "figure larger than the canvas");
    bool done = false;
    for (int attempt = 0; attempt < 1000 && !done; ++attempt) {
      const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(canvas.width - w + 1)));
      const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(canvas.height - h + 1)));
      const bool clear = std::none_of(placed.begin(), placed.end(), [&](const Box& b) {
        return x < b.x + b.w + kGap && b.x < x + w + kGap && y < b.y + b.h + kGap && b.y < y + h + kGap;
      });
      if (!clear) continue;
      placed.push_back({x, y, w, h});
      render(*item.layout, x, y, parts, item.label_base, out);
      done = true;
    }
    if (!done) throw Error(Errc::PlacementFailure, "cannot place all figures without overlap");
  }
  add_noise(out.image, sigma, rng);
  return out;
}

}  // namespace

FigureSample gen_scene(int parts, FigureClass cls, int instances, const GridDomain& canvas, double sigma,
                       std::uint64_t seed) {
  if (instances < 1) throw Error(Errc::InvalidArgument, "need at least one instance");
  const auto layout = figure_layout(cls, parts);
  return place_all(parts, std::vector<Placement>(static_cast<std::size_t>(instances), {&layout, 0}), canvas, sigma,
                   seed);
}

FigureSample gen_collage(int parts, int instances_a, int instances_b, const GridDomain& canvas, double sigma,
                         std::uint64_t seed, FigureClass class_a, FigureClass class_b) {
  if (instances_a < 1 || instances_b < 1) throw Error(Errc::InvalidArgument, "need at least one instance per class");
  const auto la = figure_layout(class_a, parts);
  const auto lb = figure_layout(class_b, parts);
  std::vector<Placement> items(static_cast<std::size_t>(instances_a), {&la, 0});
  items.insert(items.end(), static_cast<std::size_t>(instances_b), {&lb, parts - 1});
  return place_all(parts, items, canvas, sigma, seed);
}

FigureSample gen_cells(const GridDomain& domain, const CellsOptions& o, std::uint64_t seed) {
  if (!(o.radius_min > 0 && o.radius_max >= o.radius_min)) throw Error(Errc::InvalidArgument, "bad cell radii");
  FigureSample out{Image(domain.width, domain.height, 1, o.background), Labelling(domain)};
  Rng rng(derive_seed(seed, 0));
  struct Disc {
    double x, y, r;
  };
  std::vector<Disc> discs;
  for (int i = 0, attempts = 0; i < o.cells && attempts < 10000; ++attempts) {
    const double r = o.radius_min + (o.radius_max - o.radius_min) * rng.uniform();
    const double x = r + 1 + (domain.width - 2 * r - 2) * rng.uniform();
    const double y = r + 1 + (domain.height - 2 * r - 2) * rng.uniform();
    const bool clear = std::none_of(discs.begin(), discs.end(),
                                    [&](const Disc& d) { return std::hypot(d.x - x, d.y - y) < d.r + r + 3; });
    if (!clear) continue;
    discs.push_back({x, y, r});
    ++i;
  }
  if (static_cast<int>(discs.size()) < o.cells) throw Error(Errc::PlacementFailure, "cannot place all cells");

  auto dist_to_segment = [](double px, double py, double ax, double ay, double bx, double by) {
    const double vx = bx - ax, vy = by - ay;
    const double t = std::clamp(((px - ax) * vx + (py - ay) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
    return std::hypot(px - ax - t * vx, py - ay - t * vy);
  };
  struct Bar {
    double ax, ay, bx, by;
  };
  std::vector<Bar> bars;
  for (int i = 0, attempts = 0; i < o.artefacts && attempts < 10000; ++attempts) {
    const double len = o.artefact_length_min + (o.artefact_length_max - o.artefact_length_min) * rng.uniform();
    const double ang = std::numbers::pi * rng.uniform();
    const double ax = domain.width * rng.uniform(), ay = domain.height * rng.uniform();
    const double bx = ax + len * std::cos(ang), by = ay + len * std::sin(ang);
    if (bx < 1 || by < 1 || bx > domain.width - 2 || by > domain.height - 2) continue;
    const bool clear = std::none_of(discs.begin(), discs.end(), [&](const Disc& d) {
      return dist_to_segment(d.x, d.y, ax, ay, bx, by) < d.r + o.artefact_width + 2;
    });
    // Artefacts stay apart so that each one remains a thin bar.
    const bool apart = std::none_of(bars.begin(), bars.end(), [&](const Bar& b) {
      for (int k = 0; k <= 64; ++k) {
        const double t = k / 64.0;
        if (dist_to_segment(ax + t * (bx - ax), ay + t * (by - ay), b.ax, b.ay, b.bx, b.by) < o.artefact_width + 3)
          return true;
      }
      return false;
    });
    if (!clear || !apart) continue;
    bars.push_back({ax, ay, bx, by});
    ++i;
  }
  if (static_cast<int>(bars.size()) < o.artefacts) throw Error(Errc::PlacementFailure, "cannot place all artefacts");

  for (int y = 0; y < domain.height; ++y)
    for (int x = 0; x < domain.width; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      for (const auto& d : discs)
        if (std::hypot(px - d.x, py - d.y) <= d.r) {
          out.truth.at(x, y) = 1;
          out.image.at(x, y) = o.foreground;
        }
      for (const auto& b : bars)
        if (dist_to_segment(px, py, b.ax, b.ay, b.bx, b.by) <= o.artefact_width / 2) out.image.at(x, y) = o.foreground;
    }
  add_noise(out.image, o.sigma, rng);
  return out;
}

}  // namespace grf
