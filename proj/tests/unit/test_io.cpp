#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "grf/generators.hpp"
#include "grf/io.hpp"
#include "grf/oracle.hpp"
#include "grf/rng.hpp"

using namespace grf;

namespace {

Labelling random_labelling(int w, int h, int labels, Rng& rng) {
  Labelling y(w, h);
  for (auto& v : y.labels) v = static_cast<Label>(rng.below(static_cast<std::uint64_t>(labels)));
  return y;
}

GrfModel random_model(Rng& rng) {
  const NeighborhoodStructure s({{1, 0}, {0, 1}, {-2, 3}});
  PotentialTable u(s, 3);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (double& v : u.table(i)) v = rng.normal() * 7.3;
  return build_model({5, 4}, LabelSet(3, {"a", "b", "c"}), s, u);
}

}  // namespace

TEST_CASE("labellings round-trip through P5") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(20)), h = 1 + static_cast<int>(rng.below(20));
    const int k = 1 + static_cast<int>(rng.below(256));
    const Labelling y = random_labelling(w, h, k, rng);
    std::stringstream s;
    write_labelling(s, y);
    CHECK(read_labelling(s, k) == y);
  }
}

TEST_CASE("labels beyond the label count are rejected") {
  Labelling y(2, 2);
  y.at(1, 1) = 5;
  std::stringstream s;
  write_labelling(s, y);
  try {
    read_labelling(s, 5);
    FAIL("expected LabelOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::LabelOutOfRange);
  }
}

TEST_CASE("clamp mask convention") {
  std::stringstream s;
  s << "P5\n3 1\n255\n";
  s.put(0).put(3).put(1);
  const ClampMask m = read_clamp_mask(s);
  CHECK(m.labels[0] == ClampMask::kFree);
  CHECK(m.labels[1] == 2);
  CHECK(m.labels[2] == 0);

  std::stringstream out;
  write_clamp_mask(out, m);
  CHECK(read_clamp_mask(out).labels == m.labels);

  std::stringstream zeros;
  zeros << "P5\n2 2\n255\n";
  for (int i = 0; i < 4; ++i) zeros.put(0);
  CHECK(read_clamp_mask(zeros).clamped_count() == 0);

  std::stringstream too_big;
  too_big << "P5\n1 1\n255\n";
  too_big.put(4);
  CHECK_THROWS_AS(read_clamp_mask(too_big, 3), Error);
}

TEST_CASE("images keep 8-bit levels exactly") {
  Image img(4, 3, 3);
  for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = static_cast<double>(i * 20 % 256) / 255.0;
  std::stringstream s;
  write_image(s, img);
  CHECK(s.str().substr(0, 2) == "P6");
  const Image back = read_image(s);
  REQUIRE(back.channels == 3);
  CHECK(back.values == img.values);
}

TEST_CASE("malformed headers") {
  const char* bad[] = {"P2\n1 1\n255\n", "P5\n0 1\n255\n", "P5\n1 1\n65535\n", "P5\n2 2\n255\n\x01", "P5 x 1 255\n"};
  for (const char* text : bad) {
    std::stringstream s(text);
    try {
      read_image(s);
      FAIL("accepted " << text);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MalformedHeader);
    }
  }
  std::stringstream comment("P5\n# made by hand\n1 1\n255\n\x07");
  CHECK(read_labelling(comment).labels[0] == 7);
}

TEST_CASE("model files reproduce potentials bit for bit") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    ModelFile f{random_model(rng), std::nullopt, {{"seed", "7"}}};
    if (trial % 2 == 0) {
      f.appearance = gaussian_appearance({{0.1}, {0.5}, {0.9}}, 0.13);
      f.appearance->mixtures[1][0].covariance(0, 0) = 1.0 / 3.0;
    }
    const ModelFile g = model_from_json(model_to_json(f));
    CHECK(g.model.potentials.max_abs_difference(f.model.potentials) == 0.0);
    CHECK(g.model.structure == f.model.structure);
    CHECK(g.model.domain == f.model.domain);
    CHECK(g.model.labels.names == f.model.labels.names);
    CHECK(g.provenance == f.provenance);
    REQUIRE(g.appearance.has_value() == f.appearance.has_value());
    if (g.appearance) CHECK(g.appearance->mixtures[1][0].covariance(0, 0) == 1.0 / 3.0);
    CHECK(model_to_json(g) == model_to_json(f));
  }
}

TEST_CASE("model files are validated on read") {
  GrfModel m = gen_blob_model(0.35, 0.5);
  std::string text = model_to_json({m, std::nullopt, {}});
  const auto pos = text.find("[\n      0,\n      5\n    ]");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, std::string("[\n      0,\n      5\n    ]").size(), "[0, -1]");
  try {
    model_from_json(text);
    FAIL("opposite offsets accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::OppositeOffsetPresent);
  }
  CHECK_THROWS_AS(model_from_json("{not json"), Error);
}

TEST_CASE("statistics files round-trip and reject negatives") {
  const GrfModel m = gen_blob_model(0.35, 0.5, {12, 12});
  Labelling y(12, 12);
  y.at(3, 4) = 1;
  StatisticsFile f{count_statistics(m.domain, m.structure, m.labels, y), {{"source", "test"}}};
  const StatisticsFile g = statistics_from_json(statistics_to_json(f));
  CHECK(g.stats.kind() == f.stats.kind());
  CHECK(g.stats.max_abs_difference(f.stats) == 0.0);

  std::string text = statistics_to_json(f);
  const auto pos = text.find("143.0");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 5, "-1.0");
  CHECK_THROWS_AS(statistics_from_json(text), Error);
}

TEST_CASE("blob model tables") {
  const GrfModel m = gen_blob_model(0.35, 0.5);
  REQUIRE(m.structure.pairwise_count() == 8);
  const auto longt = m.potentials.table(*m.structure.index_of({5, 0}));
  CHECK(longt[0] == doctest::Approx(0.15));
  CHECK(longt[1] == doctest::Approx(0.35));
  CHECK(longt[2] == doctest::Approx(0.35));
  CHECK(longt[3] == doctest::Approx(-0.85));
  for (std::size_t i = 1; i < m.potentials.size(); ++i) {
    double sum = 0.0;
    for (const double v : m.potentials.table(i)) sum += v;
    CHECK(sum == doctest::Approx(0.0).epsilon(1e-15));
  }
  const GrfModel m0 = gen_blob_model(0.0, 0.5);
  CHECK(modularity_defect(m0.potentials.table(*m0.structure.index_of({-5, 5})), 2) == doctest::Approx(0.0));
}

TEST_CASE("Potts baselines") {
  const GrfModel p4 = gen_potts_baseline(3, 4, {});
  CHECK(p4.structure.pairwise_count() == 2);
  CHECK(p4.potentials.max_abs_difference(PotentialTable(p4.structure, 3)) == 0.0);

  const GrfModel iso = gen_potts_baseline(2, 8, {1.0});
  const auto t = iso.potentials.table(1);
  CHECK(t[0] == doctest::Approx(0.5));
  CHECK(t[1] == doctest::Approx(-0.5));
  CHECK(t[3] == doctest::Approx(0.5));

  const GrfModel aniso = gen_potts_baseline(2, 8, {0.1, 0.2, 0.3, 0.4});
  REQUIRE(aniso.structure.pairwise_count() == 4);
  for (std::size_t i = 1; i <= 4; ++i) CHECK(aniso.potentials.table(i)[0] == doctest::Approx(0.05 * i));
  CHECK_THROWS_AS(gen_potts_baseline(2, 8, {0.1, 0.2}), Error);
  CHECK_THROWS_AS(gen_potts_baseline(2, 6, {}), Error);
}

TEST_CASE("noiseless figure renders the ground truth") {
  for (const auto cls : {FigureClass::Upright, FigureClass::Lying}) {
    const FigureSample s = gen_composite_figure(7, 0.0, 3, cls);
    validate_labelling(s.truth, s.truth.domain(), LabelSet(7));
    for (std::size_t t = 0; t < s.truth.labels.size(); ++t)
      CHECK(s.image.values[t] == part_grey(s.truth.labels[t], 7));
    int seen = 0;
    for (int k = 0; k < 7; ++k)
      seen += std::count(s.truth.labels.begin(), s.truth.labels.end(), static_cast<Label>(k)) > 0;
    CHECK(seen == 7);
  }
  const FigureSample a = gen_composite_figure(7, 0.1, 11);
  const FigureSample b = gen_composite_figure(7, 0.1, 11);
  CHECK(a.image.values == b.image.values);
  CHECK(a.image.values != gen_composite_figure(7, 0.1, 12).image.values);
}

TEST_CASE("collage parts share their appearance across classes") {
  const FigureSample s = gen_collage(7, 1, 1, {64, 64}, 0.0, 5);
  validate_labelling(s.truth, s.truth.domain(), LabelSet(13));
  std::map<double, int> grey_a, grey_b;
  for (std::size_t t = 0; t < s.truth.labels.size(); ++t) {
    const int k = s.truth.labels[t];
    if (k >= 1 && k <= 6) ++grey_a[s.image.values[t]];
    if (k >= 7) ++grey_b[s.image.values[t]];
  }
  REQUIRE(grey_a.size() == 6);
  CHECK(grey_a.size() == grey_b.size());
  for (const auto& [g, n] : grey_a) CHECK(grey_b.count(g) == 1);
  CHECK_THROWS_AS(gen_collage(7, 20, 20, {40, 40}, 0.0, 5), Error);
}

TEST_CASE("cells: artefacts share the cell grey level but are background") {
  CellsOptions o;
  o.sigma = 0.0;
  const FigureSample s = gen_cells({96, 96}, o, 4);
  int bright_background = 0, cells = 0;
  for (std::size_t t = 0; t < s.truth.labels.size(); ++t) {
    cells += s.truth.labels[t];
    if (s.truth.labels[t] == 1) CHECK(s.image.values[t] == o.foreground);
    bright_background += s.truth.labels[t] == 0 && s.image.values[t] == o.foreground;
  }
  CHECK(cells > 6 * 100);
  CHECK(bright_background > 5 * 30);
}
