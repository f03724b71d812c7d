#include <cmath>
#include <sstream>

#include "doctest.h"
#include "grf/generators.hpp"
#include "grf/learning.hpp"
#include "grf/oracle.hpp"
#include "grf/rng.hpp"

using namespace grf;

namespace {

GrfModel random_model(const GridDomain& dom, int labels, double scale, Rng& rng) {
  const NeighborhoodStructure s({{1, 0}, {0, 1}});
  PotentialTable u(s, labels);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (double& v : u.table(i)) v = scale * (2.0 * rng.uniform() - 1.0);
  return build_model(dom, LabelSet(labels), s, normalize_potentials(u));
}

double max_table_sum(const PotentialTable& u) {
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double s = 0.0;
    for (const double v : u.table(i)) s += v;
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

double max_freq_diff(const SufficientStatistics& a, const SufficientStatistics& b, const GridDomain& dom) {
  const auto fa = to_frequencies(a, dom);
  const auto fb = to_frequencies(b, dom);
  double worst = 0.0;
  for (std::size_t i = 1; i < fa.size(); ++i)
    for (std::size_t j = 0; j < fa.table(i).size(); ++j)
      worst = std::max(worst, std::abs(fa.table(i)[j] - fb.table(i)[j]));
  return worst;
}

}  // namespace

TEST_CASE("step schedule defaults") {
  LearningSchedule s;
  s.iterations = 300;
  const GridDomain dom(10, 5);
  CHECK(s.step(0, dom) == doctest::Approx(1.0 / 50.0));
  CHECK(s.step(100, dom) == doctest::Approx(1.0 / 50.0 / 2.0));
  s.step0 = 0.3;
  s.tau = 10.0;
  CHECK(s.step(30, dom) == doctest::Approx(0.075));

  LearningSchedule bad;
  bad.inner_sweeps = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = LearningSchedule{};
  bad.averaging = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("zero iterations return the model unchanged") {
  Rng rng(1);
  GrfModel m = random_model({4, 4}, 2, 1.0, rng);
  m.potentials.table(1)[0] += 3.0;  // off gauge on purpose
  LearningSchedule s;
  s.iterations = 0;
  const Labelling y(4, 4);
  const std::vector<TrainingEvent> ev{{Evidence::clamped(y), 1.0}};
  const auto r = learn_potentials(m, ev, nullptr, s);
  CHECK(r.model.potentials.max_abs_difference(m.potentials) == 0.0);
  CHECK(r.trace.entries.empty());
}

TEST_CASE("event validation") {
  const GrfModel m = zero_model({4, 4}, LabelSet(2), NeighborhoodStructure({{1, 0}}));
  LearningSchedule s;
  s.iterations = 1;
  CHECK_THROWS_AS(learn_potentials(m, std::vector<TrainingEvent>{}, nullptr, s), Error);
  const std::vector<TrainingEvent> image_only{{Evidence{Image(4, 4, 1), std::nullopt}, 1.0}};
  try {
    learn_potentials(m, image_only, nullptr, s);
    FAIL("expected MissingAppearance");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingAppearance);
  }
  const std::vector<TrainingEvent> bad_weight{{Evidence::clamped(Labelling(4, 4)), 0.0}};
  CHECK_THROWS_AS(learn_potentials(m, bad_weight, nullptr, s), Error);
}

TEST_CASE("gradient estimates: totals vanish and the mean matches the oracle") {
  Rng rng(2);
  const GridDomain dom(2, 2);
  const GrfModel m = random_model(dom, 2, 1.0, rng);
  Labelling y(dom);
  y.at(1, 0) = 1;
  const TrainingEvent ev{Evidence::clamped(y), 1.0};
  const SufficientStatistics exact = exact_loglik_gradient(m, ev.evidence);

  SufficientStatistics mean(m.structure, 2, StatisticsKind::Expectations);
  constexpr int kTrials = 4000;
  SamplerConfig c;
  c.burn_in = 10;
  for (int i = 0; i < kTrials; ++i) {
    c.seed = static_cast<std::uint64_t>(i);
    const SufficientStatistics g = gradient_estimate(m, ev, nullptr, c);
    for (std::size_t a = 0; a < g.size(); ++a) CHECK(g.total(a) == doctest::Approx(0.0).epsilon(1e-12));
    mean.accumulate(g, 1.0 / kTrials);
  }
  // Each count lies in [0, 2] on a 2x2 grid, so the standard error is below
  // 2 / sqrt(kTrials).
  CHECK(mean.max_abs_difference(exact) < 3.0 * 2.0 / std::sqrt(kTrials));
}

TEST_CASE("learning from exact statistics of a known model") {
  Rng rng(3);
  const GridDomain dom(3, 3);
  for (int trial = 0; trial < 2; ++trial) {
    const GrfModel truth = random_model(dom, 2, 1.0, rng);
    const SufficientStatistics target = exact_statistics_expectation(truth);
    LearningSchedule s;
    s.iterations = 20000;
    s.step0 = 0.05;
    s.samples_per_expectation = 4;
    s.averaging = 0.5;
    s.seed = static_cast<std::uint64_t>(trial);
    const auto r = learn_from_statistics(zero_model(dom, LabelSet(2), truth.structure), target, s);
    CHECK(max_table_sum(r.model.potentials) < 1e-9);
    CHECK(max_freq_diff(exact_statistics_expectation(r.model), target, dom) < 0.01);
    REQUIRE(r.trace.entries.size() == 20000);
  }
}

TEST_CASE("uniform pair frequencies give near-zero potentials") {
  const GridDomain dom(3, 3);
  const NeighborhoodStructure s({{1, 0}, {0, 1}});
  SufficientStatistics target(s, 3, StatisticsKind::Frequencies);
  for (std::size_t i = 0; i < target.size(); ++i)
    for (double& v : target.table(i)) v = 1.0 / static_cast<double>(target.table(i).size());
  LearningSchedule sch;
  sch.iterations = 10000;
  sch.step0 = 0.05;
  sch.averaging = 0.5;
  const auto r = learn_from_statistics(zero_model(dom, LabelSet(3), s), target, sch);
  for (std::size_t i = 0; i < r.model.potentials.size(); ++i)
    for (const double v : r.model.potentials.table(i)) CHECK(std::abs(v) < 0.1);
}

TEST_CASE("statistics must match the model") {
  const GrfModel m = zero_model({3, 3}, LabelSet(2), NeighborhoodStructure({{1, 0}}));
  const SufficientStatistics other(NeighborhoodStructure({{0, 1}}), 2, StatisticsKind::Expectations);
  try {
    learn_from_statistics(m, other, LearningSchedule{});
    FAIL("expected IncompatibleStatistics");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IncompatibleStatistics);
  }
  CHECK_THROWS_AS(moment_residual(m, other, SamplerConfig{}), Error);
}

TEST_CASE("moment residual of a model against its own statistics") {
  Rng rng(4);
  const GridDomain dom(16, 16);
  const GrfModel m = random_model(dom, 2, 0.3, rng);
  SamplerConfig c;
  c.burn_in = 50;
  c.n_samples = 200;
  c.seed = 1;
  const SufficientStatistics own = estimate_statistics(m, {}, nullptr, c);
  c.seed = 2;
  CHECK(moment_residual(m, own, c) < 0.02);
  const GrfModel flat = zero_model(dom, LabelSet(2), m.structure);
  SufficientStatistics uniform(m.structure, 2, StatisticsKind::Frequencies);
  for (std::size_t i = 0; i < uniform.size(); ++i)
    for (double& v : uniform.table(i)) v = 1.0 / static_cast<double>(uniform.table(i).size());
  CHECK(moment_residual(flat, uniform, c) < 0.02);
}

TEST_CASE("supervised learning matches training moments") {
  const GridDomain dom(32, 32);
  const GrfModel truth = gen_blob_model(0.35, 0.5, dom);
  SamplerConfig c;
  c.burn_in = 300;
  c.seed = 5;
  SamplerChain chain = init_chain(truth, {}, nullptr, c);
  chain.run(c.burn_in);
  const Labelling y = chain.labelling();
  const std::vector<TrainingEvent> ev{{Evidence::clamped(y), 1.0}};
  LearningSchedule s;
  s.iterations = 1500;
  s.averaging = 0.3;
  s.seed = 9;
  const auto r = learn_potentials(zero_model(dom, truth.labels, truth.structure), ev, nullptr, s);
  CHECK(max_table_sum(r.model.potentials) < 1e-9);
  SamplerConfig check;
  check.burn_in = 200;
  check.n_samples = 200;
  check.seed = 11;
  const SufficientStatistics target = count_statistics(dom, truth.structure, truth.labels, y);
  CHECK(moment_residual(r.model, target, check) < 0.04);
}

TEST_CASE("learning is deterministic and independent of the thread count") {
  Rng rng(6);
  const GridDomain dom(12, 10);
  std::vector<TrainingEvent> ev;
  const AppearanceModel app = gaussian_appearance({{0.2}, {0.8}}, 0.2);
  for (int e = 0; e < 3; ++e) {
    Image img(12, 10, 1);
    for (double& v : img.values) v = rng.uniform();
    ClampMask mask(12, 10);
    for (int y = 2; y < 5; ++y)
      for (int x = 3; x < 9; ++x) mask.at(x, y) = static_cast<int>(rng.below(2));
    ev.push_back({Evidence{img, mask}, 1.0 + e});
  }
  const GrfModel m0 = zero_model(dom, LabelSet(2), NeighborhoodStructure({{1, 0}, {0, 1}, {1, 1}}));
  LearningSchedule s;
  s.iterations = 50;
  s.seed = 3;
  s.appearance_step = 0.5;
  const auto a = learn_potentials(m0, ev, &app, s);
  s.threads = 3;
  const auto b = learn_potentials(m0, ev, &app, s);
  CHECK(a.model.potentials.max_abs_difference(b.model.potentials) == 0.0);
  REQUIRE(a.appearance.has_value());
  CHECK(a.appearance->mixtures[1][0].mean[0] == b.appearance->mixtures[1][0].mean[0]);
  s.seed = 4;
  const auto c = learn_potentials(m0, ev, &app, s);
  CHECK(a.model.potentials.max_abs_difference(c.model.potentials) > 0.0);
}

TEST_CASE("trace format") {
  LearningTrace t;
  t.entries.push_back({0, 0.5, 2.0, 0.25});
  std::ostringstream out;
  write_trace(out, t);
  CHECK(out.str() == "# iteration step gradient_max residual\n0 0.5 2 0.25\n");
}

TEST_CASE("unsupervised appearance under a fixed prior") {
  const GridDomain dom(24, 24);
  const GrfModel prior = gen_potts_baseline(2, 4, {1.0}, dom);
  Image img(24, 24, 1);
  Rng rng(10);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x) img.at(x, y) = (x < 12 ? 0.25 : 0.75) + 0.05 * rng.normal();
  const std::vector<TrainingEvent> ev{{Evidence{img, std::nullopt}, 1.0}};
  const AppearanceModel init = gaussian_appearance({{0.4}, {0.6}}, 0.2);
  SamplerConfig c;
  c.burn_in = 5;
  c.seed = 2;
  const AppearanceModel app = learn_appearance(prior, init, ev, 20, 1.0, c);
  CHECK(app.mixtures[0][0].mean[0] == doctest::Approx(0.25).epsilon(0.1));
  CHECK(app.mixtures[1][0].mean[0] == doctest::Approx(0.75).epsilon(0.05));
}
