#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "grf/generators.hpp"
#include "grf/oracle.hpp"
#include "grf/rng.hpp"
#include "grf/structure.hpp"

using namespace grf;

namespace {

StructureOptions quick_options(int search_iters) {
  StructureOptions o;
  o.search.iterations = search_iters;
  o.final_fit.iterations = search_iters;
  o.scoring.burn_in = 10;
  o.scoring.n_samples = 5;
  return o;
}

SufficientStatistics random_stats(const NeighborhoodStructure& s, int labels, Rng& rng) {
  SufficientStatistics out(s, labels, StatisticsKind::Expectations);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (double& v : out.table(i)) v = 10.0 * rng.uniform();
  return out;
}

}  // namespace

TEST_CASE("candidate range") {
  for (int d = 1; d <= 12; ++d) {
    const CandidateRange r(d);
    const auto offs = r.offsets();
    CHECK(offs.size() == static_cast<std::size_t>(((2 * d + 1) * (2 * d + 1) - 1) / 2));
    CHECK(r.size() == offs.size());
    CHECK_NOTHROW(NeighborhoodStructure(offs));
    CHECK(std::is_sorted(offs.begin(), offs.end(), offset_less));
    for (const Offset a : offs) CHECK(canonical_offset(a) == a);
  }
  CHECK(CandidateRange(6).size() == 84);
  CHECK_THROWS_AS(CandidateRange(0), Error);
  CHECK(canonical_offset({3, -2}) == Offset{-3, 2});
  CHECK(canonical_offset({-1, 0}) == Offset{1, 0});
}

TEST_CASE("discrepancy properties") {
  Rng rng(1);
  const NeighborhoodStructure s({{1, 0}, {2, 1}, {0, 3}});
  const GridDomain dom(8, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_stats(s, 3, rng);
    const auto b = random_stats(s, 3, rng);
    for (const auto metric : {ScoreMetric::Euclidean, ScoreMetric::KullbackLeibler}) {
      for (const double v : discrepancy(a, b, dom, metric)) CHECK(v >= 0.0);
      for (const double v : discrepancy(a, a, dom, metric)) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    }
    CHECK(discrepancy(a, b, dom, ScoreMetric::Euclidean) == discrepancy(b, a, dom, ScoreMetric::Euclidean));
    for (const double v : discrepancy(a, b, dom, ScoreMetric::Euclidean)) CHECK(v > 0.0);
  }
  // A zero entry in the prior is floored instead of producing infinity.
  SufficientStatistics p(NeighborhoodStructure({{1, 0}}), 2, StatisticsKind::Frequencies);
  SufficientStatistics q = p;
  p.table(1)[0] = p.table(1)[3] = 0.5;
  q.table(1)[0] = 1.0;
  const double kl = discrepancy(p, q, dom, ScoreMetric::KullbackLeibler)[0];
  CHECK(std::isfinite(kl));
  CHECK(kl > 10.0);
}

TEST_CASE("candidate scores") {
  const GridDomain dom(16, 16);
  const GrfModel m = zero_model(dom, LabelSet(2), NeighborhoodStructure({{1, 0}}));
  const AppearanceModel flat = uniform_appearance(2, 1);
  const std::vector<TrainingEvent> ev{{Evidence{Image(16, 16, 1, 0.5), std::nullopt}, 1.0}};
  try {
    candidate_scores(m, ev, &flat, {{-1, 0}}, ScoreMetric::Euclidean, SamplerConfig{});
    FAIL("expected CandidateInStructure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CandidateInStructure);
  }

  // Uninformative evidence: posterior and prior coincide, so scores are
  // pure Monte-Carlo noise, small against the squared edge counts (~1e4).
  SamplerConfig c;
  c.burn_in = 20;
  c.n_samples = 50;
  const auto scores = candidate_scores(m, ev, &flat, {{0, 1}, {3, 2}}, ScoreMetric::Euclidean, c);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0].first == Offset{0, 1});
  for (const auto& [a, s] : scores) CHECK(s < 2000.0);
}

TEST_CASE("scores prefer the true long-range offsets on blob data") {
  const GridDomain dom(48, 48);
  const GrfModel truth = gen_blob_model(0.35, 0.5, dom);
  SamplerConfig c;
  c.burn_in = 300;
  c.seed = 4;
  SamplerChain chain = init_chain(truth, {}, nullptr, c);
  chain.run(c.burn_in);
  const std::vector<TrainingEvent> ev{{Evidence::clamped(chain.labelling()), 1.0}};

  const NeighborhoodStructure shortn({{1, 0}, {0, 1}, {1, 1}, {-1, 1}});
  LearningSchedule s;
  s.iterations = 400;
  s.averaging = 0.3;
  const GrfModel m = learn_potentials(zero_model(dom, truth.labels, shortn), ev, nullptr, s).model;
  SamplerConfig sc;
  sc.burn_in = 50;
  sc.n_samples = 20;
  sc.thinning = 2;
  const auto scores = candidate_scores(m, ev, nullptr, {{5, 0}, {0, 5}, {3, 1}, {-2, 4}}, ScoreMetric::Euclidean, sc);
  CHECK(std::min(scores[0].second, scores[1].second) > std::max(scores[2].second, scores[3].second));
}

TEST_CASE("restructure keeps shared tables") {
  Rng rng(2);
  const NeighborhoodStructure s({{1, 0}, {0, 1}});
  PotentialTable u(s, 2);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (double& v : u.table(i)) v = rng.normal();
  const GrfModel m = build_model({5, 5}, LabelSet(2), s, u);
  const GrfModel r = restructure(m, NeighborhoodStructure({{0, 1}, {2, 2}}));
  const auto t = r.potentials.table(1);
  CHECK(std::equal(t.begin(), t.end(), m.potentials.table(2).begin()));
  for (const double v : r.potentials.table(2)) CHECK(v == 0.0);
  CHECK(r.potentials.table(0)[1] == m.potentials.table(0)[1]);
}

TEST_CASE("shrinkage norms are gauge independent") {
  Rng rng(3);
  const NeighborhoodStructure s({{1, 0}, {1, 1}});
  PotentialTable u(s, 3);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (double& v : u.table(i)) v = rng.normal();
  const PotentialTable shifted = add_gauge_constants(u, {{{1, 0}, 2.5}, {{1, 1}, -7.0}});
  for (std::size_t i = 1; i < u.size(); ++i)
    CHECK(table_norm(normalize_potentials(shifted), i) == doctest::Approx(table_norm(normalize_potentials(u), i)));
}

TEST_CASE("shrink ties go to the smallest offset") {
  // Zero search iterations leave every table at zero, so all norms tie.
  const Labelling y(6, 6);
  const std::vector<TrainingEvent> ev{{Evidence::clamped(y), 1.0}};
  StructureOptions o = quick_options(0);
  const auto r = shrink_structure(ev, LabelSet(2), {6, 6}, CandidateRange(1), 2, nullptr, o);
  REQUIRE(r.trace.steps.size() == 2);
  CHECK(r.trace.steps[0].offset == Offset{1, 0});
  CHECK(r.trace.steps[1].offset == Offset{-1, 1});
  CHECK(!r.trace.steps[0].added);
  CHECK(r.model.structure.pairwise_count() == 2);
  CHECK(r.model.structure[0].is_zero());
}

TEST_CASE("growth from the empty structure") {
  Rng rng(5);
  Labelling y(10, 10);
  for (auto& v : y.labels) v = static_cast<Label>(rng.below(2));
  const std::vector<TrainingEvent> ev{{Evidence::clamped(y), 1.0}};
  StructureOptions o = quick_options(20);
  const auto a = grow_structure(ev, LabelSet(2), {10, 10}, CandidateRange(2), 4, nullptr, o);
  REQUIRE(a.trace.steps.size() == 4);
  CHECK(a.model.structure.pairwise_count() == 4);
  CHECK(a.model.structure[0].is_zero());
  std::set<std::pair<int, int>> seen;
  for (const auto& st : a.trace.steps) {
    CHECK(st.added);
    CHECK(st.score >= 0.0);
    const Offset c = canonical_offset(st.offset);
    CHECK(seen.insert({c.dx, c.dy}).second);
  }
  const auto b = grow_structure(ev, LabelSet(2), {10, 10}, CandidateRange(2), 4, nullptr, o);
  std::ostringstream ta, tb;
  write_structure_trace(ta, a.trace);
  write_structure_trace(tb, b.trace);
  CHECK(ta.str() == tb.str());

  try {
    grow_structure(ev, LabelSet(2), {10, 10}, CandidateRange(1), 5, nullptr, o);
    FAIL("expected RangeExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RangeExhausted);
  }
}

TEST_CASE("unary-only growth learns the empirical label frequencies") {
  Labelling y(2, 2);
  y.at(0, 0) = 1;
  const std::vector<TrainingEvent> ev{{Evidence::clamped(y), 1.0}};
  StructureOptions o = quick_options(0);
  o.final_fit.iterations = 20000;
  o.final_fit.step0 = 0.05;
  o.final_fit.averaging = 0.5;
  const auto r = grow_structure(ev, LabelSet(2), {2, 2}, CandidateRange(1), 0, nullptr, o);
  CHECK(r.model.structure.pairwise_count() == 0);
  const auto m = exact_marginals(r.model);
  for (std::size_t t = 0; t < 4; ++t) CHECK(m.at(t, 1) == doctest::Approx(0.25).epsilon(0.1));
  // Closed form up to gauge: u(1) - u(0) = log(1/3).
  CHECK(r.model.potentials.unary(1) - r.model.potentials.unary(0) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(0.1));
}

TEST_CASE("offset histogram") {
  OffsetHistogram h;
  h.add(NeighborhoodStructure({{1, 0}, {0, 5}}));
  h.add(std::vector<Offset>{{-1, 0}, {5, 5}});
  h.add(std::vector<Offset>{{1, 0}, {0, 5}});
  CHECK(h.runs() == 3);
  CHECK(h.count({1, 0}) == 3);
  CHECK(h.count({-1, 0}) == 3);
  CHECK(h.count({0, -5}) == 2);
  const auto r = h.ranked();
  REQUIRE(r.size() == 3);
  CHECK(r[0].first == Offset{1, 0});
  CHECK(r[1].first == Offset{0, 5});
  CHECK(r[2].second == 1);
  std::ostringstream out;
  h.write(out);
  CHECK(out.str() == "# runs 3\n# dx dy count\n1 0 3\n0 5 2\n5 5 1\n");
}
