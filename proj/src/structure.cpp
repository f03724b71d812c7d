#include "grf/structure.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace grf {
namespace {

constexpr double kProbabilityFloor = 1e-12;

double trace_proxy(const LearningTrace& trace) {
  if (trace.entries.empty()) return 0.0;
  const std::size_t n = std::max<std::size_t>(1, trace.entries.size() / 10);
  double s = 0.0;
  for (std::size_t i = trace.entries.size() - n; i < trace.entries.size(); ++i) s += trace.entries[i].residual;
  return s / static_cast<double>(n);
}

LearningSchedule for_step(const LearningSchedule& s, std::uint64_t step) {
  LearningSchedule out = s;
  out.seed = derive_seed(s.seed, step);
  return out;
}

/// Expected counts over `offsets` from config.chains chains; `last` receives
/// the final labelling of the last chain.
SufficientStatistics sampled_counts(const GrfModel& model, const NeighborhoodStructure& offsets,
                                    const Evidence& evidence, const AppearanceModel* appearance,
                                    const SamplerConfig& config, const Labelling* init, Labelling* last) {
  config.validate();
  SufficientStatistics acc(offsets, model.labels.count, StatisticsKind::Counts);
  for (int c = 0; c < config.chains; ++c) {
    SamplerChain chain = init_chain(model, evidence, appearance, config, init, static_cast<std::uint64_t>(c));
    chain.run(config.burn_in);
    for (int i = 0; i < config.n_samples; ++i) {
      chain.run(config.thinning);
      add_counts(model.domain, chain.labelling(), acc);
    }
    if (last != nullptr) *last = chain.labelling();
  }
  acc.scale(1.0 / (static_cast<double>(config.n_samples) * config.chains));
  acc.set_kind(StatisticsKind::Expectations);
  return acc;
}

struct Fit {
  GrfModel model;
  std::optional<AppearanceModel> appearance;
  double proxy = 0.0;
};

Fit fit(const GrfModel& model, std::span<const TrainingEvent> events, const std::optional<AppearanceModel>& app,
        const LearningSchedule& schedule) {
  LearningResult r = learn_potentials(model, events, app ? &*app : nullptr, schedule);
  return {std::move(r.model), r.appearance ? r.appearance : app, trace_proxy(r.trace)};
}

void check_target(const CandidateRange& range, int target_size) {
  if (target_size < 0) throw Error(Errc::InvalidArgument, "target size must be >= 0");
  if (static_cast<std::size_t>(target_size) > range.size())
    throw Error(Errc::RangeExhausted, "target size " + std::to_string(target_size) + " exceeds the " +
                                          std::to_string(range.size()) + " candidates of range d=" +
                                          std::to_string(range.d));
}

}  // namespace

CandidateRange::CandidateRange(int d_) : d(d_) {
  if (d < 1) throw Error(Errc::InvalidArgument, "candidate range d must be >= 1");
}

Offset canonical_offset(Offset a) noexcept {
  return (a.dy > 0 || (a.dy == 0 && a.dx > 0)) ? a : -a;
}

std::vector<Offset> CandidateRange::offsets() const {
  std::vector<Offset> out;
  for (int dy = 0; dy <= d; ++dy)
    for (int dx = -d; dx <= d; ++dx)
      if (dy > 0 || dx > 0) out.push_back({dx, dy});
  return out;
}

void write_structure_trace(std::ostream& out, const StructureTrace& trace) {
  out << "# action dx dy score proxy\n";
  const auto old = out.precision(10);
  for (const auto& s : trace.steps)
    out << (s.added ? "add" : "remove") << ' ' << s.offset.dx << ' ' << s.offset.dy << ' ' << s.score << ' '
        << s.proxy << '\n';
  out.precision(old);
}

StructureOptions::StructureOptions() {
  final_fit.iterations = 1000;
  search.iterations = 250;
  scoring.burn_in = 50;
  scoring.n_samples = 20;
  scoring.thinning = 2;
}

std::vector<double> discrepancy(const SufficientStatistics& posterior, const SufficientStatistics& prior,
                                const GridDomain& domain, ScoreMetric metric) {
  if (!posterior.same_shape(prior)) throw Error(Errc::IncompatibleStatistics, "statistics shapes differ");
  std::vector<double> out;
  const SufficientStatistics p = to_frequencies(posterior, domain);
  const SufficientStatistics q = to_frequencies(prior, domain);
  for (std::size_t i = 1; i < posterior.size(); ++i) {
    double s = 0.0;
    if (metric == ScoreMetric::Euclidean) {
      const auto a = posterior.table(i);
      const auto b = prior.table(i);
      for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    } else {
      const auto a = p.table(i);
      const auto b = q.table(i);
      double pa = 0.0, qb = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) {
        pa += a[j];
        qb += std::max(b[j], kProbabilityFloor);
      }
      if (pa > 0.0)
        for (std::size_t j = 0; j < a.size(); ++j)
          if (a[j] > 0.0) {
            const double pj = a[j] / pa;
            s += pj * std::log(pj / (std::max(b[j], kProbabilityFloor) / qb));
          }
      s = std::max(s, 0.0);
    }
    out.push_back(s);
  }
  return out;
}

std::vector<std::pair<Offset, double>> candidate_scores(const GrfModel& model, std::span<const TrainingEvent> events,
                                                        const AppearanceModel* appearance,
                                                        const std::vector<Offset>& candidates, ScoreMetric metric,
                                                        const SamplerConfig& config) {
  if (events.empty()) throw Error(Errc::InvalidArgument, "scoring needs at least one event");
  for (const Offset a : candidates)
    if (a.is_zero() || model.structure.conflicts_with(a))
      throw Error(Errc::CandidateInStructure, "candidate " + to_string(a) + " is already in the structure");
  if (candidates.empty()) return {};
  const NeighborhoodStructure cand(candidates);

  double wsum = 0.0;
  for (const auto& e : events) wsum += e.weight;
  SufficientStatistics post(cand, model.labels.count, StatisticsKind::Expectations);
  Labelling start;
  for (std::size_t e = 0; e < events.size(); ++e) {
    SamplerConfig c = config;
    c.seed = derive_seed(config.seed, e);
    post.accumulate(sampled_counts(model, cand, events[e].evidence, appearance, c, nullptr, &start),
                    events[e].weight / wsum);
  }
  // The prior chains start from a posterior sample, which is close to the
  // prior's typical set once the model fits the data.
  SamplerConfig pc = config;
  pc.seed = derive_seed(config.seed, 0x70726f72ULL);
  const SufficientStatistics prior = sampled_counts(model, cand, {}, nullptr, pc, &start, nullptr);

  const auto d = discrepancy(post, prior, model.domain, metric);
  std::vector<std::pair<Offset, double>> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) out.emplace_back(cand[i + 1], d[i]);
  return out;
}

GrfModel restructure(const GrfModel& model, const NeighborhoodStructure& structure) {
  PotentialTable u(structure, model.labels.count);
  for (std::size_t i = 0; i < structure.size(); ++i)
    if (const auto j = model.structure.index_of(structure[i])) {
      const auto src = model.potentials.table(*j);
      std::copy(src.begin(), src.end(), u.table(i).begin());
    }
  return build_model(model.domain, model.labels, structure, u);
}

StructureResult grow_structure(std::span<const TrainingEvent> events, const LabelSet& labels,
                               const GridDomain& domain, const CandidateRange& range, int target_size,
                               const AppearanceModel* appearance, const StructureOptions& options) {
  check_target(range, target_size);
  StructureResult result;
  std::optional<AppearanceModel> app;
  if (appearance != nullptr) app = *appearance;
  GrfModel model = zero_model(domain, labels, NeighborhoodStructure{});

  for (int step = 0; static_cast<int>(model.structure.pairwise_count()) < target_size; ++step) {
    Fit f = fit(model, events, app, for_step(options.search, static_cast<std::uint64_t>(step)));
    model = std::move(f.model);
    app = std::move(f.appearance);

    std::vector<Offset> candidates;
    for (const Offset a : range.offsets())
      if (!model.structure.conflicts_with(a)) candidates.push_back(a);
    if (candidates.empty()) throw Error(Errc::RangeExhausted, "no candidates left");
    SamplerConfig sc = options.scoring;
    sc.seed = derive_seed(options.scoring.seed, static_cast<std::uint64_t>(step));
    const auto scores = candidate_scores(model, events, app ? &*app : nullptr, candidates, options.metric, sc);
    auto best = scores.front();
    for (const auto& s : scores)
      if (s.second > best.second) best = s;
    result.trace.steps.push_back({true, best.first, best.second, f.proxy});
    model = restructure(model, model.structure.with(best.first));
  }

  Fit f = fit(model, events, app, for_step(options.final_fit, 0xf1a1ULL));
  result.model = std::move(f.model);
  result.appearance = std::move(f.appearance);
  return result;
}

StructureResult shrink_structure(std::span<const TrainingEvent> events, const LabelSet& labels,
                                 const GridDomain& domain, const CandidateRange& range, int target_size,
                                 const AppearanceModel* appearance, const StructureOptions& options) {
  check_target(range, target_size);
  StructureResult result;
  std::optional<AppearanceModel> app;
  if (appearance != nullptr) app = *appearance;
  GrfModel model = zero_model(domain, labels, NeighborhoodStructure(range.offsets()));

  for (int step = 0; static_cast<int>(model.structure.pairwise_count()) > target_size; ++step) {
    Fit f = fit(model, events, app, for_step(options.search, static_cast<std::uint64_t>(step)));
    model = std::move(f.model);
    app = std::move(f.appearance);
    const PotentialTable canonical = normalize_potentials(model.potentials);

    std::size_t weakest = 1;
    double weakest_norm = table_norm(canonical, 1);
    for (std::size_t i = 2; i < canonical.size(); ++i) {
      const double n = table_norm(canonical, i);
      if (n < weakest_norm || (n == weakest_norm && offset_less(model.structure[i], model.structure[weakest]))) {
        weakest = i;
        weakest_norm = n;
      }
    }
    const Offset removed = model.structure[weakest];
    result.trace.steps.push_back({false, removed, weakest_norm, f.proxy});
    model = restructure(model, model.structure.without(removed));
  }

  Fit f = fit(model, events, app, for_step(options.final_fit, 0xf1a1ULL));
  result.model = std::move(f.model);
  result.appearance = std::move(f.appearance);
  return result;
}

void OffsetHistogram::add(const NeighborhoodStructure& structure) { add(structure.pairwise()); }

void OffsetHistogram::add(std::span<const Offset> offsets) {
  for (const Offset a : offsets) ++counts_[canonical_offset(a)];
  ++runs_;
}

int OffsetHistogram::count(Offset a) const {
  const auto it = counts_.find(canonical_offset(a));
  return it == counts_.end() ? 0 : it->second;
}

std::vector<std::pair<Offset, int>> OffsetHistogram::ranked() const {
  std::vector<std::pair<Offset, int>> out(counts_.begin(), counts_.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

void OffsetHistogram::write(std::ostream& out) const {
  out << "# runs " << runs_ << "\n# dx dy count\n";
  for (const auto& [a, n] : ranked()) out << a.dx << ' ' << a.dy << ' ' << n << '\n';
}

}  // namespace grf
