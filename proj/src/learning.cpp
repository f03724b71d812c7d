#include "grf/learning.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>

namespace grf {
namespace {

/// Runs fn(i) for i in [0, n) on up to `threads` workers.  Each index owns
/// its data, so the result does not depend on the worker count.
template <class Fn>
void for_each_index(std::size_t n, int threads, Fn fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
}

SamplerConfig chain_config(const LearningSchedule& s) {
  SamplerConfig c;
  c.seed = s.seed;
  c.scan = s.scan;
  c.burn_in = s.burn_in;
  return c;
}

/// Averages n retained samples of the chain into the statistics table.
void collect(SamplerChain& chain, int n, int sweeps, SufficientStatistics& acc, std::vector<Labelling>* keep) {
  for (int s = 0; s < n; ++s) {
    chain.run(sweeps);
    add_counts(chain.domain(), chain.labelling(), acc);
    if (keep != nullptr) keep->push_back(chain.labelling());
  }
}

void check_events(const GrfModel& model, std::span<const TrainingEvent> events, const AppearanceModel* appearance) {
  for (const auto& e : events) {
    if (e.evidence.empty())
      throw Error(Errc::InvalidArgument, "training event needs an image or a clamp mask");
    if (!(e.weight > 0.0)) throw Error(Errc::InvalidArgument, "event weights must be positive");
    validate_evidence(e.evidence, model.domain, model.labels);
    if (e.evidence.image && appearance == nullptr)
      throw Error(Errc::MissingAppearance, "image events require an appearance model");
  }
}

SufficientStatistics as_expectations(const GrfModel& model, const SufficientStatistics& target) {
  if (target.labels() != model.labels.count || !(target.structure() == model.structure))
    throw Error(Errc::IncompatibleStatistics, "target statistics are not indexed by the model's structure and labels");
  if (target.kind() == StatisticsKind::Frequencies) return to_expectations(target, model.domain);
  SufficientStatistics e = target;
  e.set_kind(StatisticsKind::Expectations);
  return e;
}

double residual_of(const SufficientStatistics& grad, const GridDomain& domain) {
  return to_frequencies(grad, domain).max_abs();
}

/// The gradient loop shared by both learners.  posterior(i) fills the
/// posterior term of iteration i; the prior term comes from persistent (or
/// fresh) prior chains.
template <class Posterior, class AfterUpdate>
LearningResult ascend(const GrfModel& model, const LearningSchedule& schedule, const Labelling* prior_init,
                      Posterior posterior, AfterUpdate after_update) {
  schedule.validate();
  LearningResult result{model, std::nullopt, {}};
  GrfModel& current = result.model;
  current.potentials = normalize_potentials(current.potentials);
  if (schedule.iterations == 0) {
    current.potentials = model.potentials;
    return result;
  }

  const SamplerConfig cfg = chain_config(schedule);
  constexpr std::uint64_t kPriorStream = 0x5052494f52ULL;
  std::optional<SamplerChain> prior;
  if (schedule.persistent_chains) {
    prior = init_chain(current, {}, nullptr, cfg, prior_init, kPriorStream);
    if (prior_init == nullptr) prior->run(schedule.burn_in);
  }

  const int first_averaged =
      schedule.averaging > 0.0
          ? std::max(0, static_cast<int>(std::floor(schedule.iterations * (1.0 - schedule.averaging))))
          : schedule.iterations;
  PotentialTable average(current.structure, current.labels.count);
  int averaged = 0;

  SufficientStatistics grad(current.structure, current.labels.count, StatisticsKind::Expectations);
  SufficientStatistics prior_stats(current.structure, current.labels.count, StatisticsKind::Counts);
  for (int it = 0; it < schedule.iterations; ++it) {
    posterior(it, current, grad);

    for (std::size_t i = 0; i < prior_stats.size(); ++i) std::fill(prior_stats.table(i).begin(), prior_stats.table(i).end(), 0.0);
    if (schedule.persistent_chains) {
      collect(*prior, schedule.samples_per_expectation, schedule.inner_sweeps, prior_stats, nullptr);
    } else {
      SamplerChain fresh = init_chain(current, {}, nullptr, cfg, nullptr,
                                      derive_seed(kPriorStream, static_cast<std::uint64_t>(it)));
      fresh.run(schedule.burn_in);
      collect(fresh, schedule.samples_per_expectation, schedule.inner_sweeps, prior_stats, nullptr);
    }
    grad.accumulate(prior_stats, -1.0 / schedule.samples_per_expectation);

    const double step = schedule.step(it, current.domain);
    result.trace.entries.push_back({it, step, grad.max_abs(), residual_of(grad, current.domain)});
    for (std::size_t i = 0; i < grad.size(); ++i) {
      auto u = current.potentials.table(i);
      const auto g = grad.table(i);
      for (std::size_t j = 0; j < u.size(); ++j) u[j] += step * g[j];
    }
    current.potentials = normalize_potentials(current.potentials);
    if (prior) prior->set_model(current);
    after_update(current);

    if (it >= first_averaged) {
      ++averaged;
      for (std::size_t i = 0; i < average.size(); ++i) {
        auto a = average.table(i);
        const auto u = current.potentials.table(i);
        for (std::size_t j = 0; j < a.size(); ++j) a[j] += (u[j] - a[j]) / averaged;
      }
    }
  }
  if (averaged > 0) current.potentials = normalize_potentials(average);
  return result;
}

}  // namespace

void LearningSchedule::validate() const {
  if (iterations < 0) throw Error(Errc::InvalidArgument, "iterations must be >= 0");
  if (samples_per_expectation < 1) throw Error(Errc::InvalidArgument, "samples_per_expectation must be >= 1");
  if (inner_sweeps < 1) throw Error(Errc::InvalidArgument, "inner_sweeps must be >= 1");
  if (burn_in < 0) throw Error(Errc::InvalidArgument, "burn_in must be >= 0");
  if (!(averaging >= 0.0 && averaging <= 1.0)) throw Error(Errc::InvalidArgument, "averaging must lie in [0,1]");
  if (!(appearance_step >= 0.0 && appearance_step <= 1.0))
    throw Error(Errc::InvalidArgument, "appearance_step must lie in [0,1]");
  if (!std::isfinite(step0) || !std::isfinite(tau)) throw Error(Errc::InvalidArgument, "step0 and tau must be finite");
  if (threads < 1) throw Error(Errc::InvalidArgument, "threads must be >= 1");
}

double LearningSchedule::step(int iteration, const GridDomain& domain) const {
  const double s0 = step0 > 0.0 ? step0 : 1.0 / static_cast<double>(domain.size());
  const double t = tau > 0.0 ? tau : std::max(1.0, iterations / 3.0);
  return s0 / (1.0 + iteration / t);
}

void write_trace(std::ostream& out, const LearningTrace& trace) {
  out << "# iteration step gradient_max residual\n";
  const auto old = out.precision(10);
  for (const auto& e : trace.entries)
    out << e.iteration << ' ' << e.step << ' ' << e.gradient_norm << ' ' << e.residual << '\n';
  out.precision(old);
}

SufficientStatistics gradient_estimate(const GrfModel& model, const TrainingEvent& event,
                                       const AppearanceModel* appearance, const SamplerConfig& config) {
  SamplerConfig post = config;
  post.chains = 1;
  SamplerConfig pri = post;
  pri.seed = derive_seed(config.seed, 1);
  SufficientStatistics g = estimate_statistics(model, event.evidence, appearance, post);
  g.accumulate(estimate_statistics(model, {}, nullptr, pri), -1.0);
  return g;
}

LearningResult learn_potentials(const GrfModel& model, std::span<const TrainingEvent> events,
                                const AppearanceModel* appearance, const LearningSchedule& schedule) {
  schedule.validate();
  check_events(model, events, appearance);
  if (events.empty()) throw Error(Errc::InvalidArgument, "learning needs at least one event");

  std::optional<AppearanceModel> app;
  if (appearance != nullptr) app = *appearance;
  const bool learn_app = app && schedule.appearance_step > 0.0;

  double weight_sum = 0.0;
  for (const auto& e : events) weight_sum += e.weight;

  const SamplerConfig cfg = chain_config(schedule);
  GrfModel start = model;
  start.potentials = normalize_potentials(model.potentials);
  std::vector<SamplerChain> chains;
  if (schedule.persistent_chains) {
    for (std::size_t e = 0; e < events.size(); ++e) {
      chains.push_back(init_chain(start, events[e].evidence, app ? &*app : nullptr, cfg, nullptr, e));
      chains.back().run(schedule.burn_in);
    }
  }

  std::vector<SufficientStatistics> parts(events.size(),
                                          SufficientStatistics(model.structure, model.labels.count));
  std::vector<std::vector<Labelling>> kept(events.size());

  auto posterior = [&](int it, const GrfModel& current, SufficientStatistics& grad) {
    for_each_index(events.size(), schedule.threads, [&](std::size_t e) {
      auto& acc = parts[e];
      for (std::size_t i = 0; i < acc.size(); ++i) std::fill(acc.table(i).begin(), acc.table(i).end(), 0.0);
      kept[e].clear();
      std::vector<Labelling>* keep = learn_app && events[e].evidence.image ? &kept[e] : nullptr;
      if (schedule.persistent_chains) {
        collect(chains[e], schedule.samples_per_expectation, schedule.inner_sweeps, acc, keep);
      } else {
        SamplerChain fresh = init_chain(current, events[e].evidence, app ? &*app : nullptr, cfg, nullptr,
                                        derive_seed(e, static_cast<std::uint64_t>(it)));
        fresh.run(schedule.burn_in);
        collect(fresh, schedule.samples_per_expectation, schedule.inner_sweeps, acc, keep);
      }
    });
    for (std::size_t i = 0; i < grad.size(); ++i) std::fill(grad.table(i).begin(), grad.table(i).end(), 0.0);
    for (std::size_t e = 0; e < events.size(); ++e)
      grad.accumulate(parts[e], events[e].weight / weight_sum / schedule.samples_per_expectation);

    if (learn_app) {
      std::vector<AppearanceData> data;
      for (std::size_t e = 0; e < events.size(); ++e)
        if (events[e].evidence.image) data.push_back({&*events[e].evidence.image, kept[e]});
      app = update_appearance(*app, data, schedule.appearance_step).model;
      for (std::size_t e = 0; e < chains.size(); ++e)
        if (events[e].evidence.image) chains[e].set_appearance(*app);
    }
  };
  auto after_update = [&](const GrfModel& current) {
    for (auto& c : chains) c.set_model(current);
  };

  const Labelling* prior_init = chains.empty() ? nullptr : &chains.front().labelling();
  LearningResult r = ascend(model, schedule, prior_init, posterior, after_update);
  r.appearance = app;
  return r;
}

LearningResult learn_from_statistics(const GrfModel& model, const SufficientStatistics& target,
                                     const LearningSchedule& schedule) {
  const SufficientStatistics fixed = as_expectations(model, target);
  auto posterior = [&](int, const GrfModel&, SufficientStatistics& grad) {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const auto src = fixed.table(i);
      std::copy(src.begin(), src.end(), grad.table(i).begin());
    }
  };
  return ascend(model, schedule, nullptr, posterior, [](const GrfModel&) {});
}

double moment_residual(const GrfModel& model, const SufficientStatistics& target, const SamplerConfig& config) {
  if (target.labels() != model.labels.count || !(target.structure() == model.structure))
    throw Error(Errc::IncompatibleStatistics, "target statistics are not indexed by the model's structure and labels");
  const SufficientStatistics est = estimate_statistics(model, {}, nullptr, config);
  const SufficientStatistics tf =
      target.kind() == StatisticsKind::Frequencies ? target : to_frequencies(target, model.domain);
  return to_frequencies(est, model.domain).max_abs_difference(tf);
}

AppearanceModel learn_appearance(const GrfModel& model, const AppearanceModel& init,
                                 std::span<const TrainingEvent> events, int iterations, double step,
                                 const SamplerConfig& config) {
  if (iterations < 0) throw Error(Errc::InvalidArgument, "iterations must be >= 0");
  check_events(model, events, &init);
  AppearanceModel app = init;
  std::vector<SamplerChain> chains;
  std::vector<std::size_t> image_events;
  for (std::size_t e = 0; e < events.size(); ++e) {
    if (!events[e].evidence.image) continue;
    image_events.push_back(e);
    chains.push_back(init_chain(model, events[e].evidence, &app, config, nullptr, e));
    chains.back().run(config.burn_in);
  }
  if (chains.empty()) throw Error(Errc::InvalidArgument, "appearance learning needs image events");
  std::vector<std::vector<Labelling>> kept(chains.size());
  for (int it = 0; it < iterations; ++it) {
    std::vector<AppearanceData> data;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      chains[c].run(config.thinning);
      kept[c].assign(1, chains[c].labelling());
      data.push_back({&*events[image_events[c]].evidence.image, kept[c]});
    }
    app = update_appearance(app, data, step).model;
    for (auto& c : chains) c.set_appearance(app);
  }
  return app;
}

}  // namespace grf
