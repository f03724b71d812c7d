#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "grf/appearance.hpp"
#include "grf/fields.hpp"
#include "grf/grid_model.hpp"
#include "grf/sampler.hpp"

namespace grf {

/// Stochastic gradient ascent settings.  step_i = step0 / (1 + i / tau).
struct LearningSchedule {
  int iterations = 1000;
  /// <= 0 selects 1 / (W*H).
  double step0 = 0.0;
  /// <= 0 selects iterations / 3.
  double tau = 0.0;
  int samples_per_expectation = 1;
  /// Sweeps between retained samples.
  int inner_sweeps = 2;
  bool persistent_chains = true;
  /// Sweeps run on fresh chains before their first sample.
  int burn_in = 100;
  /// Fraction of final iterations whose iterates are averaged into the
  /// returned potentials; 0 returns the last iterate.
  double averaging = 0.0;
  /// Blend factor for one appearance update per iteration; 0 keeps it fixed.
  double appearance_step = 0.0;
  std::uint64_t seed = 0;
  ScanMode scan = ScanMode::Raster;
  int threads = 1;

  void validate() const;
  double step(int iteration, const GridDomain& domain) const;
};

/// An observation B = (x, y_V) with a relative weight.
struct TrainingEvent {
  Evidence evidence;
  double weight = 1.0;
};

struct TraceEntry {
  int iteration = 0;
  double step = 0.0;
  /// max |Phi_post - Phi_prior| in counts.
  double gradient_norm = 0.0;
  /// Same difference divided by the edge counts.
  double residual = 0.0;
};

struct LearningTrace {
  std::vector<TraceEntry> entries;
};

void write_trace(std::ostream& out, const LearningTrace& trace);

struct LearningResult {
  GrfModel model;
  std::optional<AppearanceModel> appearance;
  LearningTrace trace;
};

/// One-shot estimate of Phi_post - Phi_prior from fresh chains: each term
/// averages config.n_samples retained samples.
SufficientStatistics gradient_estimate(const GrfModel& model, const TrainingEvent& event,
                                       const AppearanceModel* appearance, const SamplerConfig& config);

/// Maximum-likelihood potentials for the events.  Events without an image or
/// clamps are rejected; image events need an appearance model.
LearningResult learn_potentials(const GrfModel& model, std::span<const TrainingEvent> events,
                                const AppearanceModel* appearance, const LearningSchedule& schedule);

/// Same loop with the posterior term fixed to target (expectations or
/// frequencies over the model's structure and labels).
LearningResult learn_from_statistics(const GrfModel& model, const SufficientStatistics& target,
                                     const LearningSchedule& schedule);

/// max |freq(prior estimate) - freq(target)| over the target's offsets.
double moment_residual(const GrfModel& model, const SufficientStatistics& target, const SamplerConfig& config);

/// Unsupervised appearance estimation under a fixed prior: alternate one
/// posterior sample per image with one appearance update.
AppearanceModel learn_appearance(const GrfModel& model, const AppearanceModel& init,
                                 std::span<const TrainingEvent> events, int iterations, double step,
                                 const SamplerConfig& config);

}  // namespace grf
