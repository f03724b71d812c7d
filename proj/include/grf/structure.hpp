#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "grf/learning.hpp"

namespace grf {

/// Offsets with |dx|,|dy| <= d, one representative per {a, -a} (dy > 0, or
/// dy == 0 and dx > 0), zero excluded.  ((2d+1)^2 - 1) / 2 of them.
struct CandidateRange {
  int d = 1;

  explicit CandidateRange(int d_);
  std::size_t size() const noexcept { return static_cast<std::size_t>(((2 * d + 1) * (2 * d + 1) - 1) / 2); }
  std::vector<Offset> offsets() const;
};

/// Representative of {a, -a} used by CandidateRange.
Offset canonical_offset(Offset a) noexcept;

enum class ScoreMetric { Euclidean, KullbackLeibler };

struct StructureStep {
  bool added = false;
  Offset offset;
  /// Growth: candidate score.  Shrinkage: Frobenius norm of the removed table.
  double score = 0.0;
  /// Mean moment residual over the last tenth of the learning run that
  /// preceded the step.
  double proxy = 0.0;
};

struct StructureTrace {
  std::vector<StructureStep> steps;
};

void write_structure_trace(std::ostream& out, const StructureTrace& trace);

struct StructureOptions {
  /// Budget per search step; the final structure is refit with final_fit.
  LearningSchedule search;
  LearningSchedule final_fit;
  ScoreMetric metric = ScoreMetric::Euclidean;
  /// Chains used to score growth candidates.
  SamplerConfig scoring;

  StructureOptions();
};

struct StructureResult {
  GrfModel model;
  std::optional<AppearanceModel> appearance;
  StructureTrace trace;
};

/// Posterior/prior discrepancy of each candidate under the current model,
/// estimated from samples (candidates carry zero potential).
std::vector<std::pair<Offset, double>> candidate_scores(const GrfModel& model, std::span<const TrainingEvent> events,
                                                        const AppearanceModel* appearance,
                                                        const std::vector<Offset>& candidates, ScoreMetric metric,
                                                        const SamplerConfig& config);

/// Score between two statistics tables over the same offsets, one value per
/// pairwise offset.
std::vector<double> discrepancy(const SufficientStatistics& posterior, const SufficientStatistics& prior,
                                const GridDomain& domain, ScoreMetric metric);

/// Same potentials on another structure: shared offsets keep their tables,
/// new offsets start at zero.
GrfModel restructure(const GrfModel& model, const NeighborhoodStructure& structure);

/// Greedy growth from {0} until the structure has target_size nonzero offsets.
StructureResult grow_structure(std::span<const TrainingEvent> events, const LabelSet& labels,
                               const GridDomain& domain, const CandidateRange& range, int target_size,
                               const AppearanceModel* appearance, const StructureOptions& options);

/// Greedy removal of the smallest-norm offset, starting from the full range.
StructureResult shrink_structure(std::span<const TrainingEvent> events, const LabelSet& labels,
                                 const GridDomain& domain, const CandidateRange& range, int target_size,
                                 const AppearanceModel* appearance, const StructureOptions& options);

/// Counts how often each offset appears in a set of recovered structures.
class OffsetHistogram {
 public:
  void add(const NeighborhoodStructure& structure);
  void add(std::span<const Offset> offsets);
  int runs() const noexcept { return runs_; }
  int count(Offset a) const;
  /// Offsets by decreasing count, ties by (dy, dx).
  std::vector<std::pair<Offset, int>> ranked() const;
  void write(std::ostream& out) const;

 private:
  struct Less {
    bool operator()(Offset a, Offset b) const noexcept { return offset_less(a, b); }
  };
  std::map<Offset, int, Less> counts_;
  int runs_ = 0;
};

}  // namespace grf
