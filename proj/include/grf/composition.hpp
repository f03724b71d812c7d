#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grf/appearance.hpp"
#include "grf/learning.hpp"

namespace grf {

/// Disjoint union of component label sets sharing one background label.
/// Joint label 0 is the background; the parts of component i follow those of
/// components 0..i-1 in their original order.
struct LabelMapping {
  int joint_labels = 1;
  /// joint_of[i][k]: joint label of label k of component i.
  std::vector<std::vector<int>> joint_of;
  std::vector<int> backgrounds;

  static LabelMapping disjoint_union(const std::vector<int>& label_counts, const std::vector<int>& backgrounds = {});

  std::size_t components() const noexcept { return joint_of.size(); }
  /// Component owning a joint label, or -1 for the background.
  int component_of(int joint_label) const;
  /// Joint label names "c<i>:<name>" (background keeps its first name).
  std::vector<std::string> joint_names(const std::vector<LabelSet>& components) const;
};

struct MixtureWeights {
  double w0 = 0.0;
  double w1 = 0.5;
  double w2 = 0.5;

  /// w1 = w2 = (1 - eps) / 2, w0 = eps / K^2.
  static MixtureWeights defaults(int joint_labels, double eps = 0.02);
  void validate() const;
  /// Set when the weights leave the intended regime w0 << w1 ~ w2.
  std::optional<std::string> warning() const;
};

/// Re-indexes per-offset frequencies of component i over the joint labels;
/// entries involving labels of other components are zero.
SufficientStatistics extend_statistics(const SufficientStatistics& stats, const LabelMapping& mapping,
                                       std::size_t component, const GridDomain& domain);

/// normalize(w1 * ext1 + w2 * ext2 + w0) per offset: within-class blocks get
/// w_i * ext_i + w0, background pairs both terms plus w0, cross-class pairs
/// w0 alone.  Result kind is Frequencies.
SufficientStatistics mix_statistics(const SufficientStatistics& ext1, const SufficientStatistics& ext2,
                                    const MixtureWeights& w);

/// Appearance of the joint label set; the background mixes both components'
/// background mixtures with equal weight.
AppearanceModel compose_appearance(const AppearanceModel& a1, const AppearanceModel& a2, const LabelMapping& mapping);

struct ComposeOptions {
  LearningSchedule schedule;
  /// Start from the component potentials, with cross-class pairs set below
  /// every within-class entry; otherwise start from zero.
  bool warm_start = true;
  /// Chains estimating the prior statistics of offsets a component lacks.
  SamplerConfig missing;
};

struct ComposeResult {
  GrfModel model;
  LabelMapping mapping;
  SufficientStatistics target;
  std::vector<std::string> warnings;
};

/// Joint model of two component models learned from their (posterior)
/// statistics.  Both models must live on the same domain; differing
/// structures are united.
ComposeResult compose_models(const GrfModel& m1, const SufficientStatistics& stats1, const GrfModel& m2,
                             const SufficientStatistics& stats2, const MixtureWeights& w,
                             const ComposeOptions& options);

}  // namespace grf
