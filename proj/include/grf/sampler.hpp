#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "grf/appearance.hpp"
#include "grf/fields.hpp"
#include "grf/grid_model.hpp"
#include "grf/rng.hpp"

namespace grf {

enum class ScanMode { Raster, RandomSite };

struct SamplerConfig {
  int burn_in = 1000;
  int n_samples = 1;
  int thinning = 1;
  std::uint64_t seed = 0;
  ScanMode scan = ScanMode::Raster;
  /// Independent chains pooled by the estimate_* functions.
  int chains = 1;
  /// Upper bound on worker threads; results do not depend on it.
  int threads = 1;

  void validate() const;
};

/// Exact full conditional p(y_t = k | y_rest, x) of one node, normalised.
std::vector<double> site_conditional(const GrfModel& model, const Labelling& y, int x, int row,
                                     const Evidence& evidence = {}, const AppearanceModel* appearance = nullptr);

namespace detail {
struct ConditionalTables;
}

/// Single-site Gibbs sampler state.  Owns copies of everything it reads, so
/// it stays valid when the model it was created from changes.
class SamplerChain {
 public:
  SamplerChain(SamplerChain&&) noexcept;
  SamplerChain& operator=(SamplerChain&&) noexcept;
  SamplerChain(const SamplerChain&);
  SamplerChain& operator=(const SamplerChain&);
  ~SamplerChain();

  const Labelling& labelling() const noexcept { return labelling_; }
  std::uint64_t sweep_count() const noexcept { return sweeps_; }
  bool frozen() const noexcept { return free_nodes_.empty(); }
  const GridDomain& domain() const noexcept { return domain_; }

  /// Resamples every free node once (scan order per config).
  void sweep();
  void run(int sweeps);

  /// Swap in new potentials (same domain, labels); the labelling is kept.
  void set_model(const GrfModel& model);
  /// Recompute the image likelihood field; requires image evidence.
  void set_appearance(const AppearanceModel& appearance);

 private:
  friend SamplerChain init_chain(const GrfModel&, const Evidence&, const AppearanceModel*, const SamplerConfig&,
                                 const Labelling*, std::uint64_t);
  SamplerChain() = default;

  void resample(std::size_t t);

  GridDomain domain_;
  int labels_ = 1;
  std::unique_ptr<detail::ConditionalTables> tables_;
  std::optional<Image> image_;
  std::vector<double> loglik_;  // t*K + k, empty without image
  std::vector<std::size_t> free_nodes_;
  Labelling labelling_;
  std::uint64_t sweeps_ = 0;
  Rng rng_;
  ScanMode scan_ = ScanMode::Raster;
  std::vector<double> field_;
  std::vector<const double*> rows_;
};

/// Chain with labelling = init (which must agree with the clamps), or clamps
/// filled and free nodes drawn uniformly.  The stream is derived from
/// (config.seed, stream).
SamplerChain init_chain(const GrfModel& model, const Evidence& evidence = {},
                        const AppearanceModel* appearance = nullptr, const SamplerConfig& config = {},
                        const Labelling* init = nullptr, std::uint64_t stream = 0);

/// burn_in sweeps, then n_samples labellings each thinning sweeps apart.
std::vector<Labelling> sample(SamplerChain& chain, const SamplerConfig& config);

/// Label frequencies per node over the retained samples of config.chains
/// independent chains.
MarginalField estimate_marginals(const GrfModel& model, const Evidence& evidence = {},
                                 const AppearanceModel* appearance = nullptr, const SamplerConfig& config = {});

/// Average count statistics over the retained samples (kind Expectations).
SufficientStatistics estimate_statistics(const GrfModel& model, const Evidence& evidence = {},
                                         const AppearanceModel* appearance = nullptr,
                                         const SamplerConfig& config = {});

/// Same, for an arbitrary offset set evaluated on the samples of the model.
SufficientStatistics estimate_statistics(const GrfModel& model, const NeighborhoodStructure& offsets,
                                         const Evidence& evidence, const AppearanceModel* appearance,
                                         const SamplerConfig& config);

}  // namespace grf
