#pragma once

// Brute-force enumeration over all labellings of tiny domains.  Independent
// of the sampler: every quantity is computed from the joint distribution.

#include <cstdint>
#include <span>

#include "grf/appearance.hpp"
#include "grf/fields.hpp"
#include "grf/grid_model.hpp"

namespace grf {

struct OracleOptions {
  std::uint64_t max_configurations = std::uint64_t{1} << 24;
};

/// log Z = log sum_y exp(energy(y)).
double log_partition_function(const GrfModel& model, const OracleOptions& options = {});

/// Exact posterior marginals (prior marginals for empty evidence).  An image
/// in the evidence requires an appearance model.
MarginalField exact_marginals(const GrfModel& model, const Evidence& evidence = {},
                              const AppearanceModel* appearance = nullptr,
                              const OracleOptions& options = {});

/// E[n_a(k,k')] under the posterior (prior for empty evidence).
SufficientStatistics exact_statistics_expectation(const GrfModel& model, const Evidence& evidence = {},
                                                  const AppearanceModel* appearance = nullptr,
                                                  const OracleOptions& options = {});

/// dL/du = E_posterior[n] - E_prior[n].
SufficientStatistics exact_loglik_gradient(const GrfModel& model, const Evidence& evidence,
                                           const AppearanceModel* appearance = nullptr,
                                           const OracleOptions& options = {});

/// max_y |p1(y) - p2(y)|.
double max_probability_difference(const GrfModel& m1, const GrfModel& m2, const OracleOptions& options = {});

bool distributions_equal(const GrfModel& m1, const GrfModel& m2, double tol, const OracleOptions& options = {});

/// max |v(k1,k1') + v(k2,k2') - v(k1,k2') - v(k2,k1')| over all label
/// quadruples; zero iff v(k,k') = f(k) + g(k').
double modularity_defect(std::span<const double> table, int labels);

struct GaugeRank {
  int rank = 0;
  bool identifiable = false;
};

/// Rank of the boundary-class vectors z(t) (dimension 2|A|-1) and whether
/// they span the whole space.
GaugeRank gauge_rank(const GridDomain& domain, const NeighborhoodStructure& structure);

}  // namespace grf
