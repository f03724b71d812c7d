#include "grf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace grf {
namespace {

struct Enumerator {
  const GrfModel& model;
  std::vector<std::size_t> free_nodes;
  Labelling y;
  std::vector<double> node_loglik;  // t*K + k, empty if no image

  Enumerator(const GrfModel& m, const Evidence& evidence, const AppearanceModel* appearance,
             const OracleOptions& options)
      : model(m), y(m.domain) {
    validate_evidence(evidence, m.domain, m.labels);
    if (evidence.image) {
      if (appearance == nullptr) throw Error(Errc::MissingAppearance, "image evidence requires an appearance model");
      if (appearance->labels() != m.labels.count)
        throw Error(Errc::DimensionMismatch, "appearance label count differs from model");
      node_loglik = likelihood_field(*appearance, *evidence.image).values;
    }
    for (std::size_t t = 0; t < m.domain.size(); ++t) {
      if (evidence.clamped(t))
        y.labels[t] = static_cast<Label>(evidence.clamps->labels[t]);
      else
        free_nodes.push_back(t);
    }
    double log_configs = static_cast<double>(free_nodes.size()) * std::log(static_cast<double>(m.labels.count));
    if (log_configs > std::log(static_cast<double>(options.max_configurations)) + 1e-9)
      throw Error(Errc::DomainTooLarge, std::to_string(m.labels.count) + "^" + std::to_string(free_nodes.size()) +
                                            " configurations exceed the enumeration cap");
  }

  double log_weight() const {
    double w = energy(model, y);
    if (!node_loglik.empty()) {
      const auto k = static_cast<std::size_t>(model.labels.count);
      for (std::size_t t = 0; t < y.labels.size(); ++t) w += node_loglik[t * k + y.labels[t]];
    }
    return w;
  }

  /// Visits every configuration of the free nodes (mixed-radix counter).
  template <class Fn>
  void for_each(Fn&& fn) {
    for (const std::size_t t : free_nodes) y.labels[t] = 0;
    const auto k = static_cast<Label>(model.labels.count);
    while (true) {
      fn(y);
      std::size_t i = 0;
      for (; i < free_nodes.size(); ++i) {
        Label& v = y.labels[free_nodes[i]];
        if (++v < k) break;
        v = 0;
      }
      if (i == free_nodes.size()) return;
    }
  }
};

/// Streaming log-domain accumulator: keeps sum exp(w - max) together with
/// weighted sums of feature vectors, rescaling whenever the max grows.
struct WeightedSum {
  double max = -std::numeric_limits<double>::infinity();
  double mass = 0.0;
  std::vector<double> acc;

  explicit WeightedSum(std::size_t features) : acc(features, 0.0) {}

  /// Returns the weight to apply to this configuration's features.
  double add(double w) {
    if (w > max) {
      const double rescale = std::isfinite(max) ? std::exp(max - w) : 0.0;
      mass *= rescale;
      for (double& a : acc) a *= rescale;
      max = w;
    }
    const double e = std::exp(w - max);
    mass += e;
    return e;
  }
  double log_total() const { return max + std::log(mass); }
};

SufficientStatistics expectation(const GrfModel& model, const Evidence& evidence,
                                 const AppearanceModel* appearance, const OracleOptions& options) {
  Enumerator en(model, evidence, appearance, options);
  std::size_t features = 0;
  std::vector<std::size_t> base;
  for (std::size_t i = 0; i < model.structure.size(); ++i) {
    base.push_back(features);
    features += i == 0 ? static_cast<std::size_t>(model.labels.count)
                       : static_cast<std::size_t>(model.labels.count) * static_cast<std::size_t>(model.labels.count);
  }
  WeightedSum sum(features);
  en.for_each([&](const Labelling& y) {
    const double e = sum.add(en.log_weight());
    const auto k = static_cast<std::size_t>(model.labels.count);
    for (const Label v : y.labels) sum.acc[v] += e;
    const auto pairwise = model.structure.pairwise();
    for (std::size_t i = 0; i < pairwise.size(); ++i) {
      const Offset a = pairwise[i];
      for (int yy = 0; yy < y.height; ++yy)
        for (int x = 0; x < y.width; ++x)
          if (model.domain.contains(x + a.dx, yy + a.dy))
            sum.acc[base[i + 1] + y.at(x, yy) * k + y.at(x + a.dx, yy + a.dy)] += e;
    }
  });
  SufficientStatistics out(model.structure, model.labels.count, StatisticsKind::Expectations);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto t = out.table(i);
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = sum.acc[base[i] + j] / sum.mass;
  }
  return out;
}

void check_compatible(const GrfModel& m1, const GrfModel& m2) {
  if (!(m1.domain == m2.domain) || m1.labels.count != m2.labels.count)
    throw Error(Errc::IncompatibleModels, "models differ in domain or label set");
}

}  // namespace

double log_partition_function(const GrfModel& model, const OracleOptions& options) {
  Enumerator en(model, {}, nullptr, options);
  WeightedSum sum(0);
  en.for_each([&](const Labelling&) { sum.add(en.log_weight()); });
  return sum.log_total();
}

MarginalField exact_marginals(const GrfModel& model, const Evidence& evidence, const AppearanceModel* appearance,
                              const OracleOptions& options) {
  Enumerator en(model, evidence, appearance, options);
  const auto k = static_cast<std::size_t>(model.labels.count);
  WeightedSum sum(model.domain.size() * k);
  en.for_each([&](const Labelling& y) {
    const double e = sum.add(en.log_weight());
    for (std::size_t t = 0; t < y.labels.size(); ++t) sum.acc[t * k + y.labels[t]] += e;
  });
  MarginalField field(model.domain.width, model.domain.height, model.labels.count);
  for (std::size_t i = 0; i < field.p.size(); ++i) field.p[i] = sum.acc[i] / sum.mass;
  return field;
}

SufficientStatistics exact_statistics_expectation(const GrfModel& model, const Evidence& evidence,
                                                  const AppearanceModel* appearance, const OracleOptions& options) {
  return expectation(model, evidence, appearance, options);
}

SufficientStatistics exact_loglik_gradient(const GrfModel& model, const Evidence& evidence,
                                           const AppearanceModel* appearance, const OracleOptions& options) {
  SufficientStatistics grad = expectation(model, evidence, appearance, options);
  grad.accumulate(expectation(model, {}, nullptr, options), -1.0);
  return grad;
}

double max_probability_difference(const GrfModel& m1, const GrfModel& m2, const OracleOptions& options) {
  check_compatible(m1, m2);
  const double z1 = log_partition_function(m1, options);
  const double z2 = log_partition_function(m2, options);
  Enumerator en(m1, {}, nullptr, options);
  double worst = 0.0;
  en.for_each([&](const Labelling& y) {
    const double p1 = std::exp(energy(m1, y) - z1);
    const double p2 = std::exp(energy(m2, y) - z2);
    worst = std::max(worst, std::abs(p1 - p2));
  });
  return worst;
}

bool distributions_equal(const GrfModel& m1, const GrfModel& m2, double tol, const OracleOptions& options) {
  return max_probability_difference(m1, m2, options) <= tol;
}

double modularity_defect(std::span<const double> table, int labels) {
  const auto k = static_cast<std::size_t>(labels);
  if (table.size() != k * k) throw Error(Errc::DimensionMismatch, "modularity_defect needs a square table");
  auto v = [&](std::size_t a, std::size_t b) { return table[a * k + b]; };
  double worst = 0.0;
  for (std::size_t k1 = 0; k1 < k; ++k1)
    for (std::size_t k2 = 0; k2 < k; ++k2)
      for (std::size_t l1 = 0; l1 < k; ++l1)
        for (std::size_t l2 = 0; l2 < k; ++l2)
          worst = std::max(worst, std::abs(v(k1, l1) + v(k2, l2) - v(k1, l2) - v(k2, l1)));
  return worst;
}

GaugeRank gauge_rank(const GridDomain& domain, const NeighborhoodStructure& structure) {
  const auto pairwise = structure.pairwise();
  const std::size_t dim = 2 * structure.size() - 1;

  std::set<std::vector<long long>> classes;
  for (int y = 0; y < domain.height; ++y)
    for (int x = 0; x < domain.width; ++x) {
      std::vector<long long> z(dim, 0);
      z[0] = 1;
      for (std::size_t i = 0; i < pairwise.size(); ++i) {
        const Offset a = pairwise[i];
        z[1 + 2 * i] = domain.contains(x + a.dx, y + a.dy) ? 1 : 0;
        z[2 + 2 * i] = domain.contains(x - a.dx, y - a.dy) ? 1 : 0;
      }
      classes.insert(std::move(z));
    }

  // Fraction-free integer elimination; rows are reduced by their gcd to keep
  // entries small.
  std::vector<std::vector<long long>> rows(classes.begin(), classes.end());
  int rank = 0;
  for (std::size_t col = 0; col < dim && static_cast<std::size_t>(rank) < rows.size(); ++col) {
    auto pivot = std::find_if(rows.begin() + rank, rows.end(), [&](const auto& r) { return r[col] != 0; });
    if (pivot == rows.end()) continue;
    std::swap(*pivot, rows[static_cast<std::size_t>(rank)]);
    const auto& p = rows[static_cast<std::size_t>(rank)];
    for (std::size_t r = static_cast<std::size_t>(rank) + 1; r < rows.size(); ++r) {
      if (rows[r][col] == 0) continue;
      const long long f = rows[r][col];
      long long g = 0;
      for (std::size_t c = 0; c < dim; ++c) {
        rows[r][c] = rows[r][c] * p[col] - f * p[c];
        g = std::gcd(g, std::llabs(rows[r][c]));
      }
      if (g > 1)
        for (auto& v : rows[r]) v /= g;
    }
    ++rank;
  }
  return {rank, static_cast<std::size_t>(rank) == dim};
}

}  // namespace grf
