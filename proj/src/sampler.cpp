#include "grf/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "grf/kernels.hpp"

namespace grf {

void SamplerConfig::validate() const {
  if (burn_in < 0) throw Error(Errc::InvalidArgument, "burn_in must be >= 0");
  if (n_samples < 1) throw Error(Errc::InvalidArgument, "n_samples must be >= 1");
  if (thinning < 1) throw Error(Errc::InvalidArgument, "thinning must be >= 1");
  if (chains < 1) throw Error(Errc::InvalidArgument, "chains must be >= 1");
  if (threads < 1) throw Error(Errc::InvalidArgument, "threads must be >= 1");
}

namespace {

void check_node(const GridDomain& d, int x, int y) {
  if (!d.contains(x, y))
    throw Error(Errc::OutOfDomain, "node (" + std::to_string(x) + "," + std::to_string(y) + ") outside " +
                                       std::to_string(d.width) + "x" + std::to_string(d.height));
}

void normalise_log(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double& x : v) s += (x = std::exp(x - m));
  for (double& x : v) x /= s;
}

void check_observation(const GrfModel& model, const Evidence& evidence, const AppearanceModel* appearance) {
  validate_evidence(evidence, model.domain, model.labels);
  if (evidence.image) {
    if (appearance == nullptr) throw Error(Errc::MissingAppearance, "image evidence requires an appearance model");
    if (appearance->labels() != model.labels.count)
      throw Error(Errc::DimensionMismatch, "appearance label count differs from model");
  }
}

}  // namespace

std::vector<double> site_conditional(const GrfModel& model, const Labelling& y, int x, int row,
                                     const Evidence& evidence, const AppearanceModel* appearance) {
  check_node(model.domain, x, row);
  validate_labelling(y, model.domain, model.labels);
  check_observation(model, evidence, appearance);
  const auto& u = model.potentials;
  const int k_count = model.labels.count;
  std::vector<double> logp(static_cast<std::size_t>(k_count));
  const auto pairwise = model.structure.pairwise();
  for (int k = 0; k < k_count; ++k) {
    double f = u.unary(k);
    for (std::size_t i = 0; i < pairwise.size(); ++i) {
      const Offset a = pairwise[i];
      if (model.domain.contains(x + a.dx, row + a.dy)) f += u.pair(i + 1, k, y.at(x + a.dx, row + a.dy));
      if (model.domain.contains(x - a.dx, row - a.dy)) f += u.pair(i + 1, y.at(x - a.dx, row - a.dy), k);
    }
    if (evidence.image) f += pixel_loglik(*appearance, k, evidence.image->pixel(model.domain.index(x, row)));
    logp[static_cast<std::size_t>(k)] = f;
  }
  normalise_log(logp);
  return logp;
}

namespace detail {

/// Potentials rearranged for the sweep: for each offset j and neighbour
/// label l, a padded row holding the contribution to every candidate label
/// of the current node.  fwd rows serve the neighbour t+a, bwd rows t-a.
struct ConditionalTables {
  int labels = 1;
  std::size_t width = 4;
  std::vector<double> unary;
  std::vector<double> rows;
  std::vector<Offset> offsets;
  std::vector<std::ptrdiff_t> delta;
  int reach_x = 0;
  int reach_y = 0;

  ConditionalTables(const GrfModel& model) : labels(model.labels.count), width(simd::padded_width(labels)) {
    const auto k = static_cast<std::size_t>(labels);
    unary.assign(width, 0.0);
    for (std::size_t j = 0; j < k; ++j) unary[j] = model.potentials.unary(static_cast<int>(j));
    const auto pairwise = model.structure.pairwise();
    rows.assign(pairwise.size() * 2 * k * width, 0.0);
    for (std::size_t j = 0; j < pairwise.size(); ++j) {
      const Offset a = pairwise[j];
      offsets.push_back(a);
      delta.push_back(static_cast<std::ptrdiff_t>(a.dy) * model.domain.width + a.dx);
      reach_x = std::max(reach_x, std::abs(a.dx));
      reach_y = std::max(reach_y, std::abs(a.dy));
      for (std::size_t nb = 0; nb < k; ++nb)
        for (std::size_t c = 0; c < k; ++c) {
          fwd_mut(j, nb)[c] = model.potentials.pair(j + 1, static_cast<int>(c), static_cast<int>(nb));
          bwd_mut(j, nb)[c] = model.potentials.pair(j + 1, static_cast<int>(nb), static_cast<int>(c));
        }
    }
  }

  const double* fwd(std::size_t j, Label nb) const { return rows.data() + ((2 * j) * static_cast<std::size_t>(labels) + nb) * width; }
  const double* bwd(std::size_t j, Label nb) const { return rows.data() + ((2 * j + 1) * static_cast<std::size_t>(labels) + nb) * width; }
  double* fwd_mut(std::size_t j, std::size_t nb) { return rows.data() + ((2 * j) * static_cast<std::size_t>(labels) + nb) * width; }
  double* bwd_mut(std::size_t j, std::size_t nb) { return rows.data() + ((2 * j + 1) * static_cast<std::size_t>(labels) + nb) * width; }
};

}  // namespace detail

SamplerChain::SamplerChain(SamplerChain&&) noexcept = default;
SamplerChain& SamplerChain::operator=(SamplerChain&&) noexcept = default;
SamplerChain::~SamplerChain() = default;

SamplerChain::SamplerChain(const SamplerChain& other)
    : domain_(other.domain_), labels_(other.labels_),
      tables_(other.tables_ ? std::make_unique<detail::ConditionalTables>(*other.tables_) : nullptr),
      image_(other.image_), loglik_(other.loglik_), free_nodes_(other.free_nodes_), labelling_(other.labelling_),
      sweeps_(other.sweeps_), rng_(other.rng_), scan_(other.scan_), field_(other.field_), rows_(other.rows_) {}

SamplerChain& SamplerChain::operator=(const SamplerChain& other) {
  if (this != &other) {
    SamplerChain copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void SamplerChain::set_model(const GrfModel& model) {
  if (!(model.domain == domain_) || model.labels.count != labels_)
    throw Error(Errc::IncompatibleModels, "chain domain or label set differs from the new model");
  tables_ = std::make_unique<detail::ConditionalTables>(model);
  rows_.resize(2 * tables_->offsets.size());
}

void SamplerChain::set_appearance(const AppearanceModel& appearance) {
  if (!image_) throw Error(Errc::InvalidArgument, "chain has no image evidence");
  if (appearance.labels() != labels_) throw Error(Errc::DimensionMismatch, "appearance label count differs");
  loglik_ = likelihood_field(appearance, *image_).values;
}

void SamplerChain::resample(std::size_t t) {
  const auto& tab = *tables_;
  const auto k = static_cast<std::size_t>(labels_);
  const int w = domain_.width;
  const int x = static_cast<int>(t % static_cast<std::size_t>(w));
  const int y = static_cast<int>(t / static_cast<std::size_t>(w));

  std::copy(tab.unary.begin(), tab.unary.end(), field_.begin());
  if (!loglik_.empty())
    for (std::size_t j = 0; j < k; ++j) field_[j] += loglik_[t * k + j];

  const Label* lab = labelling_.labels.data();
  std::size_t n = 0;
  const std::size_t n_off = tab.offsets.size();
  if (x >= tab.reach_x && x < w - tab.reach_x && y >= tab.reach_y && y < domain_.height - tab.reach_y) {
    const auto ti = static_cast<std::ptrdiff_t>(t);
    for (std::size_t j = 0; j < n_off; ++j) {
      rows_[n++] = tab.fwd(j, lab[ti + tab.delta[j]]);
      rows_[n++] = tab.bwd(j, lab[ti - tab.delta[j]]);
    }
  } else {
    for (std::size_t j = 0; j < n_off; ++j) {
      const Offset a = tab.offsets[j];
      if (domain_.contains(x + a.dx, y + a.dy)) rows_[n++] = tab.fwd(j, labelling_.at(x + a.dx, y + a.dy));
      if (domain_.contains(x - a.dx, y - a.dy)) rows_[n++] = tab.bwd(j, labelling_.at(x - a.dx, y - a.dy));
    }
  }
  simd::kernels().accumulate_rows(rows_.data(), n, tab.width, field_.data());

  double m = field_[0];
  for (std::size_t j = 1; j < k; ++j) m = std::max(m, field_[j]);
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) total += (field_[j] = std::exp(field_[j] - m));
  const double u = rng_.uniform() * total;
  double cum = 0.0;
  std::size_t pick = k - 1;
  for (std::size_t j = 0; j < k; ++j) {
    cum += field_[j];
    if (u < cum) {
      pick = j;
      break;
    }
  }
  labelling_.labels[t] = static_cast<Label>(pick);
}

void SamplerChain::sweep() {
  if (scan_ == ScanMode::Raster) {
    for (const std::size_t t : free_nodes_) resample(t);
  } else if (!free_nodes_.empty()) {
    const std::size_t n = free_nodes_.size();
    for (std::size_t i = 0; i < n; ++i) resample(free_nodes_[rng_.below(n)]);
  }
  ++sweeps_;
}

void SamplerChain::run(int sweeps) {
  for (int i = 0; i < sweeps; ++i) sweep();
}

SamplerChain init_chain(const GrfModel& model, const Evidence& evidence, const AppearanceModel* appearance,
                        const SamplerConfig& config, const Labelling* init, std::uint64_t stream) {
  config.validate();
  check_observation(model, evidence, appearance);
  SamplerChain chain;
  chain.domain_ = model.domain;
  chain.labels_ = model.labels.count;
  chain.scan_ = config.scan;
  chain.rng_ = Rng(derive_seed(config.seed, stream));
  chain.set_model(model);
  chain.field_.assign(chain.tables_->width, 0.0);
  if (evidence.image) {
    chain.image_ = evidence.image;
    chain.set_appearance(*appearance);
  }
  for (std::size_t t = 0; t < model.domain.size(); ++t)
    if (!evidence.clamped(t)) chain.free_nodes_.push_back(t);

  if (init != nullptr) {
    validate_labelling(*init, model.domain, model.labels);
    if (evidence.clamps)
      for (std::size_t t = 0; t < init->labels.size(); ++t)
        if (evidence.clamped(t) && init->labels[t] != evidence.clamps->labels[t])
          throw Error(Errc::ClampConflict, "initial labelling disagrees with clamp at node " + std::to_string(t));
    chain.labelling_ = *init;
  } else {
    chain.labelling_ = Labelling(model.domain);
    for (std::size_t t = 0; t < model.domain.size(); ++t)
      chain.labelling_.labels[t] =
          evidence.clamped(t) ? static_cast<Label>(evidence.clamps->labels[t])
                              : static_cast<Label>(chain.rng_.below(static_cast<std::uint64_t>(model.labels.count)));
  }
  return chain;
}

std::vector<Labelling> sample(SamplerChain& chain, const SamplerConfig& config) {
  config.validate();
  chain.run(config.burn_in);
  std::vector<Labelling> out;
  out.reserve(static_cast<std::size_t>(config.n_samples));
  for (int i = 0; i < config.n_samples; ++i) {
    chain.run(config.thinning);
    out.push_back(chain.labelling());
  }
  return out;
}

namespace {

/// Runs config.chains chains (optionally on worker threads) and feeds each
/// retained sample to a per-chain accumulator; accumulators are merged in
/// chain order so the result does not depend on the thread count.
template <class Acc, class Visit, class Merge>
Acc pooled(const GrfModel& model, const Evidence& evidence, const AppearanceModel* appearance,
           const SamplerConfig& config, const Acc& zero, Visit visit, Merge merge) {
  config.validate();
  check_observation(model, evidence, appearance);
  std::vector<Acc> parts(static_cast<std::size_t>(config.chains), zero);
  auto run_chain = [&](std::size_t c) {
    SamplerChain chain = init_chain(model, evidence, appearance, config, nullptr, c);
    chain.run(config.burn_in);
    for (int i = 0; i < config.n_samples; ++i) {
      chain.run(config.thinning);
      visit(parts[c], chain.labelling());
    }
  };
  const auto workers = static_cast<std::size_t>(std::min(config.threads, config.chains));
  if (workers <= 1) {
    for (std::size_t c = 0; c < parts.size(); ++c) run_chain(c);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < parts.size(); c += workers) run_chain(c);
      });
  }
  Acc total = zero;
  for (const auto& p : parts) merge(total, p);
  return total;
}

}  // namespace

MarginalField estimate_marginals(const GrfModel& model, const Evidence& evidence, const AppearanceModel* appearance,
                                 const SamplerConfig& config) {
  const auto k = static_cast<std::size_t>(model.labels.count);
  using Counts = std::vector<std::uint64_t>;
  const Counts counts = pooled(
      model, evidence, appearance, config, Counts(model.domain.size() * k, 0),
      [k](Counts& acc, const Labelling& y) {
        for (std::size_t t = 0; t < y.labels.size(); ++t) ++acc[t * k + y.labels[t]];
      },
      [](Counts& total, const Counts& part) {
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += part[i];
      });
  MarginalField field(model.domain.width, model.domain.height, model.labels.count);
  const double n = static_cast<double>(config.n_samples) * static_cast<double>(config.chains);
  for (std::size_t i = 0; i < counts.size(); ++i) field.p[i] = static_cast<double>(counts[i]) / n;
  return field;
}

SufficientStatistics estimate_statistics(const GrfModel& model, const NeighborhoodStructure& offsets,
                                         const Evidence& evidence, const AppearanceModel* appearance,
                                         const SamplerConfig& config) {
  const GridDomain domain = model.domain;
  SufficientStatistics stats = pooled(
      model, evidence, appearance, config,
      SufficientStatistics(offsets, model.labels.count, StatisticsKind::Counts),
      [&domain](SufficientStatistics& acc, const Labelling& y) { add_counts(domain, y, acc); },
      [](SufficientStatistics& total, const SufficientStatistics& part) { total.accumulate(part, 1.0); });
  stats.scale(1.0 / (static_cast<double>(config.n_samples) * static_cast<double>(config.chains)));
  stats.set_kind(StatisticsKind::Expectations);
  return stats;
}

SufficientStatistics estimate_statistics(const GrfModel& model, const Evidence& evidence,
                                         const AppearanceModel* appearance, const SamplerConfig& config) {
  return estimate_statistics(model, model.structure, evidence, appearance, config);
}

}  // namespace grf
