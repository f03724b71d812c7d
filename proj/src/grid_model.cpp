#include "grf/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "grf/kernels.hpp"

namespace grf {

std::string to_string(Offset a) {
  return "(" + std::to_string(a.dx) + "," + std::to_string(a.dy) + ")";
}

NeighborhoodStructure::NeighborhoodStructure(const std::vector<Offset>& offsets) {
  offsets_.push_back(Offset{});
  for (const Offset a : offsets) {
    if (a.is_zero()) continue;
    if (std::find(offsets_.begin(), offsets_.end(), a) != offsets_.end())
      throw Error(Errc::DuplicateOffset, "offset " + to_string(a) + " listed twice");
    if (std::find(offsets_.begin(), offsets_.end(), -a) != offsets_.end())
      throw Error(Errc::OppositeOffsetPresent,
                  "offsets " + to_string(a) + " and " + to_string(-a) + " would create double edges");
    offsets_.push_back(a);
  }
  if (std::count(offsets.begin(), offsets.end(), Offset{}) > 1)
    throw Error(Errc::DuplicateOffset, "zero offset listed twice");
}

std::optional<std::size_t> NeighborhoodStructure::index_of(Offset a) const noexcept {
  const auto it = std::find(offsets_.begin(), offsets_.end(), a);
  if (it == offsets_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - offsets_.begin());
}

bool NeighborhoodStructure::conflicts_with(Offset a) const noexcept {
  return contains(a) || contains(-a);
}

NeighborhoodStructure NeighborhoodStructure::with(Offset a) const {
  std::vector<Offset> next(offsets_.begin(), offsets_.end());
  next.push_back(a);
  return NeighborhoodStructure(next);
}

NeighborhoodStructure NeighborhoodStructure::without(Offset a) const {
  if (a.is_zero()) throw Error(Errc::InvalidArgument, "the zero offset cannot be removed");
  if (!contains(a)) throw Error(Errc::UnknownOffset, "offset " + to_string(a) + " not in structure");
  std::vector<Offset> next;
  for (const Offset b : offsets_)
    if (b != a) next.push_back(b);
  return NeighborhoodStructure(next);
}

int NeighborhoodStructure::reach() const noexcept {
  int r = 0;
  for (const Offset a : offsets_) r = std::max({r, std::abs(a.dx), std::abs(a.dy)});
  return r;
}

LabelSet::LabelSet(int n, std::vector<std::string> label_names)
    : count(n), names(std::move(label_names)) {
  if (n < 1 || n > kMaxLabels)
    throw Error(Errc::InvalidArgument, "label count must be in 1.." + std::to_string(kMaxLabels));
  if (!names.empty() && static_cast<int>(names.size()) != n)
    throw Error(Errc::DimensionMismatch, "label names do not match label count");
}

GridDomain::GridDomain(int w, int h) : width(w), height(h) {
  if (w < 1 || h < 1) throw Error(Errc::InvalidArgument, "grid dimensions must be positive");
}

std::size_t edge_count(const GridDomain& domain, Offset a) noexcept {
  const int w = std::max(0, domain.width - std::abs(a.dx));
  const int h = std::max(0, domain.height - std::abs(a.dy));
  return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
}

OffsetTables::OffsetTables(NeighborhoodStructure structure, int labels)
    : structure_(std::move(structure)), labels_(labels) {
  if (labels < 1 || labels > kMaxLabels)
    throw Error(Errc::InvalidArgument, "label count out of range");
  const auto k = static_cast<std::size_t>(labels);
  tables_.reserve(structure_.size());
  tables_.emplace_back(k, 0.0);
  for (std::size_t i = 1; i < structure_.size(); ++i) tables_.emplace_back(k * k, 0.0);
}

void OffsetTables::set_table(std::size_t i, std::vector<double> values) {
  const auto k = static_cast<std::size_t>(labels_);
  const std::size_t expected = i == 0 ? k : k * k;
  if (i >= tables_.size()) throw Error(Errc::UnknownOffset, "table index out of range");
  if (values.size() != expected)
    throw Error(Errc::DimensionMismatch, "table " + std::to_string(i) + " has " +
                                             std::to_string(values.size()) + " entries, expected " +
                                             std::to_string(expected));
  tables_[i] = std::move(values);
}

double OffsetTables::max_abs_difference(const OffsetTables& other) const {
  if (!same_shape(other)) throw Error(Errc::DimensionMismatch, "tables differ in shape");
  double d = 0.0;
  for (std::size_t i = 0; i < tables_.size(); ++i)
    for (std::size_t j = 0; j < tables_[i].size(); ++j)
      d = std::max(d, std::abs(tables_[i][j] - other.tables_[i][j]));
  return d;
}

void SufficientStatistics::accumulate(const SufficientStatistics& other, double factor) {
  if (!same_shape(other)) throw Error(Errc::IncompatibleStatistics, "statistics differ in shape");
  for (std::size_t i = 0; i < tables_.size(); ++i)
    for (std::size_t j = 0; j < tables_[i].size(); ++j) tables_[i][j] += factor * other.tables_[i][j];
}

void SufficientStatistics::scale(double factor) {
  for (auto& t : tables_)
    for (double& v : t) v *= factor;
}

double SufficientStatistics::total(std::size_t i) const {
  const auto t = table(i);
  return std::accumulate(t.begin(), t.end(), 0.0);
}

double SufficientStatistics::max_abs() const {
  double m = 0.0;
  for (const auto& t : tables_)
    for (const double v : t) m = std::max(m, std::abs(v));
  return m;
}

void validate_labelling(const Labelling& y, const GridDomain& domain, const LabelSet& labels) {
  if (y.width != domain.width || y.height != domain.height || y.labels.size() != domain.size())
    throw Error(Errc::DimensionMismatch, "labelling is " + std::to_string(y.width) + "x" +
                                             std::to_string(y.height) + ", domain is " +
                                             std::to_string(domain.width) + "x" +
                                             std::to_string(domain.height));
  for (const Label k : y.labels)
    if (!labels.valid(k)) throw Error(Errc::InvalidLabel, "label " + std::to_string(k) + " out of range");
}

GrfModel GrfModel::on_domain(const GridDomain& d) const {
  GrfModel m = *this;
  m.domain = d;
  return m;
}

GrfModel build_model(const GridDomain& domain, const LabelSet& labels,
                     const NeighborhoodStructure& structure, const PotentialTable& potentials) {
  if (potentials.labels() != labels.count)
    throw Error(Errc::DimensionMismatch, "potential tables are sized for " +
                                             std::to_string(potentials.labels()) + " labels, model has " +
                                             std::to_string(labels.count));
  if (!(potentials.structure() == structure))
    throw Error(Errc::DimensionMismatch, "potential tables are not indexed by the model structure");
  return GrfModel{domain, labels, structure, potentials};
}

GrfModel zero_model(const GridDomain& domain, const LabelSet& labels,
                    const NeighborhoodStructure& structure) {
  return build_model(domain, labels, structure, PotentialTable(structure, labels.count));
}

double energy(const GrfModel& model, const Labelling& y) {
  validate_labelling(y, model.domain, model.labels);
  const auto& u = model.potentials;
  double e = 0.0;
  for (const Label k : y.labels) e += u.unary(k);
  const auto pairwise = model.structure.pairwise();
  for (std::size_t i = 0; i < pairwise.size(); ++i) {
    const Offset a = pairwise[i];
    for (int yy = 0; yy < y.height; ++yy)
      for (int x = 0; x < y.width; ++x) {
        if (!model.domain.contains(x + a.dx, yy + a.dy)) continue;
        e += u.pair(i + 1, y.at(x, yy), y.at(x + a.dx, yy + a.dy));
      }
  }
  return e;
}

void add_counts(const GridDomain& domain, const Labelling& y, SufficientStatistics& into) {
  const auto& kern = simd::kernels();
  const int k = into.labels();
  const auto k2 = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  std::vector<std::uint64_t> hist(std::max<std::size_t>(k2, 1));

  std::fill(hist.begin(), hist.end(), 0);
  kern.label_histogram(y.labels.data(), y.labels.size(), k, hist.data());
  auto unary = into.table(0);
  for (int j = 0; j < k; ++j) unary[static_cast<std::size_t>(j)] += static_cast<double>(hist[static_cast<std::size_t>(j)]);

  const auto pairwise = into.structure().pairwise();
  for (std::size_t i = 0; i < pairwise.size(); ++i) {
    const Offset a = pairwise[i];
    const int x0 = std::max(0, -a.dx);
    const int x1 = std::min(domain.width, domain.width - a.dx);
    const int y0 = std::max(0, -a.dy);
    const int y1 = std::min(domain.height, domain.height - a.dy);
    std::fill(hist.begin(), hist.end(), 0);
    if (x1 > x0) {
      const auto n = static_cast<std::size_t>(x1 - x0);
      for (int yy = y0; yy < y1; ++yy)
        kern.pair_histogram(&y.labels[domain.index(x0, yy)],
                            &y.labels[domain.index(x0 + a.dx, yy + a.dy)], n, k, hist.data());
    }
    auto t = into.table(i + 1);
    for (std::size_t j = 0; j < k2; ++j) t[j] += static_cast<double>(hist[j]);
  }
}

SufficientStatistics count_statistics(const GridDomain& domain, const NeighborhoodStructure& structure,
                                      const LabelSet& labels, const Labelling& y) {
  validate_labelling(y, domain, labels);
  SufficientStatistics stats(structure, labels.count, StatisticsKind::Counts);
  add_counts(domain, y, stats);
  return stats;
}

PotentialTable normalize_potentials(const PotentialTable& potentials) {
  PotentialTable out = potentials;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto t = out.table(i);
    const double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
    for (double& v : t) v -= mean;
  }
  return out;
}

PotentialTable add_gauge_constants(const PotentialTable& potentials,
                                   const std::map<std::pair<int, int>, double>& constants) {
  PotentialTable out = potentials;
  for (const auto& [key, c] : constants) {
    const auto idx = out.structure().index_of(Offset{key.first, key.second});
    if (!idx)
      throw Error(Errc::UnknownOffset,
                  "gauge constant for offset " + to_string(Offset{key.first, key.second}) + " not in structure");
    for (double& v : out.table(*idx)) v += c;
  }
  return out;
}

double inner_product(const PotentialTable& potentials, const SufficientStatistics& stats) {
  if (!potentials.same_shape(stats))
    throw Error(Errc::IncompatibleStatistics, "potentials and statistics differ in shape");
  double s = 0.0;
  for (std::size_t i = 0; i < potentials.size(); ++i) {
    const auto u = potentials.table(i);
    const auto n = stats.table(i);
    for (std::size_t j = 0; j < u.size(); ++j) s += u[j] * n[j];
  }
  return s;
}

SufficientStatistics to_frequencies(const SufficientStatistics& stats, const GridDomain& domain) {
  if (stats.kind() == StatisticsKind::Frequencies) return stats;
  SufficientStatistics out = stats;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto e = edge_count(domain, out.structure()[i]);
    const double inv = e > 0 ? 1.0 / static_cast<double>(e) : 0.0;
    for (double& v : out.table(i)) v *= inv;
  }
  out.set_kind(StatisticsKind::Frequencies);
  return out;
}

SufficientStatistics to_expectations(const SufficientStatistics& freqs, const GridDomain& domain) {
  if (freqs.kind() != StatisticsKind::Frequencies) return freqs;
  SufficientStatistics out = freqs;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto e = static_cast<double>(edge_count(domain, out.structure()[i]));
    for (double& v : out.table(i)) v *= e;
  }
  out.set_kind(StatisticsKind::Expectations);
  return out;
}

double table_norm(const OffsetTables& tables, std::size_t i) {
  double s = 0.0;
  for (const double v : tables.table(i)) s += v * v;
  return std::sqrt(s);
}

}  // namespace grf
