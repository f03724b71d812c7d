#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grf/error.hpp"

namespace grf {

using Label = std::uint8_t;
inline constexpr int kMaxLabels = 256;

/// Difference vector between two grid nodes.  x grows rightwards, y grows
/// downwards; offset (dx,dy) connects (x,y) to (x+dx, y+dy).
struct Offset {
  int dx = 0;
  int dy = 0;

  constexpr bool is_zero() const noexcept { return dx == 0 && dy == 0; }
  constexpr Offset operator-() const noexcept { return {-dx, -dy}; }
  friend constexpr bool operator==(Offset, Offset) noexcept = default;
};

/// Deterministic ordering: by dy, then by dx.
constexpr bool offset_less(Offset a, Offset b) noexcept {
  return a.dy != b.dy ? a.dy < b.dy : a.dx < b.dx;
}

std::string to_string(Offset a);

/// Ordered offset set A.  The zero offset (unary terms) is always present and
/// always stored first; no offset appears together with its negative.
class NeighborhoodStructure {
 public:
  NeighborhoodStructure() : offsets_{Offset{}} {}
  /// Accepts the offsets with or without the zero vector.
  explicit NeighborhoodStructure(const std::vector<Offset>& offsets);

  std::size_t size() const noexcept { return offsets_.size(); }
  std::size_t pairwise_count() const noexcept { return offsets_.size() - 1; }
  std::span<const Offset> offsets() const noexcept { return offsets_; }
  /// Nonzero offsets in storage order.
  std::span<const Offset> pairwise() const noexcept {
    return std::span<const Offset>(offsets_).subspan(1);
  }
  Offset operator[](std::size_t i) const { return offsets_.at(i); }

  std::optional<std::size_t> index_of(Offset a) const noexcept;
  bool contains(Offset a) const noexcept { return index_of(a).has_value(); }
  /// True if a or -a is already part of the structure.
  bool conflicts_with(Offset a) const noexcept;

  NeighborhoodStructure with(Offset a) const;
  NeighborhoodStructure without(Offset a) const;

  /// max(|dx|,|dy|) over all offsets.
  int reach() const noexcept;

  friend bool operator==(const NeighborhoodStructure&, const NeighborhoodStructure&) = default;

 private:
  std::vector<Offset> offsets_;
};

struct LabelSet {
  int count = 1;
  std::vector<std::string> names;

  LabelSet() = default;
  explicit LabelSet(int n, std::vector<std::string> label_names = {});
  bool valid(int k) const noexcept { return k >= 0 && k < count; }
};

struct GridDomain {
  int width = 1;
  int height = 1;

  GridDomain() = default;
  GridDomain(int w, int h);

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
  friend bool operator==(const GridDomain&, const GridDomain&) = default;
};

/// |E_a|: number of node pairs (t, t+a) with both ends inside the domain.
std::size_t edge_count(const GridDomain& domain, Offset a) noexcept;

/// One real-valued table per structure offset: |K| entries for the zero
/// offset, |K|x|K| row-major entries (k, k') for every other offset.
class OffsetTables {
 public:
  OffsetTables() = default;
  OffsetTables(NeighborhoodStructure structure, int labels);

  const NeighborhoodStructure& structure() const noexcept { return structure_; }
  int labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return tables_.size(); }

  std::span<double> table(std::size_t i) { return tables_.at(i); }
  std::span<const double> table(std::size_t i) const { return tables_.at(i); }

  double& unary(int k) { return tables_[0][static_cast<std::size_t>(k)]; }
  double unary(int k) const { return tables_[0][static_cast<std::size_t>(k)]; }
  double& pair(std::size_t i, int k, int kk) {
    return tables_[i][static_cast<std::size_t>(k * labels_ + kk)];
  }
  double pair(std::size_t i, int k, int kk) const {
    return tables_[i][static_cast<std::size_t>(k * labels_ + kk)];
  }

  /// Replaces table i; throws DimensionMismatch on a wrongly sized table.
  void set_table(std::size_t i, std::vector<double> values);

  bool same_shape(const OffsetTables& other) const noexcept {
    return labels_ == other.labels_ && structure_ == other.structure_;
  }

  /// Largest absolute entrywise difference; requires same shape.
  double max_abs_difference(const OffsetTables& other) const;

 protected:
  NeighborhoodStructure structure_;
  int labels_ = 0;
  std::vector<std::vector<double>> tables_;
};

/// Gibbs potentials u_0(k), u_a(k,k').
class PotentialTable : public OffsetTables {
 public:
  using OffsetTables::OffsetTables;
  explicit PotentialTable(const OffsetTables& t) : OffsetTables(t) {}
};

enum class StatisticsKind { Counts, Expectations, Frequencies };

/// Co-occurrence tables n_a(k,k') (and label counts n_0(k)).  Counts are
/// per-labelling integers, expectations are averages of counts, frequencies
/// are expectations divided by the number of edges of each class.
class SufficientStatistics : public OffsetTables {
 public:
  SufficientStatistics() = default;
  SufficientStatistics(NeighborhoodStructure structure, int labels,
                       StatisticsKind kind = StatisticsKind::Counts)
      : OffsetTables(std::move(structure), labels), kind_(kind) {}

  StatisticsKind kind() const noexcept { return kind_; }
  void set_kind(StatisticsKind kind) noexcept { kind_ = kind; }

  /// this += scale * other; shapes must agree.
  void accumulate(const SufficientStatistics& other, double scale);
  void scale(double factor);
  double total(std::size_t i) const;
  double max_abs() const;

 private:
  StatisticsKind kind_ = StatisticsKind::Counts;
};

/// Per-node label assignment y: D -> K.
struct Labelling {
  int width = 0;
  int height = 0;
  std::vector<Label> labels;

  Labelling() = default;
  Labelling(int w, int h, Label fill = 0)
      : width(w), height(h), labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}
  explicit Labelling(const GridDomain& d, Label fill = 0) : Labelling(d.width, d.height, fill) {}

  GridDomain domain() const { return {width, height}; }
  Label& at(int x, int y) { return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
  Label at(int x, int y) const { return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }

  friend bool operator==(const Labelling&, const Labelling&) = default;
};

/// Throws DimensionMismatch / InvalidLabel when y does not fit.
void validate_labelling(const Labelling& y, const GridDomain& domain, const LabelSet& labels);

struct GrfModel {
  GridDomain domain;
  LabelSet labels;
  NeighborhoodStructure structure;
  PotentialTable potentials;

  /// Same potentials on another domain.
  GrfModel on_domain(const GridDomain& d) const;
};

GrfModel build_model(const GridDomain& domain, const LabelSet& labels,
                     const NeighborhoodStructure& structure, const PotentialTable& potentials);

/// All-zero potentials over the given structure.
GrfModel zero_model(const GridDomain& domain, const LabelSet& labels,
                    const NeighborhoodStructure& structure);

/// Exponent of the prior: sum_t u_0(y_t) + sum_a sum_{(t,t+a)} u_a(y_t, y_{t+a}).
double energy(const GrfModel& model, const Labelling& y);

SufficientStatistics count_statistics(const GridDomain& domain, const NeighborhoodStructure& structure,
                                      const LabelSet& labels, const Labelling& y);

/// Adds the counts of y into an existing Counts/Expectations accumulator.
void add_counts(const GridDomain& domain, const Labelling& y, SufficientStatistics& into);

/// Subtracts the per-offset mean of every table.
PotentialTable normalize_potentials(const PotentialTable& potentials);

/// u_a + c_a entrywise; offsets absent from the map get 0.
PotentialTable add_gauge_constants(const PotentialTable& potentials,
                                   const std::map<std::pair<int, int>, double>& constants);

/// sum over offsets and entries of u * n.
double inner_product(const PotentialTable& potentials, const SufficientStatistics& stats);

/// Divides each table by its edge count on the domain (W*H for the unary table).
SufficientStatistics to_frequencies(const SufficientStatistics& stats, const GridDomain& domain);
/// Inverse of to_frequencies.
SufficientStatistics to_expectations(const SufficientStatistics& freqs, const GridDomain& domain);

/// Frobenius norm of table i.
double table_norm(const OffsetTables& tables, std::size_t i);

}  // namespace grf
