#include "grf/composition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grf {

LabelMapping LabelMapping::disjoint_union(const std::vector<int>& label_counts, const std::vector<int>& backgrounds) {
  if (label_counts.empty()) throw Error(Errc::MappingMismatch, "need at least one component");
  if (!backgrounds.empty() && backgrounds.size() != label_counts.size())
    throw Error(Errc::MappingMismatch, "one background label per component expected");
  LabelMapping m;
  m.backgrounds = backgrounds.empty() ? std::vector<int>(label_counts.size(), 0) : backgrounds;
  int next = 1;
  for (std::size_t i = 0; i < label_counts.size(); ++i) {
    const int k = label_counts[i];
    if (k < 1 || m.backgrounds[i] < 0 || m.backgrounds[i] >= k)
      throw Error(Errc::MappingMismatch, "component " + std::to_string(i) + " has an invalid background label");
    std::vector<int> map(static_cast<std::size_t>(k));
    for (int l = 0; l < k; ++l) map[static_cast<std::size_t>(l)] = l == m.backgrounds[i] ? 0 : next++;
    m.joint_of.push_back(std::move(map));
  }
  m.joint_labels = next;
  if (m.joint_labels > kMaxLabels) throw Error(Errc::MappingMismatch, "joint label set exceeds 256 labels");
  return m;
}

int LabelMapping::component_of(int joint_label) const {
  if (joint_label == 0) return -1;
  for (std::size_t i = 0; i < joint_of.size(); ++i)
    for (const int j : joint_of[i])
      if (j == joint_label) return static_cast<int>(i);
  throw Error(Errc::MappingMismatch, "joint label " + std::to_string(joint_label) + " is not mapped");
}

std::vector<std::string> LabelMapping::joint_names(const std::vector<LabelSet>& components) const {
  if (components.size() != joint_of.size()) throw Error(Errc::MappingMismatch, "component count differs");
  std::vector<std::string> names(static_cast<std::size_t>(joint_labels));
  names[0] = "background";
  for (std::size_t i = 0; i < components.size(); ++i)
    for (int l = 0; l < components[i].count; ++l) {
      const int j = joint_of[i][static_cast<std::size_t>(l)];
      if (j == 0) continue;
      const std::string base = static_cast<std::size_t>(l) < components[i].names.size()
                                   ? components[i].names[static_cast<std::size_t>(l)]
                                   : std::to_string(l);
      names[static_cast<std::size_t>(j)] = "c" + std::to_string(i + 1) + ":" + base;
    }
  return names;
}

MixtureWeights MixtureWeights::defaults(int joint_labels, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::InvalidArgument, "eps must lie in (0,1)");
  return {eps / (static_cast<double>(joint_labels) * joint_labels), (1.0 - eps) / 2.0, (1.0 - eps) / 2.0};
}

void MixtureWeights::validate() const {
  if (!(w0 > 0.0 && w1 > 0.0 && w2 > 0.0)) throw Error(Errc::InvalidArgument, "mixture weights must be positive");
}

std::optional<std::string> MixtureWeights::warning() const {
  if (w0 >= std::min(w1, w2) / 10.0)
    return "w0=" + std::to_string(w0) + " is not much smaller than min(w1,w2)=" + std::to_string(std::min(w1, w2));
  return std::nullopt;
}

SufficientStatistics extend_statistics(const SufficientStatistics& stats, const LabelMapping& mapping,
                                       std::size_t component, const GridDomain& domain) {
  if (component >= mapping.components()) throw Error(Errc::MappingMismatch, "component index out of range");
  const auto& map = mapping.joint_of[component];
  if (static_cast<int>(map.size()) != stats.labels())
    throw Error(Errc::MappingMismatch, "statistics have " + std::to_string(stats.labels()) +
                                           " labels, mapping expects " + std::to_string(map.size()));
  const SufficientStatistics f =
      stats.kind() == StatisticsKind::Frequencies ? stats : to_frequencies(stats, domain);
  SufficientStatistics out(stats.structure(), mapping.joint_labels, StatisticsKind::Frequencies);
  const int k = stats.labels();
  for (int a = 0; a < k; ++a) out.unary(map[static_cast<std::size_t>(a)]) = f.unary(a);
  for (std::size_t i = 1; i < f.size(); ++i)
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        out.pair(i, map[static_cast<std::size_t>(a)], map[static_cast<std::size_t>(b)]) = f.pair(i, a, b);
  return out;
}

SufficientStatistics mix_statistics(const SufficientStatistics& ext1, const SufficientStatistics& ext2,
                                    const MixtureWeights& w) {
  w.validate();
  if (!ext1.same_shape(ext2)) throw Error(Errc::IncompatibleIndexing, "extended statistics are indexed differently");
  SufficientStatistics out(ext1.structure(), ext1.labels(), StatisticsKind::Frequencies);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto o = out.table(i);
    const auto a = ext1.table(i);
    const auto b = ext2.table(i);
    double total = 0.0;
    for (std::size_t j = 0; j < o.size(); ++j) total += (o[j] = w.w1 * a[j] + w.w2 * b[j] + w.w0);
    for (double& v : o) v /= total;
  }
  return out;
}

AppearanceModel compose_appearance(const AppearanceModel& a1, const AppearanceModel& a2, const LabelMapping& mapping) {
  if (mapping.components() != 2) throw Error(Errc::MappingMismatch, "expected two components");
  if (a1.channels != a2.channels) throw Error(Errc::ChannelMismatch, "component appearances differ in channels");
  AppearanceModel out;
  out.channels = a1.channels;
  out.regularization = std::max(a1.regularization, a2.regularization);
  out.mixtures.resize(static_cast<std::size_t>(mapping.joint_labels));
  const AppearanceModel* parts[2] = {&a1, &a2};
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& map = mapping.joint_of[i];
    if (static_cast<int>(map.size()) != parts[i]->labels())
      throw Error(Errc::MappingMismatch, "appearance label count differs from mapping");
    for (std::size_t l = 0; l < map.size(); ++l) {
      if (map[l] != 0) {
        out.mixtures[static_cast<std::size_t>(map[l])] = parts[i]->mixtures[l];
        continue;
      }
      for (auto g : parts[i]->mixtures[l]) {
        g.weight *= 0.5;
        out.mixtures[0].push_back(std::move(g));
      }
    }
  }
  return out;
}

namespace {

/// Table of offset a from stats indexed by structure s, using the transpose
/// when s holds -a.  Empty when neither is present.
std::optional<std::vector<double>> table_for(const SufficientStatistics& stats, Offset a) {
  const int k = stats.labels();
  if (const auto i = stats.structure().index_of(a)) {
    const auto t = stats.table(*i);
    return std::vector<double>(t.begin(), t.end());
  }
  if (const auto i = stats.structure().index_of(-a)) {
    std::vector<double> t(static_cast<std::size_t>(k * k));
    for (int x = 0; x < k; ++x)
      for (int y = 0; y < k; ++y) t[static_cast<std::size_t>(x * k + y)] = stats.pair(*i, y, x);
    return t;
  }
  return std::nullopt;
}

/// Statistics of model m on structure s: taken from the given statistics
/// where available, otherwise estimated from prior samples of m.
SufficientStatistics on_structure(const GrfModel& m, const SufficientStatistics& given,
                                  const NeighborhoodStructure& s, const SamplerConfig& missing) {
  const SufficientStatistics f = given.kind() == StatisticsKind::Frequencies ? given : to_frequencies(given, m.domain);
  std::vector<Offset> absent;
  for (const Offset a : s.pairwise())
    if (!table_for(f, a)) absent.push_back(a);
  std::optional<SufficientStatistics> prior;
  if (!absent.empty())
    prior = to_frequencies(estimate_statistics(m, NeighborhoodStructure(absent), {}, nullptr, missing), m.domain);

  SufficientStatistics out(s, m.labels.count, StatisticsKind::Frequencies);
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto t = i == 0 ? std::optional<std::vector<double>>(std::vector<double>(f.table(0).begin(), f.table(0).end()))
                    : table_for(f, s[i]);
    if (!t) t = table_for(*prior, s[i]);
    out.set_table(i, std::move(*t));
  }
  return out;
}

PotentialTable warm_potentials(const GrfModel& m1, const GrfModel& m2, const LabelMapping& map,
                               const NeighborhoodStructure& s) {
  const int kj = map.joint_labels;
  PotentialTable u(s, kj);
  const GrfModel* parts[2] = {&m1, &m2};
  for (std::size_t i = 0; i < s.size(); ++i) {
    double lowest = std::numeric_limits<double>::infinity();
    std::vector<bool> set(u.table(i).size(), false);
    for (std::size_t c = 0; c < 2; ++c) {
      const GrfModel& m = *parts[c];
      const auto& jm = map.joint_of[c];
      const int k = m.labels.count;
      if (i == 0) {
        for (int a = 0; a < k; ++a) {
          const int ja = jm[static_cast<std::size_t>(a)];
          u.unary(ja) += ja == 0 ? 0.5 * m.potentials.unary(a) : m.potentials.unary(a);
        }
        continue;
      }
      std::vector<double> t(static_cast<std::size_t>(k * k), 0.0);
      if (const auto j = m.structure.index_of(s[i])) {
        const auto src = m.potentials.table(*j);
        t.assign(src.begin(), src.end());
      } else if (const auto jn = m.structure.index_of(-s[i])) {
        for (int x = 0; x < k; ++x)
          for (int y = 0; y < k; ++y) t[static_cast<std::size_t>(x * k + y)] = m.potentials.pair(*jn, y, x);
      }
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
          const int ja = jm[static_cast<std::size_t>(a)], jb = jm[static_cast<std::size_t>(b)];
          const double v = t[static_cast<std::size_t>(a * k + b)];
          u.pair(i, ja, jb) += ja == 0 && jb == 0 ? 0.5 * v : v;
          set[static_cast<std::size_t>(ja * kj + jb)] = true;
          lowest = std::min(lowest, v);
        }
    }
    if (i == 0) continue;
    constexpr double kCrossMargin = 2.0;
    for (std::size_t j = 0; j < set.size(); ++j)
      if (!set[j]) u.table(i)[j] = lowest - kCrossMargin;
  }
  return normalize_potentials(u);
}

}  // namespace

ComposeResult compose_models(const GrfModel& m1, const SufficientStatistics& stats1, const GrfModel& m2,
                             const SufficientStatistics& stats2, const MixtureWeights& w,
                             const ComposeOptions& options) {
  w.validate();
  if (!(m1.domain == m2.domain)) throw Error(Errc::IncompatibleDomains, "component models live on different domains");
  if (stats1.labels() != m1.labels.count || stats2.labels() != m2.labels.count)
    throw Error(Errc::IncompatibleStatistics, "statistics label counts differ from their models");

  ComposeResult r;
  if (auto msg = w.warning()) r.warnings.push_back(*msg);
  r.mapping = LabelMapping::disjoint_union({m1.labels.count, m2.labels.count});

  std::vector<Offset> offsets(m1.structure.pairwise().begin(), m1.structure.pairwise().end());
  NeighborhoodStructure joint(offsets);
  for (const Offset a : m2.structure.pairwise())
    if (!joint.conflicts_with(a)) joint = joint.with(a);

  const SufficientStatistics e1 =
      extend_statistics(on_structure(m1, stats1, joint, options.missing), r.mapping, 0, m1.domain);
  const SufficientStatistics e2 =
      extend_statistics(on_structure(m2, stats2, joint, options.missing), r.mapping, 1, m2.domain);
  r.target = mix_statistics(e1, e2, w);

  const LabelSet labels(r.mapping.joint_labels, r.mapping.joint_names({m1.labels, m2.labels}));
  const GrfModel start = build_model(m1.domain, labels, joint,
                                     options.warm_start ? warm_potentials(m1, m2, r.mapping, joint)
                                                        : PotentialTable(joint, labels.count));
  r.model = learn_from_statistics(start, r.target, options.schedule).model;
  return r;
}

}  // namespace grf
