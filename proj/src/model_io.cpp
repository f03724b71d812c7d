#include <fstream>
#include <sstream>

#include "json.hpp"

#include "grf/io.hpp"

namespace grf {
namespace {

using nlohmann::json;

json offsets_json(const NeighborhoodStructure& s) {
  json a = json::array();
  for (const Offset o : s.pairwise()) a.push_back({o.dx, o.dy});
  return a;
}

NeighborhoodStructure offsets_from(const json& a) {
  std::vector<Offset> out;
  for (const auto& o : a.at("offsets")) {
    if (!o.is_array() || o.size() != 2) throw Error(Errc::DimensionMismatch, "offset must be [dx, dy]");
    out.push_back({o[0].get<int>(), o[1].get<int>()});
  }
  return NeighborhoodStructure(out);
}

json tables_json(const OffsetTables& t) {
  json a = json::array();
  for (std::size_t i = 0; i < t.size(); ++i) a.push_back(std::vector<double>(t.table(i).begin(), t.table(i).end()));
  return a;
}

void tables_from(const json& a, OffsetTables& into) {
  if (!a.is_array() || a.size() != into.size())
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(into.size()) + " tables (unary first)");
  for (std::size_t i = 0; i < into.size(); ++i) {
    const auto v = a[i].get<std::vector<double>>();
    if (v.size() != into.table(i).size())
      throw Error(Errc::DimensionMismatch, "table " + std::to_string(i) + " has " + std::to_string(v.size()) +
                                               " entries, expected " + std::to_string(into.table(i).size()));
    std::copy(v.begin(), v.end(), into.table(i).begin());
  }
}

json appearance_json(const AppearanceModel& app) {
  json mix = json::array();
  for (const auto& m : app.mixtures) {
    json comps = json::array();
    for (const auto& g : m) {
      json cov = json::array();
      for (int r = 0; r < g.covariance.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(g.covariance.cols()));
        for (int c = 0; c < g.covariance.cols(); ++c) row[static_cast<std::size_t>(c)] = g.covariance(r, c);
        cov.push_back(row);
      }
      comps.push_back({{"weight", g.weight},
                       {"mean", std::vector<double>(g.mean.data(), g.mean.data() + g.mean.size())},
                       {"covariance", cov}});
    }
    mix.push_back(comps);
  }
  return {{"channels", app.channels}, {"regularization", app.regularization}, {"mixtures", mix}};
}

AppearanceModel appearance_from(const json& j) {
  AppearanceModel app;
  app.channels = j.at("channels").get<int>();
  app.regularization = j.value("regularization", app.regularization);
  for (const auto& m : j.at("mixtures")) {
    std::vector<GaussianComponent> comps;
    for (const auto& c : m) {
      GaussianComponent g;
      g.weight = c.at("weight").get<double>();
      const auto mean = c.at("mean").get<std::vector<double>>();
      g.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
      const auto& cov = c.at("covariance");
      g.covariance.resize(static_cast<Eigen::Index>(cov.size()), static_cast<Eigen::Index>(mean.size()));
      for (std::size_t r = 0; r < cov.size(); ++r) {
        const auto row = cov[r].get<std::vector<double>>();
        if (row.size() != mean.size()) throw Error(Errc::ChannelMismatch, "covariance row length differs from mean");
        for (std::size_t k = 0; k < row.size(); ++k)
          g.covariance(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = row[k];
      }
      comps.push_back(std::move(g));
    }
    app.mixtures.push_back(std::move(comps));
  }
  validate_appearance(app);
  return app;
}

const char* kind_name(StatisticsKind k) {
  switch (k) {
    case StatisticsKind::Counts: return "counts";
    case StatisticsKind::Expectations: return "expectations";
    case StatisticsKind::Frequencies: return "frequencies";
  }
  return "counts";
}

StatisticsKind kind_from(const std::string& s) {
  if (s == "counts") return StatisticsKind::Counts;
  if (s == "expectations") return StatisticsKind::Expectations;
  if (s == "frequencies") return StatisticsKind::Frequencies;
  throw Error(Errc::InvalidArgument, "unknown statistics kind '" + s + "'");
}

template <class F>
auto parse(const std::string& text, const char* what, F&& body) {
  try {
    return body(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed ") + what + ": " + e.what());
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spill(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) throw Error(Errc::IoFailure, "cannot write " + p.string());
}

}  // namespace

std::string model_to_json(const ModelFile& file) {
  const GrfModel& m = file.model;
  json j{{"format", "grf-model"},
         {"version", kModelFormatVersion},
         {"labels", m.labels.count},
         {"label_names", m.labels.names},
         {"domain", {m.domain.width, m.domain.height}},
         {"offsets", offsets_json(m.structure)},
         {"potentials", tables_json(m.potentials)},
         {"provenance", file.provenance}};
  if (file.appearance) j["appearance"] = appearance_json(*file.appearance);
  return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  return parse(text, "model file", [](const json& j) {
    if (j.value("format", "") != "grf-model") throw Error(Errc::InvalidArgument, "not a model file");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw Error(Errc::InvalidArgument, "unsupported model format version");
    const auto names = j.value("label_names", std::vector<std::string>{});
    const auto dom = j.at("domain").get<std::vector<int>>();
    if (dom.size() != 2) throw Error(Errc::DimensionMismatch, "domain must be [width, height]");
    const LabelSet labels(j.at("labels").get<int>(), names);
    const NeighborhoodStructure s = offsets_from(j);
    PotentialTable u(s, labels.count);
    tables_from(j.at("potentials"), u);
    ModelFile f{build_model(GridDomain(dom[0], dom[1]), labels, s, u), std::nullopt, {}};
    if (j.contains("appearance")) {
      f.appearance = appearance_from(j["appearance"]);
      if (f.appearance->labels() != labels.count)
        throw Error(Errc::DimensionMismatch, "appearance label count differs from the model");
    }
    if (j.contains("provenance")) f.provenance = j["provenance"].get<Provenance>();
    return f;
  });
}

std::string statistics_to_json(const StatisticsFile& file) {
  const SufficientStatistics& s = file.stats;
  json j{{"format", "grf-statistics"},
         {"version", kModelFormatVersion},
         {"labels", s.labels()},
         {"kind", kind_name(s.kind())},
         {"offsets", offsets_json(s.structure())},
         {"tables", tables_json(s)},
         {"provenance", file.provenance}};
  return j.dump(2) + "\n";
}

StatisticsFile statistics_from_json(const std::string& text) {
  return parse(text, "statistics file", [](const json& j) {
    if (j.value("format", "") != "grf-statistics") throw Error(Errc::InvalidArgument, "not a statistics file");
    const int labels = j.at("labels").get<int>();
    if (labels < 1 || labels > kMaxLabels) throw Error(Errc::InvalidArgument, "bad label count");
    StatisticsFile f{SufficientStatistics(offsets_from(j), labels, kind_from(j.at("kind").get<std::string>())), {}};
    tables_from(j.at("tables"), f.stats);
    for (std::size_t i = 0; i < f.stats.size(); ++i)
      for (const double v : f.stats.table(i))
        if (!(v >= 0.0)) throw Error(Errc::InvalidArgument, "statistics must be non-negative");
    if (j.contains("provenance")) f.provenance = j["provenance"].get<Provenance>();
    return f;
  });
}

void write_model(const std::filesystem::path& path, const ModelFile& file) { spill(path, model_to_json(file)); }
ModelFile read_model(const std::filesystem::path& path) { return model_from_json(slurp(path)); }
void write_statistics(const std::filesystem::path& path, const StatisticsFile& file) {
  spill(path, statistics_to_json(file));
}
StatisticsFile read_statistics(const std::filesystem::path& path) { return statistics_from_json(slurp(path)); }

}  // namespace grf
