// grfshape: command-line front end for GRF shape priors.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "grf/composition.hpp"
#include "grf/generators.hpp"
#include "grf/io.hpp"
#include "grf/learning.hpp"
#include "grf/oracle.hpp"
#include "grf/sampler.hpp"
#include "grf/segmentation.hpp"
#include "grf/structure.hpp"

namespace {

using namespace grf;

constexpr int kExitOk = 0;
constexpr int kExitDiffer = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Global {
  std::uint64_t seed = 0;
  int sweeps = -1;
  int burn_in = -1;
  int samples = -1;
  int thinning = -1;
  double step0 = 0.0;
  double tau = 0.0;
  int iters = -1;
  int d = 6;
  int target_size = 8;
  std::string metric = "euclid";
  double w0 = -1.0;
  double w1 = -1.0;
  double w2 = -1.0;
  std::string scan = "raster";
  int threads = 1;
  int chains = 1;
  double averaging = 0.0;
};

// Options gathered per subcommand before the action runs.
struct Args {
  std::string model, model2, stats1, stats2, image, clamps, truth, labelling, out, trace, appearance;
  std::vector<std::string> images, masks, labellings;
  std::string from_stats, cls = "upright", image_out, truth_out, first, second;
  double alpha = 0.35, beta = 0.5, sigma = 0.1, tol = 1e-12, appearance_step = 0.0;
  int width = 64, height = 64, parts = 7, na = 1, nb = 1, labels = 2, neighbourhood = 4, components = 1, final_iters = 1000;
  std::vector<double> strengths;
  bool frequencies = false;
};

ScanMode scan_mode(const Global& g) { return g.scan == "random" ? ScanMode::RandomSite : ScanMode::Raster; }

SamplerConfig sampler(const Global& g, int burn_in_default, int samples_default) {
  SamplerConfig c;
  c.burn_in = g.burn_in >= 0 ? g.burn_in : (g.sweeps >= 0 ? g.sweeps : burn_in_default);
  c.n_samples = g.samples >= 0 ? g.samples : samples_default;
  c.thinning = g.thinning >= 0 ? g.thinning : 1;
  c.seed = g.seed;
  c.scan = scan_mode(g);
  c.chains = g.chains;
  c.threads = g.threads;
  c.validate();
  return c;
}

LearningSchedule schedule(const Global& g, int iters_default) {
  LearningSchedule s;
  s.iterations = g.iters >= 0 ? g.iters : iters_default;
  s.step0 = g.step0;
  s.tau = g.tau;
  s.seed = g.seed;
  s.scan = scan_mode(g);
  s.threads = g.threads;
  s.averaging = g.averaging;
  if (g.sweeps >= 0) s.inner_sweeps = g.sweeps;
  if (g.burn_in >= 0) s.burn_in = g.burn_in;
  if (g.samples >= 0) s.samples_per_expectation = g.samples;
  s.validate();
  return s;
}

Provenance provenance(const Global& g, const std::string& command) {
  return {{"command", command},
          {"seed", std::to_string(g.seed)},
          {"scan", g.scan}};
}

std::string full(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

const AppearanceModel& need_appearance(const ModelFile& f) {
  if (!f.appearance) throw Error(Errc::MissingAppearance, "the model file carries no appearance model");
  return *f.appearance;
}

// Events from --labelling (supervised) and --image/--clamps pairs.
std::vector<TrainingEvent> events(const Args& a, int label_count) {
  std::vector<TrainingEvent> out;
  for (const auto& p : a.labellings) out.push_back({Evidence::clamped(read_labelling(p, label_count)), 1.0});
  if (!a.masks.empty() && a.masks.size() != a.images.size())
    throw Error(Errc::InvalidArgument, "give one --clamps per --image or none at all");
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    Evidence e{read_image(a.images[i]), std::nullopt};
    if (!a.masks.empty()) e.clamps = read_clamp_mask(a.masks[i], label_count);
    out.push_back({std::move(e), 1.0});
  }
  if (out.empty()) throw Error(Errc::InvalidArgument, "no training events: pass --labelling or --image");
  return out;
}

Evidence evidence(const Args& a, int label_count) {
  Evidence e;
  if (!a.image.empty()) e.image = read_image(a.image);
  if (!a.clamps.empty()) e.clamps = read_clamp_mask(a.clamps, label_count);
  if (!a.labelling.empty()) {
    if (e.clamps) throw Error(Errc::InvalidArgument, "--labelling and --clamps are exclusive");
    e.clamps = ClampMask::from_labelling(read_labelling(a.labelling, label_count));
  }
  return e;
}

void write_marginals(const std::string& path, const MarginalField& m) {
  nlohmann::json j{{"width", m.width}, {"height", m.height}, {"labels", m.labels}, {"p", m.p}};
  std::ofstream out(path);
  if (!out || !(out << j.dump() << '\n')) throw Error(Errc::IoFailure, "cannot write " + path);
}

void write_text(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path);
  body(out);
}

FigureClass figure_class(const std::string& s) {
  if (s == "upright") return FigureClass::Upright;
  if (s == "lying") return FigureClass::Lying;
  throw Error(Errc::InvalidArgument, "figure class must be upright or lying");
}

int report(Errc code, const std::string& message, int exit_code) {
  std::cerr << nlohmann::json{{"error", std::string(errc_name(code))}, {"message", message}}.dump() << '\n';
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning and sampling second-order GRF shape priors on pixel grids"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  Args a;

  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--sweeps", g.sweeps, "Sweeps between samples (learning) or before the sample (sample-prior)");
  app.add_option("--burn-in", g.burn_in, "Burn-in sweeps");
  app.add_option("--samples", g.samples, "Retained samples per estimate");
  app.add_option("--thinning", g.thinning, "Sweeps between retained samples");
  app.add_option("--step0", g.step0, "Initial learning step (0 = 1/(W*H))");
  app.add_option("--tau", g.tau, "Step decay horizon (0 = iters/3)");
  app.add_option("--iters", g.iters, "Learning iterations");
  app.add_option("--averaging", g.averaging, "Fraction of final iterates averaged")->check(CLI::Range(0.0, 1.0));
  app.add_option("--d", g.d, "Candidate offset range");
  app.add_option("--target-size", g.target_size, "Number of nonzero offsets to keep");
  app.add_option("--metric", g.metric, "Growth score")->check(CLI::IsMember({"euclid", "kl"}));
  app.add_option("--w0", g.w0, "Composition floor weight (default eps/K^2)");
  app.add_option("--w1", g.w1, "Weight of the first component");
  app.add_option("--w2", g.w2, "Weight of the second component");
  app.add_option("--scan", g.scan, "Site order")->check(CLI::IsMember({"raster", "random"}));
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  app.add_option("--chains", g.chains, "Independent chains per estimate")->check(CLI::PositiveNumber);

  int exit_code = kExitOk;
  std::function<void()> action;
  const auto bind = [&](CLI::App* sub, std::function<void()> f) { sub->callback([&action, f] { action = f; }); };

  // gen
  auto* gen = app.add_subcommand("gen", "Synthetic models and images");
  gen->require_subcommand(1);
  auto* blobs = gen->add_subcommand(
      "blobs",
      "Two-label blob model.  Short edges (1,0),(0,1),(1,1),(-1,1); long edges are their scale-5 copies.  The "
      "source lists the short edges as (0,1),(0,-1),(1,1),(-1,1), which contains an offset and its negative and is "
      "not an 8-neighbourhood; this is taken as a typo for (1,0),(0,1),(1,1),(-1,1).");
  blobs->add_option("--alpha", a.alpha, "Short-edge strength")->capture_default_str();
  blobs->add_option("--beta", a.beta, "Density term on long edges")->capture_default_str();
  blobs->add_option("--width", a.width)->capture_default_str();
  blobs->add_option("--height", a.height)->capture_default_str();
  blobs->add_option("-o,--out", a.out, "Model file")->required();
  bind(blobs, [&] {
    write_model(a.out, {gen_blob_model(a.alpha, a.beta, {a.width, a.height}), std::nullopt,
                        {{"command", "gen blobs"}, {"alpha", full(a.alpha)}, {"beta", full(a.beta)}}});
  });

  auto* figure = gen->add_subcommand("figure", "One articulated figure with Gaussian noise");
  figure->add_option("--parts", a.parts, "Labels including background")->capture_default_str();
  figure->add_option("--sigma", a.sigma)->capture_default_str();
  figure->add_option("--class", a.cls)->check(CLI::IsMember({"upright", "lying"}))->capture_default_str();
  figure->add_option("--image", a.image_out, "Output PGM")->required();
  figure->add_option("--truth", a.truth_out, "Output labelling")->required();
  bind(figure, [&] {
    const auto s = gen_composite_figure(a.parts, a.sigma, g.seed, figure_class(a.cls));
    write_image(a.image_out, s.image);
    write_labelling(a.truth_out, s.truth);
  });

  auto* collage = gen->add_subcommand("collage", "Upright and lying figures on one canvas, shared grey levels");
  collage->add_option("--parts", a.parts)->capture_default_str();
  collage->add_option("--na", a.na, "Upright instances")->capture_default_str();
  collage->add_option("--nb", a.nb, "Lying instances")->capture_default_str();
  collage->add_option("--width", a.width)->capture_default_str();
  collage->add_option("--height", a.height)->capture_default_str();
  collage->add_option("--sigma", a.sigma)->capture_default_str();
  collage->add_option("--image", a.image_out)->required();
  collage->add_option("--truth", a.truth_out, "Labelling over the joint label set")->required();
  bind(collage, [&] {
    const auto s = gen_collage(a.parts, a.na, a.nb, {a.width, a.height}, a.sigma, g.seed);
    write_image(a.image_out, s.image);
    write_labelling(a.truth_out, s.truth);
  });

  auto* potts = gen->add_subcommand("potts", "Potts baseline on the 4- or 8-neighbourhood");
  potts->add_option("--labels", a.labels)->capture_default_str();
  potts->add_option("--neighbourhood", a.neighbourhood)->check(CLI::IsMember({4, 8}))->capture_default_str();
  potts->add_option("--strength", a.strengths, "One value, or one per offset; none gives free zero tables");
  potts->add_option("--width", a.width)->capture_default_str();
  potts->add_option("--height", a.height)->capture_default_str();
  potts->add_option("-o,--out", a.out)->required();
  bind(potts, [&] {
    write_model(a.out, {gen_potts_baseline(a.labels, a.neighbourhood, a.strengths, {a.width, a.height}),
                        std::nullopt, {{"command", "gen potts"}}});
  });

  auto* cells = gen->add_subcommand("cells", "Discs plus thin bars of the same grey level");
  cells->add_option("--width", a.width)->capture_default_str();
  cells->add_option("--height", a.height)->capture_default_str();
  cells->add_option("--sigma", a.sigma)->capture_default_str();
  cells->add_option("--image", a.image_out)->required();
  cells->add_option("--truth", a.truth_out)->required();
  bind(cells, [&] {
    CellsOptions o;
    o.sigma = a.sigma;
    const auto s = gen_cells({a.width, a.height}, o, g.seed);
    write_image(a.image_out, s.image);
    write_labelling(a.truth_out, s.truth);
  });

  // sample-prior
  auto* sp = app.add_subcommand("sample-prior", "Draw one labelling from a model (optionally clamped)");
  sp->add_option("model", a.model)->required();
  sp->add_option("--clamps", a.clamps, "Clamp mask");
  sp->add_option("-o,--out", a.out, "Output labelling")->required();
  bind(sp, [&] {
    const ModelFile f = read_model(a.model);
    SamplerConfig c = sampler(g, 1000, 1);
    const Evidence e = evidence(a, f.model.labels.count);
    SamplerChain chain = init_chain(f.model, e, nullptr, c);
    chain.run(c.burn_in);
    write_labelling(a.out, chain.labelling());
  });

  // segment
  auto* seg = app.add_subcommand("segment", "Max-marginal segmentation of an image");
  seg->add_option("model", a.model, "Model file with appearance")->required();
  seg->add_option("image", a.image)->required();
  seg->add_option("--clamps", a.clamps);
  seg->add_option("--appearance", a.appearance, "Take the appearance from another model file");
  seg->add_option("-o,--out", a.out, "Output labelling")->required();
  seg->add_option("--marginals", a.trace, "Write marginals as JSON");
  bind(seg, [&] {
    const ModelFile f = read_model(a.model);
    const ModelFile af = a.appearance.empty() ? f : read_model(a.appearance);
    const Image img = read_image(a.image);
    std::optional<ClampMask> cm;
    if (!a.clamps.empty()) cm = read_clamp_mask(a.clamps, f.model.labels.count);
    const auto r = segment(f.model.on_domain(img.domain()), need_appearance(af), img, cm, sampler(g, 200, 100));
    write_labelling(a.out, r.labelling);
    if (!a.trace.empty()) write_marginals(a.trace, r.marginals);
    std::cout << "expected_risk " << full(expected_risk(r.marginals, r.labelling)) << '\n';
  });

  // learn
  auto* learn = app.add_subcommand("learn", "Maximum-likelihood potentials for a fixed structure");
  learn->add_option("model", a.model, "Initial model (structure, labels, appearance)")->required();
  learn->add_option("--labelling", a.labellings, "Fully labelled event (repeatable)");
  learn->add_option("--image", a.images, "Image event (repeatable)");
  learn->add_option("--clamps", a.masks, "Clamp mask for the matching --image");
  learn->add_option("--from-stats", a.from_stats, "Learn from a statistics file instead of events");
  learn->add_option("--appearance-step", a.appearance_step, "Blend factor of per-iteration appearance updates");
  learn->add_option("-o,--out", a.out)->required();
  learn->add_option("--trace", a.trace, "Convergence trace");
  bind(learn, [&] {
    ModelFile f = read_model(a.model);
    LearningSchedule s = schedule(g, 1000);
    s.appearance_step = a.appearance_step;
    LearningResult r;
    if (!a.from_stats.empty()) {
      r = learn_from_statistics(f.model, read_statistics(a.from_stats).stats, s);
    } else {
      const auto ev = events(a, f.model.labels.count);
      const GridDomain dom = ev.front().evidence.image ? ev.front().evidence.image->domain()
                                                       : GridDomain(ev.front().evidence.clamps->width,
                                                                    ev.front().evidence.clamps->height);
      r = learn_potentials(f.model.on_domain(dom), ev, f.appearance ? &*f.appearance : nullptr, s);
    }
    Provenance p = provenance(g, "learn");
    p["iterations"] = std::to_string(s.iterations);
    p["step0"] = full(s.step(0, r.model.domain));
    write_model(a.out, {r.model, r.appearance ? r.appearance : f.appearance, p});
    if (!a.trace.empty()) write_text(a.trace, [&](std::ostream& o) { write_trace(o, r.trace); });
  });

  // learn-appearance
  auto* la = app.add_subcommand("learn-appearance", "Unsupervised appearance under a fixed prior");
  la->add_option("model", a.model)->required();
  la->add_option("--image", a.images, "Image (repeatable)")->required();
  la->add_option("--components", a.components, "Gaussians per label")->capture_default_str();
  la->add_option("--appearance-step", a.appearance_step, "Blend factor per update (default 1)");
  la->add_option("-o,--out", a.out)->required();
  bind(la, [&] {
    ModelFile f = read_model(a.model);
    std::vector<TrainingEvent> ev;
    for (const auto& p : a.images) ev.push_back({Evidence{read_image(p), std::nullopt}, 1.0});
    const Image& first = *ev.front().evidence.image;
    const AppearanceModel init =
        f.appearance ? *f.appearance : init_appearance(first, f.model.labels, a.components, g.seed);
    const double step = a.appearance_step > 0.0 ? a.appearance_step : 1.0;
    f.appearance = learn_appearance(f.model.on_domain(first.domain()), init, ev, g.iters >= 0 ? g.iters : 50, step,
                                    sampler(g, 50, 1));
    f.provenance = provenance(g, "learn-appearance");
    write_model(a.out, f);
  });

  // structure grow|shrink
  auto* st = app.add_subcommand("structure", "Neighbourhood structure estimation");
  st->require_subcommand(1);
  for (const bool grow : {true, false}) {
    auto* sub = st->add_subcommand(grow ? "grow" : "shrink",
                                   grow ? "Greedy growth from the empty structure"
                                        : "Greedy removal of the weakest offset from the full range");
    sub->add_option("--labels", a.labels)->capture_default_str();
    sub->add_option("--labelling", a.labellings, "Fully labelled event (repeatable)");
    sub->add_option("--image", a.images, "Image event (repeatable)");
    sub->add_option("--clamps", a.masks, "Clamp mask for the matching --image");
    sub->add_option("--appearance", a.appearance, "Model file holding the appearance for image events");
    sub->add_option("--final-iters", a.final_iters, "Iterations of the final refit")->capture_default_str();
    sub->add_option("-o,--out", a.out)->required();
    sub->add_option("--trace", a.trace, "Per-step trace");
    bind(sub, [&, grow] {
      const auto ev = events(a, a.labels);
      std::optional<AppearanceModel> app_model;
      if (!a.appearance.empty()) app_model = need_appearance(read_model(a.appearance));
      const GridDomain dom = ev.front().evidence.image ? ev.front().evidence.image->domain()
                                                       : GridDomain(ev.front().evidence.clamps->width,
                                                                    ev.front().evidence.clamps->height);
      StructureOptions o;
      o.search = schedule(g, 250);
      o.final_fit = o.search;
      o.final_fit.iterations = a.final_iters;
      o.metric = g.metric == "kl" ? ScoreMetric::KullbackLeibler : ScoreMetric::Euclidean;
      o.scoring.seed = g.seed;
      o.scoring.scan = scan_mode(g);
      const CandidateRange range(g.d);
      const auto r = (grow ? grow_structure : shrink_structure)(ev, LabelSet(a.labels), dom, range, g.target_size,
                                                               app_model ? &*app_model : nullptr, o);
      Provenance p = provenance(g, grow ? "structure grow" : "structure shrink");
      p["d"] = std::to_string(g.d);
      p["target_size"] = std::to_string(g.target_size);
      write_model(a.out, {r.model, r.appearance, p});
      if (!a.trace.empty()) write_text(a.trace, [&](std::ostream& out) { write_structure_trace(out, r.trace); });
      for (const Offset o2 : r.model.structure.pairwise()) std::cout << o2.dx << ' ' << o2.dy << '\n';
    });
  }

  // compose
  auto* comp = app.add_subcommand("compose", "Joint model from two component models and their statistics");
  comp->add_option("model1", a.model)->required();
  comp->add_option("stats1", a.stats1)->required();
  comp->add_option("model2", a.model2)->required();
  comp->add_option("stats2", a.stats2)->required();
  comp->add_option("-o,--out", a.out)->required();
  comp->add_option("--target", a.trace, "Write the mixed target statistics");
  bind(comp, [&] {
    const ModelFile f1 = read_model(a.model);
    const ModelFile f2 = read_model(a.model2);
    const int k = f1.model.labels.count + f2.model.labels.count - 1;
    MixtureWeights w = MixtureWeights::defaults(k);
    if (g.w0 >= 0.0) w.w0 = g.w0;
    if (g.w1 >= 0.0) w.w1 = g.w1;
    if (g.w2 >= 0.0) w.w2 = g.w2;
    ComposeOptions o;
    o.schedule = schedule(g, 1000);
    o.missing = sampler(g, 200, 50);
    const auto r = compose_models(f1.model, read_statistics(a.stats1).stats, f2.model,
                                  read_statistics(a.stats2).stats, w, o);
    for (const auto& msg : r.warnings) std::cerr << nlohmann::json{{"warning", msg}}.dump() << '\n';
    std::optional<AppearanceModel> joint;
    if (f1.appearance && f2.appearance) joint = compose_appearance(*f1.appearance, *f2.appearance, r.mapping);
    Provenance p = provenance(g, "compose");
    p["w0"] = full(w.w0);
    p["w1"] = full(w.w1);
    p["w2"] = full(w.w2);
    write_model(a.out, {r.model, joint, p});
    if (!a.trace.empty()) write_statistics(a.trace, {r.target, p});
  });

  // stats estimate
  auto* stats = app.add_subcommand("stats", "Sufficient statistics");
  stats->require_subcommand(1);
  auto* est = stats->add_subcommand("estimate", "Counts of a labelling, or sampled expectations of a model");
  est->add_option("model", a.model)->required();
  est->add_option("--labelling", a.labelling, "Count this labelling exactly");
  est->add_option("--image", a.image, "Posterior evidence image");
  est->add_option("--clamps", a.clamps, "Posterior evidence clamps");
  est->add_option("--frequencies", a.frequencies, "Write per-edge frequencies");
  est->add_option("-o,--out", a.out)->required();
  bind(est, [&] {
    const ModelFile f = read_model(a.model);
    SufficientStatistics s;
    Provenance p = provenance(g, "stats estimate");
    if (!a.labelling.empty() && a.image.empty() && a.clamps.empty()) {
      const Labelling y = read_labelling(a.labelling, f.model.labels.count);
      s = count_statistics(y.domain(), f.model.structure, f.model.labels, y);
      s.set_kind(StatisticsKind::Expectations);
      if (a.frequencies) s = to_frequencies(s, y.domain());
      p["source"] = "labelling";
    } else {
      const Evidence e = evidence(a, f.model.labels.count);
      GridDomain dom = f.model.domain;
      if (e.image) dom = e.image->domain();
      const GrfModel m = f.model.on_domain(dom);
      s = estimate_statistics(m, e, f.appearance ? &*f.appearance : nullptr, sampler(g, 1000, 100));
      if (a.frequencies) s = to_frequencies(s, dom);
      p["source"] = e.empty() ? "prior samples" : "posterior samples";
    }
    write_statistics(a.out, {s, p});
  });

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exact enumeration on tiny domains");
  oracle->require_subcommand(1);
  auto* oz = oracle->add_subcommand("z", "Partition function");
  oz->add_option("model", a.model)->required();
  bind(oz, [&] {
    const double lz = log_partition_function(read_model(a.model).model);
    std::cout << "log_z " << full(lz) << "\nz " << full(std::exp(lz)) << '\n';
  });
  auto* om = oracle->add_subcommand("marginals", "Exact (posterior) marginals");
  om->add_option("model", a.model)->required();
  om->add_option("--image", a.image);
  om->add_option("--clamps", a.clamps);
  om->add_option("-o,--out", a.out, "JSON output (default: stdout table)");
  bind(om, [&] {
    const ModelFile f = read_model(a.model);
    const Evidence e = evidence(a, f.model.labels.count);
    const auto m = exact_marginals(f.model, e, f.appearance ? &*f.appearance : nullptr);
    if (!a.out.empty()) return write_marginals(a.out, m);
    for (std::size_t t = 0; t < m.nodes(); ++t) {
      std::cout << t;
      for (const double v : m.node(t)) std::cout << ' ' << full(v);
      std::cout << '\n';
    }
  });
  auto* og = oracle->add_subcommand("gradient", "Exact log-likelihood gradient of one event");
  og->add_option("model", a.model)->required();
  og->add_option("--image", a.image);
  og->add_option("--clamps", a.clamps);
  og->add_option("--labelling", a.labelling);
  og->add_option("-o,--out", a.out)->required();
  bind(og, [&] {
    const ModelFile f = read_model(a.model);
    const Evidence e = evidence(a, f.model.labels.count);
    write_statistics(a.out, {exact_loglik_gradient(f.model, e, f.appearance ? &*f.appearance : nullptr),
                             provenance(g, "oracle gradient")});
  });
  auto* oe = oracle->add_subcommand("equal", "Exit 0 if two models define the same distribution, 1 otherwise");
  oe->add_option("first", a.first)->required();
  oe->add_option("second", a.second)->required();
  oe->add_option("--tol", a.tol)->capture_default_str();
  bind(oe, [&] {
    const GrfModel m1 = read_model(a.first).model;
    const GrfModel m2 = read_model(a.second).model;
    const double diff = max_probability_difference(m1, m2);
    std::cout << "max_probability_difference " << full(diff) << '\n';
    exit_code = diff <= a.tol ? kExitOk : kExitDiffer;
  });
  auto* orank = oracle->add_subcommand("rank", "Gauge rank of a model's domain and structure");
  orank->add_option("model", a.model)->required();
  bind(orank, [&] {
    const GrfModel m = read_model(a.model).model;
    const GaugeRank r = gauge_rank(m.domain, m.structure);
    std::cout << "rank " << r.rank << "\nidentifiable " << (r.identifiable ? "true" : "false") << '\n';
  });

  // loss
  auto* loss = app.add_subcommand("loss", "Hamming loss between two labellings");
  loss->add_option("first", a.first)->required();
  loss->add_option("second", a.second)->required();
  bind(loss, [&] {
    const Labelling y1 = read_labelling(a.first);
    const Labelling y2 = read_labelling(a.second);
    const std::size_t n = hamming_loss(y1, y2);
    std::cout << "hamming " << n << "\nfraction " << full(static_cast<double>(n) / y1.labels.size()) << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(Errc::InvalidArgument, e.what(), kExitValidation);
  }

  try {
    if (action) action();
  } catch (const Error& e) {
    const bool runtime = e.code() == Errc::IoFailure || e.code() == Errc::PlacementFailure;
    return report(e.code(), e.what(), runtime ? kExitRuntime : kExitValidation);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "RuntimeError"}, {"message", e.what()}}.dump() << '\n';
    return kExitRuntime;
  }
  return exit_code;
}
