#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "grf/generators.hpp"
#include "grf/io.hpp"

using namespace grf;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

/// Runs the CLI through the shell; stderr is folded into the captured output.
Run run(const std::string& args) {
  const std::string cmd = std::string(GRF_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("grf_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("missing or unknown subcommands are validation errors") {
  CHECK(run("").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("gen").status == 2);
  const Run r = run("oracle z");
  CHECK(r.status == 2);
  CHECK(r.out.find("\"error\"") != std::string::npos);
}

TEST_CASE("blob generator writes the documented model") {
  TempDir dir;
  const Run r = run("gen blobs --alpha 0.35 --beta 0.5 --width 20 --height 16 -o " + (dir / "m.json"));
  REQUIRE(r.status == 0);
  const ModelFile f = read_model(dir / "m.json");
  CHECK(f.model.domain == GridDomain(20, 16));
  CHECK(f.model.structure == gen_blob_model(0.35, 0.5, {20, 16}).structure);
  CHECK(f.model.potentials.max_abs_difference(gen_blob_model(0.35, 0.5, {20, 16}).potentials) < 1e-15);
  CHECK(!f.provenance.empty());

  const Run help = run("gen blobs --help");
  CHECK(help.status == 0);
  CHECK(help.out.find("typo") != std::string::npos);
}

TEST_CASE("oracle commands on a tiny model") {
  TempDir dir;
  REQUIRE(run("gen blobs --width 2 --height 2 -o " + (dir / "m.json")).status == 0);
  const Run z = run("oracle z " + (dir / "m.json"));
  CHECK(z.status == 0);
  CHECK(z.out.find("log_z ") != std::string::npos);

  // A gauge-shifted copy defines the same distribution.
  ModelFile f = read_model(dir / "m.json");
  ModelFile shifted = f;
  shifted.model.potentials = add_gauge_constants(f.model.potentials, {{{1, 0}, 1.5}, {{0, 1}, -0.75}});
  write_model(dir / "s.json", shifted);
  CHECK(run("oracle equal " + (dir / "m.json") + " " + (dir / "s.json")).status == 0);

  ModelFile other = f;
  other.model.potentials.table(0)[1] += 1.0;
  write_model(dir / "o.json", other);
  CHECK(run("oracle equal " + (dir / "m.json") + " " + (dir / "o.json")).status == 1);

  const Run rank = run("oracle rank " + (dir / "m.json"));
  CHECK(rank.status == 0);
  CHECK(rank.out.find("rank ") != std::string::npos);
}

TEST_CASE("oracle refuses large domains") {
  TempDir dir;
  REQUIRE(run("gen blobs --width 8 --height 8 -o " + (dir / "m.json")).status == 0);
  const Run r = run("oracle z " + (dir / "m.json"));
  CHECK(r.status == 2);
  CHECK(r.out.find("DomainTooLarge") != std::string::npos);
}

TEST_CASE("missing input files are runtime errors") {
  const Run r = run("oracle z /nonexistent/model.json");
  CHECK(r.status == 3);
  CHECK(r.out.find("IoFailure") != std::string::npos);
}

TEST_CASE("sampling reruns are byte identical") {
  TempDir dir;
  REQUIRE(run("gen blobs --width 24 --height 24 -o " + (dir / "m.json")).status == 0);
  const std::string base = "--seed 5 --burn-in 20 sample-prior " + (dir / "m.json") + " -o ";
  REQUIRE(run(base + (dir / "a.pgm")).status == 0);
  REQUIRE(run(base + (dir / "b.pgm") + " --threads 1").status == 0);
  CHECK(slurp(dir / "a.pgm") == slurp(dir / "b.pgm"));
  REQUIRE(run("--seed 6 --burn-in 20 sample-prior " + (dir / "m.json") + " -o " + (dir / "c.pgm")).status == 0);
  CHECK(slurp(dir / "a.pgm") != slurp(dir / "c.pgm"));

  const Run loss = run("loss " + (dir / "a.pgm") + " " + (dir / "a.pgm"));
  CHECK(loss.status == 0);
  CHECK(loss.out.find("hamming 0") != std::string::npos);
}

TEST_CASE("learn then segment end to end") {
  TempDir dir;
  REQUIRE(run("--seed 1 gen figure --parts 3 --sigma 0.05 --image " + (dir / "img.pgm") + " --truth " +
              (dir / "truth.pgm"))
              .status == 0);
  REQUIRE(run("gen potts --labels 3 --neighbourhood 4 --width 64 --height 64 -o " + (dir / "p.json")).status == 0);
  const Run la = run("--burn-in 5 learn-appearance " + (dir / "p.json") + " --image " + (dir / "img.pgm") +
                     " -o " + (dir / "pa.json"));
  CHECK(la.status == 0);
  const Run lr = run("--iters 30 learn " + (dir / "p.json") + " --labelling " + (dir / "truth.pgm") + " -o " +
                     (dir / "pl.json"));
  CHECK(lr.status == 0);
  const Run sg = run("--burn-in 10 --samples 10 segment " + (dir / "pl.json") + " " + (dir / "img.pgm") +
                     " --appearance " + (dir / "pa.json") + " -o " + (dir / "seg.pgm"));
  CHECK(sg.status == 0);
  CHECK(sg.out.find("expected_risk") != std::string::npos);
  CHECK(fs::exists(dir / "seg.pgm"));
}
