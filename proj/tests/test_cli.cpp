#include "flowartist/serialize.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <unistd.h>

using namespace flowartist;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path root;
  explicit TempDir(const std::string& name) {
    root = fs::temp_directory_path() /
           ("flowartist_cli_" + std::to_string(::getpid()) + "_" + name);
    fs::create_directories(root);
  }
  ~TempDir() { fs::remove_all(root); }
  std::string sub(const std::string& name) const { return (root / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + FLOWARTIST_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("the full pipeline runs through the command line", "[cli]") {
  TempDir tmp("pipeline");
  const std::string gen = tmp.sub("gen");
  REQUIRE(run_cli("generate --shape circle --n 30 --seed 3 --out " + gen) == 0);
  REQUIRE(read_lines(gen + "/dataset.csv").size() == 31);
  REQUIRE(load_json(gen + "/run.json").at("command") == "generate");

  const std::string graph = tmp.sub("graph");
  REQUIRE(run_cli("build-graph --in " + gen + "/dataset.csv --k 5 --m 8 --out " + graph) == 0);
  REQUIRE(read_lines(graph + "/affinity.csv").size() == 31);
  REQUIRE(read_lines(graph + "/neighborhoods.csv").size() == 31);
  REQUIRE(read_lines(graph + "/diffusion_coords.csv").size() == 31);
  REQUIRE(read_lines(graph + "/eigenvalues.csv").size() == 9);

  const std::string emb = tmp.sub("emb");
  REQUIRE(run_cli("embed --in " + gen + "/dataset.csv --epochs 2 --k 4 --n-random 3 "
                  "--m 8 --xi-hidden 8 --psi-hidden 8 --seed 5 --out " + emb) == 0);
  const auto embedding = read_lines(emb + "/embedding.csv");
  REQUIRE(embedding[0] == "id,e0,e1,psi0,psi1");
  REQUIRE(embedding.size() == 31);
  REQUIRE(load_json(emb + "/result.json").at("format") == "flowartist-result");
  REQUIRE(load_json(emb + "/xi.json").at("format") == "flowartist-mlp");
  REQUIRE(load_json(emb + "/psi.json").at("format") == "flowartist-mlp");

  const std::string ev = tmp.sub("ev");
  REQUIRE(run_cli("eval --dataset " + gen + "/dataset.csv --result " + emb +
                  " --entropy-t 2,4 --out " + ev) == 0);
  const Json metrics = load_json(ev + "/metrics.json");
  REQUIRE(metrics.contains("stress"));
  REQUIRE(metrics.contains("flow_cosine"));
  REQUIRE(metrics.at("diffusion_entropies").contains("2"));

  const std::string dif = tmp.sub("dif");
  REQUIRE(run_cli("diffuse --in " + gen + "/dataset.csv --t 3,6 --out " + dif) == 0);
  REQUIRE(read_lines(dif + "/entropies.csv").size() == 3);
  REQUIRE(fs::exists(dif + "/distribution_t3.csv"));
  REQUIRE(fs::exists(dif + "/heat_t6.svg"));

  const std::string plots = tmp.sub("plots");
  REQUIRE(run_cli("plot --result " + emb + " --mode scatter --out " + plots) == 0);
  REQUIRE(slurp(plots + "/plot_scatter.svg").rfind("<svg", 0) == 0);
  REQUIRE(run_cli("plot --result " + emb + " --mode quiver --grid 6 --out " + plots) == 0);
  REQUIRE(slurp(plots + "/plot_quiver.svg").find("<line") != std::string::npos);
}

TEST_CASE("eval reports strand accuracies for two-class datasets", "[cli]") {
  TempDir tmp("strand");
  const std::string gen = tmp.sub("gen");
  REQUIRE(run_cli("generate --shape double_helix --n 40 --noise-sigma 0.1 --seed 21 "
                  "--out " + gen) == 0);
  const std::string emb = tmp.sub("emb");
  REQUIRE(run_cli("embed --in " + gen + "/dataset.csv --epochs 2 --k 4 --n-random 3 "
                  "--m 8 --xi-hidden 8 --psi-hidden 8 --seed 5 --out " + emb) == 0);
  const std::string ev = tmp.sub("ev");
  REQUIRE(run_cli("eval --dataset " + gen + "/dataset.csv --result " + emb + " --out " +
                  ev) == 0);
  const Json metrics = load_json(ev + "/metrics.json");
  REQUIRE(metrics.contains("strand_accuracy_plain"));
  REQUIRE(metrics.contains("strand_accuracy_velocity"));
  const double plain = metrics.at("strand_accuracy_plain").get<double>();
  const double velocity = metrics.at("strand_accuracy_velocity").get<double>();
  REQUIRE((plain >= 0.0 && plain <= 1.0));
  REQUIRE((velocity >= 0.0 && velocity <= 1.0));
}

TEST_CASE("rerunning from a run config reproduces outputs byte for byte", "[cli]") {
  TempDir tmp("rerun");
  const std::string gen = tmp.sub("gen");
  REQUIRE(run_cli("generate --shape circle --n 24 --seed 11 --out " + gen) == 0);
  const std::string r1 = tmp.sub("r1");
  REQUIRE(run_cli("embed --in " + gen + "/dataset.csv --epochs 3 --k 4 --n-random 3 "
                  "--m 8 --xi-hidden 10 --psi-hidden 10 --seed 7 --out " + r1) == 0);
  const std::string r2 = tmp.sub("r2");
  REQUIRE(run_cli("embed --config " + r1 + "/run.json --out " + r2) == 0);
  REQUIRE(slurp(r1 + "/embedding.csv") == slurp(r2 + "/embedding.csv"));
  REQUIRE(slurp(r1 + "/xi.json") == slurp(r2 + "/xi.json"));
}

TEST_CASE("missing input files exit with status 2", "[cli]") {
  TempDir tmp("missing");
  REQUIRE(run_cli("embed --in " + tmp.sub("nowhere.csv") + " --out " + tmp.sub("o")) == 2);
  REQUIRE(run_cli("eval --dataset " + tmp.sub("nowhere.csv") + " --result " +
                  tmp.sub("empty")) == 2);
  REQUIRE(run_cli("plot --result " + tmp.sub("empty") + " --mode scatter --out " +
                  tmp.sub("p")) == 2);
}

TEST_CASE("bad arguments exit with status 2", "[cli]") {
  TempDir tmp("badargs");
  REQUIRE(run_cli("generate --frobnicate --out " + tmp.sub("g")) == 2);
  REQUIRE(run_cli("generate --shape dodecahedron --out " + tmp.sub("g")) == 2);
  REQUIRE(run_cli("") == 2);  // a subcommand is required
  REQUIRE(run_cli("--help") == 0);
}
