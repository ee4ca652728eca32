#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("polyscale_unit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" + std::string(POLYSCALE_CLI) + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Synthetic corpus plus a tiny training config, shared by the cases below.
fs::path prepared() {
  static const fs::path dir = [] {
    auto d = scratch("cli");
    write(d / "synth.yaml",
          "synth: {documents: 24, languages: [en], parties_per_country: 6, embedding_dim: 6}\n");
    REQUIRE(cli("synth --config " + (d / "synth.yaml").string() + " --out " + (d / "syn").string()) == 0);
    write(d / "train.yaml",
          "seed: 2\n"
          "data: {corpus: syn/corpus.jsonl, party_graph: syn/party_graph.tsv}\n"
          "model: {word_hidden: 4, sentence_hidden: 4, embedding_dim: 6, epochs: 1}\n");
    return d;
  }();
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth, train and predict succeed") {
  const auto d = prepared();
  CHECK(fs::exists(d / "syn/corpus.jsonl"));
  CHECK(fs::exists(d / "syn/config.yaml"));
  const auto cfg = (d / "train.yaml").string();
  REQUIRE(cli("train --config " + cfg + " --out " + (d / "m").string()) == 0);
  CHECK(fs::exists(d / "m/model.ckpt"));
  write(d / "predict.yaml", slurp(d / "train.yaml") + "predict: {checkpoint: m/model.ckpt}\n");
  CHECK(cli("predict --config " + (d / "predict.yaml").string() + " --out " + (d / "p1").string()) == 0);
  CHECK(fs::exists(d / "p1/predictions.jsonl"));
}

TEST_CASE("worker cap does not change results") {
  const auto d = prepared();
  const auto cfg = (d / "train.yaml").string();
  REQUIRE(cli("train --config " + cfg + " --out " + (d / "m1").string(), "POLYSCALE_THREADS=1") == 0);
  REQUIRE(cli("train --config " + cfg + " --out " + (d / "m4").string(), "POLYSCALE_THREADS=4") == 0);
  CHECK(slurp(d / "m1/model.ckpt") == slurp(d / "m4/model.ckpt"));
}

TEST_CASE("validation errors exit with 2") {
  const auto d = prepared();
  CHECK(cli("train --config " + (d / "nope.yaml").string() + " --out " + (d / "x").string()) == 2);
  CHECK(cli("train --bogus") == 2);
  CHECK(cli("") == 2);
  write(d / "alpha.yaml", "data: {corpus: syn/corpus.jsonl}\nmodel: {alpha: 2}\n");
  CHECK(cli("train --config " + (d / "alpha.yaml").string() + " --out " + (d / "x").string()) == 2);
  write(d / "unknown.yaml", "data: {corpus: syn/corpus.jsonl}\nmodel: {colour: red}\n");
  CHECK(cli("train --config " + (d / "unknown.yaml").string() + " --out " + (d / "x").string()) == 2);
  write(d / "typo.yaml", "data: {corpus: syn/corpus.jsonl}\nmodle: {epochs: 1}\n");
  CHECK(cli("train --config " + (d / "typo.yaml").string() + " --out " + (d / "x").string()) == 2);
  write(d / "missing.yaml", "data: {corpus: syn/absent.jsonl}\n");
  CHECK(cli("train --config " + (d / "missing.yaml").string() + " --out " + (d / "x").string()) == 2);
  write(d / "syntax.yaml", "model: {alpha: [\n");
  CHECK(cli("train --config " + (d / "syntax.yaml").string() + " --out " + (d / "x").string()) == 2);
}

TEST_CASE("a failing stage exits with 3") {
  const auto d = prepared();
  write(d / "plainfile", "x");
  CHECK(cli("train --config " + (d / "train.yaml").string() + " --out " + (d / "plainfile/sub").string()) == 3);
}

}  // TEST_SUITE
