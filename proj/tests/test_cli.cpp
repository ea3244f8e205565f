#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "eagc/cli.hpp"
#include "eagc/config.hpp"
#include "eagc/errors.hpp"
#include "eagc/matrix_io.hpp"
#include "eagc/model.hpp"
#include "eagc/report.hpp"

using namespace eagc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("eagc_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json report_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::vector<std::string> small_run(const TempDir& dir) {
  return {"--out-dir", dir.path.string(), "--per-class", "12", "--num-known", "2", "--num-novel", "2",
          "--input-dim", "6", "--feature-dim", "4", "--ref-epochs", "5", "--epochs", "2",
          "--batch-size", "8", "--dense-steps", "4"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("config defaults echo the coordinator values") {
  RunConfig c = default_run_config();
  c.sync();
  const nlohmann::json e = config_echo(c);
  CHECK(e.at("lambda_a").get<double>() == 0.7);
  CHECK(e.at("lambda_p").get<double>() == 0.5);
  CHECK(e.at("eta").get<double>() == 2.0);
  CHECK(e.at("tau_s").get<double>() == 0.1);
  CHECK(e.at("num_known").get<int>() == 4);
  CHECK(e.at("num_novel").get<int>() == 4);
  CHECK(e.at("per_class").get<int>() == 50);
  CHECK(e.at("input_dim").get<int>() == 32);
  CHECK(e.at("feature_dim").get<int>() == 16);
  CHECK(e.at("eagc").get<std::string>() == "off");
  for (const ConfigKey& k : config_keys()) CHECK(e.contains(k.name));
}

TEST_CASE("config text parsing") {
  RunConfig c = default_run_config();
  apply_config_text(c, "# comment\n  lambda_a = 0.25   # trailing\n\neagc = uniform-proj\ncosine_decay = false\n");
  CHECK(c.train.coord.lambda_a == 0.25);
  CHECK(c.train.eagc == EagcMode::uniform_proj);
  CHECK_FALSE(c.train.cosine_decay);
  CHECK(find_key("lambda-a") == find_key("lambda_a"));
  CHECK(find_key("nope") == nullptr);

  CHECK_THROWS_AS(apply_config_text(c, "no_such_key = 1\n"), ArgumentError);
  CHECK_THROWS_AS(apply_config_text(c, "epochs = ten\n"), ArgumentError);
  CHECK_THROWS_AS(apply_config_text(c, "epochs\n"), ArgumentError);
  try {
    apply_config_text(c, "seed = 1\nbogus = 2\n", "f.cfg");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("f.cfg:2") != std::string::npos);
  }
  for (const ConfigKey& k : config_keys()) {
    RunConfig d = default_run_config();
    const std::string v = get_key(d, k.name);
    CHECK_NOTHROW(set_key(d, k.name, v));
    CHECK(get_key(d, k.name) == v);
  }
}

TEST_CASE("EAGC_OUT_DIR sets the default output directory") {
  ::setenv("EAGC_OUT_DIR", "/tmp/somewhere", 1);
  CHECK(default_run_config().out_dir == "/tmp/somewhere");
  ::unsetenv("EAGC_OUT_DIR");
  CHECK(default_run_config().out_dir == ".");
}

TEST_CASE("report round trip") {
  Report r;
  r.command = "train";
  r.seed = 7;
  RunConfig c = default_run_config();
  c.sync();
  r.config = config_echo(c);
  r.summary = {{"x", 0.1}, {"nan", real_or_null(std::nan(""))}, {"arr", {1, 2, 3}}};
  r.wall_clock_seconds = 1.25;
  CHECK(parse_report(serialize(r)) == r);
  CHECK_THROWS_AS(parse_report("{"), DataError);
  CHECK_THROWS_AS(parse_report("{}"), DataError);
}

TEST_CASE("three-layer precedence: flag over file over default") {
  TempDir dir("prec");
  write_text(dir / "run.cfg", "class_sep = 2.5\nnoise_std = 0.4\n");
  const Outcome o = run_cli({"gen-data", "--out-dir", dir.path.string(), "--config", dir / "run.cfg", "--class-sep",
                             "3.5"});
  REQUIRE(o.code == cli::kExitOk);
  const nlohmann::json cfg = report_json(dir / "gen-data.json").at("config");
  CHECK(cfg.at("class_sep").get<double>() == 3.5);
  CHECK(cfg.at("noise_std").get<double>() == 0.4);
  CHECK(cfg.at("per_class").get<int>() == SyntheticSpec{}.per_class);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli({}).code == cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run_cli({"gen-data", "--no-such-flag", "1"}).code == cli::kExitUsage);
  CHECK(run_cli({"gen-data", "--epochs", "many"}).code == cli::kExitUsage);
  TempDir dir("usage");
  write_text(dir / "bad.cfg", "unknown_key = 3\n");
  CHECK(run_cli({"gen-data", "--config", dir / "bad.cfg"}).code == cli::kExitUsage);
  CHECK(run_cli({"gen-data", "--config", dir / "missing.cfg"}).code == cli::kExitUsage);
  CHECK(run_cli({"train", "--out-dir", dir.path.string(), "--eagc", "sideways"}).code == cli::kExitUsage);
  CHECK(run_cli({"gen-data", "--help"}).code == cli::kExitOk);
}

TEST_CASE("gen-data: counts, no novel classes, byte-identical repeats") {
  TempDir dir("gen");
  REQUIRE(run_cli({"gen-data", "--out-dir", dir.path.string()}).code == 0);
  std::istringstream lines(slurp(dir / "dataset.txt"));
  std::string line;
  std::getline(lines, line);
  int labeled = 0, unlabeled = 0;
  while (std::getline(lines, line)) {
    std::istringstream ls(line);
    int label;
    std::string split;
    ls >> label >> split;
    (split == "L" ? labeled : unlabeled)++;
  }
  CHECK(labeled == 100);
  CHECK(unlabeled == 300);

  const std::string first = slurp(dir / "dataset.txt");
  REQUIRE(run_cli({"gen-data", "--out-dir", dir.path.string()}).code == 0);
  CHECK(slurp(dir / "dataset.txt") == first);

  REQUIRE(run_cli({"gen-data", "--out-dir", dir.path.string(), "--num-novel", "0"}).code == 0);
  std::istringstream again(slurp(dir / "dataset.txt"));
  std::getline(again, line);
  int novel = 0;
  while (std::getline(again, line)) {
    std::istringstream ls(line);
    int label, known;
    std::string split;
    ls >> label >> split >> known;
    novel += known == 0;
  }
  CHECK(novel == 0);
}

TEST_CASE("train-ref: lr 0 keeps the initialization, repeats are identical, missing data exits 2") {
  TempDir dir("ref");
  const auto base = small_run(dir);
  REQUIRE(run_cli(concat({"gen-data"}, base)).code == 0);
  REQUIRE(run_cli(concat({"train-ref"}, base)).code == 0);
  const std::string first = slurp(dir / "reference.txt");
  const nlohmann::json rep = report_json(dir / "train-ref.json");
  REQUIRE(run_cli(concat({"train-ref"}, base)).code == 0);
  CHECK(slurp(dir / "reference.txt") == first);
  nlohmann::json again = report_json(dir / "train-ref.json");
  again["wall_clock_seconds"] = rep["wall_clock_seconds"];
  CHECK(again == rep);

  REQUIRE(run_cli(concat({"train-ref", "--ref-lr", "0"}, base)).code == 0);
  const Model frozen = load_model(dir / "reference.txt");
  SeededRng enc(derive_seed(0, kStreamEncoderInit)), head(derive_seed(0, kStreamRefHead));
  const Model init = init_model(6, 4, 2, enc, head);
  CHECK(frozen.encoder == init.encoder);
  CHECK(frozen.prototypes == init.prototypes);

  CHECK(run_cli({"train-ref", "--out-dir", (dir / "empty")}).code == cli::kExitData);
}

TEST_CASE("default benchmark reference reaches 0.99 training accuracy") {
  TempDir dir("refdefault");
  for (const std::string seed : {"0", "1", "2"}) {
    REQUIRE(run_cli({"gen-data", "--out-dir", dir.path.string(), "--seed", seed}).code == 0);
    REQUIRE(run_cli({"train-ref", "--out-dir", dir.path.string(), "--seed", seed}).code == 0);
    CHECK(report_json(dir / "train-ref.json").at("summary").at("train_accuracy").get<double>() >= 0.99);
  }
}

TEST_CASE("train: outputs, determinism, echo contract, zero strengths, abort") {
  TempDir dir("train");
  const auto base = small_run(dir);
  REQUIRE(run_cli(concat({"gen-data"}, base)).code == 0);
  REQUIRE(run_cli(concat({"train-ref"}, base)).code == 0);

  REQUIRE(run_cli(concat({"train", "--eagc", "on", "--run-name", "a"}, base)).code == 0);
  REQUIRE(run_cli(concat({"train", "--eagc", "on", "--run-name", "b"}, base)).code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv").rfind("step,loss_sup,loss_unsup,gdc,soc,rho_grad,rho_in\n", 0) == 0);
  nlohmann::json ja = report_json(dir / "a.json"), jb = report_json(dir / "b.json");
  ja.erase("wall_clock_seconds");
  jb.erase("wall_clock_seconds");
  jb["config"]["run_name"] = "a";
  CHECK(ja == jb);

  REQUIRE(run_cli(concat({"train", "--eagc", "off", "--run-name", "off"}, base)).code == 0);
  const nlohmann::json on_cfg = report_json(dir / "a.json").at("config");
  const nlohmann::json off_cfg = report_json(dir / "off.json").at("config");
  for (const auto& [key, value] : on_cfg.items())
    if (key != "eagc" && key != "run_name") CHECK_MESSAGE(off_cfg.at(key) == value, key);
  CHECK(on_cfg.at("eagc") != off_cfg.at("eagc"));

  REQUIRE(run_cli(concat({"train", "--eagc", "on", "--lambda-a", "0", "--lambda-p", "0", "--run-name", "zero"}, base))
              .code == 0);
  CHECK(slurp(dir / "zero.csv") == slurp(dir / "off.csv"));

  const Outcome blown = run_cli(concat({"train", "--lr-encoder", "1e308", "--run-name", "boom"}, base));
  CHECK(blown.code == cli::kExitNumerical);
  CHECK(fs::exists(dir / "boom.csv"));
  CHECK(report_json(dir / "boom.json").at("summary").at("aborted").get<bool>());

  CHECK(run_cli({"train", "--out-dir", dir / "nowhere"}).code == cli::kExitData);
}

TEST_CASE("lemma1: ordering verdict, lambda 0, unstable step") {
  TempDir dir("lemma");
  const std::string out = dir.path.string();
  REQUIRE(run_cli({"lemma1", "--out-dir", out, "--lemma-steps", "100000"}).code == 0);
  const nlohmann::json s = report_json(dir / "lemma1.json").at("summary");
  CHECK(s.at("deviation_ordering_holds").get<bool>());
  CHECK(s.at("psd_margin").get<double>() > 0.0);

  REQUIRE(run_cli({"lemma1", "--out-dir", out, "--lambda-a", "0", "--lemma-simulate", "false"}).code == 0);
  CHECK(std::abs(report_json(dir / "lemma1.json").at("summary").at("psd_margin").get<double>()) <= 1e-15);

  const Outcome bad = run_cli({"lemma1", "--out-dir", out, "--lemma-step-size", "5"});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("unstable") != std::string::npos);
}

TEST_CASE("metrics from dumps") {
  TempDir dir("metrics");
  const std::string out = dir.path.string();
  Matrix g(2, 3);
  g << 1, 2, 3, -1, 0, 2;
  save_matrix(dir / "g.txt", g);
  REQUIRE(run_cli({"metrics", "--out-dir", out, "--g-ref", dir / "g.txt", "--g", dir / "g.txt"}).code == 0);
  CHECK(std::abs(report_json(dir / "metrics.json").at("summary").at("gdc").get<double>()) <= 1e-12);

  Matrix z_old(3, 3);
  z_old << 1, 0, 0, 0, 2, 0, 1, 1, 0;
  Matrix z_new(2, 3);
  z_new << 3, -1, 0, 0, 1, 0;
  save_matrix(dir / "zold.txt", z_old);
  save_matrix(dir / "znew.txt", z_new);
  REQUIRE(run_cli({"metrics", "--out-dir", out, "--z-new", dir / "znew.txt", "--z-old", dir / "zold.txt",
                   "--pca-k", "2"})
              .code == 0);
  CHECK(report_json(dir / "metrics.json").at("summary").at("soc").get<double>() == doctest::Approx(1.0).epsilon(1e-12));

  Matrix ones(1, 2);
  ones << 1, 1;
  Matrix p(2, 2);
  p << 1, 0, 0, 0;
  save_matrix(dir / "ones.txt", ones);
  save_matrix(dir / "p.txt", p);
  REQUIRE(run_cli({"metrics", "--out-dir", out, "--z-new", dir / "ones.txt", "--projector", dir / "p.txt"}).code == 0);
  CHECK(report_json(dir / "metrics.json").at("summary").at("soc").get<double>() == doctest::Approx(0.5).epsilon(1e-12));

  Matrix norms(1, 2);
  norms << 3, 1;
  save_matrix(dir / "norms.txt", norms);
  REQUIRE(run_cli({"metrics", "--out-dir", out, "--class-norms", dir / "norms.txt", "--num-known", "1"}).code == 0);
  CHECK(report_json(dir / "metrics.json").at("summary").at("rho_grad").get<double>() == 0.75);

  write_text(dir / "junk.txt", "2 2\n1 x\n");
  CHECK(run_cli({"metrics", "--out-dir", out, "--g-ref", dir / "junk.txt", "--g", dir / "g.txt"}).code ==
        cli::kExitData);
  CHECK(run_cli({"metrics", "--out-dir", out}).code == cli::kExitUsage);
}

TEST_CASE("metrics reads a trace CSV") {
  TempDir dir("trace");
  const auto base = small_run(dir);
  REQUIRE(run_cli(concat({"gen-data"}, base)).code == 0);
  REQUIRE(run_cli(concat({"train-ref"}, base)).code == 0);
  REQUIRE(run_cli(concat({"train", "--eagc", "on"}, base)).code == 0);
  REQUIRE(run_cli(concat({"metrics", "--trace", dir / "train.csv"}, base)).code == 0);
  const nlohmann::json m = report_json(dir / "metrics.json").at("summary").at("trace_mean");
  const nlohmann::json t = report_json(dir / "train.json").at("summary").at("window_mean");
  CHECK(m.at("gdc").get<double>() == doctest::Approx(t.at("gdc").get<double>()).epsilon(1e-12));
  CHECK(m.at("soc").get<double>() == doctest::Approx(t.at("soc").get<double>()).epsilon(1e-12));
}
