#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "aiig/checkpoint.hpp"
#include "aiig/config.hpp"
#include "aiig/run_io.hpp"

using namespace aiig;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::current_path() / "io_scratch") {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("checkpoints round-trip every parameter bit-for-bit") {
  Scratch scratch;
  std::mt19937_64 rng(123);
  DenseNet dense = DenseNet::make_random({7, 64, 64, 6}, Head::Softmax, rng);
  RecurrentNet gru = RecurrentNet::make_random(12, 32, 6, Head::Softmax, rng);
  // Make sure awkward values survive: subnormals, negatives, exact zero.
  dense.params[0] = 5e-324;
  dense.params[1] = -0.1;
  dense.params[2] = 0.0;
  dense.params[3] = 1.0 / 3.0;

  Checkpoint out;
  out.meta["seed"] = "42";
  out.meta["epoch"] = "7";
  out.add_dense("actor", dense);
  out.add_recurrent("memory", gru);
  const fs::path path = scratch.dir / "test.ckpt";
  save_checkpoint(out, path.string());

  const Checkpoint in = load_checkpoint(path.string());
  CHECK(in.meta.at("seed") == "42");
  CHECK(in.meta.at("epoch") == "7");
  REQUIRE(in.has("actor"));
  REQUIRE(in.has("memory"));
  CHECK_FALSE(in.has("missing"));
  CHECK_THROWS_AS(in.entry("missing"), std::out_of_range);

  const DenseNet d2 = in.get_dense("actor");
  CHECK(d2.layer_sizes == dense.layer_sizes);
  CHECK(d2.head == Head::Softmax);
  REQUIRE(d2.params.size() == dense.params.size());
  for (std::size_t i = 0; i < dense.params.size(); ++i) {
    REQUIRE(d2.params[i] == dense.params[i]);  // exact, not approximate
  }
  const RecurrentNet g2 = in.get_recurrent("memory");
  CHECK(g2.hidden_size == 32);
  REQUIRE(g2.params == gru.params);

  // Kind confusion is an error, as is loading garbage.
  CHECK_THROWS_AS(in.get_dense("memory"), std::invalid_argument);
  const fs::path junk = scratch.dir / "junk.ckpt";
  std::ofstream(junk) << "not a checkpoint\n";
  CHECK_THROWS_AS(load_checkpoint(junk.string()), std::runtime_error);

  // A truncated file must be rejected, not silently half-loaded.
  std::ifstream is(path);
  std::string full((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const fs::path cut = scratch.dir / "cut.ckpt";
  std::ofstream(cut) << full.substr(0, full.size() / 2);
  CHECK_THROWS_WITH_AS(load_checkpoint(cut.string()), doctest::Contains("truncated"),
                       std::runtime_error);
}

TEST_CASE("format_double is shortest-round-trip exact") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 0.0, 123456789.123456}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("CSV writer and reader agree, including empty cells") {
  Scratch scratch;
  const fs::path path = scratch.dir / "t.csv";
  {
    CsvWriter w(path, {"a", "b", "c"});
    w.row({std::string("x"), 1.5, 7});
    w.row({std::string(""), 0.25, -1});
    CHECK_THROWS_AS(w.row({std::string("short")}), std::invalid_argument);
    w.flush();
  }
  const CsvTable t = read_csv(path);
  REQUIRE(t.columns == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.column_index("b") == 1);
  CHECK(t.column_index("zzz") == -1);
  CHECK(t.as_double(0, 1) == doctest::Approx(1.5));
  CHECK(t.rows[1][0].empty());
  CHECK(std::isnan(t.as_double(1, 0)));  // empty cell reads as NaN
}

TEST_CASE("manifest verification flags tampering and omissions") {
  Scratch scratch;
  const fs::path f1 = scratch.dir / "one.txt";
  const fs::path f2 = scratch.dir / "sub" / "two.txt";
  fs::create_directories(f2.parent_path());
  std::ofstream(f1) << "alpha";
  std::ofstream(f2) << "beta";

  const fs::path mani = scratch.dir / "manifest.txt";
  write_manifest(mani, scratch.dir, {f1, f2});
  CHECK(verify_manifest(mani, scratch.dir).empty());

  std::ofstream(f1) << "tampered";
  auto bad = verify_manifest(mani, scratch.dir);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].find("one.txt") != std::string::npos);

  fs::remove(f2);
  bad = verify_manifest(mani, scratch.dir);
  CHECK(bad.size() == 2);

  // Known digest: sha1("abc").
  CHECK(sha1_hex("abc", 3) == "a9993e364706816aba3e25717850c26c9cd0d89d");
}

TEST_CASE("config parsing rejects unknown keys and wrong types by path") {
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"sed": 1})")),
                       doctest::Contains("unknown config key 'sed'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      ExperimentConfig::from_json(nlohmann::json::parse(R"({"env": {"maxsteps": 2}})")),
      doctest::Contains("env.maxsteps"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      ExperimentConfig::from_json(nlohmann::json::parse(R"({"seed": "abc"})")),
      doctest::Contains("'seed' has the wrong type"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      ExperimentConfig::from_json(
          nlohmann::json::parse(R"({"ensemble": {"distill": {"steps": -1}}})")),
      doctest::Contains("ensemble.distill.steps"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      ExperimentConfig::from_json(nlohmann::json::parse(R"({"single_gamma": 1.0})")),
      doctest::Contains("single_gamma"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      ExperimentConfig::from_json(nlohmann::json::parse(R"({"mode": "psychic"})")),
      doctest::Contains("psychic"), std::invalid_argument);
}

TEST_CASE("config to_json echoes every field back through from_json") {
  ExperimentConfig cfg;
  cfg.seed = 77;
  cfg.mode = PolicyMode::Recurrent;
  cfg.variant = Variant::SingleGamma;
  cfg.single_gamma = 0.997;
  cfg.epochs = 3;
  cfg.deterministic = true;
  cfg.env.max_steps = 25;
  cfg.learner.batch_size = 32;
  cfg.ensemble.gammas = {0.9, 0.99};
  cfg.ensemble.distill.steps = 42;
  cfg.meta.proposals = 5;

  const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.seed == 77);
  CHECK(back.mode == PolicyMode::Recurrent);
  CHECK(back.variant == Variant::SingleGamma);
  CHECK(back.single_gamma == doctest::Approx(0.997));
  CHECK(back.epochs == 3);
  CHECK(back.deterministic);
  CHECK(back.env.max_steps == 25);
  CHECK(back.learner.batch_size == 32);
  CHECK(back.ensemble.gammas == std::vector<double>{0.9, 0.99});
  CHECK(back.ensemble.distill.steps == 42);
  CHECK(back.meta.proposals == 5);
}

TEST_CASE("variant gating matches the experiment matrix") {
  ExperimentConfig cfg;
  cfg.variant = Variant::Full;
  CHECK(cfg.population_gammas().size() == 4);
  CHECK(cfg.evolution_active());
  CHECK(cfg.meta_active());

  cfg.variant = Variant::NoEO;
  CHECK(cfg.population_gammas().size() == 4);
  CHECK(cfg.evolution_active());
  CHECK_FALSE(cfg.meta_active());

  cfg.variant = Variant::NoEONoCE;
  CHECK(cfg.population_gammas() == std::vector<double>{cfg.single_gamma});
  CHECK_FALSE(cfg.evolution_active());
  CHECK_FALSE(cfg.meta_active());

  cfg.variant = Variant::SingleGamma;
  cfg.single_gamma = 0.9;
  CHECK(cfg.population_gammas() == std::vector<double>{0.9});
  CHECK_FALSE(cfg.evolution_active());
  CHECK_FALSE(cfg.meta_active());

  CHECK(run_dir_name(cfg) == "belief-single_gamma-g0.9-seed1");
  cfg.variant = Variant::Full;
  cfg.mode = PolicyMode::Recurrent;
  cfg.seed = 12;
  CHECK(run_dir_name(cfg) == "recurrent-full-seed12");
}
