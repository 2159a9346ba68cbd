#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ginv/config.hpp>

using namespace ginv;

TEST_CASE("config parse -> serialize -> parse roundtrip is identity") {
  ExperimentConfig cfg;
  cfg.task = "area";
  cfg.arch = "conv-ginv";
  cfg.poly = "PZ3";
  cfg.seeds = {3, 1, 4};
  cfg.lr = 5e-4;
  cfg.apply_defaults();
  auto text = serialize_config(cfg);
  auto back = parse_config_text(text);
  back.apply_defaults();
  CHECK(serialize_config(back) == text);
  CHECK(back.task == "area");
  CHECK(back.arch == "conv-ginv");
  CHECK(back.n == 4);
  CHECK(back.n_in == 2);
  CHECK(back.n_mid == 2);
  CHECK(back.epochs == 300);
  CHECK(back.seeds == std::vector<std::uint64_t>{3, 1, 4});
  CHECK(back.lr == 5e-4);
}

TEST_CASE("task defaults follow the published setups") {
  ExperimentConfig poly;
  poly.task = "poly";
  poly.arch = "fc-ginv";
  poly.apply_defaults();
  CHECK(poly.n == 5);
  CHECK(poly.n_in == 1);
  CHECK(poly.n_mid == 64);
  CHECK(poly.epochs == 2500);
  CHECK(poly.train_count == 16);
  CHECK(poly.val_count == 480);
  CHECK(poly.test_count == 4800);
  CHECK(poly.group == "Z5");
  CHECK(poly.data_seed == 444);

  ExperimentConfig conv;
  conv.task = "poly";
  conv.arch = "conv-ginv";
  conv.apply_defaults();
  CHECK(conv.n_mid == 118);

  ExperimentConfig area;
  area.task = "area";
  area.arch = "fc-gavg";
  area.apply_defaults();
  CHECK(area.n == 4);
  CHECK(area.n_in == 2);
  CHECK(area.epochs == 300);
  CHECK(area.train_count == 256);
  CHECK(area.test_count == 1024);
  CHECK(area.group == "Z4");

  ExperimentConfig pd8;
  pd8.task = "poly";
  pd8.arch = "fc-ginv";
  pd8.poly = "PD8";
  pd8.apply_defaults();
  CHECK(pd8.group == "D8xT1");
}

TEST_CASE("unknown keys and sections are rejected with line numbers") {
  CHECK_THROWS_WITH_AS(parse_config_text("[experiment]\nnope = 1\n", "f.txt"),
                       doctest::Contains("f.txt:2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[weird]\n", "f.txt"), doctest::Contains("unknown section"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("task = poly\n", "f.txt"),
                       doctest::Contains("before any"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[train]\nepochs = x\n", "f.txt"),
                       doctest::Contains("bad value"), ConfigError);
}

TEST_CASE("comments and blank lines are ignored") {
  auto cfg = parse_config_text("# header\n\n[train]\nepochs = 7  # trailing\n");
  CHECK(cfg.epochs == 7);
}

TEST_CASE("invalid precision rejected at defaulting time") {
  ExperimentConfig cfg;
  cfg.precision = "f16";
  CHECK_THROWS_AS(cfg.apply_defaults(), ConfigError);
}

TEST_CASE("make_dataset respects the config") {
  ExperimentConfig cfg;
  cfg.task = "poly";
  cfg.arch = "fc-ginv";
  cfg.poly = "PS4";
  cfg.train_count = 4;
  cfg.val_count = 3;
  cfg.test_count = 2;
  cfg.apply_defaults();
  auto ds = cfg.make_dataset();
  CHECK(ds.train.count() == 4);
  CHECK(ds.val.count() == 3);
  CHECK(ds.test.count() == 2);
  CHECK(ds.poly == "PS4");
}
