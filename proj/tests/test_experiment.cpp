#include "sttk/experiment.hpp"

#include <doctest.h>

#include "sttk/errors.hpp"
#include "test_util.hpp"

using namespace sttk;

TEST_CASE("experiment config round-trips losslessly") {
  ExperimentConfig config;
  config.task = TaskKind::classification;
  config.seed = 1234567890123ull;
  config.repair = true;
  config.train = "data/train.tsv";
  config.dev = "data/dev.tsv";
  config.test = "data/test.tsv";
  config.unlabeled = "data/pool.tsv";
  config.scheme = "data/ner.labels";
  config.out = "out/run1";
  config.epochs = 17;
  config.learning_rate = 0.12345678901234567;
  config.l2 = 3.3e-5;
  config.batch_size = 4;
  config.policy = "class_balanced";
  config.tau = 0.85;
  config.s = 64;
  config.k_epochs = 7;
  config.max_iterations = 33;
  config.patience = 4;
  config.warm_start = false;

  testutil::TempDir dir;
  save_experiment_config(config, dir.file("run.ini"));
  ExperimentConfig loaded = load_experiment_config(dir.file("run.ini"));
  CHECK(loaded == config);
  CHECK(config_hash(loaded) == config_hash(config));

  loaded.seed += 1;
  CHECK(config_hash(loaded) != config_hash(config));
}

TEST_CASE("experiment config parser errors") {
  testutil::TempDir dir;
  CHECK_THROWS_AS(load_experiment_config(dir.file("missing.ini")),
                  ConfigError);

  auto bad_key = testutil::write_file(dir, "a.ini",
                                      "[experiment]\nwat = 1\n");
  CHECK_THROWS_AS(load_experiment_config(bad_key), ConfigError);

  auto bad_value = testutil::write_file(dir, "b.ini",
                                        "[learner]\nepochs = soon\n");
  CHECK_THROWS_AS(load_experiment_config(bad_value), ConfigError);

  auto bad_task = testutil::write_file(dir, "c.ini",
                                       "[experiment]\ntask = regression\n");
  CHECK_THROWS_AS(load_experiment_config(bad_task), ConfigError);

  auto no_eq = testutil::write_file(dir, "d.ini", "[experiment]\nseed 3\n");
  CHECK_THROWS_AS(load_experiment_config(no_eq), ConfigError);

  // comments and blank lines are fine
  auto ok = testutil::write_file(dir, "e.ini",
                                 "# run\n\n[experiment]\nseed = 3\n"
                                 "; another comment\n[selftrain]\ntau = 0.8\n");
  ExperimentConfig config = load_experiment_config(ok);
  CHECK(config.seed == 3);
  CHECK(config.tau == 0.8);
}

TEST_CASE("selftrain_config maps policy names and seeds") {
  ExperimentConfig config;
  config.policy = "top_k";
  config.s = 50;
  config.seed = 77;
  config.k_epochs = 5;
  SelfTrainConfig st = config.selftrain_config();
  CHECK(st.policy == SelectionPolicy::top_k);
  CHECK(st.top_s == 50);
  CHECK(st.seed == 77);
  CHECK(st.learner.seed == 77);
  CHECK(st.epochs_per_iteration == 5);

  config.policy = "mystery";
  CHECK_THROWS_AS(config.selftrain_config(), ConfigError);
}
