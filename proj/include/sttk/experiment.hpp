#pragma once

#include <cstdint>
#include <string>

#include "sttk/corpus.hpp"
#include "sttk/optimizer.hpp"
#include "sttk/selftrain.hpp"

namespace sttk {

// Everything one experiment run needs, loadable from a sectioned key=value
// file. Round-trips losslessly through save/load.
struct ExperimentConfig {
  // [experiment]
  TaskKind task = TaskKind::sequence;
  uint64_t seed = 0;
  bool repair = false;  // repair illegal BIO transitions on load

  // [paths]
  std::string train;
  std::string dev;
  std::string test;
  std::string unlabeled;
  std::string scheme;  // label-scheme file, sequence task only
  std::string out;     // output directory

  // [learner]
  int epochs = 20;  // plain-training epochs; self-training uses k_epochs
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int batch_size = 8;

  // [selftrain]
  std::string policy = "threshold";  // threshold | top_k | class_balanced
  double tau = 0.9;
  int s = 100;
  int k_epochs = 5;
  int max_iterations = 50;
  int patience = 10;
  bool warm_start = true;

  bool operator==(const ExperimentConfig&) const = default;

  TrainOptions train_options() const;
  SelfTrainConfig selftrain_config() const;
};

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& config,
                            const std::string& path);

// Canonical serialization (also what save_experiment_config writes).
std::string serialize_experiment_config(const ExperimentConfig& config);

// FNV-1a over the canonical serialization; embedded in reports so a result
// can be traced back to its exact configuration.
std::string config_hash(const ExperimentConfig& config);

}  // namespace sttk
