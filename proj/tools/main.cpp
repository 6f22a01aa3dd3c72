#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sttk/corpus.hpp"
#include "sttk/crf.hpp"
#include "sttk/errors.hpp"
#include "sttk/eval.hpp"
#include "sttk/experiment.hpp"
#include "sttk/maxent.hpp"
#include "sttk/model_file.hpp"
#include "sttk/selftrain.hpp"
#include "sttk/synthgen.hpp"

namespace fs = std::filesystem;
using namespace sttk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Overrides {
  std::optional<uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<double> tau;
  std::optional<int> s;
  std::optional<int> k_epochs;
  std::optional<int> max_iters;
  std::optional<int> patience;
  std::optional<bool> warm_start;
};

ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
  ExperimentConfig config = load_experiment_config(path);
  if (ov.seed) config.seed = *ov.seed;
  if (ov.policy) config.policy = *ov.policy;
  if (ov.tau) config.tau = *ov.tau;
  if (ov.s) config.s = *ov.s;
  if (ov.k_epochs) config.k_epochs = *ov.k_epochs;
  if (ov.max_iters) config.max_iterations = *ov.max_iters;
  if (ov.patience) config.patience = *ov.patience;
  if (ov.warm_start) config.warm_start = *ov.warm_start;
  return config;
}

void require_path(const std::string& value, const std::string& name) {
  if (value.empty())
    throw ConfigError("config is missing the " + name + " path");
  if (!fs::exists(value))
    throw ConfigError(name + " path does not exist: " + value);
}

LabelScheme scheme_for(const ExperimentConfig& config) {
  require_path(config.scheme, "scheme");
  return read_label_scheme(config.scheme);
}

LabelScheme scheme_from_labels(const std::vector<std::string>& labels) {
  LabelScheme scheme;
  scheme.labels = labels;
  scheme.kind = infer_scheme_kind(labels);
  scheme.validate();
  return scheme;
}

struct LoadedData {
  Corpus train;
  Corpus dev;   // may be empty
  Corpus test;  // may be empty
};

LoadedData load_datasets(const ExperimentConfig& config, bool need_test) {
  LoadedData data;
  require_path(config.train, "train");
  if (config.task == TaskKind::sequence) {
    LabelScheme scheme = scheme_for(config);
    data.train = read_sequence_corpus(config.train, scheme, config.repair);
    if (!config.dev.empty()) {
      require_path(config.dev, "dev");
      data.dev = read_sequence_corpus(config.dev, scheme, config.repair);
    }
    if (need_test) {
      require_path(config.test, "test");
      data.test = read_sequence_corpus(config.test, scheme, config.repair);
    }
  } else {
    data.train = read_text_corpus(config.train, true);
    if (!config.dev.empty()) {
      require_path(config.dev, "dev");
      data.dev = read_text_corpus(config.dev, true);
      data.dev.label_set = data.train.label_set;
    }
    if (need_test) {
      require_path(config.test, "test");
      data.test = read_text_corpus(config.test, true);
      data.test.label_set = data.train.label_set;
    }
  }
  return data;
}

// Token-level per-label report for flat sequence schemes: every token scored
// as one classification decision.
EvalReport flat_token_report(const Corpus& gold,
                             const std::vector<std::vector<std::string>>& pred) {
  Corpus token_gold;
  token_gold.task_kind = TaskKind::classification;
  token_gold.label_set = gold.label_set;
  std::vector<std::string> token_pred;
  int id = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    for (size_t j = 0; j < gold.examples[i].labels.size(); ++j) {
      Example tok;
      tok.id = id++;
      tok.tokens.push_back(gold.examples[i].tokens[j]);
      tok.labels.push_back(gold.examples[i].labels[j]);
      token_gold.examples.push_back(std::move(tok));
      token_pred.push_back(pred[i][j]);
    }
  }
  return classification_macro_f1(token_gold, token_pred);
}

EvalReport evaluate_crf(const CrfModel& model, const Corpus& test) {
  std::vector<std::vector<std::string>> preds;
  preds.reserve(test.size());
  for (const auto& example : test.examples) {
    preds.push_back(viterbi(model, example.tokens).labels);
  }
  if (infer_scheme_kind(test.label_set) == SchemeKind::bio_chunked) {
    return entity_f1(test, preds);
  }
  return flat_token_report(test, preds);
}

EvalReport evaluate_maxent(const MaxentModel& model, const Corpus& test) {
  std::vector<std::string> preds;
  preds.reserve(test.size());
  for (const auto& example : test.examples) {
    preds.push_back(predict_proba(model, example.tokens).label);
  }
  return classification_macro_f1(test, preds);
}

void write_report(const EvalReport& report, const std::string& hash,
                  const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream txt(out_dir / "report.txt");
  txt << "config_hash " << hash << "\n" << render_report(report);
  std::ofstream kv(out_dir / "report.kv");
  kv << "config_hash=" << hash << "\n" << render_report_kv(report);
  std::cout << "config_hash " << hash << "\n"
            << render_report(report) << std::flush;
}

int cmd_train(const std::string& config_path, const Overrides& ov) {
  ExperimentConfig config = load_config(config_path, ov);
  if (config.out.empty()) throw ConfigError("config is missing the out path");
  LoadedData data = load_datasets(config, true);

  fs::create_directories(config.out);
  EvalReport report;
  if (config.task == TaskKind::sequence) {
    CrfModel model = crf_train(data.train, data.dev, config.train_options());
    save_crf(model, (fs::path(config.out) / "model.bin").string());
    report = evaluate_crf(model, data.test);
  } else {
    MaxentModel model =
        maxent_train(data.train, data.dev, config.train_options());
    save_maxent(model, (fs::path(config.out) / "model.bin").string());
    report = evaluate_maxent(model, data.test);
  }
  write_report(report, config_hash(config), config.out);
  return kExitOk;
}

int cmd_selftrain(const std::string& config_path, const Overrides& ov) {
  ExperimentConfig config = load_config(config_path, ov);
  if (config.out.empty()) throw ConfigError("config is missing the out path");
  SelfTrainConfig st = config.selftrain_config();

  LoadedData data = load_datasets(config, true);
  if (data.dev.empty())
    throw ConfigError("self-training needs a dev corpus for model selection");
  require_path(config.unlabeled, "unlabeled");

  Corpus pool;
  if (config.task == TaskKind::sequence) {
    pool = read_sequence_corpus(config.unlabeled, scheme_for(config), false);
  } else {
    pool = read_text_corpus(config.unlabeled, false);
  }

  LearnerKind learner = config.task == TaskKind::sequence ? LearnerKind::crf
                                                          : LearnerKind::maxent;
  SelfTrainResult result =
      self_train(st, data.train, pool, data.dev, learner);

  fs::create_directories(config.out);
  std::ofstream log(fs::path(config.out) / "iterations.log");
  for (const auto& record : result.state.log) {
    log << render_iteration_record(record) << "\n";
  }

  EvalReport report;
  if (learner == LearnerKind::crf) {
    save_crf(*result.crf, (fs::path(config.out) / "model.bin").string());
    report = evaluate_crf(*result.crf, data.test);
  } else {
    save_maxent(*result.maxent,
                (fs::path(config.out) / "model.bin").string());
    report = evaluate_maxent(*result.maxent, data.test);
  }
  write_report(report, config_hash(config), config.out);
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& test_path) {
  require_path(model_path, "model");
  require_path(test_path, "test");
  EvalReport report;
  if (model_file_kind(model_path) == "crf") {
    CrfModel model = load_crf(model_path);
    Corpus test = read_sequence_corpus(
        test_path, scheme_from_labels(model.labels), false);
    report = evaluate_crf(model, test);
  } else {
    MaxentModel model = load_maxent(model_path);
    Corpus test = read_text_corpus(test_path, true);
    for (const auto& cls : test.label_set) {
      if (model.class_index(cls) < 0)
        throw DataError("test class '" + cls + "' unknown to the model");
    }
    test.label_set = model.classes;
    report = evaluate_maxent(model, test);
  }
  std::cout << render_report(report) << std::flush;
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& input_path,
                const std::string& output_path) {
  require_path(model_path, "model");
  require_path(input_path, "input");
  if (model_file_kind(model_path) == "crf") {
    CrfModel model = load_crf(model_path);
    Corpus input = read_sequence_corpus(
        input_path, scheme_from_labels(model.labels), false);
    Corpus output = input;
    for (auto& example : output.examples) {
      example.labels = viterbi(model, example.tokens).labels;
    }
    write_sequence_corpus(output, output_path);
  } else {
    MaxentModel model = load_maxent(model_path);
    Corpus input = read_text_corpus(input_path, false);
    Corpus output = input;
    for (auto& example : output.examples) {
      example.labels = {predict_proba(model, example.tokens).label};
    }
    write_text_corpus(output, output_path);
  }
  return kExitOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              size_t n_source, size_t n_unlabeled, size_t n_test,
              std::optional<uint64_t> seed) {
  require_path(spec_path, "spec");
  ShiftSpec spec = load_shift_spec(spec_path);
  if (seed) spec.seed = *seed;
  SynthOutput out = generate(spec, n_source, n_unlabeled, n_test);

  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  if (spec.task == TaskKind::sequence) {
    write_sequence_corpus(out.source_labeled, (dir / "source.tsv").string());
    write_sequence_corpus(out.target_unlabeled,
                          (dir / "unlabeled.tsv").string());
    write_sequence_corpus(out.target_test, (dir / "target_test.tsv").string());
    LabelScheme scheme = scheme_from_labels(spec.labels);
    write_label_scheme(scheme, (dir / "scheme.labels").string());
  } else {
    write_text_corpus(out.source_labeled, (dir / "source.tsv").string());
    write_text_corpus(out.target_unlabeled, (dir / "unlabeled.tsv").string());
    write_text_corpus(out.target_test, (dir / "target_test.tsv").string());
  }
  std::cout << "wrote " << out.source_labeled.size() << " source, "
            << out.target_unlabeled.size() << " unlabeled, "
            << out.target_test.size() << " target-test examples to "
            << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-training toolkit for cross-domain sequence labeling "
               "and text classification"};
  app.require_subcommand(1);

  std::string config_path, model_path, test_path, input_path, output_path;
  std::string spec_path, out_dir;
  size_t n_source = 300, n_unlabeled = 400, n_test = 300;
  Overrides ov;
  uint64_t seed_value = 0;
  std::string policy_value;
  double tau_value = 0.0;
  int s_value = 0, k_value = 0, iters_value = 0, patience_value = 0;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_value, "override the config seed")
        ->each([&](const std::string&) { ov.seed = seed_value; });
    cmd->add_option("--policy", policy_value,
                    "threshold | top_k | class_balanced")
        ->each([&](const std::string&) { ov.policy = policy_value; });
    cmd->add_option("--tau", tau_value, "confidence threshold")
        ->each([&](const std::string&) { ov.tau = tau_value; });
    cmd->add_option("--s", s_value, "selection budget S")
        ->each([&](const std::string&) { ov.s = s_value; });
    cmd->add_option("--k-epochs", k_value, "epochs per iteration")
        ->each([&](const std::string&) { ov.k_epochs = k_value; });
    cmd->add_option("--max-iters", iters_value, "max outer iterations")
        ->each([&](const std::string&) { ov.max_iters = iters_value; });
    cmd->add_option("--patience", patience_value,
                    "non-improving iterations before stopping")
        ->each([&](const std::string&) { ov.patience = patience_value; });
    cmd->add_flag_callback("--warm-start",
                           [&] { ov.warm_start = true; },
                           "continue each iteration from the previous model");
    cmd->add_flag_callback("--cold-start", [&] { ov.warm_start = false; },
                           "re-initialize the model every iteration");
  };

  auto* train = app.add_subcommand("train", "train on gold data only");
  train->add_option("--config", config_path, "experiment config file")
      ->required();
  add_overrides(train);

  auto* selftrain =
      app.add_subcommand("selftrain", "run the self-training loop");
  selftrain->add_option("--config", config_path, "experiment config file")
      ->required();
  add_overrides(selftrain);

  auto* evaluate = app.add_subcommand("evaluate", "score a model on a corpus");
  evaluate->add_option("--model", model_path, "model file")->required();
  evaluate->add_option("--test", test_path, "labeled corpus")->required();

  auto* predict = app.add_subcommand("predict", "label a corpus");
  predict->add_option("--model", model_path, "model file")->required();
  predict->add_option("--input", input_path, "input corpus")->required();
  predict->add_option("--output", output_path, "labeled output path")
      ->required();

  auto* synth = app.add_subcommand("synth", "generate synthetic corpora");
  synth->add_option("--spec", spec_path, "shift spec file")->required();
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--n-source", n_source, "source-labeled sequences");
  synth->add_option("--n-unlabeled", n_unlabeled, "target pool sequences");
  synth->add_option("--n-test", n_test, "target test sequences");
  synth->add_option("--seed", seed_value, "override the spec seed")
      ->each([&](const std::string&) { ov.seed = seed_value; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, ov);
    if (selftrain->parsed()) return cmd_selftrain(config_path, ov);
    if (evaluate->parsed()) return cmd_evaluate(model_path, test_path);
    if (predict->parsed())
      return cmd_predict(model_path, input_path, output_path);
    if (synth->parsed())
      return cmd_synth(spec_path, out_dir, n_source, n_unlabeled, n_test,
                       ov.seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
