#include "sttk/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "sttk/errors.hpp"
#include "sttk/model_file.hpp"

namespace sttk {

namespace {

SparseVector features_of(const std::vector<std::string>& tokens,
                         const FeatureVocab& vocab) {
  std::map<int, double> acc;
  for (const auto& feature : text_features(tokens)) {
    if (auto idx = vocab.lookup(feature)) acc[*idx] += 1.0;
  }
  SparseVector vec;
  vec.entries.assign(acc.begin(), acc.end());
  return vec;
}

std::vector<double> class_scores(const MaxentModel& model,
                                 const SparseVector& vec) {
  const size_t c = model.num_classes();
  std::vector<double> scores(c);
  for (size_t k = 0; k < c; ++k) scores[k] = model.bias(k);
  for (const auto& [idx, w] : vec.entries) {
    const double* row = &model.weights[static_cast<size_t>(idx) * c];
    for (size_t k = 0; k < c; ++k) scores[k] += w * row[k];
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericError("non-finite class score");
  }
  return scores;
}

std::vector<double> softmax(std::vector<double> scores) {
  double m = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double& s : scores) {
    s = std::exp(s - m);
    total += s;
  }
  for (double& s : scores) s /= total;
  return scores;
}

// Cross-entropy and data-term gradient for one example; returns the loss.
double accumulate_gradient(const MaxentModel& model, const SparseVector& vec,
                           int gold, std::vector<double>& grad) {
  const size_t c = model.num_classes();
  auto probs = softmax(class_scores(model, vec));
  for (const auto& [idx, w] : vec.entries) {
    double* row = &grad[static_cast<size_t>(idx) * c];
    for (size_t k = 0; k < c; ++k) row[k] += w * probs[k];
    row[gold] -= w;
  }
  double* bias_grad = &grad[model.w_size()];
  for (size_t k = 0; k < c; ++k) bias_grad[k] += probs[k];
  bias_grad[gold] -= 1.0;
  return -std::log(std::max(probs[gold], 1e-300));
}

struct MaxentTrainProblem {
  MaxentModel& model;
  const std::vector<SparseVector>& feats;
  const std::vector<int>& gold;
  const Corpus& dev;
  double l2;

  size_t train_size() const { return feats.size(); }
  std::vector<double>& weights() { return model.weights; }
  bool has_dev() const { return !dev.empty(); }
  double dev_metric() const { return maxent_accuracy(model, dev); }

  double batch_loss_grad(const std::vector<size_t>& batch,
                         std::vector<double>& grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (size_t idx : batch) {
      loss += accumulate_gradient(model, feats[idx], gold[idx], grad);
    }
    if (l2 != 0.0) {
      for (size_t k = 0; k < model.w_size(); ++k) {
        loss += 0.5 * l2 * model.weights[k] * model.weights[k];
        grad[k] += l2 * model.weights[k];
      }
    }
    return loss;
  }
};

int gold_class(const MaxentModel& model, const Example& example) {
  if (example.labels.size() != 1)
    throw DataError("example " + std::to_string(example.id) +
                    " is not a labeled text");
  int k = model.class_index(example.labels[0]);
  if (k < 0)
    throw DataError("class '" + example.labels[0] + "' outside model classes");
  return k;
}

}  // namespace

int MaxentModel::class_index(const std::string& label) const {
  auto it = std::find(classes.begin(), classes.end(), label);
  return it == classes.end() ? -1 : static_cast<int>(it - classes.begin());
}

ClassPrediction predict_proba(const MaxentModel& model,
                              const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw DataError("empty text");
  auto probs = softmax(class_scores(model, features_of(tokens, model.vocab)));
  size_t best = 0;
  for (size_t k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[best]) best = k;  // ties keep the lower index
  }
  ClassPrediction pred;
  pred.label = model.classes[best];
  pred.confidence = probs[best];
  pred.probs = std::move(probs);
  return pred;
}

LossGrad maxent_gradient(const MaxentModel& model,
                         const std::vector<Example>& batch, double l2) {
  if (batch.empty()) throw DataError("empty batch");
  LossGrad out;
  out.grad.assign(model.weight_size(), 0.0);
  for (const auto& example : batch) {
    auto vec = features_of(example.tokens, model.vocab);
    out.loss +=
        accumulate_gradient(model, vec, gold_class(model, example), out.grad);
  }
  if (l2 != 0.0) {
    for (size_t k = 0; k < model.w_size(); ++k) {
      out.loss += 0.5 * l2 * model.weights[k] * model.weights[k];
      out.grad[k] += l2 * model.weights[k];
    }
  }
  return out;
}

MaxentModel maxent_init(const Corpus& train) {
  if (train.task_kind != TaskKind::classification)
    throw ConfigError("maxent_init expects a classification corpus");
  if (train.empty()) throw DataError("training corpus is empty");
  MaxentModel model;
  model.classes = train.label_set;
  if (model.classes.size() < 2)
    throw DataError("need at least two classes to train");
  for (const auto& example : train.examples) {
    for (const auto& feature : text_features(example.tokens)) {
      model.vocab.lookup_or_add(feature);
    }
  }
  model.vocab.freeze();
  model.weights.assign(model.weight_size(), 0.0);
  return model;
}

MaxentModel maxent_train(const Corpus& train, const Corpus& dev,
                         const TrainOptions& opt,
                         const MaxentModel* warm_start) {
  if (train.task_kind != TaskKind::classification)
    throw ConfigError("maxent_train expects a classification corpus");
  if (opt.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (opt.epochs == 0) {
    if (!warm_start)
      throw ConfigError("epochs=0 needs a warm-start model");
    return *warm_start;
  }
  if (train.empty()) throw DataError("training corpus is empty");

  MaxentModel model = warm_start ? *warm_start : maxent_init(train);

  std::vector<SparseVector> feats(train.size());
  std::vector<int> gold(train.size());
  for (size_t i = 0; i < train.size(); ++i) {
    feats[i] = features_of(train.examples[i].tokens, model.vocab);
    gold[i] = gold_class(model, train.examples[i]);
  }

  MaxentTrainProblem problem{model, feats, gold, dev, opt.l2};
  detail::run_adagrad(problem, opt);
  return model;
}

double maxent_accuracy(const MaxentModel& model, const Corpus& corpus) {
  size_t correct = 0;
  for (const auto& example : corpus.examples) {
    auto pred = predict_proba(model, example.tokens);
    if (example.labels.size() == 1 && pred.label == example.labels[0]) {
      ++correct;
    }
  }
  return corpus.empty() ? 0.0
                        : static_cast<double>(correct) / corpus.size();
}

void save_maxent(const MaxentModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  detail::write_model_header(out, "maxent", model.classes, model.vocab);
  detail::write_weight_block(out, model.weights);
}

MaxentModel load_maxent(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  auto head = detail::read_model_header(in, path);
  if (head.kind != "maxent")
    throw DataError("expected a maxent model in " + path + ", found '" +
                    head.kind + "'");
  MaxentModel model;
  model.classes = std::move(head.labels);
  model.vocab = std::move(head.vocab);
  model.weights = detail::read_weight_block(in, model.weight_size(), path);
  return model;
}

}  // namespace sttk
