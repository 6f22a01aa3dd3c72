#include "sttk/crf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "sttk/errors.hpp"
#include "sttk/model_file.hpp"

namespace sttk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const double* v, size_t n) {
  double m = kNegInf;
  for (size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return kNegInf;
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) total += std::exp(v[i] - m);
  return m + std::log(total);
}

// Forward/backward messages and emission scores for one sequence, log space.
struct Lattice {
  size_t n = 0;
  size_t y = 0;
  std::vector<double> em;     // n*y emission scores
  std::vector<double> alpha;  // n*y
  std::vector<double> beta;   // n*y
  double log_z = 0.0;
};

Lattice build_lattice(const CrfModel& model,
                      const std::vector<SparseVector>& feats) {
  const size_t n = feats.size();
  const size_t y = model.num_labels();
  if (n == 0) throw DataError("empty sequence");

  Lattice lat;
  lat.n = n;
  lat.y = y;
  lat.em.assign(n * y, 0.0);
  for (size_t j = 0; j < n; ++j) {
    for (const auto& [idx, w] : feats[j].entries) {
      const double* row = &model.weights[static_cast<size_t>(idx) * y];
      for (size_t k = 0; k < y; ++k) lat.em[j * y + k] += w * row[k];
    }
  }
  for (double v : lat.em) {
    if (std::isnan(v)) throw NumericError("NaN emission score");
  }
  const double* trans = &model.weights[model.emission_size()];
  for (size_t k = 0; k < y * y; ++k) {
    if (std::isnan(trans[k])) throw NumericError("NaN transition weight");
  }

  lat.alpha.assign(n * y, 0.0);
  std::vector<double> scratch(y);
  for (size_t k = 0; k < y; ++k) lat.alpha[k] = lat.em[k];
  for (size_t j = 1; j < n; ++j) {
    for (size_t b = 0; b < y; ++b) {
      for (size_t a = 0; a < y; ++a) {
        scratch[a] = lat.alpha[(j - 1) * y + a] + trans[a * y + b];
      }
      lat.alpha[j * y + b] = lat.em[j * y + b] + log_sum_exp(scratch.data(), y);
    }
  }
  lat.log_z = log_sum_exp(&lat.alpha[(n - 1) * y], y);
  if (!std::isfinite(lat.log_z)) throw NumericError("non-finite log partition");

  lat.beta.assign(n * y, 0.0);
  for (size_t j = n - 1; j-- > 0;) {
    for (size_t a = 0; a < y; ++a) {
      for (size_t b = 0; b < y; ++b) {
        scratch[b] =
            trans[a * y + b] + lat.em[(j + 1) * y + b] + lat.beta[(j + 1) * y + b];
      }
      lat.beta[j * y + a] = log_sum_exp(scratch.data(), y);
    }
  }
  return lat;
}

MarginalTable marginals_from(const Lattice& lat) {
  MarginalTable table;
  table.rows.assign(lat.n, std::vector<double>(lat.y, 0.0));
  for (size_t j = 0; j < lat.n; ++j) {
    for (size_t k = 0; k < lat.y; ++k) {
      table.rows[j][k] =
          std::exp(lat.alpha[j * lat.y + k] + lat.beta[j * lat.y + k] -
                   lat.log_z);
    }
  }
  return table;
}

std::vector<int> gold_indices(const CrfModel& model, const Example& example) {
  if (!example.labeled() || example.labels.size() != example.tokens.size())
    throw DataError("example " + std::to_string(example.id) +
                    " is not a labeled sequence");
  std::vector<int> gold(example.labels.size());
  for (size_t j = 0; j < example.labels.size(); ++j) {
    int k = model.label_index(example.labels[j]);
    if (k < 0)
      throw DataError("label '" + example.labels[j] +
                      "' outside model label set");
    gold[j] = k;
  }
  return gold;
}

// NLL and data-term gradient for one sequence; returns the NLL.
double accumulate_gradient(const CrfModel& model,
                           const std::vector<SparseVector>& feats,
                           const std::vector<int>& gold,
                           std::vector<double>& grad) {
  Lattice lat = build_lattice(model, feats);
  const size_t n = lat.n;
  const size_t y = lat.y;
  const double* trans = &model.weights[model.emission_size()];

  double gold_score = 0.0;
  for (size_t j = 0; j < n; ++j) gold_score += lat.em[j * y + gold[j]];
  for (size_t j = 0; j + 1 < n; ++j) {
    gold_score += trans[gold[j] * y + gold[j + 1]];
  }

  // Emission block: expected minus empirical counts.
  std::vector<double> prob(y);
  for (size_t j = 0; j < n; ++j) {
    for (size_t k = 0; k < y; ++k) {
      prob[k] = std::exp(lat.alpha[j * y + k] + lat.beta[j * y + k] - lat.log_z);
    }
    for (const auto& [idx, w] : feats[j].entries) {
      double* row = &grad[static_cast<size_t>(idx) * y];
      for (size_t k = 0; k < y; ++k) row[k] += w * prob[k];
      row[gold[j]] -= w;
    }
  }

  // Transition block via pairwise marginals.
  double* tgrad = &grad[model.emission_size()];
  for (size_t j = 0; j + 1 < n; ++j) {
    for (size_t a = 0; a < y; ++a) {
      double base = lat.alpha[j * y + a] - lat.log_z;
      for (size_t b = 0; b < y; ++b) {
        tgrad[a * y + b] += std::exp(base + trans[a * y + b] +
                                     lat.em[(j + 1) * y + b] +
                                     lat.beta[(j + 1) * y + b]);
      }
    }
    tgrad[gold[j] * y + gold[j + 1]] -= 1.0;
  }
  return lat.log_z - gold_score;
}

double add_l2(const std::vector<double>& weights, double l2,
              std::vector<double>& grad) {
  if (l2 == 0.0) return 0.0;
  double penalty = 0.0;
  for (size_t k = 0; k < weights.size(); ++k) {
    penalty += weights[k] * weights[k];
    grad[k] += l2 * weights[k];
  }
  return 0.5 * l2 * penalty;
}

struct CrfTrainProblem {
  CrfModel& model;
  const std::vector<std::vector<SparseVector>>& feats;
  const std::vector<std::vector<int>>& gold;
  const Corpus& dev;
  double l2;

  size_t train_size() const { return feats.size(); }
  std::vector<double>& weights() { return model.weights; }
  bool has_dev() const { return !dev.empty(); }
  double dev_metric() const { return crf_token_accuracy(model, dev); }

  double batch_loss_grad(const std::vector<size_t>& batch,
                         std::vector<double>& grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (size_t idx : batch) {
      loss += accumulate_gradient(model, feats[idx], gold[idx], grad);
    }
    loss += add_l2(model.weights, l2, grad);
    return loss;
  }
};

}  // namespace

int CrfModel::label_index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

std::vector<SparseVector> extract_sequence_features(
    const std::vector<std::string>& tokens, const FeatureVocab& vocab) {
  std::vector<SparseVector> feats(tokens.size());
  for (size_t j = 0; j < tokens.size(); ++j) {
    SparseVector vec;
    std::map<int, double> acc;
    for (const auto& feature : token_features(tokens, j)) {
      if (auto idx = vocab.lookup(feature)) acc[*idx] += 1.0;
    }
    vec.entries.assign(acc.begin(), acc.end());
    feats[j] = std::move(vec);
  }
  return feats;
}

double score_sequence(const CrfModel& model,
                      const std::vector<std::string>& tokens,
                      const std::vector<std::string>& labels) {
  if (tokens.size() != labels.size())
    throw DataError("token/label length mismatch");
  if (tokens.empty()) throw DataError("empty sequence");
  const size_t y = model.num_labels();
  auto feats = extract_sequence_features(tokens, model.vocab);

  double score = 0.0;
  int prev = -1;
  for (size_t j = 0; j < tokens.size(); ++j) {
    int k = model.label_index(labels[j]);
    if (k < 0)
      throw DataError("label '" + labels[j] + "' outside model label set");
    for (const auto& [idx, w] : feats[j].entries) {
      score += w * model.weights[static_cast<size_t>(idx) * y + k];
    }
    if (prev >= 0) score += model.transition(prev, k);
    prev = k;
  }
  return score;
}

std::pair<MarginalTable, double> forward_backward(
    const CrfModel& model, const std::vector<std::string>& tokens) {
  auto feats = extract_sequence_features(tokens, model.vocab);
  Lattice lat = build_lattice(model, feats);
  return {marginals_from(lat), lat.log_z};
}

SequencePrediction viterbi(const CrfModel& model,
                           const std::vector<std::string>& tokens) {
  auto feats = extract_sequence_features(tokens, model.vocab);
  Lattice lat = build_lattice(model, feats);
  const size_t n = lat.n;
  const size_t y = lat.y;
  const double* trans = &model.weights[model.emission_size()];

  std::vector<double> score(lat.em.begin(), lat.em.begin() + y);
  std::vector<double> next(y);
  std::vector<int> back((n > 1 ? n - 1 : 0) * y);
  for (size_t j = 1; j < n; ++j) {
    for (size_t b = 0; b < y; ++b) {
      double best = kNegInf;
      int best_a = 0;
      for (size_t a = 0; a < y; ++a) {
        double s = score[a] + trans[a * y + b];
        if (s > best) {  // strict: ties keep the lower label index
          best = s;
          best_a = static_cast<int>(a);
        }
      }
      next[b] = best + lat.em[j * y + b];
      back[(j - 1) * y + b] = best_a;
    }
    score.swap(next);
  }

  int last = 0;
  for (size_t b = 1; b < y; ++b) {
    if (score[b] > score[last]) last = static_cast<int>(b);
  }
  std::vector<int> path(n);
  path[n - 1] = last;
  for (size_t j = n - 1; j-- > 0;) {
    path[j] = back[j * y + path[j + 1]];
  }

  SequencePrediction pred;
  pred.labels.resize(n);
  pred.confidences.resize(n);
  pred.example_confidence = 1.0;
  for (size_t j = 0; j < n; ++j) {
    pred.labels[j] = model.labels[path[j]];
    double conf = std::exp(lat.alpha[j * y + path[j]] +
                           lat.beta[j * y + path[j]] - lat.log_z);
    pred.confidences[j] = conf;
    pred.example_confidence = std::min(pred.example_confidence, conf);
  }
  return pred;
}

LossGrad crf_gradient(const CrfModel& model, const std::vector<Example>& batch,
                      double l2) {
  if (batch.empty()) throw DataError("empty batch");
  LossGrad out;
  out.grad.assign(model.weight_size(), 0.0);
  for (const auto& example : batch) {
    auto feats = extract_sequence_features(example.tokens, model.vocab);
    auto gold = gold_indices(model, example);
    out.loss += accumulate_gradient(model, feats, gold, out.grad);
  }
  out.loss += add_l2(model.weights, l2, out.grad);
  return out;
}

CrfModel crf_init(const Corpus& train) {
  if (train.task_kind != TaskKind::sequence)
    throw ConfigError("crf_init expects a sequence corpus");
  if (train.empty()) throw DataError("training corpus is empty");
  CrfModel model;
  model.labels = train.label_set;
  if (model.labels.empty()) throw DataError("training corpus has no label set");
  for (const auto& example : train.examples) {
    for (size_t j = 0; j < example.tokens.size(); ++j) {
      for (const auto& feature : token_features(example.tokens, j)) {
        model.vocab.lookup_or_add(feature);
      }
    }
  }
  model.vocab.freeze();
  model.weights.assign(model.weight_size(), 0.0);
  return model;
}

CrfModel crf_train(const Corpus& train, const Corpus& dev,
                   const TrainOptions& opt, const CrfModel* warm_start) {
  if (train.task_kind != TaskKind::sequence)
    throw ConfigError("crf_train expects a sequence corpus");
  if (opt.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (opt.epochs == 0) {
    if (!warm_start)
      throw ConfigError("epochs=0 needs a warm-start model");
    return *warm_start;
  }
  if (train.empty()) throw DataError("training corpus is empty");

  CrfModel model = warm_start ? *warm_start : crf_init(train);

  std::vector<std::vector<SparseVector>> feats(train.size());
  std::vector<std::vector<int>> gold(train.size());
  for (size_t i = 0; i < train.size(); ++i) {
    feats[i] =
        extract_sequence_features(train.examples[i].tokens, model.vocab);
    gold[i] = gold_indices(model, train.examples[i]);
  }

  CrfTrainProblem problem{model, feats, gold, dev, opt.l2};
  detail::run_adagrad(problem, opt);
  return model;
}

double crf_token_accuracy(const CrfModel& model, const Corpus& corpus) {
  size_t correct = 0;
  size_t total = 0;
  for (const auto& example : corpus.examples) {
    auto pred = viterbi(model, example.tokens);
    for (size_t j = 0; j < example.tokens.size(); ++j) {
      if (j < example.labels.size() && pred.labels[j] == example.labels[j]) {
        ++correct;
      }
    }
    total += example.tokens.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / total;
}

void save_crf(const CrfModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  detail::write_model_header(out, "crf", model.labels, model.vocab);
  detail::write_weight_block(out, model.weights);
}

CrfModel load_crf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  auto head = detail::read_model_header(in, path);
  if (head.kind != "crf")
    throw DataError("expected a crf model in " + path + ", found '" +
                    head.kind + "'");
  CrfModel model;
  model.labels = std::move(head.labels);
  model.vocab = std::move(head.vocab);
  model.weights = detail::read_weight_block(in, model.weight_size(), path);
  return model;
}

}  // namespace sttk
