#pragma once

#include <string>
#include <vector>

#include "sttk/corpus.hpp"
#include "sttk/features.hpp"
#include "sttk/optimizer.hpp"

namespace sttk {

// Per-position posterior probabilities over labels; each row sums to 1.
struct MarginalTable {
  std::vector<std::vector<double>> rows;
};

struct SequencePrediction {
  std::vector<std::string> labels;
  std::vector<double> confidences;  // marginal of the predicted label
  double example_confidence = 0.0;  // min over positions
};

// Linear-chain CRF. Weights live in one flat vector: the emission block
// W[f,y] at f*num_labels+y, followed by the transition block T[y',y] at
// emission_size + y'*num_labels + y. No begin/end transition potentials.
struct CrfModel {
  std::vector<std::string> labels;
  FeatureVocab vocab;
  std::vector<double> weights;

  size_t num_labels() const { return labels.size(); }
  size_t emission_size() const { return vocab.size() * labels.size(); }
  size_t weight_size() const {
    return emission_size() + labels.size() * labels.size();
  }

  double emission(size_t feature, size_t label) const {
    return weights[feature * labels.size() + label];
  }
  double transition(size_t from, size_t to) const {
    return weights[emission_size() + from * labels.size() + to];
  }
  int label_index(const std::string& label) const;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Feature vectors for every position, via the shared token templates and the
// model's (frozen) vocabulary.
std::vector<SparseVector> extract_sequence_features(
    const std::vector<std::string>& tokens, const FeatureVocab& vocab);

// Sum of per-position emission scores plus per-adjacent-pair transitions.
double score_sequence(const CrfModel& model,
                      const std::vector<std::string>& tokens,
                      const std::vector<std::string>& labels);

// Posterior marginals and log partition, computed in log space.
std::pair<MarginalTable, double> forward_backward(
    const CrfModel& model, const std::vector<std::string>& tokens);

// Argmax labeling; ties break toward the lower label index at every step.
// Confidences are the posterior marginals of the predicted labels.
SequencePrediction viterbi(const CrfModel& model,
                           const std::vector<std::string>& tokens);

// Negative log-likelihood over the batch plus (l2/2)*||w||^2, with the
// matching gradient over the flat weight vector.
LossGrad crf_gradient(const CrfModel& model, const std::vector<Example>& batch,
                      double l2);

// Zero-weight model whose label set and frozen vocabulary come from the
// given corpus. Training a fixed feature space across self-training
// iterations starts from one of these.
CrfModel crf_init(const Corpus& train);

// Mini-batch training with adaptive per-parameter steps. Without warm_start
// the vocabulary is built from the training corpus and frozen and weights
// start at zero; with warm_start optimization continues from the given
// model. Dev token accuracy picks the returned weights when dev is
// non-empty. epochs=0 requires warm_start and returns it unchanged.
CrfModel crf_train(const Corpus& train, const Corpus& dev,
                   const TrainOptions& opt,
                   const CrfModel* warm_start = nullptr);

double crf_token_accuracy(const CrfModel& model, const Corpus& corpus);

void save_crf(const CrfModel& model, const std::string& path);
CrfModel load_crf(const std::string& path);

}  // namespace sttk
