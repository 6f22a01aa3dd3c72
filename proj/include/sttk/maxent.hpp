#pragma once

#include <string>
#include <vector>

#include "sttk/corpus.hpp"
#include "sttk/crf.hpp"  // LossGrad
#include "sttk/features.hpp"
#include "sttk/optimizer.hpp"

namespace sttk {

struct ClassPrediction {
  std::string label;          // argmax class, ties toward lower class index
  std::vector<double> probs;  // softmax row over model.classes
  double confidence = 0.0;    // max entry
};

// Multinomial logistic regression over the shared text features. Weights are
// flat: W[f,c] at f*num_classes+c, then one bias per class. The bias block is
// not L2-regularized.
struct MaxentModel {
  std::vector<std::string> classes;
  FeatureVocab vocab;
  std::vector<double> weights;

  size_t num_classes() const { return classes.size(); }
  size_t w_size() const { return vocab.size() * classes.size(); }
  size_t weight_size() const { return w_size() + classes.size(); }
  double bias(size_t c) const { return weights[w_size() + c]; }
  int class_index(const std::string& label) const;
};

ClassPrediction predict_proba(const MaxentModel& model,
                              const std::vector<std::string>& tokens);

// Cross-entropy over the batch plus (l2/2)*||W||^2 (bias excluded).
LossGrad maxent_gradient(const MaxentModel& model,
                         const std::vector<Example>& batch, double l2);

// Zero-weight model with class list and frozen vocabulary from the corpus.
MaxentModel maxent_init(const Corpus& train);

// Same training contract as crf_train; dev accuracy picks the returned
// weights.
MaxentModel maxent_train(const Corpus& train, const Corpus& dev,
                         const TrainOptions& opt,
                         const MaxentModel* warm_start = nullptr);

double maxent_accuracy(const MaxentModel& model, const Corpus& corpus);

void save_maxent(const MaxentModel& model, const std::string& path);
MaxentModel load_maxent(const std::string& path);

}  // namespace sttk
