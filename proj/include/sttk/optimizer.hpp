#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "sttk/errors.hpp"
#include "sttk/rng.hpp"

namespace sttk {

struct TrainOptions {
  int epochs = 5;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int batch_size = 8;
  uint64_t seed = 0;
};

namespace detail {

// Mini-batch gradient descent with per-parameter accumulated-squared-gradient
// step scaling. Problem supplies:
//   size_t train_size() const
//   double batch_loss_grad(const std::vector<size_t>& batch,
//                          std::vector<double>& grad)   // grad is assigned
//   std::vector<double>& weights()
//   bool has_dev() const
//   double dev_metric()                                 // larger is better
// When a dev set is present the best-on-dev weights are restored at the end.
template <typename Problem>
void run_adagrad(Problem& problem, const TrainOptions& opt) {
  auto& weights = problem.weights();
  std::vector<double> accum(weights.size(), 0.0);
  std::vector<double> grad(weights.size(), 0.0);

  std::vector<size_t> order(problem.train_size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(opt.seed);

  std::vector<double> best_weights = weights;
  double best_metric = -std::numeric_limits<double>::infinity();
  const size_t batch_size =
      opt.batch_size > 0 ? static_cast<size_t>(opt.batch_size) : size_t{1};

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t begin = 0; begin < order.size(); begin += batch_size) {
      size_t end = std::min(begin + batch_size, order.size());
      std::vector<size_t> batch(order.begin() + begin, order.begin() + end);
      double loss = problem.batch_loss_grad(batch, grad);
      if (!std::isfinite(loss)) throw NumericError("non-finite training loss");
      for (size_t k = 0; k < weights.size(); ++k) {
        if (grad[k] == 0.0) continue;
        accum[k] += grad[k] * grad[k];
        weights[k] -=
            opt.learning_rate * grad[k] / (std::sqrt(accum[k]) + 1e-8);
      }
    }
    if (problem.has_dev()) {
      double metric = problem.dev_metric();
      if (metric > best_metric) {
        best_metric = metric;
        best_weights = weights;
      }
    }
  }
  if (problem.has_dev()) weights = best_weights;
}

}  // namespace detail
}  // namespace sttk
