#include "sttk/crf.hpp"

#include <doctest.h>

#include <cmath>

#include "sttk/errors.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace sttk;

namespace {

const std::vector<std::string> kPool = {"aa", "ab", "ba", "bb", "ca",
                                        "cb", "ax", "by", "cz"};

Corpus toy_corpus(const std::vector<std::pair<std::vector<std::string>,
                                              std::vector<std::string>>>& data,
                  std::vector<std::string> label_set) {
  Corpus corpus;
  corpus.task_kind = TaskKind::sequence;
  corpus.label_set = std::move(label_set);
  int id = 0;
  for (const auto& [tokens, labels] : data) {
    Example e;
    e.id = id++;
    e.tokens = tokens;
    e.labels = labels;
    corpus.examples.push_back(e);
  }
  return corpus;
}

// Two labels; model with exactly three nonzero weights, so scores can be
// summed by hand.
CrfModel hand_model() {
  Corpus seed = toy_corpus({{{"ab", "cd"}, {"A", "B"}}}, {"A", "B"});
  CrfModel model = crf_init(seed);
  auto set_em = [&](const std::string& feat, int label, double value) {
    auto idx = model.vocab.lookup(feat);
    REQUIRE(idx.has_value());
    model.weights[static_cast<size_t>(*idx) * 2 + label] = value;
  };
  set_em("w0=ab", 0, 0.7);
  set_em("w0=cd", 1, -0.3);
  model.weights[model.emission_size() + 0 * 2 + 1] = 0.5;  // T[A->B]
  return model;
}

}  // namespace

TEST_CASE("score_sequence matches hand sums") {
  CrfModel model = hand_model();

  SUBCASE("zero weights score zero") {
    CrfModel zero = model;
    std::fill(zero.weights.begin(), zero.weights.end(), 0.0);
    CHECK(score_sequence(zero, {"ab", "cd"}, {"A", "B"}) == 0.0);
    CHECK(score_sequence(zero, {"ab", "cd"}, {"B", "A"}) == 0.0);
  }

  SUBCASE("length one is emission only") {
    CHECK(score_sequence(model, {"ab"}, {"A"}) == doctest::Approx(0.7));
    CHECK(score_sequence(model, {"ab"}, {"B"}) == doctest::Approx(0.0));
  }

  SUBCASE("hand-set two-position score") {
    // em(ab,A) + em(cd,B) + T[A,B] = 0.7 - 0.3 + 0.5
    CHECK(score_sequence(model, {"ab", "cd"}, {"A", "B"}) ==
          doctest::Approx(0.9));
    CHECK(score_sequence(model, {"ab", "cd"}, {"A", "A"}) ==
          doctest::Approx(0.7));
  }

  SUBCASE("label outside the model set") {
    CHECK_THROWS_AS(score_sequence(model, {"ab"}, {"C"}), DataError);
    CHECK_THROWS_AS(score_sequence(model, {"ab", "cd"}, {"A"}), DataError);
  }
}

TEST_CASE("forward_backward uniform case") {
  Corpus seed = toy_corpus({{{"aa", "ab", "ba", "bb"}, {"x", "x", "x", "x"}}},
                           {"x", "y", "z"});
  CrfModel model = crf_init(seed);

  auto [marginals, log_z] = forward_backward(model, {"aa", "ab", "ba", "bb"});
  CHECK(log_z == doctest::Approx(4 * std::log(3.0)).epsilon(1e-12));
  for (const auto& row : marginals.rows) {
    for (double p : row) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }
}

TEST_CASE("forward_backward matches enumeration on the hand-set model") {
  CrfModel model = hand_model();
  auto [marginals, log_z] = forward_backward(model, {"ab", "cd"});
  auto truth = oracle::enumerate_crf(model, {"ab", "cd"});

  CHECK(log_z == doctest::Approx(truth.log_z).epsilon(1e-12));
  for (size_t j = 0; j < 2; ++j) {
    for (size_t k = 0; k < 2; ++k) {
      CHECK(marginals.rows[j][k] ==
            doctest::Approx(truth.marginals[j][k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward_backward and viterbi match enumeration on random models") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    size_t num_labels = 2 + rng.below(3);  // 2..4
    size_t length = 1 + rng.below(5);      // 1..5
    CrfModel model = oracle::random_crf_model(rng, num_labels, kPool);
    auto tokens = oracle::random_tokens(rng, length, kPool);

    auto truth = oracle::enumerate_crf(model, tokens);
    auto [marginals, log_z] = forward_backward(model, tokens);

    CHECK(log_z == doctest::Approx(truth.log_z).epsilon(1e-10));
    for (size_t j = 0; j < length; ++j) {
      double row_sum = 0.0;
      for (size_t k = 0; k < num_labels; ++k) {
        CHECK(std::abs(marginals.rows[j][k] - truth.marginals[j][k]) < 1e-8);
        row_sum += marginals.rows[j][k];
      }
      CHECK(std::abs(row_sum - 1.0) < 1e-9);
    }
    // the partition dominates every individual labeling
    CHECK(truth.best_score <= log_z + 1e-9);

    auto pred = viterbi(model, tokens);
    if (truth.unique_best) {
      for (size_t j = 0; j < length; ++j) {
        CHECK(pred.labels[j] == model.labels[truth.best_path[j]]);
      }
    }
    double min_conf = 1.0;
    for (double c : pred.confidences) min_conf = std::min(min_conf, c);
    CHECK(pred.example_confidence == doctest::Approx(min_conf));
  }
}

TEST_CASE("viterbi ties break toward the lowest label index") {
  Corpus seed = toy_corpus({{{"aa", "ab"}, {"x", "x"}}}, {"x", "y", "z"});
  CrfModel model = crf_init(seed);  // all-zero weights: every path ties

  auto pred = viterbi(model, {"aa", "ab", "aa"});
  for (const auto& label : pred.labels) CHECK(label == "x");
  for (double c : pred.confidences) {
    CHECK(c == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }
  CHECK(pred.example_confidence == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("crf_gradient closed form at zero weights") {
  Corpus seed = toy_corpus({{{"ab"}, {"A"}}}, {"A", "B"});
  CrfModel model = crf_init(seed);

  auto result = crf_gradient(model, seed.examples, 0.0);
  CHECK(result.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // every active feature of the token has weight 1; gradient is p-1 = -0.5
  // on the gold label and +0.5 on the other
  for (const auto& feature : token_features({"ab"}, 0)) {
    auto idx = model.vocab.lookup(feature);
    REQUIRE(idx.has_value());
    CHECK(result.grad[static_cast<size_t>(*idx) * 2 + 0] ==
          doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(result.grad[static_cast<size_t>(*idx) * 2 + 1] ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
  // no transitions in a length-1 sequence
  for (size_t k = model.emission_size(); k < model.weight_size(); ++k) {
    CHECK(result.grad[k] == 0.0);
  }
}

TEST_CASE("crf_gradient matches central finite differences") {
  Rng rng(7);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    size_t num_labels = 2 + rng.below(2);
    CrfModel model = oracle::random_crf_model(rng, num_labels, kPool);

    std::vector<Example> batch;
    for (int e = 0; e < 3; ++e) {
      Example ex;
      ex.id = e;
      ex.tokens = oracle::random_tokens(rng, 1 + rng.below(4), kPool);
      for (size_t j = 0; j < ex.tokens.size(); ++j) {
        ex.labels.push_back(model.labels[rng.below(num_labels)]);
      }
      batch.push_back(ex);
    }

    double l2 = trial % 2 == 0 ? 0.0 : 0.05;
    auto analytic = crf_gradient(model, batch, l2);

    // spot-check a sample of coordinates
    for (int probe = 0; probe < 25; ++probe) {
      size_t k = rng.below(model.weight_size());
      CrfModel plus = model;
      plus.weights[k] += h;
      CrfModel minus = model;
      minus.weights[k] -= h;
      double fd = (crf_gradient(plus, batch, l2).loss -
                   crf_gradient(minus, batch, l2).loss) /
                  (2 * h);
      double denom = std::max({std::abs(fd), std::abs(analytic.grad[k]), 1.0});
      CHECK(std::abs(fd - analytic.grad[k]) / denom < 1e-5);
    }
  }
}

TEST_CASE("transition gradient sums to zero without regularization") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    CrfModel model = oracle::random_crf_model(rng, 3, kPool);
    Example ex;
    ex.id = 0;
    ex.tokens = oracle::random_tokens(rng, 2 + rng.below(3), kPool);
    for (size_t j = 0; j < ex.tokens.size(); ++j) {
      ex.labels.push_back(model.labels[rng.below(3)]);
    }
    auto result = crf_gradient(model, {ex}, 0.0);
    double total = 0.0;
    for (size_t k = model.emission_size(); k < model.weight_size(); ++k) {
      total += result.grad[k];
    }
    CHECK(std::abs(total) < 1e-10);
  }
}

TEST_CASE("duplicating a batch doubles the gradient at lambda zero") {
  Rng rng(13);
  CrfModel model = oracle::random_crf_model(rng, 3, kPool);
  std::vector<Example> batch;
  for (int e = 0; e < 2; ++e) {
    Example ex;
    ex.id = e;
    ex.tokens = oracle::random_tokens(rng, 3, kPool);
    for (size_t j = 0; j < 3; ++j) {
      ex.labels.push_back(model.labels[rng.below(3)]);
    }
    batch.push_back(ex);
  }
  std::vector<Example> doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());

  auto single = crf_gradient(model, batch, 0.0);
  auto twice = crf_gradient(model, doubled, 0.0);
  CHECK(twice.loss == doctest::Approx(2 * single.loss).epsilon(1e-12));
  for (size_t k = 0; k < single.grad.size(); ++k) {
    CHECK(twice.grad[k] == doctest::Approx(2 * single.grad[k]).epsilon(1e-10));
  }
}

TEST_CASE("crf_train separates an easy corpus") {
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>
      data;
  for (int i = 0; i < 30; ++i) {
    bool flip = i % 2 == 0;
    std::vector<std::string> tokens, labels;
    for (int j = 0; j < 4; ++j) {
      bool first = (j + flip) % 2 == 0;
      tokens.push_back(first ? "aa" : "bb");
      labels.push_back(first ? "X" : "Y");
    }
    data.emplace_back(tokens, labels);
  }
  Corpus train = toy_corpus(data, {"X", "Y"});
  Corpus dev = train;

  TrainOptions opt;
  opt.epochs = 20;
  opt.seed = 3;
  CrfModel model = crf_train(train, dev, opt);
  CHECK(crf_token_accuracy(model, dev) == doctest::Approx(1.0));
}

TEST_CASE("crf_train epoch and warm-start contracts") {
  Corpus train = toy_corpus({{{"aa", "bb"}, {"X", "Y"}}}, {"X", "Y"});
  TrainOptions opt;
  opt.epochs = 0;

  CHECK_THROWS_AS(crf_train(train, {}, opt), ConfigError);

  opt.epochs = 2;
  opt.seed = 5;
  CrfModel trained = crf_train(train, {}, opt);

  opt.epochs = 0;
  CrfModel unchanged = crf_train(train, {}, opt, &trained);
  CHECK(unchanged.weights == trained.weights);

  opt.epochs = -1;
  CHECK_THROWS_AS(crf_train(train, {}, opt), ConfigError);

  Corpus empty;
  empty.task_kind = TaskKind::sequence;
  empty.label_set = {"X", "Y"};
  opt.epochs = 2;
  CHECK_THROWS_AS(crf_train(empty, {}, opt), DataError);
}

TEST_CASE("crf_train is deterministic under a fixed seed") {
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>
      data;
  Rng rng(17);
  for (int i = 0; i < 12; ++i) {
    auto tokens = oracle::random_tokens(rng, 3, kPool);
    std::vector<std::string> labels;
    for (int j = 0; j < 3; ++j) labels.push_back(j % 2 ? "X" : "Y");
    data.emplace_back(tokens, labels);
  }
  Corpus train = toy_corpus(data, {"X", "Y"});

  TrainOptions opt;
  opt.epochs = 4;
  opt.seed = 21;
  CrfModel a = crf_train(train, train, opt);
  CrfModel b = crf_train(train, train, opt);
  CHECK(a.weights == b.weights);  // bitwise

  opt.seed = 22;
  CrfModel c = crf_train(train, train, opt);
  CHECK(a.weights != c.weights);
}

TEST_CASE("crf model file round trip") {
  Rng rng(23);
  CrfModel model = oracle::random_crf_model(rng, 3, kPool);
  testutil::TempDir dir;
  save_crf(model, dir.file("m.bin"));

  CrfModel loaded = load_crf(dir.file("m.bin"));
  CHECK(loaded.labels == model.labels);
  CHECK(loaded.weights == model.weights);  // bit-exact through the LE block
  CHECK(loaded.vocab.names() == model.vocab.names());

  auto tokens = oracle::random_tokens(rng, 4, kPool);
  auto before = viterbi(model, tokens);
  auto after = viterbi(loaded, tokens);
  CHECK(before.labels == after.labels);
  CHECK(before.example_confidence == after.example_confidence);

  CHECK_THROWS_AS(load_crf(dir.file("nope.bin")), DataError);

  // tampered version header
  auto raw = testutil::read_file(dir.file("m.bin"));
  raw[11] = '9';  // sttk-model 1 -> sttk-model 9
  std::ofstream out(dir.file("bad.bin"), std::ios::binary);
  out << raw;
  out.close();
  CHECK_THROWS_AS(load_crf(dir.file("bad.bin")), DataError);
}
