#include "sttk/synthgen.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "sttk/errors.hpp"
#include "test_util.hpp"

using namespace sttk;

namespace {

ShiftSpec small_sequence_spec(uint64_t seed, double rho) {
  ShiftSpec spec;
  spec.task = TaskKind::sequence;
  spec.labels = {"O", "B-E", "I-E"};
  spec.vocab_size = 30;
  spec.initial = {0.7, 0.3, 0.0};
  spec.transition = {{0.7, 0.3, 0.0}, {0.4, 0.1, 0.5}, {0.5, 0.2, 0.3}};
  spec.emission = banded_emissions(3, 30, 0.05, 1.0);
  spec.shift_rate = rho;
  spec.min_length = 3;
  spec.max_length = 7;
  spec.seed = seed;
  return spec;
}

std::set<std::string> vocabulary_of(const Corpus& corpus) {
  std::set<std::string> vocab;
  for (const auto& e : corpus.examples) {
    vocab.insert(e.tokens.begin(), e.tokens.end());
  }
  return vocab;
}

std::map<std::string, long> label_histogram(const Corpus& corpus) {
  std::map<std::string, long> hist;
  for (const auto& e : corpus.examples) {
    for (const auto& l : e.labels) ++hist[l];
  }
  return hist;
}

}  // namespace

TEST_CASE("generate shapes, labels and determinism") {
  ShiftSpec spec = small_sequence_spec(5, 0.4);
  auto out = generate(spec, 20, 15, 10);

  CHECK(out.source_labeled.size() == 20);
  CHECK(out.target_unlabeled.size() == 15);
  CHECK(out.target_test.size() == 10);

  for (const auto& e : out.source_labeled.examples) {
    CHECK(e.labeled());
    CHECK(e.labels.size() == e.tokens.size());
    CHECK(e.tokens.size() >= 3);
    CHECK(e.tokens.size() <= 7);
  }
  for (const auto& e : out.target_unlabeled.examples) {
    CHECK_FALSE(e.labeled());
  }
  for (const auto& e : out.target_test.examples) CHECK(e.labeled());

  auto again = generate(spec, 20, 15, 10);
  CHECK(again.source_labeled == out.source_labeled);
  CHECK(again.target_unlabeled == out.target_unlabeled);
  CHECK(again.target_test == out.target_test);

  ShiftSpec other = small_sequence_spec(6, 0.4);
  auto different = generate(other, 20, 15, 10);
  CHECK(different.source_labeled != out.source_labeled);
}

TEST_CASE("shift_rate zero keeps one shared vocabulary") {
  ShiftSpec spec = small_sequence_spec(7, 0.0);
  auto out = generate(spec, 30, 30, 30);

  auto source_vocab = vocabulary_of(out.source_labeled);
  auto target_vocab = vocabulary_of(out.target_test);
  // every token comes from the source naming range
  std::set<std::string> legal;
  for (size_t v = 0; v < spec.vocab_size; ++v) {
    legal.insert(token_name(v, false));
  }
  for (const auto& tok : target_vocab) CHECK(legal.count(tok) == 1);
  for (const auto& tok : source_vocab) CHECK(legal.count(tok) == 1);
}

TEST_CASE("shift_rate one renames every target word type") {
  ShiftSpec spec = small_sequence_spec(9, 1.0);
  auto out = generate(spec, 20, 20, 20);

  auto source_vocab = vocabulary_of(out.source_labeled);
  std::set<std::string> target_tokens;
  for (const auto& e : out.target_test.examples) {
    target_tokens.insert(e.tokens.begin(), e.tokens.end());
  }
  for (const auto& e : out.target_unlabeled.examples) {
    target_tokens.insert(e.tokens.begin(), e.tokens.end());
  }
  for (const auto& tok : target_tokens) {
    CHECK(source_vocab.count(tok) == 0);
    // renamed words spell with the target-only alphabet half
    for (char c : tok) CHECK(c >= 'n');
  }
}

TEST_CASE("shift keeps the hidden chains identical across rho values") {
  auto plain = generate(small_sequence_spec(11, 0.0), 10, 10, 10);
  auto shifted = generate(small_sequence_spec(11, 0.5), 10, 10, 10);

  // labels (the hidden chain) agree everywhere; only token names differ
  for (size_t i = 0; i < 10; ++i) {
    CHECK(plain.source_labeled.examples[i].labels ==
          shifted.source_labeled.examples[i].labels);
    CHECK(plain.target_test.examples[i].labels ==
          shifted.target_test.examples[i].labels);
    CHECK(plain.source_labeled.examples[i].tokens ==
          shifted.source_labeled.examples[i].tokens);  // source unshifted
    CHECK(plain.target_test.examples[i].tokens.size() ==
          shifted.target_test.examples[i].tokens.size());
  }
}

TEST_CASE("source and target-test label distributions agree (chi-square)") {
  ShiftSpec spec = small_sequence_spec(13, 0.5);
  auto out = generate(spec, 150, 1, 150);

  auto src = label_histogram(out.source_labeled);
  auto tgt = label_histogram(out.target_test);
  double src_total = 0, tgt_total = 0;
  for (const auto& [label, n] : src) src_total += static_cast<double>(n);
  for (const auto& [label, n] : tgt) tgt_total += static_cast<double>(n);

  // chi-square of the target counts against source proportions
  double chi2 = 0.0;
  for (const auto& [label, n] : src) {
    double expected = tgt_total * static_cast<double>(n) / src_total;
    double diff = static_cast<double>(tgt[label]) - expected;
    if (expected > 0) chi2 += diff * diff / expected;
  }
  // 2 degrees of freedom; 13.8 is the 0.1% critical value - loose on purpose
  CHECK(chi2 < 13.8);
}

TEST_CASE("classification specs label by majority state") {
  ShiftSpec spec;
  spec.task = TaskKind::classification;
  spec.labels = {"neg", "pos"};
  spec.vocab_size = 20;
  spec.initial = {0.8, 0.2};
  spec.transition = {{0.9, 0.1}, {0.1, 0.9}};
  spec.emission = banded_emissions(2, 20, 0.1, 1.0);
  spec.min_length = 5;
  spec.max_length = 9;
  spec.seed = 17;

  auto out = generate(spec, 200, 1, 200);
  CHECK(out.source_labeled.task_kind == TaskKind::classification);

  long neg = 0, pos = 0;
  for (const auto& e : out.source_labeled.examples) {
    REQUIRE(e.labels.size() == 1);
    (e.labels[0] == "neg" ? neg : pos) += 1;
  }
  // sticky 80/20 chain: the majority class dominates clearly
  CHECK(neg > pos);
  CHECK(pos > 0);
}

TEST_CASE("spec validation rejects bad matrices") {
  ShiftSpec spec = small_sequence_spec(1, 0.5);
  spec.transition[0] = {0.5, 0.2, 0.2};  // sums to 0.9
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  ShiftSpec negative = small_sequence_spec(1, 0.5);
  negative.initial = {1.2, -0.2, 0.0};
  CHECK_THROWS_AS(negative.validate(), ConfigError);

  ShiftSpec bad_rho = small_sequence_spec(1, 1.5);
  CHECK_THROWS_AS(bad_rho.validate(), ConfigError);

  ShiftSpec bad_len = small_sequence_spec(1, 0.5);
  bad_len.min_length = 9;
  bad_len.max_length = 3;
  CHECK_THROWS_AS(bad_len.validate(), ConfigError);

  CHECK_THROWS_AS(generate(small_sequence_spec(1, 0.5), 0, 1, 1), ConfigError);
}

TEST_CASE("spec files load into full specs") {
  testutil::TempDir dir;
  auto path = testutil::write_file(dir, "toy.spec",
                                   "# toy benchmark\n"
                                   "task sequence\n"
                                   "labels O B-E I-E\n"
                                   "vocab_size 30\n"
                                   "length 3 7\n"
                                   "shift_rate 0.5\n"
                                   "seed 21\n"
                                   "emission_shared 0.05\n"
                                   "emission_zipf 1.0\n"
                                   "initial 0.7 0.3 0\n"
                                   "trans O 0.7 0.3 0\n"
                                   "trans B-E 0.4 0.1 0.5\n"
                                   "trans I-E 0.5 0.2 0.3\n");
  ShiftSpec spec = load_shift_spec(path);
  CHECK(spec.labels == std::vector<std::string>{"O", "B-E", "I-E"});
  CHECK(spec.vocab_size == 30);
  CHECK(spec.shift_rate == 0.5);
  CHECK(spec.seed == 21);
  CHECK(spec.emission.size() == 3);
  auto out = generate(spec, 5, 5, 5);
  CHECK(out.source_labeled.size() == 5);

  auto bad = testutil::write_file(dir, "bad.spec", "task sequence\nwat 1\n");
  CHECK_THROWS_AS(load_shift_spec(bad), ConfigError);
  CHECK_THROWS_AS(load_shift_spec(dir.file("nope.spec")), ConfigError);
}
