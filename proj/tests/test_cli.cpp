#include <doctest.h>

#include <cstdlib>
#include <string>

#include "test_util.hpp"

namespace {

int run(const std::string& command) {
  int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

const std::string kBin = STTK_BIN;

std::string sequence_spec_text(uint64_t seed) {
  return "task sequence\n"
         "labels O B-E I-E\n"
         "vocab_size 30\n"
         "length 3 7\n"
         "shift_rate 0.4\n"
         "seed " +
         std::to_string(seed) +
         "\n"
         "emission_shared 0.05\n"
         "emission_zipf 1.0\n"
         "initial 0.7 0.3 0\n"
         "trans O 0.7 0.3 0\n"
         "trans B-E 0.4 0.1 0.5\n"
         "trans I-E 0.5 0.2 0.3\n";
}

std::string config_text(const testutil::TempDir& dir) {
  return "[experiment]\n"
         "task = sequence\n"
         "seed = 5\n"
         "[paths]\n"
         "train = " +
         dir.file("synth/source.tsv") +
         "\n"
         "dev = " +
         dir.file("synth/target_test.tsv") +
         "\n"
         "test = " +
         dir.file("synth/target_test.tsv") +
         "\n"
         "unlabeled = " +
         dir.file("synth/unlabeled.tsv") +
         "\n"
         "scheme = " +
         dir.file("synth/scheme.labels") +
         "\n"
         "out = " +
         dir.file("out") +
         "\n"
         "[learner]\n"
         "epochs = 5\n"
         "[selftrain]\n"
         "policy = threshold\n"
         "tau = 0.7\n"
         "k_epochs = 2\n"
         "max_iterations = 2\n";
}

}  // namespace

TEST_CASE("cli end to end: synth, train, evaluate, predict, selftrain") {
  testutil::TempDir dir;
  testutil::write_file(dir, "toy.spec", sequence_spec_text(3));

  int synth = run(kBin + " synth --spec " + dir.file("toy.spec") + " --out " +
                  dir.file("synth") +
                  " --n-source 40 --n-unlabeled 20 --n-test 20 > " +
                  dir.file("synth.log"));
  REQUIRE(synth == 0);
  CHECK(std::filesystem::exists(dir.file("synth/source.tsv")));
  CHECK(std::filesystem::exists(dir.file("synth/unlabeled.tsv")));
  CHECK(std::filesystem::exists(dir.file("synth/target_test.tsv")));
  CHECK(std::filesystem::exists(dir.file("synth/scheme.labels")));

  testutil::write_file(dir, "run.ini", config_text(dir));
  int train = run(kBin + " train --config " + dir.file("run.ini") + " > " +
                  dir.file("train.log"));
  REQUIRE(train == 0);
  CHECK(std::filesystem::exists(dir.file("out/model.bin")));
  CHECK(std::filesystem::exists(dir.file("out/report.txt")));
  CHECK(std::filesystem::exists(dir.file("out/report.kv")));

  // rerun with the same seed: bitwise-identical machine report
  std::string first_report = testutil::read_file(dir.file("out/report.kv"));
  REQUIRE(run(kBin + " train --config " + dir.file("run.ini") + " > " +
              dir.file("train2.log")) == 0);
  CHECK(testutil::read_file(dir.file("out/report.kv")) == first_report);

  // evaluate reproduces the train-time test report
  int evaluate =
      run(kBin + " evaluate --model " + dir.file("out/model.bin") +
          " --test " + dir.file("synth/target_test.tsv") + " > " +
          dir.file("eval.log"));
  REQUIRE(evaluate == 0);
  std::string eval_out = testutil::read_file(dir.file("eval.log"));
  std::string train_report = testutil::read_file(dir.file("out/report.txt"));
  auto macro_line = eval_out.substr(eval_out.find("macro_f1"));
  macro_line = macro_line.substr(0, macro_line.find('\n'));
  CHECK(train_report.find(macro_line) != std::string::npos);

  int predict = run(kBin + " predict --model " + dir.file("out/model.bin") +
                    " --input " + dir.file("synth/unlabeled.tsv") +
                    " --output " + dir.file("pred.tsv"));
  REQUIRE(predict == 0);
  CHECK(std::filesystem::exists(dir.file("pred.tsv")));

  int selftrain = run(kBin + " selftrain --config " + dir.file("run.ini") +
                      " > " + dir.file("st.log"));
  REQUIRE(selftrain == 0);
  CHECK(std::filesystem::exists(dir.file("out/iterations.log")));
  std::string log = testutil::read_file(dir.file("out/iterations.log"));
  CHECK(log.find("iter=1") != std::string::npos);
  CHECK(log.find("dev_metric=") != std::string::npos);
}

TEST_CASE("cli exit codes") {
  testutil::TempDir dir;

  // config error: missing train path
  testutil::write_file(dir, "bad.ini", "[experiment]\ntask = sequence\n");
  CHECK(run(kBin + " train --config " + dir.file("bad.ini") + " 2> " +
            dir.file("err1.log")) == 2);

  // config error: unknown key
  testutil::write_file(dir, "typo.ini", "[experiment]\nsed = 1\n");
  CHECK(run(kBin + " train --config " + dir.file("typo.ini") + " 2> " +
            dir.file("err2.log")) == 2);

  // data error: malformed corpus
  testutil::write_file(dir, "scheme.labels", "O\nB-E\nI-E\n");
  testutil::write_file(dir, "bad.tsv", "tok\tNOT-A-LABEL\n\n");
  testutil::write_file(dir, "data.ini",
                       "[experiment]\ntask = sequence\n[paths]\ntrain = " +
                           dir.file("bad.tsv") + "\ntest = " +
                           dir.file("bad.tsv") + "\nscheme = " +
                           dir.file("scheme.labels") + "\nout = " +
                           dir.file("out") + "\n");
  CHECK(run(kBin + " train --config " + dir.file("data.ini") + " 2> " +
            dir.file("err3.log")) == 3);

  // policy incompatible with the sequence task
  testutil::write_file(dir, "ok.tsv", "tok\tO\n\n");
  testutil::write_file(
      dir, "policy.ini",
      "[experiment]\ntask = sequence\n[paths]\ntrain = " + dir.file("ok.tsv") +
          "\ndev = " + dir.file("ok.tsv") + "\ntest = " + dir.file("ok.tsv") +
          "\nunlabeled = " + dir.file("ok.tsv") + "\nscheme = " +
          dir.file("scheme.labels") + "\nout = " + dir.file("out") +
          "\n[selftrain]\npolicy = class_balanced\n");
  CHECK(run(kBin + " selftrain --config " + dir.file("policy.ini") + " 2> " +
            dir.file("err4.log")) == 2);
}
