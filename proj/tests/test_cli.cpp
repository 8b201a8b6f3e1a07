#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fwsvm/bench/synthetic.hpp"
#include "fwsvm/dataset.hpp"

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fwsvm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const fwsvm::Dataset ds = fwsvm::bench::make_gaussian_blobs({120, 4, 3.0, 2});
    write("train.txt", fwsvm::serialize_libsvm(ds));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(FWSVM_CLI_PATH) + " " + args + " > " + path("stdout.txt") + " 2> " +
                            path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST_F(Cli, TrainThenPredict) {
  ASSERT_EQ(run("train --data " + path("train.txt") + " --algo mfw --C 1 --model-out " + path("m.txt")), 0)
      << read("stderr.txt");
  EXPECT_NE(read("stdout.txt").find("reason=converged"), std::string::npos);
  EXPECT_EQ(read("m.txt").rfind("FWSVM-MODEL 1\nalgo mfw\n", 0), 0u);

  ASSERT_EQ(run("predict --model " + path("m.txt") + " --data " + path("train.txt") + " --out " + path("p.txt")), 0)
      << read("stderr.txt");
  const std::string preds = read("p.txt");
  EXPECT_EQ(std::count(preds.begin(), preds.end(), '\n'), 120);
  EXPECT_EQ(preds.find_first_not_of("+-1\n"), std::string::npos);
  EXPECT_NE(read("stderr.txt").find("accuracy="), std::string::npos);
}

TEST_F(Cli, RandomInitAndRbf) {
  EXPECT_EQ(run("train --data " + path("train.txt") + " --algo fw --kernel rbf --sigma 0.8 --C 10 --init random"), 0)
      << read("stderr.txt");
}

TEST_F(Cli, ExperimentWritesResultsAndRatios) {
  write("exp.cfg",
        "synthetic_n = 60\nsynthetic_dim = 3\nC_grid = 0.1,1\nfolds = 3\nrepetitions = 2\n"
        "algorithms = fw,mfw,mfw_fixed_c\noutput = out.csv\n");
  ASSERT_EQ(run("experiment --config " + path("exp.cfg") + " --out-dir " + path("res")), 0) << read("stderr.txt");
  const std::string csv = read("res/out.csv");
  EXPECT_EQ(csv.rfind("dataset,kernel,algo,rep,C,sigma,acc,svs,iters,gap,reason\n", 0), 0u);
  // 3 algorithms x (2 repetitions + mean + std)
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 4);
  const std::string ratios = read("res/ratios.csv");
  EXPECT_EQ(ratios.rfind("algo,acc_pct,svs_pct,iters_pct\n", 0), 0u);
  EXPECT_NE(ratios.find("\nmfw,"), std::string::npos);
  EXPECT_NE(ratios.find("\nmfw_fixed_c,"), std::string::npos);
}

TEST_F(Cli, SweepWritesOneRowPerFold) {
  ASSERT_EQ(run("sweep --data " + path("train.txt") + " --algo fw,mfw --grid 0.1,10 --folds 4 --out " +
                path("sweep.csv")),
            0)
      << read("stderr.txt");
  const std::string csv = read("sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 2 * 4);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("train"), 1);
  EXPECT_EQ(run("train --data " + path("train.txt") + " --algo svm"), 1);
  EXPECT_EQ(run("train --data " + path("train.txt") + " --init 500"), 1);
  EXPECT_EQ(run("train --data " + path("train.txt") + " --C -1"), 1);
  EXPECT_EQ(run("train --data " + path("missing.txt")), 3);
  write("bad.txt", "+1 1:0.5\n2 1:0.1\n");
  EXPECT_EQ(run("train --data " + path("bad.txt")), 2);
  EXPECT_NE(read("stderr.txt").find("line 2"), std::string::npos);
  write("bad_model.txt", "not a model\n");
  EXPECT_EQ(run("predict --model " + path("bad_model.txt") + " --data " + path("train.txt")), 2);
  EXPECT_EQ(run("predict --model " + path("nope.txt") + " --data " + path("train.txt")), 3);
  write("bad.cfg", "flavour = mint\n");
  EXPECT_EQ(run("experiment --config " + path("bad.cfg")), 1);
  EXPECT_EQ(run("experiment --config " + path("nope.cfg")), 3);
}

}  // namespace
