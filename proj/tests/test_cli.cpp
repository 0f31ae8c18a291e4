#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mpshrink/cli.hpp"
#include "test_support.hpp"

using namespace mpshrink;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
  std::map<std::string, std::string> kv;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r{cli::run(args, out, err), out.str(), err.str(), {}};
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos && line.find(' ') == std::string::npos)
      r.kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mpshrink_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    gen::Rng rng(61);
    write("sep.txt", gen::separable(rng, 120, 4, 0.05));
    write("noisy.txt", gen::noisy(rng, 80, 4, 0.25));
    std::ofstream(path("toy.txt")) << "+1 1:1\n-1 1:-1\n";
    std::ofstream(path("bad.txt")) << "+1 1:1\n3 1:2\n";
    std::ofstream(path("wide.txt")) << "+1 9:1\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::vector<RawExample>& ex) {
    std::ofstream os(path(name));
    for (const auto& e : ex) os << format_example(e) << '\n';
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, TrainMpvsWritesModelAndReport) {
  const auto r = run({"train", path("sep.txt"), "--algo", "mpvs", "--n", "3", "--eta", "0.1",
                      "--model-out", path("m.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.kv.at("converged"), "1");
  EXPECT_EQ(r.kv.at("algo"), "mpvs");
  EXPECT_EQ(r.kv.at("epsilon_p"), "0.25");
  EXPECT_GT(std::stod(r.kv.at("f_after")), 0.0);
  EXPECT_TRUE(fs::exists(path("m.txt")));

  const auto e = run({"eval", "--model-in", path("m.txt"), path("sep.txt")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(e.kv.at("errors_pos"), "0");
  EXPECT_EQ(e.kv.at("errors_neg"), "0");
  EXPECT_EQ(e.kv.at("gamma_prime"), r.kv.at("gamma_prime"));
}

TEST_F(Cli, OracleMakesCertificateComparable) {
  const auto r = run({"train", path("sep.txt"), "--algo", "mpvs", "--oracle"});
  ASSERT_EQ(r.code, 0) << r.err;
  const double f = std::stod(r.kv.at("f_vs_oracle"));
  EXPECT_LE(std::stod(r.kv.at("f_after")), f + 1e-12);
  EXPECT_LE(f, 1.0 + 1e-12);
}

TEST_F(Cli, CsvReport) {
  const auto r = run({"train", path("toy.txt"), "--algo", "perceptron", "--report", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string head, row;
  std::getline(in, head);
  std::getline(in, row);
  EXPECT_EQ(head.rfind("algo,m,d,", 0), 0u);
  EXPECT_EQ(std::count(head.begin(), head.end(), ','), std::count(row.begin(), row.end(), ','));
}

TEST_F(Cli, MpcsNeedsShrinkingParameter) {
  EXPECT_EQ(run({"train", path("sep.txt"), "--algo", "mpcs"}).code, cli::config);
  EXPECT_EQ(run({"train", path("sep.txt"), "--algo", "mpcs", "--epsilon", "0.5"}).code,
            cli::config);
  const auto r = run({"train", path("sep.txt"), "--algo", "mpcs", "--zeta", "0.2",
                      "--gamma-hat", "0.05"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run({"train", path("sep.txt"), "--algo", "mpcs", "--lambda", "1e9"}).code,
            cli::config);
}

TEST_F(Cli, StrictBounds) {
  EXPECT_EQ(run({"train", path("toy.txt"), "--eta", "3", "--strict-bounds"}).code, cli::config);
  EXPECT_EQ(run({"train", path("toy.txt"), "--eta", "3"}).code, cli::ok);
}

TEST_F(Cli, BudgetExitCode) {
  const auto r = run({"train", path("noisy.txt"), "--max-updates", "500"});
  EXPECT_EQ(r.code, cli::budget);
  EXPECT_EQ(r.kv.at("converged"), "0");
}

TEST_F(Cli, ExtensionMakesNoisyDataTrainable) {
  const auto r = run({"train", path("noisy.txt"), "--delta-ext", "0.5", "--model-out",
                      path("m.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto e = run({"eval", "--model-in", path("m.txt"), path("noisy.txt")});
  EXPECT_EQ(e.code, 0) << e.err;
}

TEST_F(Cli, ErrorsMapToExitCodes) {
  EXPECT_EQ(run({"train", path("missing.txt")}).code, cli::io);
  EXPECT_EQ(run({"train", path("bad.txt")}).code, cli::io);
  EXPECT_EQ(run({"train", path("toy.txt"), "--eta", "-1"}).code, cli::config);
  EXPECT_EQ(run({"train", path("toy.txt"), "--algo", "svm"}).code, cli::config);
  EXPECT_EQ(run({"train", path("toy.txt"), "--b", "abc"}).code, cli::config);
  EXPECT_EQ(run({}).code, cli::config);

  ASSERT_EQ(run({"train", path("toy.txt"), "--model-out", path("m.txt")}).code, 0);
  EXPECT_EQ(run({"eval", "--model-in", path("m.txt"), path("wide.txt")}).code, cli::config);
  std::ofstream(path("zero.txt")) << "algo=mpvs\ndim=2\nfeatures=1\n";
  EXPECT_EQ(run({"eval", "--model-in", path("zero.txt"), path("toy.txt")}).code, cli::config);
}

TEST_F(Cli, AutotuneReachesTargetOnToy) {
  const auto r = run({"autotune", path("toy.txt"), "--algo", "mpcs", "--target-f", "0.99",
                      "--model-out", path("m.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.kv.at("reached"), "1");
  EXPECT_GE(std::stod(r.kv.at("f_after")), 0.99);
}

TEST_F(Cli, AutotuneUnreachableWritesBestModel) {
  const auto r = run({"autotune", path("sep.txt"), "--algo", "mpvs", "--n", "0", "--target-f",
                      "0.999999", "--max-stages", "1", "--model-out", path("m.txt")});
  EXPECT_EQ(r.code, cli::budget);
  EXPECT_EQ(r.kv.at("reached"), "0");
  EXPECT_TRUE(fs::exists(path("m.txt")));
}

TEST_F(Cli, OracleAndSelftest) {
  const auto o = run({"oracle", path("toy.txt")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.kv.at("gamma_d"), "1");
  EXPECT_EQ(run({"selftest"}).code, 0);
}

TEST_F(Cli, ToyModelEvaluatesToUnitMargin) {
  std::ofstream(path("toy_model.txt")) << "algo=mpvs\neta=1\nb=0.5\nn=0\nt=2\nrho=1\ndelta=0\n"
                                          "dim=2\nfeatures=1\nw 1 2\n";
  const auto e = run({"eval", "--model-in", path("toy_model.txt"), path("toy.txt")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(e.kv.at("gamma_prime"), "1");
  EXPECT_EQ(e.kv.at("argmin_index"), "0");
}

TEST_F(Cli, LambdaZeroIsClassicalAndBAutoIsRSquared) {
  const auto r = run({"train", path("toy.txt"), "--algo", "mpcs", "--lambda", "0", "--eta", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.kv.at("epsilon_p"), "1");
  EXPECT_NEAR(std::stod(r.kv.at("b")), 2.0, 1e-15);  // R^2 of {[1,1],[1,-1]}
  const auto single = run({"train", path("toy.txt"), "--lup", "1"});
  EXPECT_EQ(single.kv.at("converged"), "1");
}
