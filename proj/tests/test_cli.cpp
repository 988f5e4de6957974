// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "gqml/cli.hpp"
#include "gqml/data.hpp"
#include "gqml/io.hpp"

using namespace gqml;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run gqml_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gqml");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gqml_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  const auto r = gqml_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("crossval"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(gqml_cli({}).code, 1);
  EXPECT_EQ(gqml_cli({"gen-data", "--bogus"}).code, 1);
  EXPECT_EQ(gqml_cli({"gen-data", "--molecule", "LiH"}).code, 1);  // missing --n and --out
  const auto dir = scratch("usage");
  const auto bad = gqml_cli({"gen-data", "--molecule", "H2O", "--n", "3", "--out", (dir / "x.json").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("error:"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "x.json"));
}

TEST(Cli, GenDataWritesLoadableDatasetAndEchoesConfig) {
  const auto dir = scratch("gen");
  const auto path = (dir / "nh3.json").string();
  const auto r = gqml_cli({"gen-data", "--molecule", "NH3", "--n", "7", "--seed", "3", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("resolved config: ", 0), 0u);
  const auto d = data::load_dataset(path);
  EXPECT_EQ(d.molecule, Molecule::NH3);
  EXPECT_EQ(d.size(), 7u);
  EXPECT_EQ(d.samples, data::generate(Molecule::NH3, 7, 3).samples);
}

TEST(Cli, MissingDataFileIsValidationError) {
  const auto dir = scratch("missing");
  const auto r = gqml_cli({"crossval", "--data", (dir / "none.json").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, UnwritableOutputIsRuntimeFailure) {
  const auto dir = scratch("runtime");
  io::write_file_atomic(dir / "file", "x");
  const auto r = gqml_cli({"gen-data", "--molecule", "LiH", "--n", "2", "--out", (dir / "file" / "d.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("failure:"), std::string::npos);
}

TEST(Cli, ConfigFileIsValidated) {
  const auto dir = scratch("config");
  const auto data = (dir / "lih.json").string();
  ASSERT_EQ(gqml_cli({"gen-data", "--molecule", "LiH", "--n", "10", "--out", data}).code, 0);
  io::write_file_atomic(dir / "bad_key.json", R"({"learning_rate": 0.1})");
  io::write_file_atomic(dir / "bad_kind.json", R"({"quantum": {"epochs": 2}})");
  io::write_file_atomic(dir / "bad_json.json", "{");
  for (const char* cfg : {"bad_key.json", "bad_kind.json", "bad_json.json"}) {
    const auto r = gqml_cli({"train", "--data", data, "--kinds", "non-eq", "--config", (dir / cfg).string(),
                             "--out", (dir / "out").string()});
    EXPECT_EQ(r.code, 1) << cfg;
  }
  EXPECT_EQ(gqml_cli({"train", "--data", data, "--kinds", "quantum", "--out", (dir / "out").string()}).code, 1);
}

TEST(Cli, ConfigPrecedenceShowsInResolvedEcho) {
  const auto dir = scratch("precedence");
  const auto data = (dir / "lih.json").string();
  ASSERT_EQ(gqml_cli({"gen-data", "--molecule", "LiH", "--n", "6", "--out", data}).code, 0);
  io::write_file_atomic(dir / "cfg.json", R"({"epochs": 3, "lr": 0.02, "non-eq": {"lr": 0.07}})");
  const auto r = gqml_cli({"train", "--data", data, "--kinds", "non-eq,graph-perm", "--config",
                           (dir / "cfg.json").string(), "--epochs", "2", "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto line = r.out.substr(0, r.out.find('\n'));
  const auto j = nlohmann::json::parse(line.substr(std::string("resolved config: ").size()));
  EXPECT_EQ(j["kinds"]["non-eq"]["lr"], 0.07);
  EXPECT_EQ(j["kinds"]["graph-perm"]["lr"], 0.02);
  EXPECT_EQ(j["kinds"]["non-eq"]["epochs"], 2);
  EXPECT_TRUE(fs::exists(dir / "out" / "non-eq.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "graph-perm_history.csv"));
  const auto m = models::model_from_json(nlohmann::json::parse(io::read_file(dir / "out" / "graph-perm.json")));
  EXPECT_EQ(m.params.size(), models::count_params(models::canonical_config(
                                 models::ModelKind::GraphPermQML, Molecule::LiH, true)));
  const auto table = gqml_cli({"train", "--data", data, "--kinds", "graph-perm", "--epochs", "1",
                               "--strict-equivariance", "false", "--out", (dir / "table").string()});
  ASSERT_EQ(table.code, 0) << table.err;
  const auto t = models::model_from_json(nlohmann::json::parse(io::read_file(dir / "table" / "graph-perm.json")));
  EXPECT_FALSE(t.config.strict_equivariance);
}

TEST(Cli, CheckEquivarianceSuitesPass) {
  for (const char* suite : {"encodings", "data"}) {
    const auto r = gqml_cli({"check-equivariance", "--suite", suite});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
  }
  EXPECT_EQ(gqml_cli({"check-equivariance", "--suite", "nope"}).code, 1);
}

TEST(Cli, CrossvalRerunsAreByteIdenticalAndReportReadsThem) {
  const auto dir = scratch("crossval");
  const auto data = (dir / "lih.json").string();
  ASSERT_EQ(gqml_cli({"gen-data", "--molecule", "LiH", "--n", "15", "--seed", "2", "--out", data}).code, 0);
  const std::vector<std::string> common = {"crossval", "--data", data, "--kinds", "non-eq,classical",
                                           "--k", "3", "--epochs", "3", "--seed", "4"};
  auto first = common, second = common, threaded = common;
  first.insert(first.end(), {"--out", (dir / "a").string()});
  second.insert(second.end(), {"--out", (dir / "b").string()});
  threaded.insert(threaded.end(), {"--out", (dir / "c").string(), "--jobs", "3"});
  for (const auto& args : {first, second, threaded}) ASSERT_EQ(gqml_cli(args).code, 0);
  for (const char* f : {"non-eq_folds.csv", "classical_folds.csv", "summary.json", "radar.csv"}) {
    EXPECT_EQ(io::read_file(dir / "a" / f), io::read_file(dir / "b" / f)) << f;
    EXPECT_EQ(io::read_file(dir / "a" / f), io::read_file(dir / "c" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(dir / "a" / "resolved_config.json"));

  const auto rep = gqml_cli({"report", "--in", (dir / "a").string()});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("non-eq"), std::string::npos);
  EXPECT_NE(rep.out.find("force_mean_r2"), std::string::npos);
  EXPECT_EQ(gqml_cli({"report", "--in", (dir / "nothing").string()}).code, 1);
}

TEST(Cli, CrossvalRejectsTooFewSamples) {
  const auto dir = scratch("few");
  const auto data = (dir / "lih.json").string();
  ASSERT_EQ(gqml_cli({"gen-data", "--molecule", "LiH", "--n", "3", "--out", data}).code, 0);
  EXPECT_EQ(gqml_cli({"crossval", "--data", data, "--k", "5", "--out", (dir / "o").string()}).code, 1);
  EXPECT_EQ(gqml_cli({"crossval", "--data", data, "--k", "2", "--jobs", "0", "--out", (dir / "o").string()}).code, 1);
}
