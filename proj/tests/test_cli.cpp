#include "mgl/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

namespace {

using mgl::io::Json;
namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = mgl::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("mgl_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return (path_ / name).string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

TEST(CliSigma, WorkedExampleAndTrivial) {
  TempDir dir;
  const auto file = dir.write("s.json", R"({"outcomes": ["a", "b", "c", "d"], "generators": [[0], [1]]})");
  const auto r = run({"sigma", file});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["atom_count"], 3);
  EXPECT_EQ(report["sets"].size(), 8u);
  EXPECT_TRUE(report["axioms_hold"].get<bool>());

  const auto empty = dir.write("e.json", R"({"outcomes": ["a", "b", "c"], "generators": []})");
  const Json trivial = Json::parse(run({"sigma", empty}).out);
  EXPECT_EQ(trivial["atom_count"], 1);
  EXPECT_EQ(trivial["sets"].size(), 2u);
}

TEST(CliSigma, TenSingletonsAndLimit) {
  TempDir dir;
  Json doc;
  doc["outcomes"] = Json::array();
  doc["generators"] = Json::array();
  for (int i = 0; i < 10; ++i) {
    doc["outcomes"].push_back("w" + std::to_string(i));
    doc["generators"].push_back(Json::array({i}));
  }
  const auto file = dir.write("ten.json", doc.dump());
  const Json full = Json::parse(run({"sigma", file}).out);
  EXPECT_EQ(full["set_count"], 1024);
  EXPECT_EQ(full["sets"].size(), 1024u);

  const auto limited = run({"sigma", file, "--limit", "100"});
  EXPECT_EQ(limited.code, 0);
  const Json atoms_only = Json::parse(limited.out);
  EXPECT_FALSE(atoms_only.contains("sets"));
  EXPECT_TRUE(atoms_only.contains("warning"));
  EXPECT_EQ(atoms_only["atoms"].size(), 10u);
}

TEST(CliSigma, MalformedJsonIsInputError) {
  TempDir dir;
  const auto r = run({"sigma", dir.write("bad.json", "{not json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("malformed JSON"), std::string::npos);
}

TEST(CliVerify, FairWalkClassifiesAsMartingale) {
  TempDir dir;
  const auto spec = run({"walk-spec", "--n", "4"});
  ASSERT_EQ(spec.code, 0) << spec.err;
  const auto file = dir.write("w.json", spec.out);
  const auto r = run({"verify", file, "--theorem", "classify"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(Json::parse(r.out)["values"]["label"], "martingale");
}

TEST(CliVerify, ConstantProcessPythagoras) {
  TempDir dir;
  const auto file = dir.write("c.json", R"({
    "outcomes": ["H", "T"],
    "filtration": [[[0, 1]], [[0], [1]]],
    "process": [["3", "3"], ["3", "3"]]
  })");
  const auto r = run({"verify", file, "--theorem", "pythagoras"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["values"]["lhs"], "9");
  EXPECT_EQ(report["values"]["rhs"], "9");
  EXPECT_EQ(report["verdict"], "pass");
}

TEST(CliVerify, DoublingTransformOptionalStopping) {
  TempDir dir;
  const auto spec = run({"walk-spec", "--n", "6", "--strategy", "doubling", "--stop", "above:1"});
  ASSERT_EQ(spec.code, 0) << spec.err;
  const auto r = run({"verify", dir.write("d.json", spec.out), "--theorem", "optional-stopping"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["values"]["expected_stopped"], "0");
  EXPECT_EQ(report["values"]["expected_initial"], "0");
}

TEST(CliVerify, HypothesisFailureExitsOne) {
  TempDir dir;
  const auto spec = run({"walk-spec", "--n", "4", "--stop", "above:1", "--never"});
  const auto r = run({"verify", dir.write("u.json", spec.out), "--theorem", "optional-stopping"});
  EXPECT_EQ(r.code, 1);
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["verdict"], "hypothesis-failure");
  EXPECT_NE(report["note"].get<std::string>().find("tau unbounded at horizon"), std::string::npos);
}

TEST(CliVerify, EverySelectorOnAWalkSpec) {
  TempDir dir;
  Json spec = Json::parse(run({"walk-spec", "--n", "4", "--predictable", "doubling", "--stop", "time:3"}).out);
  spec["interval"] = Json::array({"-1", "1"});
  spec["grid"] = Json::array({Json::array({0, 1})});
  spec["variable"] = spec["process"][4];
  spec["coarse"] = spec["filtration"][1];
  spec["fine"] = spec["filtration"][3];
  spec["tail_bound"] = {{"window", 1}, {"epsilon", "1/2"}};
  const auto file = dir.write("all.json", spec.dump());
  for (const char* theorem : {"classify", "transform", "stopped", "optional-stopping", "upcrossing", "pythagoras",
                              "tower", "kolmogorov"}) {
    const auto r = run({"verify", file, "--theorem", theorem});
    EXPECT_EQ(r.code, 0) << theorem << "\n" << r.out << r.err;
  }
  // The fixed time 3 fails the window-1 hypothesis early on.
  EXPECT_EQ(run({"verify", file, "--theorem", "tail-bound"}).code, 1);
  EXPECT_EQ(run({"verify", file, "--theorem", "convergence"}).code, 0);
}

TEST(CliVerify, SchemaErrorsExitTwo) {
  TempDir dir;
  const auto file = dir.write("s.json", R"({"outcomes": ["a", "b"], "filtration": [[[0], [1]]], "process": [[1]]})");
  const auto r = run({"verify", file, "--theorem", "classify"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("field 'process[0]'"), std::string::npos);

  const auto missing = run({"verify", file, "--theorem", "tower"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(run({"verify", file, "--theorem", "nonsense"}).code, 2);
  EXPECT_EQ(run({"verify", dir.path("absent.json"), "--theorem", "classify"}).code, 2);
}

TEST(CliVerify, BadCandidateIsHypothesisFailure) {
  TempDir dir;
  const auto file = dir.write("k.json", R"({
    "outcomes": ["HH", "HT", "TH", "TT"],
    "variable": [2, 0, 0, -2],
    "coarse": [[0, 1], [2, 3]],
    "candidate": [1, 1, 1, 1]
  })");
  const auto r = run({"verify", file, "--theorem", "kolmogorov"});
  EXPECT_EQ(r.code, 1);
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["values"]["conditional_expectation"], Json::parse(R"(["1", "1", "-1", "-1"])"));
}

TEST(CliSimulate, DegenerateWalkCsv) {
  const auto r = run({"simulate", "walk", "--n", "3", "--p", "1", "--paths", "10", "--seed", "1", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "t0,t1,t2,t3");
  int rows = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(line, "0,1,2,3");
    ++rows;
  }
  EXPECT_EQ(rows, 10);
}

TEST(CliSimulate, FairWalkAndDoubling) {
  const Json walk = Json::parse(
      run({"simulate", "walk", "--n", "10", "--p", "0.5", "--paths", "100000", "--seed", "7"}).out);
  const double mean = walk["estimate"]["mean"];
  const double se = walk["estimate"]["std_error"];
  EXPECT_LE(std::abs(mean), 3 * se);
  EXPECT_EQ(walk["estimate"]["ci95"].size(), 2u);

  const Json doubling = Json::parse(run({"simulate", "doubling", "--levels", "8", "--p", "0.5", "--paths", "100000",
                                         "--seed", "7", "--exact"})
                                        .out);
  const double lo = doubling["profit"]["ci95"][0], hi = doubling["profit"]["ci95"][1];
  EXPECT_LE(lo, 0.0);
  EXPECT_GE(hi, 0.0);
  EXPECT_GE(doubling["win_frequency"]["mean"].get<double>(), 0.99);
  EXPECT_EQ(doubling["exact"]["win_probability"], "255/256");
  EXPECT_EQ(doubling["exact"]["expected_profit"], "0");
}

TEST(CliSimulate, UnknownModelExitsTwo) {
  EXPECT_EQ(run({"simulate", "lottery", "--paths", "10"}).code, 2);
  EXPECT_EQ(run({"simulate", "walk", "--functional", "stopped:argmax", "--paths", "10"}).code, 2);
}

TEST(CliFormats, HumanCarriesTheJsonNumbers) {
  const std::vector<std::string> base{"simulate", "walk", "--n", "5", "--paths", "1000", "--seed", "3"};
  auto human_args = base;
  human_args.insert(human_args.end(), {"--format", "human"});
  const auto json = run(base);
  const auto human = run(human_args);
  const Json report = Json::parse(json.out);
  const std::string mean = mgl::cli::dump_json(report["estimate"]["mean"]);
  EXPECT_NE(human.out.find("estimate.mean: " + mean.substr(0, mean.size() - 1)), std::string::npos) << human.out;
}

TEST(CliFormats, DoublesUseSeventeenDigits) {
  Json doc;
  doc["x"] = 0.1;
  EXPECT_EQ(mgl::cli::dump_json(doc), "{\n  \"x\": 0.10000000000000001\n}\n");
}

TEST(CliFormats, OutFlagWritesFile) {
  TempDir dir;
  const auto target = dir.path("spec.json");
  const auto r = run({"walk-spec", "--n", "2", "--out", target});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(target);
  const Json spec = Json::parse(in);
  EXPECT_EQ(spec["outcomes"].size(), 4u);
}

TEST(CliConfig, EnumerationLimitPrecedence) {
  EXPECT_EQ(mgl::cli::resolve_enumeration_limit(std::nullopt, nullptr), mgl::cli::kDefaultEnumerationLimit);
  EXPECT_EQ(mgl::cli::resolve_enumeration_limit(std::nullopt, "64"), 64u);
  EXPECT_EQ(mgl::cli::resolve_enumeration_limit(std::size_t{8}, "64"), 8u);
  EXPECT_THROW(mgl::cli::resolve_enumeration_limit(std::nullopt, "0"), mgl::InputError);
  EXPECT_THROW(mgl::cli::resolve_enumeration_limit(std::nullopt, "lots"), mgl::InputError);
  EXPECT_THROW(mgl::cli::resolve_enumeration_limit(std::size_t{0}, nullptr), mgl::InputError);
}

TEST(CliConfig, BadFlagsExitTwo) {
  EXPECT_EQ(run({"walk-spec", "--n", "2", "--tolerance", "-1"}).code, 2);
  EXPECT_EQ(run({"walk-spec", "--n", "2", "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"walk-spec", "--n", "30"}).code, 2);
  EXPECT_EQ(run({"walk-spec", "--n", "2", "--format", "csv"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST(CliRoundTrip, EmittedSpecsReverifyIdentically) {
  TempDir dir;
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"walk-spec", "--n", "3"},
        std::vector<std::string>{"walk-spec", "--n", "4", "--strategy", "doubling", "--stop", "below:-2"},
        std::vector<std::string>{"walk-spec", "--n", "3", "--p", "1/3", "--predictable", "doubling"}}) {
    const auto first = run(args);
    ASSERT_EQ(first.code, 0) << first.err;
    const auto path = dir.write("rt.json", first.out);
    const auto reparsed = mgl::io::parse_process_spec(Json::parse(first.out));
    EXPECT_EQ(mgl::cli::dump_json(mgl::io::to_json(reparsed)), first.out);
    const auto a = run({"verify", path, "--theorem", "classify"});
    const auto b = run({"verify", dir.write("rt2.json", mgl::cli::dump_json(mgl::io::to_json(reparsed))), "--theorem",
                        "classify"});
    EXPECT_EQ(a.out, b.out);
  }
}

TEST(CliBinary, RunsAsProcess) {
  const std::string command = std::string(MGL_CLI_PATH) + " walk-spec --n 2 > /dev/null";
  EXPECT_EQ(std::system(command.c_str()), 0);
}

}  // namespace
