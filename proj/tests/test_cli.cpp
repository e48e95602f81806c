// Copyright 2026 The hierlpr Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hierlpr/cli.hpp"

using namespace hierlpr;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hierlpr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(HIERLPR_DATA_DIR) + "/" + name; }

fs::path tmp(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hierlpr_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, RankExample) {
  const auto r = run({"rank", "--hierarchy", data("example_hierarchy.csv"), "--lpr", data("example_lpr.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  EXPECT_EQ(header, "rank,sample_id,label_id,lpr,block_id");
  EXPECT_EQ(first, "1,s1,3,0.65,0");
}

TEST(Cli, RankJsonSummary) {
  const auto out = tmp("rank.csv");
  const auto r = run({"--json", "rank", "--hierarchy", data("example_hierarchy.csv"), "--lpr",
                      data("example_lpr.csv"), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["eauc"].get<double>(), 5.7, 1e-12);
  EXPECT_TRUE(fs::exists(out));
  EXPECT_EQ(read_ranking_csv(out.string()).rows.size(), 4u);
}

TEST(Cli, MissingFileIsValidationError) {
  const auto r = run({"rank", "--hierarchy", "/nonexistent/h.csv", "--lpr", data("example_lpr.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/h.csv"), std::string::npos);
  EXPECT_EQ(run({"rank", "--no-such-flag"}).code, 2);
}

TEST(Cli, DagNeedsFlagAndWritesSidecar) {
  const std::vector<std::string> base{"rank", "--hierarchy", data("diamond_hierarchy.csv"), "--lpr",
                                      data("diamond_lpr.csv")};
  EXPECT_EQ(run(base).code, 2);
  const auto out = tmp("diamond.csv");
  auto args = base;
  args.insert(args.end(), {"--dag", "--out", out.string()});
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto side = nlohmann::json::parse(slurp(out.string() + ".split.json"));
  EXPECT_EQ(side["splits"], 2);
  EXPECT_EQ(side["search"], "exhaustive");
  EXPECT_EQ(side["assignment"][0]["chosen_parent"], 1);
  EXPECT_NEAR(side["eauc"].get<double>(), 5.1, 1e-12);
}

TEST(Cli, SelftestAndCorruption) {
  EXPECT_EQ(run({"selftest", "--trials", "30"}).code, 0);
  const auto bad = run({"selftest", "--trials", "30", "--corrupt-tie-rule"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST(Cli, VersionListsRegistry) {
  const auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(kVersion), std::string::npos);
  for (const char* a : {"naive", "fast", "cssa", "brute"}) EXPECT_NE(r.out.find(a), std::string::npos) << a;
}

TEST(Cli, BinaryRuns) {
  const std::string cmd = std::string("\"") + HIERLPR_CLI + "\" --version > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}

TEST(Cli, CurvesAndCutoff) {
  const auto ranking = tmp("curves_rank.csv");
  ASSERT_EQ(run({"rank", "--hierarchy", data("example_hierarchy.csv"), "--lpr", data("example_lpr.csv"), "--out",
                 ranking.string()})
                .code,
            0);
  const auto dir = tmp("curves");
  const auto r = run({"curves", "--ranking", ranking.string(), "--truth", data("example_lpr.csv"), "--out-dir",
                      dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "hit.csv"));
  EXPECT_TRUE(fs::exists(dir / "pr.csv"));
  const auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
  // Order single, root, left, right: hits 1, 2, 3, 3.
  EXPECT_EQ(s["hit_auc"], 9);

  const auto c = run({"--json", "cutoff", "--ranking", ranking.string(), "--truth", data("example_lpr.csv"),
                      "--criterion", "precision", "--target", "0.9"});
  ASSERT_EQ(c.code, 0) << c.err;
  // The root tree is one block, so the only cuts are after 1 and 4 calls.
  EXPECT_EQ(nlohmann::json::parse(c.out)["cut"], 1);

  const auto neg = tmp("neg_truth.csv");
  std::ofstream(neg) << "sample_id,label_id,value,truth\ns1,0,0.2,0\ns1,1,0.9,0\ns1,2,0.7,0\ns1,3,0.65,0\n";
  const auto u = run({"cutoff", "--ranking", ranking.string(), "--truth", neg.string(), "--criterion", "precision",
                      "--target", "0.5"});
  EXPECT_EQ(u.code, 3);
}

TEST(Cli, EstimateLpr) {
  const auto train = tmp("train.csv");
  {
    std::ofstream f(train);
    f << "sample_id,label_id,value,truth\n";
    Rng rng = make_rng(3);
    for (int i = 0; i < 400; ++i) {
      const bool y = i % 3 == 0;
      f << "s" << i << ",0," << format_double(y ? sample_beta(rng, 6, 2) : sample_beta(rng, 2, 6)) << ","
        << (y ? 1 : 0) << "\n";
    }
  }
  const auto out = tmp("lpr.csv");
  for (const char* method : {"smooth", "ltdr"}) {
    const auto r = run({"estimate-lpr", "--train", train.string(), "--out", out.string(), "--method", method});
    ASSERT_EQ(r.code, 0) << method << r.err;
    const auto t = read_scores_csv(out.string(), 1);
    EXPECT_EQ(t.samples(), 400u);
    for (double v : t.values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Cli, SimulateIdenticalAcrossThreads) {
  const auto a = tmp("sim_a");
  const auto b = tmp("sim_b");
  ASSERT_EQ(run({"--threads", "1", "simulate", "--setting", "1", "--reps", "3", "--seed", "11", "--out-dir",
                 a.string()})
                .code,
            0);
  ASSERT_EQ(run({"--threads", "3", "simulate", "--setting", "1", "--reps", "3", "--seed", "11", "--out-dir",
                 b.string()})
                .code,
            0);
  for (const char* f : {"table2.json", "pr_avg.csv", "rep_000.csv", "rep_002.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}
