#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SPILLNET_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("spillnet_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, ScenarioFeaturesTrainPipeline) {
  const auto d = scratch("pipeline");
  ASSERT_EQ(run("scenario --kind 1 --seed 4 --duration-h 48 --out " + (d / "s").string()), 0);
  ASSERT_EQ(run("features --spill " + (d / "s/spill.json").string() + " --env " + (d / "s/env.json").string() +
                " --out " + (d / "f").string()),
            0);
  ASSERT_EQ(run("train --dataset " + (d / "f/dataset.json").string() + " --solver euler --epochs 2 --seed 1 --out " +
                (d / "t").string()),
            0);
  EXPECT_TRUE(fs::exists(d / "t/checkpoint.json"));
  EXPECT_TRUE(fs::exists(d / "t/history.csv"));
  const auto m = read_json(d / "t/manifest.json");
  EXPECT_EQ(m["command"], "train");
  EXPECT_EQ(m["seed"], 1);
  EXPECT_EQ(m["config"]["max_epochs"], 2);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto d = scratch("precedence");
  fs::create_directories(d);
  std::ofstream(d / "sc.json") << R"({"kind": 2, "seed": 9, "duration_h": 48})";
  ASSERT_EQ(run("scenario --config " + (d / "sc.json").string() + " --seed 5 --out " + (d / "o").string()), 0);
  const auto m = read_json(d / "o/manifest.json");
  EXPECT_EQ(m["config"]["kind"], 2);
  EXPECT_EQ(m["seed"], 5);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("train --no-such-flag"), 1);
  EXPECT_EQ(run("train --dataset x.json --solver rk5"), 1);
  const auto d = scratch("errors");
  EXPECT_EQ(run("train --dataset " + (d / "missing.json").string() + " --out " + d.string()), 2);
  fs::create_directories(d);
  std::ofstream(d / "bad.json") << "{not json";
  EXPECT_EQ(run("features --spill " + (d / "bad.json").string() + " --out " + d.string()), 2);
}

TEST(Cli, SimulateWritesArtifacts) {
  const auto d = scratch("simulate");
  ASSERT_EQ(run("simulate --seed 2 --fleet-size 3 --duration-h 1 --out " + d.string()), 0);
  EXPECT_TRUE(fs::exists(d / "events.jsonl"));
  EXPECT_TRUE(fs::exists(d / "trajectories.geojson"));
  const auto metrics = read_json(d / "metrics.json");
  EXPECT_EQ(metrics["safety_violations"], 0);
}
