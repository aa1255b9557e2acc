#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "clsnet/commands.hpp"

using namespace clsnet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Commands : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("clsnet_cmd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  ScenarioConfig config(const std::string& yaml, const std::string& sub = "run") {
    ScenarioConfig c = parse_scenario(yaml, "test");
    c.output_dir = (dir_ / sub).string();
    return c;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

std::size_t data_rows(const std::string& csv) {
  std::size_t rows = 0;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  return rows;
}

}  // namespace

TEST_F(Commands, SpectrumOfStar) {
  const auto r = cmd_spectrum(config("system: {kind: star}\naction: {kind: spectrum}\n"));
  const json j = json::parse(r.report);
  const std::vector<double> ev = j["eigenvalues"];
  const double expected[] = {0.0, 0.5, 0.5, 0.5, 1.0};
  ASSERT_EQ(ev.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(ev[i], expected[i], 1e-14);
  EXPECT_EQ(j["cls"].size(), 2u);
  EXPECT_EQ(j["cls"][0]["support"], json({0, 1}));
  EXPECT_EQ(j["blocks"]["sectors"][0]["name"], "sector-0");
  EXPECT_TRUE(j["seed"].is_null());
  EXPECT_EQ(r.files.size(), 1u);
  EXPECT_EQ(slurp(r.files[0]), r.report);
}

TEST_F(Commands, SpectrumOfSevenSite) {
  const auto r = cmd_spectrum(config("system: {kind: seven}\naction: {kind: spectrum}\n"));
  const json j = json::parse(r.report);
  EXPECT_NEAR(j["blocks"]["xi"].get<double>(), 6.0, 1e-12);
  EXPECT_EQ(j["blocks"]["sectors"].size(), 2u);
  // asymmetric couplings: no block decomposition, but the spectrum still works
  const auto skew = cmd_spectrum(config(
      "system: {kind: seven}\nparameters: {couplings: [1, 1, 1, 1, 1, 2]}\naction: {kind: spectrum}\n", "skew"));
  EXPECT_TRUE(json::parse(skew.report)["blocks"].is_null());
}

TEST_F(Commands, PhaseFlipTransfer) {
  const auto r = cmd_simulate(config(
      "system: {kind: star}\naction: {kind: simulate, protocol: phase-flip-transfer, sample_dt: 0.5}\n"));
  const json j = json::parse(r.report);
  EXPECT_GE(j["fidelity"].get<double>(), 1.0 - 1e-12);
  EXPECT_NEAR(j["T"].get<double>(), 2 * pi, 1e-14);
  EXPECT_LE(j["norm_drift"].get<double>(), 1e-10);
  ASSERT_EQ(r.files.size(), 2u);
  const std::string csv = slurp(r.files[0]);
  EXPECT_EQ(csv.substr(0, 14), "t,re_0,im_0,re");
  EXPECT_EQ(data_rows(csv), 14u);  // 0, 0.5, ..., 6.0 and T
  EXPECT_NE(csv.find("# event phase-flip t=0"), std::string::npos);
}

TEST_F(Commands, SevenSiteAndGeneration) {
  const auto seven = cmd_simulate(config(
      "system: {kind: seven}\naction: {kind: simulate, protocol: hopping-flip-transfer, k: 1}\n", "seven"));
  EXPECT_GE(json::parse(seven.report)["fidelity"].get<double>(), 1.0 - 1e-12);
  const auto gen = cmd_simulate(config(
      "system: {kind: star}\naction: {kind: simulate, protocol: piecewise-transfer, branch: 1, k1p: 1, k2p: 0}\n",
      "gen"));
  EXPECT_GE(json::parse(gen.report)["fidelity"].get<double>(), 1.0 - 1e-12);
}

TEST_F(Commands, ZeroDurationGivesOneRow) {
  const auto r = cmd_simulate(config(
      "system: {kind: star}\naction:\n  kind: simulate\n  protocol: free\n  duration: 0.0\n"
      "  initial: initial\n  target: initial\n  sample_dt: 0.1\n"));
  EXPECT_EQ(data_rows(slurp(r.files[0])), 1u);
  EXPECT_NEAR(json::parse(r.report)["fidelity"].get<double>(), 1.0, 1e-15);
}

TEST_F(Commands, FreeScheduleMatchesProtocol) {
  const auto free = cmd_simulate(config(
      "system: {kind: star}\naction:\n  kind: simulate\n  protocol: free\n  duration: 6.283185307179586\n"
      "  initial: initial\n  target: final\n  events:\n"
      "    - {time: 0.0, type: phase-flip, site: 1}\n    - {time: 6.283185307179586, type: phase-flip, site: 4}\n",
      "free"));
  EXPECT_GE(json::parse(free.report)["fidelity"].get<double>(), 1.0 - 1e-12);
}

TEST_F(Commands, EvaluateReferencePulses) {
  for (const std::string problem : {"star-transfer", "star-creation"}) {
    const auto r = cmd_optimize(
        config("system: {kind: star}\naction: {kind: optimize, problem: " + problem + ", mode: evaluate}\n", problem));
    const json j = json::parse(r.report);
    EXPECT_LT(j["infidelity"].get<double>(), 1e-4) << problem;
    ASSERT_EQ(r.files.size(), 3u);
    EXPECT_EQ(data_rows(slurp(r.files[1])), 1001u);
  }
}

TEST_F(Commands, SearchNeedsSeed) {
  const auto c = config("system: {kind: star}\naction: {kind: optimize, problem: star-transfer, restarts: 1}\n");
  try {
    cmd_optimize(c);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
  }
}

TEST_F(Commands, SearchIsDeterministic) {
  const std::string yaml =
      "system: {kind: star}\naction:\n  kind: optimize\n  problem: star-transfer\n  restarts: 2\n"
      "  max_evals: 300\n  objective_steps: 64\nseed: 17\n";
  const auto a = cmd_optimize(config(yaml, "a"));
  const auto b = cmd_optimize(config(yaml, "b"));
  ASSERT_EQ(a.files.size(), b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) EXPECT_EQ(slurp(a.files[i]), slurp(b.files[i])) << a.files[i];
  EXPECT_EQ(json::parse(a.report)["restarts"].size(), 2u);
}

TEST_F(Commands, RouteWithoutRampMatchesStarSimulation) {
  const auto route = cmd_route(config(
      "system: {kind: dll, cells: [1, 1]}\naction:\n  kind: route\n  ramp: 0\n"
      "  routes: [{from: [1, 2], to: [3, 4]}]\n",
      "route"));
  const auto star = cmd_simulate(config(
      "system: {kind: star}\naction: {kind: simulate, protocol: phase-flip-transfer}\n", "star"));
  const double fr = json::parse(route.report)["fidelity"];
  const double fs = json::parse(star.report)["fidelity"];
  EXPECT_NEAR(fr, fs, 1e-12);
  const json detail = json::parse(slurp(route.files[0]));
  EXPECT_EQ(detail["routes"].size(), 1u);
}

TEST_F(Commands, RunCommandChecksAction) {
  const auto c = config("system: {kind: star}\naction: {kind: spectrum}\n");
  EXPECT_THROW(run_command("simulate", c), Error);
  EXPECT_THROW(run_command("dance", c), Error);
  EXPECT_NO_THROW(run_command("spectrum", c));
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(2.0), "2");
  EXPECT_EQ(std::stod(format_real(pi)), pi);
}
