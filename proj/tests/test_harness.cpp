#include <algorithm>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "mip/harness.hpp"
#include "properties.hpp"

using namespace mip;

namespace {

GridMap open8() {
  std::vector<std::string> truth(8, "........"), clear(8, "........");
  truth[0][0] = 'A';
  truth[7][7] = 'G';
  return map_from_rows(truth, clear, clear, clear, "open8");
}

EpisodeRecord scored(const std::string& agent, double score) {
  EpisodeRecord r;
  r.agent = agent;
  r.agent_spec.id = agent;
  r.map_size = 8;
  r.score = static_cast<int>(score);
  return r;
}

}  // namespace

TEST(RunEpisode, ExpertOnOpenGridScoresClosedForm) {
  const auto map = open8();
  HumanProfile expert{"expert", 1.0, 1.0, std::nullopt, Dynamics::Static, 0.05};
  const auto r = run_episode(map, {"no-assist", {}, {}, {}, {}}, expert, 0, {RewardParams::benchmark(8), {}});
  ASSERT_TRUE(r.ok()) << r.error;
  EXPECT_EQ(r.steps, 14);
  EXPECT_TRUE(r.goal_reached);
  EXPECT_EQ(r.score, 116);
}

TEST(RunEpisode, RecordsReplayExactly) {
  for (const auto& map : oracle::shipped_maps()) {
    for (const auto& agent : {"bayes-pomcp", "heuristic-takecontrol-explain", "adv-bayes-pomcp"}) {
      const auto r = run_episode(map, {agent, 30, {}, {}, {}}, default_population()[1], 4,
                                 {RewardParams::benchmark(map.size()), 5});
      ASSERT_TRUE(r.ok()) << r.error;
      const auto replay = replay_record(r);
      EXPECT_TRUE(replay.ok) << map.id() << " " << agent;
      EXPECT_EQ(replay.score, r.score);
      EXPECT_EQ(r.steps, static_cast<int>(r.trace.size()));
      EXPECT_LE(r.detections, 5);
    }
  }
}

TEST(RunEpisode, TamperedRecordIsCaught) {
  const auto map = oracle::shipped_maps(4).front();
  auto r = run_episode(map, {"no-assist", {}, {}, {}, {}}, default_population()[0], 1, {RewardParams::benchmark(4), {}});
  r.score += 1;
  EXPECT_FALSE(replay_record(r).ok);
}

TEST(RecordJson, RoundTrip) {
  const auto map = oracle::shipped_maps(8).front();
  const auto r = run_episode(map, {"bayes-pomcp", 20, {}, {}, {}}, default_population()[2], 3,
                             {RewardParams::benchmark(8), 5});
  const auto back = record_from_json(nlohmann::json::parse(to_line(r)));
  EXPECT_EQ(to_line(back), to_line(r));
  EXPECT_TRUE(replay_record(back).ok);
}

TEST(Summarize, Examples) {
  auto rows = summarize({scored("no-assist", 42)});
  ASSERT_EQ(rows.size(), 1U);
  EXPECT_EQ(rows[0].mean, 42.0);
  EXPECT_EQ(rows[0].std, 0.0);
  EXPECT_TRUE(rows[0].single());

  rows = summarize({scored("no-assist", 40), scored("no-assist", 50)});
  EXPECT_EQ(rows[0].mean, 45.0);
  EXPECT_NEAR(rows[0].std, 7.071, 5e-4);
  EXPECT_FALSE(rows[0].single());
}

TEST(Summarize, OrderIndependent) {
  std::vector<EpisodeRecord> records;
  Rng rng(3);
  for (int i = 0; i < 200; ++i)
    records.push_back(scored(i % 3 ? "pomcp" : "no-assist", static_cast<double>(uniform_index(rng, 300)) - 150));
  std::ostringstream a, b;
  write_summary_csv(a, summarize(records));
  std::shuffle(records.begin(), records.end(), std::mt19937(5));
  write_summary_csv(b, summarize(records));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Benchmark, WritesRecordsAndSummary) {
  BenchmarkConfig config;
  config.maps = oracle::shipped_maps(4);
  config.agents = {{"no-assist", {}, {}, {}, {}}, {"pomcp", 20, {}, {}, {}}};
  config.humans = default_population();
  config.seeds = {0, 1};
  const auto result = run_benchmark(config);
  EXPECT_TRUE(result.failures.empty());
  EXPECT_EQ(result.records.size(), config.maps.size() * 2 * 4 * 2);
  EXPECT_EQ(result.summary.size(), 2U);

  const auto dir = std::filesystem::temp_directory_path() / "mip_bench_test";
  std::filesystem::remove_all(dir);
  write_benchmark(result, dir);
  const auto back = read_records(dir / "records.jsonl");
  ASSERT_EQ(back.size(), result.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(to_line(back[i]), to_line(result.records[i]));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
  std::filesystem::remove_all(dir);
}

TEST(Benchmark, RejectsEmptyOrUnknown) {
  BenchmarkConfig config;
  EXPECT_THROW(run_benchmark(config), Error);
  config.maps = oracle::shipped_maps(4);
  config.agents = {{"mystery", {}, {}, {}, {}}};
  config.humans = default_population();
  config.seeds = {0};
  EXPECT_THROW(run_benchmark(config), UnknownAgent);
}

TEST(Population, DefaultsAndFileFormat) {
  const auto pop = default_population();
  ASSERT_EQ(pop.size(), 4U);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : pop) j.push_back(to_json(p));
  EXPECT_EQ(load_population(j), pop);
  EXPECT_THROW(load_population(nlohmann::json::array()), Error);
}
