#pragma once

// Episode runner, episode records, replay, summaries and batch benchmarks.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "mip/agents.hpp"
#include "mip/domain.hpp"
#include "mip/humans.hpp"
#include "mip/json_io.hpp"
#include "mip/map_io.hpp"
#include "mip/rng.hpp"

namespace mip {

struct EpisodeParams {
  RewardParams reward;
  std::optional<int> detection_budget;  // nullopt: unlimited

  bool operator==(const EpisodeParams&) const = default;
};

struct TraceStep {
  HumanAction human = HumanAction::Up;
  RobotAction robot;
  StepEvents events;
  double plan_seconds = 0.0;
};

struct EpisodeRecord {
  std::string map_id;
  int map_size = 0;
  nlohmann::json map_document;  // embedded so a record replays on its own
  std::string agent;            // label, e.g. "bayes-pomcp@100"
  AgentSpec agent_spec;
  HumanProfile human;           // theta as drawn at episode start
  std::uint64_t seed = 0;
  EpisodeParams params;
  std::vector<TraceStep> trace;
  int score = 0;
  int steps = 0;
  int falls = 0;
  int detections = 0;
  bool goal_reached = false;
  std::string status = "ok";
  std::string error;

  bool ok() const { return status == "ok"; }

  double mean_plan_seconds() const {
    if (trace.empty()) return 0.0;
    double total = 0.0;
    for (const auto& s : trace) total += s.plan_seconds;
    return total / static_cast<double>(trace.size());
  }
};

inline nlohmann::json to_json(const EpisodeRecord& r, bool include_timing = true) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& s : r.trace) {
    nlohmann::json step{{"human", std::string(to_string(s.human))},
                        {"robot", to_json(s.robot)},
                        {"events", to_json(s.events)}};
    if (include_timing) step["plan_seconds"] = s.plan_seconds;
    trace.push_back(std::move(step));
  }
  nlohmann::json params = to_json(r.params.reward);
  params["detection_budget"] =
      r.params.detection_budget ? nlohmann::json(*r.params.detection_budget) : nlohmann::json(nullptr);
  nlohmann::json j{{"map", r.map_id},
                   {"map_size", r.map_size},
                   {"agent", r.agent},
                   {"agent_spec", to_json(r.agent_spec)},
                   {"human", to_json(r.human)},
                   {"seed", r.seed},
                   {"params", params},
                   {"status", r.status},
                   {"error", r.error},
                   {"score", r.score},
                   {"steps", r.steps},
                   {"falls", r.falls},
                   {"detections", r.detections},
                   {"goal_reached", r.goal_reached},
                   {"trace", trace}};
  if (!r.map_document.is_null()) j["map_document"] = r.map_document;
  return j;
}

inline EpisodeRecord record_from_json(const nlohmann::json& j) {
  EpisodeRecord r;
  r.map_id = j.at("map").get<std::string>();
  r.map_size = j.at("map_size").get<int>();
  r.map_document = j.value("map_document", nlohmann::json());
  r.agent = j.at("agent").get<std::string>();
  r.agent_spec = agent_spec_from_json(j.at("agent_spec"));
  r.human = human_profile_from_json(j.at("human"));
  r.seed = j.at("seed").get<std::uint64_t>();
  const auto& p = j.at("params");
  r.params.reward = reward_params_from_json(p);
  if (p.contains("detection_budget") && !p["detection_budget"].is_null())
    r.params.detection_budget = p["detection_budget"].get<int>();
  r.status = j.at("status").get<std::string>();
  r.error = j.value("error", std::string());
  r.score = j.at("score").get<int>();
  r.steps = j.at("steps").get<int>();
  r.falls = j.at("falls").get<int>();
  r.detections = j.at("detections").get<int>();
  r.goal_reached = j.at("goal_reached").get<bool>();
  for (const auto& s : j.at("trace")) {
    TraceStep t;
    t.human = human_action_from_json(s.at("human"));
    t.robot = robot_action_from_json(s.at("robot"));
    t.events = step_events_from_json(s.at("events"));
    t.plan_seconds = s.value("plan_seconds", 0.0);
    r.trace.push_back(std::move(t));
  }
  return r;
}

inline std::string to_line(const EpisodeRecord& r, bool include_timing = true) {
  return to_json(r, include_timing).dump();
}

inline std::vector<EpisodeRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open " + path.string());
  std::vector<EpisodeRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

namespace detail {

inline void finish_record(EpisodeRecord& r, const WorldState& state) {
  r.score = game_score(r.params.reward, state);
  r.steps = state.steps_taken;
  r.falls = state.falls;
  r.detections = state.detections_used;
  r.goal_reached = state.goal_reached;
}

}  // namespace detail

// Plays one episode of a simulated human with a robot agent. Fully
// determined by the seed.
inline EpisodeRecord run_episode(const GridMap& map, const AgentSpec& agent_spec,
                                 const HumanProfile& human_template, std::uint64_t seed,
                                 const EpisodeParams& params) {
  EpisodeRecord r;
  r.map_id = map.id();
  r.map_size = map.size();
  r.map_document = map_to_json(map);
  r.agent = agent_label(agent_spec);
  r.agent_spec = agent_spec;
  r.seed = seed;
  r.params = params;

  Rng profile_rng(mix_seed(seed, 0));
  r.human = instantiate(human_template, profile_rng);

  WorldState state = WorldState::initial(map, params.detection_budget);
  try {
    auto agent = make_agent(agent_spec, map, params.reward, mix_seed(seed, 2));
    SimulatedHuman human(r.human, mix_seed(seed, 1));
    HumanAction pending = human.act(HumanView::observe(map, state));
    while (!state.done) {
      const auto t0 = std::chrono::steady_clock::now();
      const RobotAction robot = agent->act(state, pending);
      const auto t1 = std::chrono::steady_clock::now();
      auto [next, events] = step_world(map, state, pending, robot, params.reward);
      human.observe(robot, pending, events, state.pos, next.pos, map.goal());
      r.trace.push_back({pending, robot, events, std::chrono::duration<double>(t1 - t0).count()});
      state = std::move(next);
      if (state.done) break;
      pending = human.act(HumanView::observe(map, state));
      agent->observe(robot, pending, state);
    }
  } catch (const std::exception& e) {
    r.status = "failed";
    r.error = e.what();
  }
  detail::finish_record(r, state);
  return r;
}

struct ReplayResult {
  bool ok = true;
  int score = 0;
  std::vector<std::string> mismatches;
};

// Re-executes a record's action trace through the domain dynamics and
// checks every reward delta, the event flags and the final score.
inline ReplayResult replay_record(const EpisodeRecord& r, const GridMap& map) {
  ReplayResult out;
  WorldState state = WorldState::initial(map, r.params.detection_budget);
  for (std::size_t t = 0; t < r.trace.size(); ++t) {
    const auto& step = r.trace[t];
    try {
      auto [next, events] = step_world(map, state, step.human, step.robot, r.params.reward);
      if (events != step.events)
        out.mismatches.push_back("step " + std::to_string(t) + ": events differ (reward " +
                                 std::to_string(events.reward) + " vs recorded " +
                                 std::to_string(step.events.reward) + ")");
      state = std::move(next);
    } catch (const std::exception& e) {
      out.mismatches.push_back("step " + std::to_string(t) + ": " + e.what());
      break;
    }
  }
  out.score = game_score(r.params.reward, state);
  if (out.score != r.score)
    out.mismatches.push_back("final score " + std::to_string(out.score) + " vs recorded " +
                             std::to_string(r.score));
  out.ok = out.mismatches.empty();
  return out;
}

// Replays against the map document embedded in the record.
inline ReplayResult replay_record(const EpisodeRecord& r) {
  if (r.map_document.is_null()) throw Error("record for '" + r.map_id + "' carries no map document");
  return replay_record(r, load_map(r.map_document.dump(), r.map_id));
}

struct SummaryRow {
  std::string agent;
  int map_size = 0;
  int n_sims = 0;  // 0 for agents without search
  int n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 when n == 1
  double mean_move_seconds = 0.0;
  double goal_rate = 0.0;
  double mean_falls = 0.0;
  int failed = 0;

  bool single() const { return n == 1; }
  double std_error() const { return n > 0 ? std / std::sqrt(static_cast<double>(n)) : 0.0; }
};

inline double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Aggregates per (agent, map size, n_sims). Order-independent.
inline std::vector<SummaryRow> summarize(const std::vector<EpisodeRecord>& records) {
  using Key = std::tuple<std::string, int, int>;
  struct Acc {
    std::vector<double> scores;
    double move_seconds = 0.0;
    std::size_t moves = 0;
    int goals = 0;
    int falls = 0;
    int failed = 0;
  };
  std::map<Key, Acc> groups;
  for (const auto& r : records) {
    const int n_sims = is_search_agent(r.agent_spec.id) ? r.agent_spec.n_sims.value_or(100) : 0;
    Acc& acc = groups[{r.agent_spec.id, r.map_size, n_sims}];
    if (!r.ok()) {
      ++acc.failed;
      continue;
    }
    acc.scores.push_back(r.score);
    for (const auto& s : r.trace) acc.move_seconds += s.plan_seconds;
    acc.moves += r.trace.size();
    acc.goals += r.goal_reached ? 1 : 0;
    acc.falls += r.falls;
  }
  std::vector<SummaryRow> rows;
  for (auto& [key, acc] : groups) {
    SummaryRow row;
    std::tie(row.agent, row.map_size, row.n_sims) = key;
    // Sort before summing so the floating-point result is order-independent.
    std::sort(acc.scores.begin(), acc.scores.end());
    row.n = static_cast<int>(acc.scores.size());
    row.failed = acc.failed;
    if (row.n > 0) {
      double sum = 0.0;
      for (double s : acc.scores) sum += s;
      row.mean = sum / row.n;
      row.std = sample_std(acc.scores);
      row.goal_rate = static_cast<double>(acc.goals) / row.n;
      row.mean_falls = static_cast<double>(acc.falls) / row.n;
    }
    row.mean_move_seconds = acc.moves ? acc.move_seconds / static_cast<double>(acc.moves) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "agent,map_size,n_sims,n,mean_score,std_score,single,mean_move_seconds,goal_rate,mean_falls,failed\n";
  for (const auto& r : rows) {
    std::ostringstream line;
    line.precision(6);
    line << r.agent << ',' << r.map_size << ',' << r.n_sims << ',' << r.n << ',' << std::fixed
         << r.mean << ',' << r.std << ',' << (r.single() ? 1 : 0) << ',' << r.mean_move_seconds
         << ',' << r.goal_rate << ',' << r.mean_falls << ',' << r.failed;
    out << line.str() << '\n';
  }
}

// Four simulated users spanning the expertise and compliance ranges.
inline std::vector<HumanProfile> default_population() {
  std::vector<HumanProfile> p(4);
  p[0] = {"static-expert", 0.9, 0.8, BetaPrior{80, 20}, Dynamics::Static, 0.05};
  p[1] = {"static-novice", 0.5, 0.4, BetaPrior{40, 60}, Dynamics::Static, 0.05};
  p[2] = {"dynamic-preference", 0.7, 0.5, BetaPrior{50, 50}, Dynamics::PreferenceDriven, 0.05};
  p[3] = {"dynamic-outcome", 0.7, 0.6, BetaPrior{60, 40}, Dynamics::OutcomeDriven, 0.05};
  return p;
}

inline std::vector<HumanProfile> load_population(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw Error("population must be a non-empty list");
  std::vector<HumanProfile> out;
  for (const auto& item : j) out.push_back(human_profile_from_json(item));
  return out;
}

struct BenchmarkConfig {
  std::vector<GridMap> maps;
  std::vector<AgentSpec> agents;
  std::vector<HumanProfile> humans;
  std::vector<std::uint64_t> seeds;
  std::optional<RewardParams> reward;  // default: benchmark horizon per map size
  std::optional<int> detection_budget;
  int threads = 0;  // 0: MIP_THREADS or hardware concurrency
};

struct BenchmarkResult {
  std::vector<EpisodeRecord> records;  // sorted by (map, agent, human, seed)
  std::vector<SummaryRow> summary;
  std::vector<std::string> failures;
};

inline int worker_count(int requested) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("MIP_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("MIP_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

inline BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  if (config.maps.empty() || config.agents.empty() || config.humans.empty() || config.seeds.empty())
    throw Error("benchmark needs at least one map, agent, human and seed");
  for (const auto& a : config.agents)
    if (!is_known_agent(a.id)) throw UnknownAgent("unknown agent '" + a.id + "'");

  struct Cell_ {
    const GridMap* map;
    const AgentSpec* agent;
    const HumanProfile* human;
    std::uint64_t seed;
  };
  std::vector<Cell_> cells;
  for (const auto& m : config.maps)
    for (const auto& a : config.agents)
      for (const auto& h : config.humans)
        for (auto s : config.seeds) cells.push_back({&m, &a, &h, s});

  BenchmarkResult result;
  result.records.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& c = cells[i];
      EpisodeParams params;
      params.reward = config.reward.value_or(RewardParams::benchmark(c.map->size()));
      params.detection_budget = config.detection_budget;
      result.records[i] = run_episode(*c.map, *c.agent, *c.human, c.seed, params);
    }
  };
  const int n = std::min<int>(worker_count(config.threads), static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const EpisodeRecord& a, const EpisodeRecord& b) {
                     return std::tie(a.map_id, a.agent, a.human.id, a.seed) <
                            std::tie(b.map_id, b.agent, b.human.id, b.seed);
                   });
  for (const auto& r : result.records)
    if (!r.ok())
      result.failures.push_back(r.map_id + "/" + r.agent + "/" + r.human.id + "/" +
                                std::to_string(r.seed) + ": " + r.error);
  result.summary = summarize(result.records);
  return result;
}

inline void write_benchmark(const BenchmarkResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream records(out_dir / "records.jsonl");
  for (const auto& r : result.records) records << to_line(r) << '\n';
  std::ofstream summary(out_dir / "summary.csv");
  write_summary_csv(summary, result.summary);
}

}  // namespace mip
