#pragma once

// Turn-based game sessions for human players. Transport-free; see
// http_service.hpp for the HTTP binding.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mip/agents.hpp"
#include "mip/domain.hpp"
#include "mip/harness.hpp"
#include "mip/json_io.hpp"
#include "mip/map_io.hpp"

namespace mip {

inline constexpr int kDefaultSessionBudget = 5;

struct SessionRequest {
  std::string map_id;
  AgentSpec agent;
  EpisodeParams params{RewardParams::interactive(), kDefaultSessionBudget};
  std::optional<std::uint64_t> seed;
};

inline SessionRequest session_request_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SyntaxError("request body must be an object");
  SessionRequest req;
  if (!j.contains("map") || !j["map"].is_string()) throw SyntaxError("'map' is required");
  req.map_id = j["map"].get<std::string>();
  req.agent = agent_spec_from_json(j.value("agent", nlohmann::json("bayes-pomcp")));
  if (j.contains("params")) {
    const auto& p = j["params"];
    req.params.reward = reward_params_from_json(p, RewardParams::interactive());
    if (p.contains("detection_budget"))
      req.params.detection_budget =
          p["detection_budget"].is_null() ? std::nullopt : std::optional<int>(p["detection_budget"].get<int>());
  }
  if (j.contains("seed") && !j["seed"].is_null()) req.seed = j["seed"].get<std::uint64_t>();
  return req;
}

// What a player may see: their own layer with fog, sensor readings, fall
// sites and holes. Never the true layer or the robot layer.
inline nlohmann::json human_snapshot(const GridMap& map, const WorldState& state,
                                     const RewardParams& params) {
  nlohmann::json human_rows = nlohmann::json::array();
  nlohmann::json fog_rows = nlohmann::json::array();
  for (int r = 0; r < map.size(); ++r) {
    std::string h, f;
    for (int c = 0; c < map.size(); ++c) {
      const Cell cell{r, c};
      h += detail::view_char(map.human_view(cell));
      f += map.fogged(cell) ? '#' : '.';
    }
    human_rows.push_back(h);
    fog_rows.push_back(f);
  }
  nlohmann::json revealed = nlohmann::json::array();
  state.revealed.for_each([&](int i) {
    revealed.push_back({{"cell", to_json(map.cell_at(i))},
                        {"slippery", state.revealed_slippery.contains(i)}});
  });
  nlohmann::json holes = nlohmann::json::array();
  map.holes().for_each([&](int i) { holes.push_back(to_json(map.cell_at(i))); });
  nlohmann::json falls = nlohmann::json::array();
  state.fall_sites.for_each([&](int i) { falls.push_back(to_json(map.cell_at(i))); });
  return {{"map", map.id()},
          {"size", map.size()},
          {"start", to_json(map.start())},
          {"goal", to_json(map.goal())},
          {"human_view", human_rows},
          {"fog", fog_rows},
          {"holes", holes},
          {"revealed", revealed},
          {"fall_sites", falls},
          {"position", to_json(state.pos)},
          {"steps", state.steps_taken},
          {"max_steps", params.max_steps},
          {"falls", state.falls},
          {"detections_used", state.detections_used},
          {"detection_budget", state.detection_budget ? nlohmann::json(*state.detection_budget)
                                                      : nlohmann::json(nullptr)},
          {"score", game_score(params, state)},
          {"done", state.done},
          {"goal_reached", state.goal_reached}};
}

class SessionManager {
 public:
  explicit SessionManager(std::vector<GridMap> maps,
                          std::optional<std::filesystem::path> log_dir = std::nullopt)
      : log_dir_(std::move(log_dir)) {
    for (auto& m : maps) {
      auto id = m.id();
      maps_.emplace(std::move(id), std::make_shared<const GridMap>(std::move(m)));
    }
    if (log_dir_) std::filesystem::create_directories(*log_dir_);
  }

  nlohmann::json list_maps() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, m] : maps_) out.push_back({{"id", id}, {"size", m->size()}});
    return out;
  }

  // Returns {"id", "status", "agent", "state"}.
  nlohmann::json create_session(const SessionRequest& req) {
    auto it = maps_.find(req.map_id);
    if (it == maps_.end()) throw UnknownMap("unknown map '" + req.map_id + "'");
    if (!is_known_agent(req.agent.id)) throw UnknownAgent("unknown agent '" + req.agent.id + "'");
    auto s = std::make_shared<Session>();
    s->map = it->second;
    s->record.map_id = s->map->id();
    s->record.map_size = s->map->size();
    s->record.map_document = map_to_json(*s->map);
    s->record.agent = agent_label(req.agent);
    s->record.agent_spec = req.agent;
    s->record.human = HumanProfile{"interactive", 1.0, 0.5, std::nullopt, Dynamics::Static, 0.05};
    s->record.seed = req.seed.value_or(std::random_device{}());
    s->record.params = req.params;
    s->agent = make_agent(req.agent, *s->map, req.params.reward, mix_seed(s->record.seed, 2));
    s->state = WorldState::initial(*s->map, req.params.detection_budget);
    {
      std::lock_guard lock(mutex_);
      s->id = "s" + std::to_string(++counter_);
      sessions_.emplace(s->id, s);
    }
    append_log(*s, {{"event", "created"}, {"session", s->id}, {"record", to_json(s->record)}});
    return view(*s);
  }

  // One full turn: plan, step the world, update the agent's belief.
  nlohmann::json submit_action(const std::string& id, HumanAction action) {
    auto s = find(id);
    std::unique_lock lock(s->mutex, std::try_to_lock);
    if (!lock.owns_lock()) throw Conflict("session '" + id + "' is processing another action");
    if (s->state.done) throw IllegalAction("session is finished");
    if (action == HumanAction::Detect && !s->state.can_detect())
      throw IllegalAction("detection budget exhausted");

    if (s->last_robot) s->agent->observe(*s->last_robot, action, s->state);
    const auto t0 = std::chrono::steady_clock::now();
    const RobotAction robot = s->agent->act(s->state, action);
    const auto t1 = std::chrono::steady_clock::now();
    auto [next, events] = step_world(*s->map, s->state, action, robot, s->record.params.reward);
    s->state = std::move(next);
    s->last_robot = robot;
    TraceStep step{action, robot, events, std::chrono::duration<double>(t1 - t0).count()};
    s->record.trace.push_back(step);
    detail::finish_record(s->record, s->state);
    append_log(*s, {{"event", "turn"},
                    {"human", std::string(to_string(action))},
                    {"robot", to_json(robot)},
                    {"events", to_json(events)},
                    {"plan_seconds", step.plan_seconds}});
    if (s->state.done) append_log(*s, {{"event", "finished"}, {"record", to_json(s->record)}});

    nlohmann::json out = view(*s);
    out["robot_action"] = to_json(robot);
    out["events"] = to_json(events);
    out["plan_seconds"] = step.plan_seconds;
    return out;
  }

  nlohmann::json get_session(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return view(*s);
  }

  EpisodeRecord export_log(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return s->record;
  }

 private:
  struct Session {
    std::string id;
    std::shared_ptr<const GridMap> map;
    std::unique_ptr<RobotAgent> agent;
    WorldState state;
    std::optional<RobotAction> last_robot;
    EpisodeRecord record;
    mutable std::mutex mutex;
  };

  std::shared_ptr<Session> find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("no session '" + id + "'");
    return it->second;
  }

  static nlohmann::json view(const Session& s) {
    return {{"id", s.id},
            {"status", s.state.done ? "finished" : "active"},
            {"agent", s.record.agent},
            {"state", human_snapshot(*s.map, s.state, s.record.params.reward)}};
  }

  void append_log(const Session& s, const nlohmann::json& line) const {
    if (!log_dir_) return;
    std::lock_guard lock(log_mutex_);
    std::ofstream out(*log_dir_ / (s.id + ".jsonl"), std::ios::app);
    out << line.dump() << '\n';
  }

  std::map<std::string, std::shared_ptr<const GridMap>> maps_;
  std::optional<std::filesystem::path> log_dir_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  mutable std::mutex mutex_;
  mutable std::mutex log_mutex_;
  std::uint64_t counter_ = 0;
};

}  // namespace mip
