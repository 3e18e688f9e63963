#include <chrono>
#include <filesystem>
#include <future>
#include <thread>

#include <gtest/gtest.h>

#include "mip/http_service.hpp"
#include "mip/service.hpp"
#include "oracles.hpp"

using namespace mip;

namespace {

const std::vector<std::string> kClear4(4, "....");

// Hole right of the start; a fogged slippery cell two rows down. Safe
// route: Down, then Right along row 1, then Down.
GridMap trap_map() {
  return map_from_rows({"AH..", "....", "~...", "...G"}, {"....", "....", "....", "...."},
                       {"....", "....", "s...", "...."}, {"....", "....", "#...", "...."}, "trap");
}

HumanAction safe_route(Cell pos) {
  if (pos.row == 0) return HumanAction::Down;
  if (pos.col < 3) return HumanAction::Right;
  return HumanAction::Down;
}

SessionManager manager(std::optional<std::filesystem::path> logs = std::nullopt) {
  auto maps = oracle::shipped_maps();
  maps.push_back(trap_map());
  return SessionManager(std::move(maps), std::move(logs));
}

SessionRequest request(const std::string& map, const std::string& agent, std::uint64_t seed = 1) {
  SessionRequest r;
  r.map_id = map;
  r.agent.id = agent;
  r.seed = seed;
  return r;
}

void expect_no_hidden_layers(const nlohmann::json& j) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      EXPECT_NE(key, "true");
      EXPECT_NE(key, "robot");
      EXPECT_NE(key, "robot_view");
      EXPECT_NE(key, "true_grid");
      EXPECT_NE(key, "layers");
      expect_no_hidden_layers(value);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) expect_no_hidden_layers(v);
  }
}

}  // namespace

TEST(Service, CreateSessionStartsAtStart) {
  auto sm = manager();
  const auto s = sm.create_session(request("m8_comb", "bayes-pomcp"));
  EXPECT_EQ(s["status"], "active");
  EXPECT_EQ(s["state"]["position"], to_json(load_map_file(std::string(MIP_MAPS_DIR) + "/m8_comb.fl.json").start()));
  EXPECT_EQ(s["state"]["detection_budget"], kDefaultSessionBudget);
  expect_no_hidden_layers(s);
}

TEST(Service, UnknownMapAgentAndSession) {
  auto sm = manager();
  EXPECT_THROW(sm.create_session(request("nowhere", "bayes-pomcp")), UnknownMap);
  EXPECT_THROW(sm.create_session(request("trap", "robot-overlord")), UnknownAgent);
  EXPECT_THROW(sm.get_session("s999"), NotFound);
  EXPECT_THROW(sm.submit_action("s999", HumanAction::Up), NotFound);
}

TEST(Service, SnapshotShowsOnlyTheHumanView) {
  auto sm = manager();
  const auto id = sm.create_session(request("trap", "no-assist"))["id"].get<std::string>();
  const auto s = sm.get_session(id);
  expect_no_hidden_layers(s);
  // The fogged slippery cell reads unknown; the hole is shown.
  EXPECT_EQ(s["state"]["human_view"][2], "?...");
  EXPECT_EQ(s["state"]["holes"].size(), 1U);
  EXPECT_TRUE(s["state"]["revealed"].empty());
}

TEST(Service, HeuristicInterruptsHoleBoundMove) {
  auto sm = manager();
  const auto id = sm.create_session(request("trap", "heuristic-interrupt"))["id"].get<std::string>();
  const auto t = sm.submit_action(id, HumanAction::Right);
  EXPECT_EQ(t["robot_action"]["kind"], "Interrupt");
  EXPECT_TRUE(t["events"]["blocked_by_interrupt"].get<bool>());
}

TEST(Service, DetectBudgetAndFinishedSession) {
  auto sm = manager();
  auto req = request("trap", "no-assist");
  req.params.detection_budget = 0;
  const auto id = sm.create_session(req)["id"].get<std::string>();
  EXPECT_THROW(sm.submit_action(id, HumanAction::Detect), IllegalAction);

  const auto id2 = sm.create_session(request("trap", "no-assist"))["id"].get<std::string>();
  sm.submit_action(id2, HumanAction::Detect);
  sm.submit_action(id2, HumanAction::Right);
  const auto s = sm.get_session(id2);
  EXPECT_EQ(s["state"]["falls"], 1);
  EXPECT_EQ(s["state"]["detections_used"], 1);
  EXPECT_EQ(s["state"]["revealed"].size(), 2U);
  EXPECT_EQ(s["state"]["fall_sites"].size(), 1U);
}

TEST(Service, GoalFinishesAndLogReplays) {
  const auto dir = std::filesystem::temp_directory_path() / "mip_service_test";
  std::filesystem::remove_all(dir);
  auto sm = manager(dir);
  const auto id = sm.create_session(request("trap", "bayes-pomcp"))["id"].get<std::string>();
  nlohmann::json last;
  for (int i = 0; i < 100 && sm.get_session(id)["status"] == "active"; ++i) {
    const auto pos = cell_from_json(sm.get_session(id)["state"]["position"]);
    last = sm.submit_action(id, safe_route(pos));
    expect_no_hidden_layers(last);
  }
  EXPECT_EQ(last["status"], "finished");
  EXPECT_THROW(sm.submit_action(id, HumanAction::Up), IllegalAction);
  const auto record = sm.export_log(id);
  const auto replay = replay_record(record);
  EXPECT_TRUE(replay.ok);
  EXPECT_EQ(replay.score, last["state"]["score"].get<int>());
  if (record.goal_reached) EXPECT_TRUE(last["state"]["goal_reached"].get<bool>());

  // The append-only log ends with the finished record.
  std::ifstream in(dir / (id + ".jsonl"));
  std::string line, final_line;
  while (std::getline(in, line)) final_line = line;
  const auto j = nlohmann::json::parse(final_line);
  EXPECT_EQ(j["event"], "finished");
  EXPECT_TRUE(replay_record(record_from_json(j["record"])).ok);
  std::filesystem::remove_all(dir);
}

TEST(Service, SeededSessionsAreReproducible) {
  auto sm = manager();
  const auto a = sm.create_session(request("m8_zigzag", "bayes-pomcp", 77))["id"].get<std::string>();
  const auto b = sm.create_session(request("m8_zigzag", "bayes-pomcp", 77))["id"].get<std::string>();
  for (auto h : {HumanAction::Right, HumanAction::Right, HumanAction::Down, HumanAction::Left}) {
    const auto x = sm.submit_action(a, h), y = sm.submit_action(b, h);
    EXPECT_EQ(x["robot_action"], y["robot_action"]);
    EXPECT_EQ(x["state"], y["state"]);
  }
}

TEST(Service, ConcurrentSubmitConflicts) {
  auto sm = manager();
  auto req = request("m8_comb", "bayes-pomcp");
  req.agent.n_sims = 30000;
  const auto id = sm.create_session(req)["id"].get<std::string>();
  auto slow = std::async(std::launch::async, [&] { return sm.submit_action(id, HumanAction::Right); });
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  EXPECT_THROW(sm.submit_action(id, HumanAction::Down), Conflict);
  slow.get();
  EXPECT_EQ(sm.export_log(id).trace.size(), 1U);
}

TEST(Service, HttpRoutes) {
  auto sm = manager();
  httplib::Server server;
  install_routes(server, sm);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  auto maps = client.Get("/maps");
  ASSERT_TRUE(maps);
  EXPECT_EQ(maps->status, 200);
  EXPECT_EQ(maps->get_header_value("Access-Control-Allow-Origin"), "*");

  auto created = client.Post("/sessions", R"({"map": "trap", "agent": "heuristic-takecontrol", "seed": 3})",
                             "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const auto id = nlohmann::json::parse(created->body)["id"].get<std::string>();

  auto turn = client.Post("/sessions/" + id + "/actions", R"({"action": "Right"})", "application/json");
  ASSERT_TRUE(turn);
  EXPECT_EQ(turn->status, 200);
  const auto body = nlohmann::json::parse(turn->body);
  EXPECT_EQ(body["robot_action"]["kind"], "TakeControl");
  expect_no_hidden_layers(body);

  EXPECT_EQ(client.Get("/sessions/" + id)->status, 200);
  auto log = client.Get("/sessions/" + id + "/log");
  EXPECT_EQ(log->status, 200);
  const auto exported = record_from_json(nlohmann::json::parse(log->body));
  EXPECT_TRUE(exported.map_document.is_null());
  EXPECT_TRUE(replay_record(exported, trap_map()).ok);

  EXPECT_EQ(client.Get("/sessions/nope")->status, 404);
  EXPECT_EQ(client.Post("/sessions", R"({"map": "nowhere"})", "application/json")->status, 404);
  EXPECT_EQ(client.Post("/sessions", R"({"map": "trap", "agent": "x"})", "application/json")->status, 400);
  EXPECT_EQ(client.Post("/sessions", "{oops", "application/json")->status, 400);
  EXPECT_EQ(client.Post("/sessions/" + id + "/actions", R"({"action": "Jump"})", "application/json")->status, 400);

  server.stop();
  t.join();
}
