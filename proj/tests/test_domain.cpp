#include <gtest/gtest.h>

#include "mip/domain.hpp"
#include "mip/map_io.hpp"
#include "oracles.hpp"

using namespace mip;

namespace {

const std::vector<std::string> kClear4(4, "....");

// Row 1 col 0 is slippery; (2,2) a hole.
GridMap small_map() {
  return map_from_rows({"A...", "~...", "..H.", "...G"}, {"....", "s...", "....", "...."},
                       {"....", "s...", "....", "...."}, kClear4, "small");
}

}  // namespace

TEST(StepWorld, MoveOntoFreeCell) {
  const auto map = small_map();
  auto [s, ev] = step_world(map, WorldState::initial(map), HumanAction::Right, RobotAction::no_assist(),
                            RewardParams{});
  EXPECT_EQ(s.pos, (Cell{0, 1}));
  EXPECT_EQ(ev.reward, -1);
  EXPECT_TRUE(ev.moved);
  EXPECT_EQ(s.steps_taken, 1);
}

TEST(StepWorld, InterruptBlocksMove) {
  const auto map = small_map();
  const auto s0 = WorldState::initial(map);
  auto [s, ev] = step_world(map, s0, HumanAction::Right, RobotAction::interrupt(), RewardParams{});
  EXPECT_EQ(s.pos, s0.pos);
  EXPECT_TRUE(ev.blocked_by_interrupt);
  EXPECT_FALSE(ev.moved);
  EXPECT_EQ(ev.reward, -1);
  WorldState expected = s0;
  expected.steps_taken = 1;
  EXPECT_EQ(s, expected);
}

TEST(StepWorld, FallOnSlipperyResetsToStart) {
  const auto map = small_map();
  auto [s, ev] = step_world(map, WorldState::initial(map), HumanAction::Down, RobotAction::no_assist(),
                            RewardParams{});
  EXPECT_TRUE(ev.fell);
  EXPECT_EQ(s.pos, map.start());
  EXPECT_EQ(ev.reward, -11);
  EXPECT_EQ(s.falls, 1);
  EXPECT_TRUE(s.fall_sites.contains(map.index({1, 0})));
}

TEST(StepWorld, HoleBehavesLikeSlippery) {
  const auto map = small_map();
  WorldState s0 = WorldState::initial(map);
  s0.pos = {2, 1};
  auto [s, ev] = step_world(map, s0, HumanAction::Right, RobotAction::no_assist(), RewardParams{});
  EXPECT_TRUE(ev.fell);
  EXPECT_EQ(s.pos, map.start());
  EXPECT_EQ(ev.reward, -11);
}

TEST(StepWorld, DetectRevealsTruthAndCharges) {
  const auto map = small_map();
  WorldState s0 = WorldState::initial(map);
  s0.pos = {1, 1};
  auto [s, ev] = step_world(map, s0, HumanAction::Detect, RobotAction::no_assist(), RewardParams{});
  EXPECT_EQ(ev.reward, -3);
  EXPECT_EQ(ev.detected.size(), 4U);
  EXPECT_EQ(s.detections_used, 1);
  EXPECT_EQ(s.pos, s0.pos);
  EXPECT_TRUE(s.revealed_slippery.contains(map.index({1, 0})));
  EXPECT_FALSE(s.revealed_slippery.contains(map.index({0, 1})));
  s.revealed.for_each([&](int i) {
    EXPECT_EQ(s.revealed_slippery.contains(i), map.true_hazards().contains(i));
  });
}

TEST(StepWorld, TakeControlExecutesRobotMove) {
  const auto map = small_map();
  auto [s, ev] = step_world(map, WorldState::initial(map), HumanAction::Down,
                            RobotAction::take_control(Direction::Right), RewardParams{});
  EXPECT_EQ(s.pos, (Cell{0, 1}));
  EXPECT_EQ(ev.robot_move, Direction::Right);
  EXPECT_FALSE(ev.fell);
}

TEST(StepWorld, GoalEndsEpisodeWithBonus) {
  const auto map = small_map();
  WorldState s0 = WorldState::initial(map);
  s0.pos = {3, 2};
  auto [s, ev] = step_world(map, s0, HumanAction::Right, RobotAction::no_assist(), RewardParams{});
  EXPECT_TRUE(ev.reached_goal);
  EXPECT_TRUE(s.done);
  EXPECT_EQ(ev.reward, 29);
}

TEST(StepWorld, WallBumpCostsAStep) {
  const auto map = small_map();
  auto [s, ev] = step_world(map, WorldState::initial(map), HumanAction::Up, RobotAction::no_assist(),
                            RewardParams{});
  EXPECT_EQ(s.pos, map.start());
  EXPECT_FALSE(ev.moved);
  EXPECT_EQ(ev.reward, -1);
}

TEST(StepWorld, StepCapEndsEpisode) {
  const auto map = small_map();
  RewardParams p;
  p.max_steps = 2;
  auto [s1, e1] = step_world(map, WorldState::initial(map), HumanAction::Up, RobotAction::no_assist(), p);
  EXPECT_FALSE(s1.done);
  auto [s2, e2] = step_world(map, s1, HumanAction::Up, RobotAction::no_assist(), p);
  EXPECT_TRUE(s2.done);
  EXPECT_EQ(game_score(p, s2), 0);
}

TEST(StepWorld, IllegalActions) {
  const auto map = small_map();
  WorldState s = WorldState::initial(map, 0);
  EXPECT_THROW(step_world(map, s, HumanAction::Detect, RobotAction::no_assist(), RewardParams{}),
               IllegalAction);
  s.done = true;
  EXPECT_THROW(step_world(map, s, HumanAction::Up, RobotAction::no_assist(), RewardParams{}),
               IllegalAction);
  RobotAction bad;
  bad.kind = RobotActionKind::TakeControl;
  EXPECT_THROW(step_world(map, WorldState::initial(map), HumanAction::Up, bad, RewardParams{}),
               IllegalAction);
}

TEST(GameScore, ClosedForm) {
  const RewardParams p;
  EXPECT_EQ(game_score(p, 30, 1, 2, true), 66);
  EXPECT_EQ(game_score(p, 80, 0, 0, false), 0);
  EXPECT_EQ(RewardParams::benchmark(4).max_steps, 50);
  EXPECT_EQ(RewardParams::benchmark(8).max_steps, 100);
}

TEST(StepWorld, RandomWalkInvariants) {
  Rng rng(1);
  for (const auto& map : oracle::shipped_maps()) {
    for (int e = 0; e < 50; ++e) {
      WorldState s = WorldState::initial(map);
      while (!s.done) {
        const auto human = kHumanActions[uniform_index(rng, 5)];
        RobotAction robot;
        robot.kind = kRobotActionKinds[uniform_index(rng, 5)];
        if (is_take_control(robot.kind)) robot.move = kDirections[uniform_index(rng, 4)];
        auto [next, ev] = step_world(map, s, human, robot, RewardParams::benchmark(map.size()));
        ASSERT_TRUE(map.in_bounds(next.pos));
        ASSERT_FALSE(ev.fell && ev.reached_goal);
        ASSERT_EQ(!ev.detected.empty(), human == HumanAction::Detect && robot.kind == RobotActionKind::NoAssist);
        if (ev.fell) {
          ASSERT_EQ(next.pos, map.start());
          ASSERT_EQ(next.revealed, s.revealed);
        }
        next.revealed.for_each([&](int i) {
          ASSERT_EQ(next.revealed_slippery.contains(i), map.true_hazards().contains(i));
        });
        s = std::move(next);
      }
    }
  }
}

TEST(AgentView, CornerHasTwoOutOfBounds) {
  const auto map = small_map();
  const auto v = agent_view(map, WorldState::initial(map), Agent::Robot);
  EXPECT_EQ(v[0], Observed::OutOfBounds);  // Up
  EXPECT_EQ(v[2], Observed::OutOfBounds);  // Left
  EXPECT_EQ(v[1], Observed::Slippery);     // Down, robot layer
  EXPECT_EQ(v[3], Observed::Safe);
}

TEST(AgentView, FogHidesFromHumanOnly) {
  const auto map = map_from_rows({"A~..", "....", "....", "...G"}, {".s..", "....", "....", "...."},
                                 {".s..", "....", "....", "...."}, {".#..", "....", "....", "...."});
  const auto s = WorldState::initial(map);
  EXPECT_EQ(agent_view(map, s, Agent::Human)[3], Observed::Unknown);
  EXPECT_EQ(agent_view(map, s, Agent::Robot)[3], Observed::Slippery);
}

TEST(AgentView, SensorOverridesFog) {
  const auto map = map_from_rows({"A~..", "....", "....", "...G"}, {"....", "....", "....", "...."},
                                 {"....", "....", "....", "...."}, {".#..", "....", "....", "...."});
  auto [s, ev] = step_world(map, WorldState::initial(map), HumanAction::Detect, RobotAction::no_assist(),
                            RewardParams{});
  EXPECT_EQ(agent_view(map, s, Agent::Human)[3], Observed::Slippery);
}

TEST(CellSetOps, Basics) {
  CellSet s;
  s.insert(0);
  s.insert(63);
  EXPECT_TRUE(s.contains(63));
  EXPECT_EQ(s.size(), 2);
  s.erase(0);
  EXPECT_FALSE(s.contains(0));
  EXPECT_EQ(manhattan({0, 7}, {7, 0}), 14);
}
