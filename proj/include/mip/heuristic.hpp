#pragma once

// Static-style short-horizon intervention policy: intervene when the user's
// move lands on a believed hazard or strays more than k steps from the best
// neighbour, and cede control when the user persists.

#include <algorithm>
#include <limits>
#include <optional>
#include <utility>

#include "mip/domain.hpp"
#include "mip/pathing.hpp"

namespace mip {

enum class HeuristicStyle : std::uint8_t { Interrupt, TakeControl };

// Which cell's neighbours the "longer path" test compares against.
enum class NeighbourOf : std::uint8_t { Current, Landing };

struct HeuristicConfig {
  int k = 1;
  HeuristicStyle style = HeuristicStyle::Interrupt;
  bool explain = false;
  NeighbourOf neighbours = NeighbourOf::Current;
};

struct HeuristicState {
  bool prev_interrupt = false;

  bool operator==(const HeuristicState&) const = default;
};

// `robot` is the robot's believed grid (hazards include holes).
inline std::pair<RobotAction, HeuristicState> heuristic_decide(const BelievedGrid& robot,
                                                               CellSet holes,
                                                               const WorldState& state,
                                                               HumanAction human,
                                                               HeuristicState hstate,
                                                               const HeuristicConfig& config) {
  const auto move = as_direction(human);
  if (hstate.prev_interrupt || !move) return {RobotAction::no_assist(), HeuristicState{false}};

  const Cell landing = robot.in_bounds(shifted(state.pos, *move)) ? shifted(state.pos, *move)
                                                                  : state.pos;
  std::optional<ExplainReason> reason;
  if (robot.blocked.contains(robot.index(landing))) {
    reason = ExplainReason::HazardAhead;
  } else {
    const Cell anchor = config.neighbours == NeighbourOf::Current ? state.pos : landing;
    int best = std::numeric_limits<int>::max();
    for (Direction d : kDirections) {
      const Cell n = shifted(anchor, d);
      if (robot.passable(n)) best = std::min(best, goal_dist(n, robot.goal));
    }
    if (best != std::numeric_limits<int>::max() && goal_dist(landing, robot.goal) - best > config.k)
      reason = ExplainReason::LongerPath;
  }
  if (!reason) return {RobotAction::no_assist(), HeuristicState{false}};

  std::optional<Explanation> why;
  if (config.explain) why = Explanation{*reason, landing};
  if (config.style == HeuristicStyle::Interrupt)
    return {RobotAction::interrupt(why), HeuristicState{true}};
  return {RobotAction::take_control(robot_replacement_move(robot, holes, state.pos), why),
          HeuristicState{true}};
}

}  // namespace mip
