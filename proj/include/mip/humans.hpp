#pragma once

// Simulated users: epsilon-greedy A* navigators whose response to robot
// interventions is governed by a compliance probability.

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mip/domain.hpp"
#include "mip/pathing.hpp"
#include "mip/rng.hpp"

namespace mip {

enum class Dynamics : std::uint8_t { Static, PreferenceDriven, OutcomeDriven };

constexpr std::string_view to_string(Dynamics d) {
  switch (d) {
    case Dynamics::Static: return "static";
    case Dynamics::PreferenceDriven: return "preference";
    case Dynamics::OutcomeDriven: return "outcome";
  }
  return "?";
}

inline std::optional<Dynamics> dynamics_from_string(std::string_view s) {
  for (auto d : {Dynamics::Static, Dynamics::PreferenceDriven, Dynamics::OutcomeDriven})
    if (to_string(d) == s) return d;
  return std::nullopt;
}

inline constexpr double kThetaMin = 0.01;
inline constexpr double kThetaMax = 0.99;

struct BetaPrior {
  double a = 1.0;
  double b = 1.0;

  bool operator==(const BetaPrior&) const = default;
};

// The five compliance priors of the simulated population.
inline const std::vector<BetaPrior>& compliance_priors() {
  static const std::vector<BetaPrior> priors{{20, 80}, {40, 60}, {50, 50}, {60, 40}, {80, 20}};
  return priors;
}

struct HumanProfile {
  std::string id;
  double psi = 1.0;    // expertise, 1 - epsilon of the epsilon-greedy policy
  double theta = 0.5;  // probability of complying with an intervention
  std::optional<BetaPrior> theta_prior;
  Dynamics dynamics = Dynamics::Static;
  double delta = 0.05;

  bool operator==(const HumanProfile&) const = default;
};

// Draws theta from the prior, when one is set.
inline HumanProfile instantiate(HumanProfile profile, Rng& rng) {
  if (profile.theta_prior)
    profile.theta = sample_beta(rng, profile.theta_prior->a, profile.theta_prior->b);
  return profile;
}

enum class ComplianceEvent : std::uint8_t { TookControl, Explained, EpisodeSuccessStep, Fell };

inline HumanProfile update_theta(HumanProfile profile, ComplianceEvent event) {
  double step = 0.0;
  switch (profile.dynamics) {
    case Dynamics::Static:
      return profile;
    case Dynamics::PreferenceDriven:
      if (event == ComplianceEvent::TookControl) step = -profile.delta;
      if (event == ComplianceEvent::Explained) step = profile.delta;
      break;
    case Dynamics::OutcomeDriven:
      if (event == ComplianceEvent::EpisodeSuccessStep) step = profile.delta / 5.0;
      if (event == ComplianceEvent::Fell) step = -profile.delta;
      break;
  }
  profile.theta = std::clamp(profile.theta + step, kThetaMin, kThetaMax);
  return profile;
}

// Everything a simulated human may look at. Built from the human map layer,
// fog and the world state; the ground truth only enters via sensor readings.
struct HumanView {
  BelievedGrid grid;
  Cell pos{};
  CellSet revealed;
  bool can_detect = true;

  static HumanView observe(const GridMap& map, const WorldState& state) {
    return {believed_grid(map, state, Agent::Human), state.pos, state.revealed,
            state.can_detect()};
  }

  // Detecting here would measure at least one new cell.
  bool detect_informative() const {
    if (!can_detect) return false;
    for (Direction d : kDirections) {
      const Cell n = shifted(pos, d);
      if (grid.in_bounds(n) && !revealed.contains(grid.index(n))) return true;
    }
    return false;
  }
};

// The robot intervention the human is reacting to.
struct Intervention {
  RobotActionKind kind = RobotActionKind::Interrupt;
  Direction intercepted = Direction::Up;   // move the robot blocked or overrode
  std::optional<Direction> robot_move;     // replacement under take-control

  bool operator==(const Intervention&) const = default;
};

inline HumanAction uniform_move(const HumanView& view, Rng& rng) {
  const auto moves = in_grid_moves(view.grid.size, view.pos);
  return to_action(moves[uniform_index(rng, moves.size())]);
}

// Next action of a simulated user. `oppositions` counts the consecutive
// interventions this user has already opposed.
inline HumanAction human_act(const HumanProfile& profile, const HumanView& view,
                             const std::optional<Intervention>& last, int oppositions, Rng& rng,
                             bool* complied = nullptr) {
  if (last) {
    const bool comply = bernoulli(rng, profile.theta);
    if (complied) *complied = comply;
    if (comply) {
      DirectionMask excluded = direction_bit(last->intercepted);
      if (is_take_control(last->kind) && last->robot_move)
        excluded |= direction_bit(reverse(*last->robot_move));
      if (auto d = astar_next(view.grid, view.pos, excluded)) return to_action(*d);
      if (view.detect_informative()) return HumanAction::Detect;
      return uniform_move(view, rng);
    }
    if (oppositions == 0) return to_action(last->intercepted);
    if (bernoulli(rng, 0.5) && view.can_detect) return HumanAction::Detect;
    return to_action(reverse(last->intercepted));
  }
  if (bernoulli(rng, profile.psi)) {
    if (auto d = astar_next(view.grid, view.pos)) return to_action(*d);
    if (view.detect_informative()) return HumanAction::Detect;
  }
  return uniform_move(view, rng);
}

// A simulated user for one episode: profile, private rng stream and the
// memory of the last intervention.
class SimulatedHuman {
 public:
  SimulatedHuman(HumanProfile profile, std::uint64_t seed)
      : profile_(std::move(profile)), rng_(seed) {}

  const HumanProfile& profile() const { return profile_; }

  HumanAction act(const HumanView& view) {
    bool complied = true;
    const HumanAction a = human_act(profile_, view, pending_, oppositions_, rng_, &complied);
    if (pending_) oppositions_ = complied ? 0 : oppositions_ + 1;
    else oppositions_ = 0;
    pending_.reset();
    return a;
  }

  // Feedback from the step that just executed `acted` under `robot`.
  void observe(const RobotAction& robot, HumanAction acted, const StepEvents& events,
               Cell before, Cell after, Cell goal) {
    if (robot.intervenes()) {
      if (auto d = as_direction(acted))
        pending_ = Intervention{robot.kind, *d, robot.move};
    }
    if (is_take_control(robot.kind)) profile_ = update_theta(profile_, ComplianceEvent::TookControl);
    if (is_explain(robot.kind)) profile_ = update_theta(profile_, ComplianceEvent::Explained);
    if (events.fell)
      profile_ = update_theta(profile_, ComplianceEvent::Fell);
    else if (events.moved && goal_dist(after, goal) < goal_dist(before, goal))
      profile_ = update_theta(profile_, ComplianceEvent::EpisodeSuccessStep);
  }

 private:
  HumanProfile profile_;
  Rng rng_;
  std::optional<Intervention> pending_;
  int oppositions_ = 0;
};

}  // namespace mip
