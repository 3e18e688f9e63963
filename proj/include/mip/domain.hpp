#pragma once

// Frozen Lake mixed-initiative domain: grid, per-agent views, joint-action
// dynamics and game-score accounting.

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mip/errors.hpp"

namespace mip {

struct Cell {
  int row = 0;
  int col = 0;

  auto operator<=>(const Cell&) const = default;
};

inline int manhattan(Cell a, Cell b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

inline std::string to_string(Cell c) {
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

enum class Direction : std::uint8_t { Up, Down, Left, Right };

// Canonical order; every tie in the project is broken by it.
inline constexpr std::array<Direction, 4> kDirections{
    Direction::Up, Direction::Down, Direction::Left, Direction::Right};

constexpr Cell offset(Direction d) {
  switch (d) {
    case Direction::Up: return {-1, 0};
    case Direction::Down: return {1, 0};
    case Direction::Left: return {0, -1};
    case Direction::Right: return {0, 1};
  }
  return {0, 0};
}

constexpr Cell shifted(Cell c, Direction d) {
  const Cell o = offset(d);
  return {c.row + o.row, c.col + o.col};
}

constexpr Direction reverse(Direction d) {
  switch (d) {
    case Direction::Up: return Direction::Down;
    case Direction::Down: return Direction::Up;
    case Direction::Left: return Direction::Right;
    case Direction::Right: return Direction::Left;
  }
  return d;
}

constexpr std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Up: return "Up";
    case Direction::Down: return "Down";
    case Direction::Left: return "Left";
    case Direction::Right: return "Right";
  }
  return "?";
}

inline std::optional<Direction> direction_from_string(std::string_view s) {
  for (Direction d : kDirections)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

// Set of cell indices of a grid with at most 64 cells (N <= 8).
class CellSet {
 public:
  constexpr CellSet() = default;
  constexpr explicit CellSet(std::uint64_t bits) : bits_(bits) {}

  constexpr bool contains(int index) const { return (bits_ >> index) & 1U; }
  constexpr void insert(int index) { bits_ |= std::uint64_t{1} << index; }
  constexpr void erase(int index) { bits_ &= ~(std::uint64_t{1} << index); }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint64_t bits() const { return bits_; }

  constexpr CellSet operator|(CellSet o) const { return CellSet{bits_ | o.bits_}; }
  constexpr CellSet operator&(CellSet o) const { return CellSet{bits_ & o.bits_}; }
  constexpr CellSet operator~() const { return CellSet{~bits_}; }
  constexpr bool operator==(const CellSet&) const = default;

  template <typename F>
  void for_each(F&& f) const {
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) f(std::countr_zero(b));
  }

 private:
  std::uint64_t bits_ = 0;
};

enum class CellKind : std::uint8_t { Free, Hole, Slippery, Goal, Start };
enum class ViewCell : std::uint8_t { BelievedSafe, BelievedSlippery, Unknown };
enum class Agent : std::uint8_t { Human, Robot };

inline constexpr int kMaxGridSize = 8;

// Static world description. Layers are row-major, size*size entries each.
class GridMap {
 public:
  GridMap() = default;

  GridMap(std::string id, int size, Cell start, Cell goal,
          std::vector<CellKind> true_grid, std::vector<ViewCell> human_layer,
          std::vector<ViewCell> robot_layer, std::vector<bool> fog)
      : id_(std::move(id)),
        size_(size),
        start_(start),
        goal_(goal),
        true_grid_(std::move(true_grid)),
        human_layer_(std::move(human_layer)),
        robot_layer_(std::move(robot_layer)),
        fog_(std::move(fog)) {
    if (size_ < 2 || size_ > kMaxGridSize)
      throw ValidationError({"grid size " + std::to_string(size_) +
                             " outside supported range 2..8"});
    const auto n = static_cast<std::size_t>(size_ * size_);
    if (true_grid_.size() != n || human_layer_.size() != n ||
        robot_layer_.size() != n || fog_.size() != n)
      throw ValidationError({"layer dimensions do not match size"});
    for (int i = 0; i < size_ * size_; ++i) {
      const Cell c = cell_at(i);
      if (true_grid_[i] == CellKind::Hole) holes_.insert(i);
      if (true_grid_[i] == CellKind::Hole || true_grid_[i] == CellKind::Slippery)
        true_hazards_.insert(i);
      if (this->human_view(c) == ViewCell::BelievedSlippery) human_slippery_.insert(i);
      if (robot_layer_[i] == ViewCell::BelievedSlippery) robot_slippery_.insert(i);
    }
  }

  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }
  int size() const { return size_; }
  int cell_count() const { return size_ * size_; }
  Cell start() const { return start_; }
  Cell goal() const { return goal_; }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.col >= 0 && c.row < size_ && c.col < size_;
  }
  int index(Cell c) const { return c.row * size_ + c.col; }
  Cell cell_at(int index) const { return {index / size_, index % size_}; }

  std::optional<Cell> neighbor(Cell c, Direction d) const {
    const Cell n = shifted(c, d);
    if (!in_bounds(n)) return std::nullopt;
    return n;
  }

  CellKind kind(Cell c) const { return true_grid_[index(c)]; }
  bool fogged(Cell c) const { return fog_[index(c)]; }

  // Layer exactly as written in the map document.
  ViewCell human_layer(Cell c) const { return human_layer_[index(c)]; }
  // What the human believes: fog forces Unknown.
  ViewCell human_view(Cell c) const {
    return fogged(c) ? ViewCell::Unknown : human_layer_[index(c)];
  }
  ViewCell robot_view(Cell c) const { return robot_layer_[index(c)]; }

  // Holes are visible to both agents.
  CellSet holes() const { return holes_; }
  CellSet true_hazards() const { return true_hazards_; }
  CellSet human_believed_slippery() const { return human_slippery_; }
  CellSet robot_believed_slippery() const { return robot_slippery_; }

  const std::vector<CellKind>& true_grid() const { return true_grid_; }
  const std::vector<bool>& fog() const { return fog_; }

 private:
  std::string id_;
  int size_ = 0;
  Cell start_{};
  Cell goal_{};
  std::vector<CellKind> true_grid_;
  std::vector<ViewCell> human_layer_;
  std::vector<ViewCell> robot_layer_;
  std::vector<bool> fog_;
  CellSet holes_;
  CellSet true_hazards_;
  CellSet human_slippery_;
  CellSet robot_slippery_;
};

// Dynamic, fully known part of the world.
struct WorldState {
  Cell pos{};
  int steps_taken = 0;
  int falls = 0;
  int detections_used = 0;
  std::optional<int> detection_budget;  // nullopt: unlimited
  CellSet revealed;           // cells the sensor has measured
  CellSet revealed_slippery;  // subset of revealed that is hazardous
  CellSet fall_sites;         // cells a fall has happened on
  bool done = false;
  bool goal_reached = false;

  static WorldState initial(const GridMap& map,
                            std::optional<int> detection_budget = std::nullopt) {
    WorldState s;
    s.pos = map.start();
    s.detection_budget = detection_budget;
    return s;
  }

  bool can_detect() const {
    return !detection_budget || detections_used < *detection_budget;
  }

  bool operator==(const WorldState&) const = default;
};

enum class HumanAction : std::uint8_t { Up, Down, Left, Right, Detect };

inline constexpr std::array<HumanAction, 5> kHumanActions{
    HumanAction::Up, HumanAction::Down, HumanAction::Left, HumanAction::Right,
    HumanAction::Detect};

constexpr HumanAction to_action(Direction d) {
  return static_cast<HumanAction>(static_cast<std::uint8_t>(d));
}

constexpr std::optional<Direction> as_direction(HumanAction a) {
  if (a == HumanAction::Detect) return std::nullopt;
  return static_cast<Direction>(static_cast<std::uint8_t>(a));
}

constexpr std::string_view to_string(HumanAction a) {
  if (a == HumanAction::Detect) return "Detect";
  return to_string(*as_direction(a));
}

inline std::optional<HumanAction> human_action_from_string(std::string_view s) {
  if (s == "Detect") return HumanAction::Detect;
  if (auto d = direction_from_string(s)) return to_action(*d);
  return std::nullopt;
}

enum class RobotActionKind : std::uint8_t {
  NoAssist,
  Interrupt,
  InterruptExplain,
  TakeControl,
  TakeControlExplain
};

inline constexpr std::array<RobotActionKind, 5> kRobotActionKinds{
    RobotActionKind::NoAssist, RobotActionKind::Interrupt,
    RobotActionKind::InterruptExplain, RobotActionKind::TakeControl,
    RobotActionKind::TakeControlExplain};

constexpr std::string_view to_string(RobotActionKind k) {
  switch (k) {
    case RobotActionKind::NoAssist: return "NoAssist";
    case RobotActionKind::Interrupt: return "Interrupt";
    case RobotActionKind::InterruptExplain: return "InterruptExplain";
    case RobotActionKind::TakeControl: return "TakeControl";
    case RobotActionKind::TakeControlExplain: return "TakeControlExplain";
  }
  return "?";
}

inline std::optional<RobotActionKind> robot_action_kind_from_string(std::string_view s) {
  for (auto k : kRobotActionKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

constexpr bool is_intervention(RobotActionKind k) { return k != RobotActionKind::NoAssist; }
constexpr bool is_interrupt(RobotActionKind k) {
  return k == RobotActionKind::Interrupt || k == RobotActionKind::InterruptExplain;
}
constexpr bool is_take_control(RobotActionKind k) {
  return k == RobotActionKind::TakeControl || k == RobotActionKind::TakeControlExplain;
}
constexpr bool is_explain(RobotActionKind k) {
  return k == RobotActionKind::InterruptExplain || k == RobotActionKind::TakeControlExplain;
}

enum class ExplainReason : std::uint8_t { HazardAhead, LongerPath };

constexpr std::string_view to_string(ExplainReason r) {
  return r == ExplainReason::HazardAhead ? "HazardAhead" : "LongerPath";
}

struct Explanation {
  ExplainReason reason = ExplainReason::HazardAhead;
  Cell cell{};

  bool operator==(const Explanation&) const = default;
};

struct RobotAction {
  RobotActionKind kind = RobotActionKind::NoAssist;
  std::optional<Direction> move;            // TakeControl variants only
  std::optional<Explanation> explanation;   // Explain variants only

  static RobotAction no_assist() { return {}; }
  static RobotAction interrupt(std::optional<Explanation> why = std::nullopt) {
    return {why ? RobotActionKind::InterruptExplain : RobotActionKind::Interrupt,
            std::nullopt, why};
  }
  static RobotAction take_control(Direction d,
                                  std::optional<Explanation> why = std::nullopt) {
    return {why ? RobotActionKind::TakeControlExplain : RobotActionKind::TakeControl,
            d, why};
  }

  bool intervenes() const { return is_intervention(kind); }

  bool operator==(const RobotAction&) const = default;
};

struct RewardParams {
  int max_steps = 80;
  int alpha = 10;  // fall penalty
  int rho = 2;     // detection cost
  int kappa = 30;  // goal bonus

  static RewardParams interactive() { return {}; }
  // Benchmark horizon: 50 steps on 4x4, 100 on 8x8.
  static RewardParams benchmark(int grid_size) {
    RewardParams p;
    p.max_steps = grid_size <= 4 ? 50 : 100;
    return p;
  }

  bool operator==(const RewardParams&) const = default;
};

struct StepEvents {
  bool moved = false;
  bool blocked_by_interrupt = false;
  bool fell = false;
  bool reached_goal = false;
  std::vector<Cell> detected;
  std::optional<Direction> executed_move;  // move attempted this step, if any
  std::optional<Direction> robot_move;     // replacement move under take-control
  int reward = 0;

  bool operator==(const StepEvents&) const = default;
};

// Cells that step dynamics treat as fall-inducing. The real game uses the
// ground truth; planners substitute their own belief.
struct Terrain {
  CellSet hazards;

  static Terrain truth(const GridMap& map) { return {map.true_hazards()}; }
};

inline int game_score(const RewardParams& params, int steps, int falls, int detections,
                      bool goal_reached) {
  return params.max_steps - steps - params.alpha * falls - params.rho * detections +
         (goal_reached ? params.kappa : 0);
}

inline int game_score(const RewardParams& params, const WorldState& s) {
  return game_score(params, s.steps_taken, s.falls, s.detections_used, s.goal_reached);
}

// Compact step outcome used on the planner hot path.
struct Transition {
  WorldState next;
  int reward = 0;
  bool moved = false;
  bool blocked = false;
  bool fell = false;
  bool reached_goal = false;
  bool detected = false;
  CellSet detected_cells;
  std::optional<Direction> executed_move;
};

inline void check_legal(const WorldState& state, HumanAction human, const RobotAction& robot) {
  if (state.done) throw IllegalAction("episode already finished");
  if (human == HumanAction::Detect && !state.can_detect())
    throw IllegalAction("detection budget exhausted");
  if (is_take_control(robot.kind) && !robot.move)
    throw IllegalAction("take-control without a replacement move");
}

// Deterministic joint-action dynamics over an arbitrary terrain. No legality
// checks; callers that face untrusted input use step_world.
inline Transition transition(const GridMap& map, const Terrain& terrain,
                             const WorldState& state, HumanAction human,
                             const RobotAction& robot, const RewardParams& params) {
  Transition t;
  t.next = state;
  WorldState& next = t.next;
  next.steps_taken += 1;
  t.reward = -1;

  std::optional<Direction> move;
  bool detect = false;
  if (robot.kind == RobotActionKind::NoAssist) {
    if (human == HumanAction::Detect)
      detect = true;
    else
      move = as_direction(human);
  } else if (is_interrupt(robot.kind)) {
    t.blocked = true;
  } else {
    move = robot.move;
  }

  if (detect) {
    for (Direction d : kDirections) {
      if (auto n = map.neighbor(state.pos, d)) {
        const int i = map.index(*n);
        next.revealed.insert(i);
        t.detected_cells.insert(i);
        if (terrain.hazards.contains(i)) next.revealed_slippery.insert(i);
      }
    }
    t.detected = true;
    next.detections_used += 1;
    t.reward -= params.rho;
  }

  if (move) {
    t.executed_move = move;
    const Cell target = shifted(state.pos, *move);
    if (map.in_bounds(target)) {
      t.moved = true;
      next.pos = target;
      const int i = map.index(target);
      if (target == map.goal()) {
        t.reached_goal = true;
        next.goal_reached = true;
        next.done = true;
        t.reward += params.kappa;
      } else if (terrain.hazards.contains(i)) {
        t.fell = true;
        next.falls += 1;
        next.fall_sites.insert(i);
        next.pos = map.start();
        t.reward -= params.alpha;
      }
    }
  }

  if (next.steps_taken >= params.max_steps) next.done = true;
  return t;
}

inline std::pair<WorldState, StepEvents> step_world(const GridMap& map, const WorldState& state,
                                                    HumanAction human, const RobotAction& robot,
                                                    const RewardParams& params) {
  check_legal(state, human, robot);
  Transition t = transition(map, Terrain::truth(map), state, human, robot, params);
  StepEvents ev;
  ev.moved = t.moved;
  ev.blocked_by_interrupt = t.blocked;
  ev.fell = t.fell;
  ev.reached_goal = t.reached_goal;
  t.detected_cells.for_each([&](int i) { ev.detected.push_back(map.cell_at(i)); });
  ev.executed_move = t.executed_move;
  if (is_take_control(robot.kind)) ev.robot_move = robot.move;
  ev.reward = t.reward;
  return {std::move(t.next), std::move(ev)};
}

// Hazards as one agent believes them in the given world state. Sensor
// readings and observed falls override the agent's map layer.
inline CellSet believed_hazards(const GridMap& map, const WorldState& state, Agent agent) {
  const CellSet layer = agent == Agent::Human ? map.human_believed_slippery()
                                              : map.robot_believed_slippery();
  return map.holes() | state.fall_sites | state.revealed_slippery | (layer & ~state.revealed);
}

enum class Observed : std::uint8_t { Safe, Slippery, Unknown, Hole, OutOfBounds };

constexpr std::string_view to_string(Observed o) {
  switch (o) {
    case Observed::Safe: return "Safe";
    case Observed::Slippery: return "Slippery";
    case Observed::Unknown: return "Unknown";
    case Observed::Hole: return "Hole";
    case Observed::OutOfBounds: return "OutOfBounds";
  }
  return "?";
}

// Local observation of the four neighbours, canonical direction order.
inline std::array<Observed, 4> agent_view(const GridMap& map, const WorldState& state,
                                          Agent agent) {
  std::array<Observed, 4> out{};
  for (std::size_t k = 0; k < kDirections.size(); ++k) {
    const auto n = map.neighbor(state.pos, kDirections[k]);
    if (!n) {
      out[k] = Observed::OutOfBounds;
      continue;
    }
    const int i = map.index(*n);
    if (map.holes().contains(i)) {
      out[k] = Observed::Hole;
    } else if (state.revealed.contains(i)) {
      out[k] = state.revealed_slippery.contains(i) ? Observed::Slippery : Observed::Safe;
    } else if (state.fall_sites.contains(i)) {
      out[k] = Observed::Slippery;
    } else {
      const ViewCell v = agent == Agent::Human ? map.human_view(*n) : map.robot_view(*n);
      out[k] = v == ViewCell::BelievedSlippery ? Observed::Slippery
               : v == ViewCell::Unknown        ? Observed::Unknown
                                               : Observed::Safe;
    }
  }
  return out;
}

}  // namespace mip
