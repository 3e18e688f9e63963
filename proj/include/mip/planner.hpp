#pragma once

// Online Monte-Carlo tree search over robot-action / human-action histories.
//
// Bayes mode keeps a beta-particle belief over user compliance in every
// history node and simulates the user from a sampled particle. The
// AblationPOMCP mode drops the user model (uniform random human moves, no
// belief updates). Adversarial mode is Bayes mode maximising the negated
// game reward.

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "mip/belief.hpp"
#include "mip/domain.hpp"
#include "mip/pathing.hpp"
#include "mip/rng.hpp"

namespace mip {

enum class SearchMode : std::uint8_t { Bayes, AblationPOMCP, Adversarial };

constexpr std::string_view to_string(SearchMode m) {
  switch (m) {
    case SearchMode::Bayes: return "bayes";
    case SearchMode::AblationPOMCP: return "pomcp";
    case SearchMode::Adversarial: return "adversarial";
  }
  return "?";
}

struct SearchConfig {
  double gamma = 0.99;
  double epsilon = std::pow(0.99, 30);  // discount cutoff: depth <= 30
  int n_sims = 100;
  double ucb_c = 30.0;        // matches the goal bonus scale
  double plan_epsilon = 0.1;  // noise of the planner's user model
  std::size_t belief_capacity = 100;
  SearchMode mode = SearchMode::Bayes;
  DegenerateFallback degenerate = DegenerateFallback::Uniform;

  // Depth beyond which simulations return 0.
  int max_depth() const {
    int d = 0;
    while (std::pow(gamma, d + 1) >= epsilon && d < 10000) ++d;
    return d;
  }
};

struct HistoryNode;

struct ActionNode {
  int visits = 0;
  double value = 0.0;
  std::array<std::unique_ptr<HistoryNode>, kHumanActions.size()> children;

  HistoryNode* child(HumanAction a) const { return children[static_cast<std::size_t>(a)].get(); }
};

// Node of the search tree for a history ending in a human action.
struct HistoryNode {
  HumanAction last_human = HumanAction::Up;
  int visits = 0;
  double value = 0.0;
  BeliefSet belief;
  std::array<std::unique_ptr<ActionNode>, kRobotActionKinds.size()> actions;

  HistoryNode(HumanAction last, std::size_t capacity) : last_human(last), belief(capacity) {}

  ActionNode* action(RobotActionKind k) const { return actions[static_cast<std::size_t>(k)].get(); }

  ActionNode& ensure_action(RobotActionKind k) {
    auto& slot = actions[static_cast<std::size_t>(k)];
    if (!slot) slot = std::make_unique<ActionNode>();
    return *slot;
  }
};

inline std::size_t count_nodes(const HistoryNode& node) {
  std::size_t n = 1;
  for (const auto& a : node.actions) {
    if (!a) continue;
    for (const auto& c : a->children)
      if (c) n += count_nodes(*c);
  }
  return n;
}

// Incremental mean: V <- V + (R - V) / N after N <- N + 1.
inline void backup(int& visits, double& value, double ret) {
  visits += 1;
  value += (ret - value) / visits;
}

// Robot actions considered after a human action. Detection is never blocked.
inline std::span<const RobotActionKind> legal_robot_actions(HumanAction pending) {
  static constexpr std::array<RobotActionKind, 1> kOnlyNoAssist{RobotActionKind::NoAssist};
  if (pending == HumanAction::Detect) return kOnlyNoAssist;
  return kRobotActionKinds;
}

// UCB1 over the legal actions; unvisited actions first, canonical order on ties.
inline RobotActionKind ucb_select(const HistoryNode& node, std::span<const RobotActionKind> legal,
                                  double ucb_c) {
  std::optional<RobotActionKind> best;
  double best_score = 0.0;
  const double log_n = std::log(static_cast<double>(std::max(node.visits, 1)));
  for (RobotActionKind k : legal) {
    const ActionNode* a = node.action(k);
    if (!a || a->visits == 0) return k;
    const double score = a->value + ucb_c * std::sqrt(log_n / a->visits);
    if (!best || score > best_score) {
      best = k;
      best_score = score;
    }
  }
  return best.value_or(legal.front());
}

// Highest-value visited action; the first legal action when none is visited.
inline RobotActionKind greedy_select(const HistoryNode& node, std::span<const RobotActionKind> legal) {
  std::optional<RobotActionKind> best;
  double best_value = 0.0;
  for (RobotActionKind k : legal) {
    const ActionNode* a = node.action(k);
    if (!a || a->visits == 0) continue;
    if (!best || a->value > best_value) {
      best = k;
      best_value = a->value;
    }
  }
  return best.value_or(legal.front());
}

// Augmented simulation state: world copy, compliance particle copy and the
// human action awaiting the robot's response.
struct AugmentedSimState {
  WorldState world;
  BetaParticle particle;
  HumanAction pending = HumanAction::Up;
};

struct SearchStats {
  int simulations = 0;
  int max_depth = 0;
};

// Per-simulation record of the root action and the raw (unsigned) rewards
// along the trace. Test instrumentation.
struct SimulationTrace {
  RobotActionKind root_action = RobotActionKind::NoAssist;
  std::vector<int> rewards;
};

// What the robot believes the world to be; simulations treat it as truth.
class SimModel {
 public:
  SimModel(const GridMap& map, const WorldState& root, const RewardParams& params)
      : map_(&map), terrain_{believed_hazards(map, root, Agent::Robot)}, params_(params) {}

  const GridMap& map() const { return *map_; }
  const Terrain& terrain() const { return terrain_; }
  const RewardParams& params() const { return params_; }

  BelievedGrid grid(const WorldState& s) const {
    return {map_->size(), map_->goal(), terrain_.hazards | s.fall_sites | s.revealed_slippery};
  }

 private:
  const GridMap* map_;
  Terrain terrain_;
  RewardParams params_;
};

// Robot action of the given kind, with the replacement move and explanation
// filled in from the robot's belief.
inline RobotAction concretize(RobotActionKind kind, const BelievedGrid& robot, CellSet holes,
                              Cell pos, HumanAction pending) {
  RobotAction a;
  a.kind = kind;
  if (is_take_control(kind)) a.move = robot_replacement_move(robot, holes, pos);
  if (is_explain(kind)) {
    Cell landing = pos;
    if (auto d = as_direction(pending); d && robot.in_bounds(shifted(pos, *d)))
      landing = shifted(pos, *d);
    const bool hazard = landing != pos && robot.blocked.contains(robot.index(landing));
    a.explanation = Explanation{hazard ? ExplainReason::HazardAhead : ExplainReason::LongerPath,
                                landing};
  }
  return a;
}

struct SimStep {
  AugmentedSimState next;
  int reward = 0;  // raw game-reward delta
  bool terminal = false;
};

// One simulated joint step: execute the pending human action under `kind`,
// then draw the simulated user's next action.
inline SimStep step_sim(const SimModel& model, const SearchConfig& config,
                        const AugmentedSimState& s, RobotActionKind kind, Rng& rng) {
  const GridMap& map = model.map();
  const BelievedGrid before = model.grid(s.world);
  const RobotAction robot = concretize(kind, before, map.holes(), s.world.pos, s.pending);
  Transition t = transition(map, model.terrain(), s.world, s.pending, robot, model.params());

  SimStep out;
  out.reward = t.reward;
  out.next.world = std::move(t.next);
  out.next.particle = s.particle;
  if (out.next.world.done) {
    out.terminal = true;
    return out;
  }

  const WorldState& w = out.next.world;
  auto random_move = [&] {
    const auto moves = in_grid_moves(map.size(), w.pos);
    return to_action(moves[uniform_index(rng, moves.size())]);
  };
  auto detect_informative = [&] {
    if (!w.can_detect()) return false;
    for (Direction d : kDirections)
      if (auto n = map.neighbor(w.pos, d); n && !w.revealed.contains(map.index(*n))) return true;
    return false;
  };

  if (config.mode == SearchMode::AblationPOMCP) {
    out.next.pending = random_move();
    return out;
  }

  const BelievedGrid grid = model.grid(w);
  const auto intercepted = as_direction(s.pending);
  if (robot.intervenes() && intercepted) {
    const Outcome outcome = sample_compliance(s.particle, rng);
    out.next.particle = update_particle(s.particle, outcome);
    if (outcome == Outcome::Comply) {
      DirectionMask excluded = direction_bit(*intercepted);
      if (robot.move) excluded |= direction_bit(reverse(*robot.move));
      if (auto d = astar_next(grid, w.pos, excluded))
        out.next.pending = to_action(*d);
      else if (detect_informative())
        out.next.pending = HumanAction::Detect;
      else
        out.next.pending = random_move();
    } else {
      const bool detect = bernoulli(rng, 0.5) && w.can_detect();
      out.next.pending = detect ? HumanAction::Detect : to_action(reverse(*intercepted));
    }
    return out;
  }

  if (bernoulli(rng, config.plan_epsilon)) {
    out.next.pending = random_move();
  } else if (auto d = astar_next(grid, w.pos)) {
    out.next.pending = to_action(*d);
  } else {
    out.next.pending = detect_informative() ? HumanAction::Detect : random_move();
  }
  return out;
}

// The search tree plus the simulation machinery for one real episode.
class Planner {
 public:
  Planner(const GridMap& map, RewardParams params, SearchConfig config, std::uint64_t seed)
      : map_(&map), params_(params), config_(config), rng_(seed) {
    if (config_.n_sims < 1) throw std::invalid_argument("n_sims must be at least 1");
  }

  const SearchConfig& config() const { return config_; }
  const HistoryNode* root() const { return root_.get(); }
  const SearchStats& last_stats() const { return stats_; }
  const BeliefUpdateInfo& last_belief_update() const { return belief_info_; }

  void set_trace_sink(std::vector<SimulationTrace>* sink) { traces_ = sink; }

  // Search from the history ending in `pending` and return the robot action.
  RobotAction plan(const WorldState& state, HumanAction pending) {
    if (!root_ || root_->last_human != pending) {
      root_ = std::make_unique<HistoryNode>(pending, node_capacity());
      if (config_.mode != SearchMode::AblationPOMCP) root_->belief = init_belief(config_.belief_capacity);
    }
    const RobotActionKind kind = search(state);
    const SimModel model(*map_, state, params_);
    return concretize(kind, model.grid(state), map_->holes(), state.pos, pending);
  }

  // Runs n_sims simulations from the current root; returns the greedy action.
  RobotActionKind search(const WorldState& state) {
    if (!root_) throw std::logic_error("search without a root");
    const SimModel model(*map_, state, params_);
    stats_ = {};
    const bool bayes = config_.mode != SearchMode::AblationPOMCP;
    if (bayes && root_->belief.empty()) throw std::logic_error("empty root belief");
    for (int i = 0; i < config_.n_sims; ++i) {
      AugmentedSimState s;
      s.world = state;
      s.pending = root_->last_human;
      if (bayes) s.particle = root_->belief.sample(rng_);
      current_trace_ = nullptr;
      if (traces_) {
        traces_->emplace_back();
        current_trace_ = &traces_->back();
      }
      simulate(model, s, *root_, 0);
      ++stats_.simulations;
    }
    return greedy_select(*root_, legal_robot_actions(root_->last_human));
  }

  // Re-roots the tree at the history extended by (robot, next_human).
  void advance(const RobotAction& robot, HumanAction next_human) {
    if (!root_) return;
    std::unique_ptr<HistoryNode> next;
    if (auto& slot = root_->actions[static_cast<std::size_t>(robot.kind)])
      next = std::move(slot->children[static_cast<std::size_t>(next_human)]);
    const HumanAction intercepted = root_->last_human;
    if (!next) next = std::make_unique<HistoryNode>(next_human, node_capacity());
    if (config_.mode != SearchMode::AblationPOMCP) {
      std::vector<BetaParticle> child = next->belief.particles();
      BeliefSet prior = std::move(root_->belief);
      const auto observed = classify_response(robot, intercepted, next_human);
      next->belief = root_belief_update(prior, child, observed, rng_, config_.degenerate,
                                        &belief_info_);
    }
    root_ = std::move(next);
  }

  void reset() { root_.reset(); }

  std::size_t node_count() const { return root_ ? count_nodes(*root_) : 0; }

  // Simulation entry point for tests; `depth` as in the recursion.
  double simulate_from(const WorldState& state, HistoryNode& node, const BetaParticle& particle,
                       int depth) {
    const SimModel model(*map_, state, params_);
    AugmentedSimState s{state, particle, node.last_human};
    return simulate(model, s, node, depth);
  }

  double rollout_from(const WorldState& state, HumanAction pending, const BetaParticle& particle,
                      int depth) {
    const SimModel model(*map_, state, params_);
    AugmentedSimState s{state, particle, pending};
    return rollout(model, s, depth);
  }

 private:
  std::size_t node_capacity() const {
    return std::max<std::size_t>(config_.belief_capacity, static_cast<std::size_t>(config_.n_sims));
  }

  double signed_reward(int raw) const {
    if (current_trace_) current_trace_->rewards.push_back(raw);
    return config_.mode == SearchMode::Adversarial ? -raw : raw;
  }

  bool cut_off(int depth) const { return std::pow(config_.gamma, depth) < config_.epsilon; }

  double simulate(const SimModel& model, AugmentedSimState& s, HistoryNode& node, int depth) {
    if (cut_off(depth)) return 0.0;
    stats_.max_depth = std::max(stats_.max_depth, depth);
    const bool bayes = config_.mode != SearchMode::AblationPOMCP;
    if (bayes && &node != root_.get()) node.belief.add(s.particle);

    const RobotActionKind kind = ucb_select(node, legal_robot_actions(s.pending), config_.ucb_c);
    if (depth == 0 && current_trace_) current_trace_->root_action = kind;
    ActionNode& action = node.ensure_action(kind);
    SimStep step = step_sim(model, config_, s, kind, rng_);
    const double r = signed_reward(step.reward);

    double ret = r;
    if (!step.terminal) {
      if (action.visits == 0) {
        ret += config_.gamma * rollout(model, step.next, depth + 1);
      } else {
        auto& slot = action.children[static_cast<std::size_t>(step.next.pending)];
        if (!slot) slot = std::make_unique<HistoryNode>(step.next.pending, node_capacity());
        ret += config_.gamma * simulate(model, step.next, *slot, depth + 1);
      }
    }

    backup(node.visits, node.value, ret);
    backup(action.visits, action.value, ret);
    return ret;
  }

  // Uniform-random robot policy until the cutoff or the episode ends.
  double rollout(const SimModel& model, AugmentedSimState s, int depth) {
    double total = 0.0;
    double discount = 1.0;
    for (; !cut_off(depth); ++depth) {
      stats_.max_depth = std::max(stats_.max_depth, depth);
      const auto legal = legal_robot_actions(s.pending);
      const RobotActionKind kind = legal[uniform_index(rng_, legal.size())];
      SimStep step = step_sim(model, config_, s, kind, rng_);
      total += discount * signed_reward(step.reward);
      if (step.terminal) break;
      discount *= config_.gamma;
      s = std::move(step.next);
    }
    return total;
  }

  const GridMap* map_;
  RewardParams params_;
  SearchConfig config_;
  Rng rng_;
  std::unique_ptr<HistoryNode> root_;
  SearchStats stats_;
  BeliefUpdateInfo belief_info_;
  std::vector<SimulationTrace>* traces_ = nullptr;
  SimulationTrace* current_trace_ = nullptr;
};

}  // namespace mip
