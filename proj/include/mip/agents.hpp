#pragma once

// Robot agents selectable by id: no-assist, the four heuristic styles and
// the three search variants.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mip/domain.hpp"
#include "mip/heuristic.hpp"
#include "mip/planner.hpp"

namespace mip {

struct AgentSpec {
  std::string id = "no-assist";
  std::optional<int> n_sims;
  std::optional<double> ucb_c;
  std::optional<double> plan_epsilon;
  std::optional<int> k;

  bool operator==(const AgentSpec&) const = default;
};

inline const std::vector<std::string>& agent_ids() {
  static const std::vector<std::string> ids{
      "no-assist",          "heuristic-interrupt",           "heuristic-takecontrol",
      "heuristic-interrupt-explain", "heuristic-takecontrol-explain", "bayes-pomcp",
      "pomcp",              "adv-bayes-pomcp"};
  return ids;
}

inline bool is_search_agent(const std::string& id) {
  return id == "bayes-pomcp" || id == "pomcp" || id == "adv-bayes-pomcp";
}

inline bool is_known_agent(const std::string& id) {
  for (const auto& k : agent_ids())
    if (k == id) return true;
  return false;
}

// Display label; search agents carry their simulation budget.
inline std::string agent_label(const AgentSpec& spec) {
  if (is_search_agent(spec.id)) return spec.id + "@" + std::to_string(spec.n_sims.value_or(100));
  return spec.id;
}

inline nlohmann::json to_json(const AgentSpec& spec) {
  nlohmann::json j{{"id", spec.id}};
  if (spec.n_sims) j["n_sims"] = *spec.n_sims;
  if (spec.ucb_c) j["ucb_c"] = *spec.ucb_c;
  if (spec.plan_epsilon) j["plan_epsilon"] = *spec.plan_epsilon;
  if (spec.k) j["k"] = *spec.k;
  return j;
}

// Accepts either a bare id string or an object with an "id" key.
inline AgentSpec agent_spec_from_json(const nlohmann::json& j) {
  AgentSpec spec;
  if (j.is_string()) {
    spec.id = j.get<std::string>();
  } else if (j.is_object() && j.contains("id") && j["id"].is_string()) {
    spec.id = j["id"].get<std::string>();
    if (j.contains("n_sims")) spec.n_sims = j["n_sims"].get<int>();
    if (j.contains("ucb_c")) spec.ucb_c = j["ucb_c"].get<double>();
    if (j.contains("plan_epsilon")) spec.plan_epsilon = j["plan_epsilon"].get<double>();
    if (j.contains("k")) spec.k = j["k"].get<int>();
  } else {
    throw UnknownAgent("agent spec must be an id or an object with an id");
  }
  if (!is_known_agent(spec.id)) throw UnknownAgent("unknown agent '" + spec.id + "'");
  return spec;
}

class RobotAgent {
 public:
  virtual ~RobotAgent() = default;

  // Robot response to the human action `pending` taken in `state`.
  virtual RobotAction act(const WorldState& state, HumanAction pending) = 0;

  // The joint step under `robot` executed and the human answered `next`.
  virtual void observe(const RobotAction& robot, HumanAction next, const WorldState& next_state) {
    (void)robot;
    (void)next;
    (void)next_state;
  }

  virtual nlohmann::json diagnostics() const { return nullptr; }
};

class NoAssistAgent final : public RobotAgent {
 public:
  RobotAction act(const WorldState&, HumanAction) override { return RobotAction::no_assist(); }
};

class HeuristicAgent final : public RobotAgent {
 public:
  HeuristicAgent(const GridMap& map, HeuristicConfig config) : map_(&map), config_(config) {}

  RobotAction act(const WorldState& state, HumanAction pending) override {
    auto [action, next] = heuristic_decide(believed_grid(*map_, state, Agent::Robot), map_->holes(),
                                           state, pending, state_, config_);
    state_ = next;
    return action;
  }

  nlohmann::json diagnostics() const override {
    return {{"prev_interrupt", state_.prev_interrupt}};
  }

 private:
  const GridMap* map_;
  HeuristicConfig config_;
  HeuristicState state_;
};

class SearchAgent final : public RobotAgent {
 public:
  SearchAgent(const GridMap& map, const RewardParams& params, const SearchConfig& config,
              std::uint64_t seed)
      : planner_(map, params, config, seed) {}

  RobotAction act(const WorldState& state, HumanAction pending) override {
    return planner_.plan(state, pending);
  }

  void observe(const RobotAction& robot, HumanAction next, const WorldState&) override {
    planner_.advance(robot, next);
  }

  // Per-action statistics of the current root and a root-belief summary.
  nlohmann::json diagnostics() const override {
    const HistoryNode* root = planner_.root();
    if (!root) return nullptr;
    nlohmann::json actions = nlohmann::json::array();
    for (RobotActionKind k : kRobotActionKinds) {
      const ActionNode* a = root->action(k);
      if (!a) continue;
      actions.push_back({{"action", std::string(to_string(k))}, {"N", a->visits}, {"V", a->value}});
    }
    nlohmann::json d{{"root_visits", root->visits},
                     {"actions", actions},
                     {"max_depth", planner_.last_stats().max_depth}};
    if (planner_.config().mode != SearchMode::AblationPOMCP) {
      d["belief"] = {{"size", root->belief.size()},
                     {"mean_compliance", root->belief.mean_compliance()}};
      if (planner_.last_belief_update().degenerate)
        d["belief"]["note"] = planner_.last_belief_update().note;
    }
    return d;
  }

  const Planner& planner() const { return planner_; }

 private:
  Planner planner_;
};

inline SearchConfig search_config_for(const AgentSpec& spec) {
  SearchConfig c;
  if (spec.id == "pomcp") c.mode = SearchMode::AblationPOMCP;
  if (spec.id == "adv-bayes-pomcp") c.mode = SearchMode::Adversarial;
  if (spec.n_sims) c.n_sims = *spec.n_sims;
  if (spec.ucb_c) c.ucb_c = *spec.ucb_c;
  if (spec.plan_epsilon) c.plan_epsilon = *spec.plan_epsilon;
  return c;
}

inline std::unique_ptr<RobotAgent> make_agent(const AgentSpec& spec, const GridMap& map,
                                              const RewardParams& params, std::uint64_t seed) {
  if (spec.id == "no-assist") return std::make_unique<NoAssistAgent>();
  if (spec.id.starts_with("heuristic-")) {
    HeuristicConfig c;
    if (spec.k) c.k = *spec.k;
    const std::string style = spec.id.substr(10);
    if (style == "interrupt" || style == "interrupt-explain") c.style = HeuristicStyle::Interrupt;
    else if (style == "takecontrol" || style == "takecontrol-explain") c.style = HeuristicStyle::TakeControl;
    else throw UnknownAgent("unknown agent '" + spec.id + "'");
    c.explain = style.ends_with("-explain");
    return std::make_unique<HeuristicAgent>(map, c);
  }
  if (is_search_agent(spec.id)) {
    SearchConfig c = search_config_for(spec);
    c.ucb_c = spec.ucb_c.value_or(static_cast<double>(params.kappa));
    return std::make_unique<SearchAgent>(map, params, c, seed);
  }
  throw UnknownAgent("unknown agent '" + spec.id + "'");
}

}  // namespace mip
