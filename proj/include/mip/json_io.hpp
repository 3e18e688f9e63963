#pragma once

// JSON encodings of domain values shared by episode logs and the service.

#include <string>

#include <nlohmann/json.hpp>

#include "mip/domain.hpp"
#include "mip/humans.hpp"

namespace mip {

inline nlohmann::json to_json(Cell c) { return nlohmann::json::array({c.row, c.col}); }

inline Cell cell_from_json(const nlohmann::json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

inline nlohmann::json to_json(const RobotAction& a) {
  nlohmann::json j{{"kind", std::string(to_string(a.kind))}};
  j["move"] = a.move ? nlohmann::json(std::string(to_string(*a.move))) : nlohmann::json(nullptr);
  if (a.explanation)
    j["explanation"] = {{"reason", std::string(to_string(a.explanation->reason))},
                        {"cell", to_json(a.explanation->cell)}};
  else
    j["explanation"] = nullptr;
  return j;
}

inline RobotAction robot_action_from_json(const nlohmann::json& j) {
  RobotAction a;
  const auto kind = robot_action_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw Error("unknown robot action kind");
  a.kind = *kind;
  if (j.contains("move") && !j["move"].is_null()) {
    auto d = direction_from_string(j["move"].get<std::string>());
    if (!d) throw Error("unknown direction");
    a.move = *d;
  }
  if (j.contains("explanation") && !j["explanation"].is_null()) {
    const auto& e = j["explanation"];
    const auto reason = e.at("reason").get<std::string>() == "HazardAhead" ? ExplainReason::HazardAhead
                                                                           : ExplainReason::LongerPath;
    a.explanation = Explanation{reason, cell_from_json(e.at("cell"))};
  }
  return a;
}

inline HumanAction human_action_from_json(const nlohmann::json& j) {
  auto a = human_action_from_string(j.get<std::string>());
  if (!a) throw Error("unknown human action '" + j.dump() + "'");
  return *a;
}

inline nlohmann::json to_json(const StepEvents& e) {
  nlohmann::json detected = nlohmann::json::array();
  for (Cell c : e.detected) detected.push_back(to_json(c));
  return {{"moved", e.moved},
          {"blocked_by_interrupt", e.blocked_by_interrupt},
          {"fell", e.fell},
          {"reached_goal", e.reached_goal},
          {"detected", detected},
          {"executed_move", e.executed_move ? nlohmann::json(std::string(to_string(*e.executed_move)))
                                            : nlohmann::json(nullptr)},
          {"robot_move", e.robot_move ? nlohmann::json(std::string(to_string(*e.robot_move)))
                                      : nlohmann::json(nullptr)},
          {"reward", e.reward}};
}

inline StepEvents step_events_from_json(const nlohmann::json& j) {
  StepEvents e;
  e.moved = j.at("moved").get<bool>();
  e.blocked_by_interrupt = j.at("blocked_by_interrupt").get<bool>();
  e.fell = j.at("fell").get<bool>();
  e.reached_goal = j.at("reached_goal").get<bool>();
  for (const auto& c : j.at("detected")) e.detected.push_back(cell_from_json(c));
  if (!j.at("executed_move").is_null())
    e.executed_move = direction_from_string(j["executed_move"].get<std::string>());
  if (!j.at("robot_move").is_null())
    e.robot_move = direction_from_string(j["robot_move"].get<std::string>());
  e.reward = j.at("reward").get<int>();
  return e;
}

inline nlohmann::json to_json(const RewardParams& p) {
  return {{"max_steps", p.max_steps}, {"alpha", p.alpha}, {"rho", p.rho}, {"kappa", p.kappa}};
}

inline RewardParams reward_params_from_json(const nlohmann::json& j, RewardParams base = {}) {
  if (j.contains("max_steps")) base.max_steps = j["max_steps"].get<int>();
  if (j.contains("alpha")) base.alpha = j["alpha"].get<int>();
  if (j.contains("rho")) base.rho = j["rho"].get<int>();
  if (j.contains("kappa")) base.kappa = j["kappa"].get<int>();
  if (base.max_steps < 0 || base.alpha < 0 || base.rho < 0 || base.kappa < 0)
    throw Error("reward parameters must be non-negative");
  return base;
}

inline nlohmann::json to_json(const HumanProfile& p) {
  nlohmann::json j{{"id", p.id},
                   {"psi", p.psi},
                   {"theta", p.theta},
                   {"dynamics", std::string(to_string(p.dynamics))},
                   {"delta", p.delta}};
  if (p.theta_prior) j["theta_prior"] = {p.theta_prior->a, p.theta_prior->b};
  return j;
}

inline HumanProfile human_profile_from_json(const nlohmann::json& j) {
  HumanProfile p;
  p.id = j.value("id", std::string("human"));
  p.psi = j.value("psi", 1.0);
  p.theta = j.value("theta", 0.5);
  if (j.contains("theta_prior")) {
    const auto& pr = j["theta_prior"];
    p.theta_prior = BetaPrior{pr.at(0).get<double>(), pr.at(1).get<double>()};
  }
  if (j.contains("dynamics")) {
    auto d = dynamics_from_string(j["dynamics"].get<std::string>());
    if (!d) throw Error("unknown dynamics '" + j["dynamics"].get<std::string>() + "'");
    p.dynamics = *d;
  }
  p.delta = j.value("delta", 0.05);
  if (p.psi < 0.0 || p.psi > 1.0 || p.theta < 0.0 || p.theta > 1.0)
    throw Error("psi and theta must lie in [0, 1]");
  return p;
}

}  // namespace mip
