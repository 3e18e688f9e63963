// Plays one episode per agent on a map with a single simulated user and
// prints the scores.
//
//   example_episode maps/m8_switchback.fl.json [seed]

#include <cstdint>
#include <iostream>
#include <string>

#include "mip/harness.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: example_episode <map.fl.json> [seed]\n";
    return 1;
  }
  const mip::GridMap map = mip::load_map_file(argv[1]);
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 0;

  mip::HumanProfile human{"novice", 0.6, 0.7, std::nullopt, mip::Dynamics::Static, 0.05};
  mip::EpisodeParams params{mip::RewardParams::benchmark(map.size()), std::nullopt};

  for (const auto& id : mip::agent_ids()) {
    const auto record = mip::run_episode(map, {id, {}, {}, {}, {}}, human, seed, params);
    int interventions = 0;
    for (const auto& s : record.trace) interventions += s.robot.intervenes() ? 1 : 0;
    std::cout << record.agent << ": score " << record.score << ", steps " << record.steps
              << ", falls " << record.falls << ", interventions " << interventions
              << (record.goal_reached ? ", reached goal" : "") << '\n';
  }
}
