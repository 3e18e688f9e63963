#pragma once

// Beta-particle belief over how likely the user is to comply with an
// intervention.

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mip/domain.hpp"
#include "mip/rng.hpp"

namespace mip {

enum class Outcome : std::uint8_t { Comply, Oppose };

// Beta(a, b) over the Bernoulli compliance parameter.
struct BetaParticle {
  double a = 1.0;  // comply pseudo-count
  double b = 1.0;  // oppose pseudo-count

  double mean() const { return a / (a + b); }

  bool operator==(const BetaParticle&) const = default;
};

inline BetaParticle update_particle(BetaParticle p, Outcome outcome) {
  if (outcome == Outcome::Comply)
    p.a += 1.0;
  else
    p.b += 1.0;
  return p;
}

inline Outcome sample_compliance(const BetaParticle& p, Rng& rng) {
  return bernoulli(rng, p.mean()) ? Outcome::Comply : Outcome::Oppose;
}

// Unweighted particle set with a fixed capacity.
class BeliefSet {
 public:
  BeliefSet() = default;
  explicit BeliefSet(std::size_t capacity) : capacity_(capacity) {
    particles_.reserve(std::min<std::size_t>(capacity, 128));
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return particles_.size(); }
  bool empty() const { return particles_.empty(); }
  const std::vector<BetaParticle>& particles() const { return particles_; }

  // Returns false when full.
  bool add(const BetaParticle& p) {
    if (particles_.size() >= capacity_) return false;
    particles_.push_back(p);
    return true;
  }

  const BetaParticle& sample(Rng& rng) const {
    if (particles_.empty()) throw std::logic_error("sampling from an empty belief");
    return particles_[uniform_index(rng, particles_.size())];
  }

  double mean_compliance() const {
    if (particles_.empty()) return 0.5;
    double sum = 0.0;
    for (const auto& p : particles_) sum += p.mean();
    return sum / static_cast<double>(particles_.size());
  }

 private:
  std::vector<BetaParticle> particles_;
  std::size_t capacity_ = 0;
};

inline BeliefSet init_belief(std::size_t capacity) {
  if (capacity == 0) throw std::invalid_argument("belief capacity must be at least 1");
  BeliefSet b(capacity);
  for (std::size_t i = 0; i < capacity; ++i) b.add(BetaParticle{});
  return b;
}

// Was the human's next action a response that complied with the robot?
// `intercepted` is the human action the robot acted on; nullopt when the
// robot did not intervene on a move, so there is no compliance evidence.
//   after Interrupt:   repeating the blocked move opposes
//   after TakeControl: repeating the overridden move or undoing the robot's
//                      move opposes
// Anything else, Detect included, complies.
inline std::optional<Outcome> classify_response(const RobotAction& robot, HumanAction intercepted,
                                                HumanAction next) {
  if (!robot.intervenes() || intercepted == HumanAction::Detect) return std::nullopt;
  if (next == intercepted) return Outcome::Oppose;
  if (is_take_control(robot.kind) && robot.move && next == to_action(reverse(*robot.move)))
    return Outcome::Oppose;
  return Outcome::Comply;
}

enum class DegenerateFallback : std::uint8_t {
  Uniform,  // refill with fresh Beta(1,1)
  Prior,    // refill from the previous root belief
};

struct BeliefUpdateInfo {
  bool degenerate = false;
  bool reinvigorated = false;
  std::string note;
};

namespace detail {

inline void reinvigorate(std::vector<BetaParticle>& particles, std::size_t capacity, Rng& rng) {
  const std::size_t base = particles.size();
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  while (particles.size() < capacity) {
    BetaParticle p = particles[uniform_index(rng, base)];
    p.a = std::max(0.1, p.a + jitter(rng));
    p.b = std::max(0.1, p.b + jitter(rng));
    particles.push_back(p);
  }
}

}  // namespace detail

// New root belief after the real transition. `child` holds the particles
// the search accumulated in the node matching the observed history; each is
// updated with the real outcome, then the set is resampled to capacity.
inline BeliefSet root_belief_update(const BeliefSet& prior, std::span<const BetaParticle> child,
                                    std::optional<Outcome> observed, Rng& rng,
                                    DegenerateFallback fallback = DegenerateFallback::Uniform,
                                    BeliefUpdateInfo* info = nullptr) {
  const std::size_t capacity = prior.capacity();
  if (capacity == 0) throw std::invalid_argument("belief capacity must be at least 1");
  std::vector<BetaParticle> particles(child.begin(), child.end());
  BeliefUpdateInfo local;
  if (particles.empty()) {
    local.degenerate = true;
    if (fallback == DegenerateFallback::Prior && !prior.empty()) {
      particles = prior.particles();
      local.note = "no particles in observed branch; refilled from prior root belief";
    } else {
      local.note = "no particles in observed branch; refilled with Beta(1,1)";
      BeliefSet fresh = init_belief(capacity);
      if (info) *info = local;
      return fresh;
    }
  }
  if (observed)
    for (auto& p : particles) p = update_particle(p, *observed);
  if (particles.size() > capacity) {
    std::shuffle(particles.begin(), particles.end(), rng);
    particles.resize(capacity);
  } else if (particles.size() < capacity) {
    local.reinvigorated = true;
    detail::reinvigorate(particles, capacity, rng);
  }
  BeliefSet out(capacity);
  for (const auto& p : particles) out.add(p);
  if (info) *info = local;
  return out;
}

}  // namespace mip
