#ifndef SMCCHEES_NUTS_HPP
#define SMCCHEES_NUTS_HPP

#include "smcchees/hmc.hpp"
#include "smcchees/rng.hpp"

namespace smcchees {

struct NutsConfig {
  LeapfrogConfig leapfrog;
  /// Caps the number of tree doublings. A budget of 2^max_depth leapfrog
  /// steps; at least one doubling always happens.
  int max_depth = 11;
  /// Sub-trees whose energy error exceeds this are pruned.
  double max_energy_error = 1000.0;
};

/// (theta+ - theta-) . p- < 0 or (theta+ - theta-) . p+ < 0.
bool u_turn(const PhaseState& left, const PhaseState& right);

struct NutsResult {
  Vector position;
  Vector initial_momentum;
  Vector final_momentum;  // momentum at the selected leaf
  double initial_log_density = 0.0;
  double log_density = 0.0;
  int depth = 0;                  // doublings performed
  int leapfrog_steps = 0;
  bool divergent = false;         // initial state unusable; input returned
  bool hit_energy_limit = false;  // some sub-tree was pruned
};

/// One NUTS transition with slice sampling (Hoffman & Gelman's efficient
/// variant). Draws p0 ~ N(0, I) from `engine`.
NutsResult nuts_step(const Vector& position, const NutsConfig& config,
                     const TargetModel& target, GradientCounter& counter, Engine& engine);

}  // namespace smcchees

#endif
