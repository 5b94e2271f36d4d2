#ifndef SMCCHEES_HMC_HPP
#define SMCCHEES_HMC_HPP

#include <cstdint>

#include "smcchees/targets.hpp"
#include "smcchees/types.hpp"

namespace smcchees {

/// (theta, p) of the momentum-augmented target. Mass matrix is the identity.
struct PhaseState {
  Vector position;
  Vector momentum;

  bool finite() const { return position.allFinite() && momentum.allFinite(); }
};

struct LeapfrogConfig {
  double step_size = 0.1;
  int max_steps = 500;

  void validate() const;
};

/// Counts evaluations of the log-density gradient.
class GradientCounter {
 public:
  void add(std::uint64_t n = 1) { count_ += n; }
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t count_ = 0;
};

inline double kinetic_energy(const Vector& momentum) {
  return 0.5 * momentum.squaredNorm();
}

/// 1/2 |p|^2 - log pi(theta).
double hamiltonian(const PhaseState& state, const TargetModel& target);

struct LeapfrogResult {
  PhaseState state;
  double initial_log_density = 0.0;  // log pi at the start position
  double log_density = 0.0;          // log pi at state.position
  Vector gradient;           // grad log pi at state.position
  bool divergent = false;    // a non-finite value appeared; trajectory stopped
};

/// One fused leapfrog step: half kick with the cached gradient, drift, then
/// half kick with the gradient at the new position (one evaluation). A
/// negative step size integrates backwards in time.
void leapfrog_step(PhaseState& state, Vector& gradient, double& log_density,
                   double step_size, const TargetModel& target, GradientCounter& counter);

/// `steps` leapfrog steps from `start`. Evaluates the gradient at the start
/// once, so a finite trajectory costs exactly steps + 1 evaluations.
LeapfrogResult leapfrog(const PhaseState& start, const LeapfrogConfig& config, int steps,
                        const TargetModel& target, GradientCounter& counter);

/// min(1, exp(H(current) - H(proposed))); 0 for non-finite energies.
double accept_probability(double current_energy, double proposed_energy);
double accept_probability(const PhaseState& current, const PhaseState& proposed,
                          const TargetModel& target);

/// Metropolis-Hastings selection with a caller-supplied uniform draw.
const PhaseState& mh_select(const PhaseState& current, const PhaseState& proposed,
                            double acceptance, double uniform);

}  // namespace smcchees

#endif
