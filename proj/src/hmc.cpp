#include "smcchees/hmc.hpp"

#include <cmath>
#include <stdexcept>

namespace smcchees {

void LeapfrogConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("leapfrog step size must be positive");
  }
  if (max_steps < 1) throw std::invalid_argument("leapfrog max_steps must be >= 1");
}

double hamiltonian(const PhaseState& state, const TargetModel& target) {
  return kinetic_energy(state.momentum) - target.log_density(state.position);
}

void leapfrog_step(PhaseState& state, Vector& gradient, double& log_density,
                   double step_size, const TargetModel& target, GradientCounter& counter) {
  const double half = 0.5 * step_size;
  state.momentum += half * gradient;
  state.position += step_size * state.momentum;
  log_density = target.log_density_and_gradient(state.position, gradient);
  counter.add();
  state.momentum += half * gradient;
}

LeapfrogResult leapfrog(const PhaseState& start, const LeapfrogConfig& config, int steps,
                        const TargetModel& target, GradientCounter& counter) {
  config.validate();
  if (steps < 1) throw std::invalid_argument("leapfrog: steps must be >= 1");

  LeapfrogResult result;
  result.state = start;
  result.log_density = target.log_density_and_gradient(result.state.position, result.gradient);
  counter.add();
  result.initial_log_density = result.log_density;
  for (int step = 0; step < steps; ++step) {
    if (!std::isfinite(result.log_density) || !result.gradient.allFinite() ||
        !result.state.finite()) {
      result.divergent = true;
      return result;
    }
    leapfrog_step(result.state, result.gradient, result.log_density, config.step_size,
                  target, counter);
  }
  result.divergent = !std::isfinite(result.log_density) || !result.gradient.allFinite() ||
                     !result.state.finite();
  return result;
}

double accept_probability(double current_energy, double proposed_energy) {
  if (!std::isfinite(current_energy) || !std::isfinite(proposed_energy)) return 0.0;
  const double log_ratio = current_energy - proposed_energy;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

double accept_probability(const PhaseState& current, const PhaseState& proposed,
                          const TargetModel& target) {
  if (!proposed.finite()) return 0.0;
  return accept_probability(hamiltonian(current, target), hamiltonian(proposed, target));
}

const PhaseState& mh_select(const PhaseState& current, const PhaseState& proposed,
                            double acceptance, double uniform) {
  return uniform < acceptance ? proposed : current;
}

}  // namespace smcchees
