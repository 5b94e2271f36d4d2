#ifndef SMCCHEES_CHEES_HPP
#define SMCCHEES_CHEES_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "smcchees/hmc.hpp"
#include "smcchees/proposal.hpp"

namespace smcchees {

struct AdamConfig {
  double learning_rate = 0.025;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Which momentum multiplies the centered proposal in the trajectory-length
/// gradient estimate.
enum class GradientMomentum { kInitial, kFinal };

struct CheesConfig {
  LeapfrogConfig leapfrog;
  double initial_length = 5.0;
  int warmup = 100;
  AdamConfig adam;
  GradientMomentum gradient_momentum = GradientMomentum::kInitial;
};

/// Trajectory-length adaptation state shared by the whole ensemble.
struct CheesAdaptState {
  double trajectory_length = 5.0;
  double moving_average = 0.0;
  double adam_m1 = 0.0;
  double adam_m2 = 0.0;
  std::uint64_t adam_steps = 0;
  int warmup_steps = 100;
  bool frozen = false;
};

CheesAdaptState make_adapt_state(const CheesConfig& config);

/// Rows are particles.
struct CheesStepRecord {
  Matrix previous;
  Matrix proposed;
  Matrix momenta;
  Vector acceptance;
  Vector lengths;  // jittered trajectory length h * L per particle
};

/// min(cap, max(1, ceil(h * L / eps))).
int jittered_length(double jitter, double trajectory_length, double step_size, int cap);

/// Per-particle l (|x' - mean'|^2 - |x - mean|^2) (x' - mean')^T p.
/// Needs at least two particles.
Vector chees_gradient_estimate(const CheesStepRecord& record);

/// 1/4 mean over particles of (|x' - mean'|^2 - |x - mean|^2)^2.
double chees_criterion(const CheesStepRecord& record);

/// Acceptance-weighted mean; empty when every acceptance is zero.
std::optional<double> weighted_gradient(const Vector& gradients, const Vector& acceptance);

/// One bias-corrected Adam ascent step on log L, clamped to
/// [log min_length, log max_length].
CheesAdaptState adam_update_log_length(CheesAdaptState state, double gradient,
                                       const AdamConfig& adam, double min_length,
                                       double max_length);

/// Lbar <- 0.9 Lbar + 0.1 L.
CheesAdaptState update_moving_average(CheesAdaptState state);

/// Fixes L to the moving average. Throws if `iteration` is not the warm-up
/// boundary or the moving average was never updated.
CheesAdaptState freeze_at_warmup(CheesAdaptState state, int iteration);

struct CheesStepResult {
  ProposalOutcome outcome;
  CheesStepRecord record;
  CheesAdaptState state;
  std::vector<int> step_counts;
  double criterion = 0.0;
  std::optional<double> weighted_gradient;  // set when an Adam step was taken
};

/// Propagates every particle with a jittered HMC trajectory (no accept/reject)
/// and, before the warm-up boundary, adapts the trajectory length.
/// `iteration` is 1-based. Particle j draws from substream (seed, iteration, j).
CheesStepResult chees_smc_step(const Matrix& positions, const Vector& jitter_column,
                               const CheesAdaptState& state, const CheesConfig& config,
                               const TargetModel& target, int iteration, std::uint64_t seed,
                               unsigned threads = 1);

}  // namespace smcchees

#endif
