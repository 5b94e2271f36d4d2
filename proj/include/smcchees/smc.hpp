#ifndef SMCCHEES_SMC_HPP
#define SMCCHEES_SMC_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "smcchees/chees.hpp"
#include "smcchees/diagnostics.hpp"
#include "smcchees/proposal.hpp"
#include "smcchees/quasirandom.hpp"
#include "smcchees/rng.hpp"
#include "smcchees/targets.hpp"

namespace smcchees {

struct ParticleEnsemble {
  Matrix positions;      // J x D
  Vector log_weights;    // unnormalized
  Vector log_densities;  // log pi at each position
  int iteration = 0;

  Index particles() const { return positions.rows(); }
  Index dimension() const { return positions.cols(); }
};

class WeightDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Prior draws weighted by pi / q0, q0 = N(0, I).
ParticleEnsemble init_ensemble(const TargetModel& target, Index particles, std::uint64_t seed);

double log_sum_exp(const Vector& log_values);

/// exp(log_w - logsumexp(log_w)). Throws WeightDegeneracy naming `iteration`
/// when every weight is zero.
Vector normalize_weights(const Vector& log_weights, int iteration = 0);

/// 1 / sum w^2 for normalized weights.
double effective_sample_size(const Vector& normalized_weights);

/// J i.i.d. categorical draws from the normalized weights.
std::vector<Index> multinomial_ancestors(const Vector& normalized_weights, Index count,
                                         Engine& engine);

/// Offspring copy their ancestors; every weight becomes 1/J.
ParticleEnsemble multinomial_resample(const ParticleEnsemble& ensemble,
                                      const Vector& normalized_weights, Engine& engine);

/// Momentum change-of-variables update for HMC-type moves:
/// previous + [log pi(x_k) - log pi(x_{k-1})] + 1/2 (|p_{k-1}|^2 - |p_k|^2).
/// The leapfrog Jacobians of proposal and L-kernel cancel. Divergent moves
/// get -inf.
double weight_update(double previous_log_weight, double previous_log_density,
                     double proposed_log_density, const Vector& initial_momentum,
                     const Vector& final_momentum, bool divergent = false);

/// Symmetric proposal used as its own L-kernel: only the target ratio remains.
double symmetric_weight_update(double previous_log_weight, double previous_log_density,
                               double proposed_log_density);

/// sum_j w_j f(x_j) with f mapping a position to a vector.
template <typename F>
Vector weighted_estimate(const Matrix& positions, const Vector& weights, F&& f) {
  Vector total;
  for (Index j = 0; j < positions.rows(); ++j) {
    const Vector value = f(Vector(positions.row(j).transpose()));
    if (j == 0) total = Vector::Zero(value.size());
    total += weights[j] * value;
  }
  return total;
}

Vector weighted_mean(const Matrix& positions, const Vector& weights);

/// Plug-in per-coordinate variance sum w x^2 - (sum w x)^2.
Vector weighted_variance(const Matrix& positions, const Vector& weights);

struct SmcConfig {
  Index particles = 1000;
  int iterations = 200;
  int burn_in = 100;
  ProposalKind proposal = ProposalKind::kChees;
  JitterScheme jitter = JitterScheme::kHalton1d;
  double step_size = 0.1;  // leapfrog step, or random-walk scale
  double init_length = 5.0;
  int max_steps = 500;
  int max_depth = 11;
  AdamConfig adam;
  int warmup = 100;
  GradientMomentum gradient_momentum = GradientMomentum::kInitial;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

struct SmcRun {
  std::vector<IterationDiagnostics> diagnostics;
  ParticleEnsemble ensemble;  // after the last iteration
  Vector weights;             // normalized weights of `ensemble`
  std::optional<CheesAdaptState> chees_state;
};

/// Called after every iteration with the reweighted ensemble.
using IterationObserver = std::function<void(const ParticleEnsemble& ensemble,
                                             const Vector& normalized_weights,
                                             const IterationDiagnostics& row)>;

/// For k = 1..K: normalize, resample when ESS < J/2, propagate, reweight,
/// record diagnostics. Jitter comes from `config.jitter` unless overridden.
SmcRun run_smc(const SmcConfig& config, const TargetModel& target,
               const IterationObserver& observer = {},
               const JitterMatrix* jitter_override = nullptr);

}  // namespace smcchees

#endif
