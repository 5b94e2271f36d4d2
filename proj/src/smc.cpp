#include "smcchees/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "smcchees/hmc.hpp"
#include "smcchees/nuts.hpp"
#include "smcchees/parallel.hpp"

namespace smcchees {

namespace {

constexpr double kNegativeInfinity = -std::numeric_limits<double>::infinity();

}  // namespace

std::string_view flag_name(ProposalKind kind) {
  switch (kind) {
    case ProposalKind::kRandomWalk: return "rw";
    case ProposalKind::kHmc: return "hmc";
    case ProposalKind::kNuts: return "nuts";
    case ProposalKind::kChees: return "chees";
  }
  return "unknown";
}

ProposalKind parse_proposal_kind(std::string_view name) {
  for (ProposalKind kind : {ProposalKind::kRandomWalk, ProposalKind::kHmc, ProposalKind::kNuts,
                            ProposalKind::kChees}) {
    if (flag_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown proposal '" + std::string(name) + "'");
}

void ProposalOutcome::resize(Index particles, Index dimension) {
  previous.resize(particles, dimension);
  proposed.resize(particles, dimension);
  initial_momentum.setZero(particles, dimension);
  final_momentum.setZero(particles, dimension);
  previous_log_density.resize(particles);
  proposed_log_density.resize(particles);
  divergent.assign(static_cast<std::size_t>(particles), 0);
  gradient_evaluations.assign(static_cast<std::size_t>(particles), 0);
}

std::uint64_t ProposalOutcome::total_gradient_evaluations() const {
  std::uint64_t total = 0;
  for (auto n : gradient_evaluations) total += n;
  return total;
}

ParticleEnsemble init_ensemble(const TargetModel& target, Index particles, std::uint64_t seed) {
  if (particles < 2) throw std::invalid_argument("SMC needs at least two particles");
  ParticleEnsemble ensemble;
  ensemble.positions = sample_prior(target.dimension, particles, seed);
  ensemble.log_weights.resize(particles);
  ensemble.log_densities.resize(particles);
  for (Index j = 0; j < particles; ++j) {
    const Vector theta = ensemble.positions.row(j).transpose();
    const double log_pi = target.log_density(theta);
    const double log_q0 = -0.5 * theta.squaredNorm();
    ensemble.log_densities[j] = log_pi;
    ensemble.log_weights[j] = std::isfinite(log_pi) ? log_pi - log_q0 : kNegativeInfinity;
  }
  return ensemble;
}

double log_sum_exp(const Vector& log_values) {
  double peak = kNegativeInfinity;
  for (Index i = 0; i < log_values.size(); ++i) {
    if (!std::isnan(log_values[i])) peak = std::max(peak, log_values[i]);
  }
  if (!std::isfinite(peak)) return peak;
  double total = 0.0;
  for (Index i = 0; i < log_values.size(); ++i) {
    if (!std::isnan(log_values[i])) total += std::exp(log_values[i] - peak);
  }
  return peak + std::log(total);
}

Vector normalize_weights(const Vector& log_weights, int iteration) {
  const double total = log_sum_exp(log_weights);
  if (!std::isfinite(total)) {
    throw WeightDegeneracy("all particle weights vanished at iteration " +
                           std::to_string(iteration));
  }
  Vector weights(log_weights.size());
  for (Index i = 0; i < log_weights.size(); ++i) {
    weights[i] = std::isnan(log_weights[i]) ? 0.0 : std::exp(log_weights[i] - total);
  }
  return weights;
}

double effective_sample_size(const Vector& normalized_weights) {
  return 1.0 / normalized_weights.squaredNorm();
}

std::vector<Index> multinomial_ancestors(const Vector& normalized_weights, Index count,
                                         Engine& engine) {
  std::vector<double> cumulative(static_cast<std::size_t>(normalized_weights.size()));
  double running = 0.0;
  for (Index i = 0; i < normalized_weights.size(); ++i) {
    running += normalized_weights[i];
    cumulative[static_cast<std::size_t>(i)] = running;
  }
  std::vector<Index> ancestors(static_cast<std::size_t>(count));
  for (auto& ancestor : ancestors) {
    const double u = uniform01(engine) * running;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    auto index = static_cast<Index>(it - cumulative.begin());
    index = std::min(index, normalized_weights.size() - 1);
    // Zero-weight categories have empty intervals; upper_bound never stops on
    // one unless rounding put u at the very top.
    while (normalized_weights[index] == 0.0 && index > 0) --index;
    ancestor = index;
  }
  return ancestors;
}

ParticleEnsemble multinomial_resample(const ParticleEnsemble& ensemble,
                                      const Vector& normalized_weights, Engine& engine) {
  const Index particles = ensemble.particles();
  const auto ancestors = multinomial_ancestors(normalized_weights, particles, engine);
  ParticleEnsemble next;
  next.iteration = ensemble.iteration;
  next.positions.resize(particles, ensemble.dimension());
  next.log_densities.resize(particles);
  for (Index j = 0; j < particles; ++j) {
    const Index a = ancestors[static_cast<std::size_t>(j)];
    next.positions.row(j) = ensemble.positions.row(a);
    next.log_densities[j] = ensemble.log_densities[a];
  }
  next.log_weights = Vector::Constant(particles, -std::log(static_cast<double>(particles)));
  return next;
}

double weight_update(double previous_log_weight, double previous_log_density,
                     double proposed_log_density, const Vector& initial_momentum,
                     const Vector& final_momentum, bool divergent) {
  const double increment = proposed_log_density - previous_log_density +
                           kinetic_energy(initial_momentum) - kinetic_energy(final_momentum);
  if (divergent || !std::isfinite(increment)) return kNegativeInfinity;
  return previous_log_weight + increment;
}

double symmetric_weight_update(double previous_log_weight, double previous_log_density,
                               double proposed_log_density) {
  const double increment = proposed_log_density - previous_log_density;
  if (!std::isfinite(increment)) return kNegativeInfinity;
  return previous_log_weight + increment;
}

Vector weighted_mean(const Matrix& positions, const Vector& weights) {
  return positions.transpose() * weights;
}

Vector weighted_variance(const Matrix& positions, const Vector& weights) {
  const Vector mean = weighted_mean(positions, weights);
  const Vector second = positions.array().square().matrix().transpose() * weights;
  return second - mean.cwiseProduct(mean);
}

void SmcConfig::validate() const {
  if (particles < 2) throw std::invalid_argument("particles must be >= 2");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) {
    throw std::invalid_argument("burn_in must satisfy 0 <= burn_in < iterations");
  }
  if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be positive");
  if (!(init_length > 0.0)) throw std::invalid_argument("init_L must be positive");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
  if (warmup < 2) throw std::invalid_argument("warmup must be >= 2");
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("adam_lr must be positive");
}

namespace {

ProposalOutcome propose_random_walk(const ParticleEnsemble& ensemble, double scale,
                                    const TargetModel& target, int iteration,
                                    std::uint64_t seed, unsigned threads) {
  ProposalOutcome outcome;
  outcome.resize(ensemble.particles(), ensemble.dimension());
  parallel_for(ensemble.particles(), threads, [&](Index j) {
    Engine engine = substream(seed, StreamPurpose::kProposal,
                              static_cast<std::uint64_t>(iteration),
                              static_cast<std::uint64_t>(j));
    const Vector start = ensemble.positions.row(j).transpose();
    const Vector moved = start + scale * standard_normal_vector(engine, start.size());
    outcome.previous.row(j) = start.transpose();
    outcome.proposed.row(j) = moved.transpose();
    outcome.previous_log_density[j] = ensemble.log_densities[j];
    outcome.proposed_log_density[j] = target.log_density(moved);
  });
  return outcome;
}

ProposalOutcome propose_hmc(const ParticleEnsemble& ensemble, const SmcConfig& config,
                            const TargetModel& target, int iteration, unsigned threads) {
  const LeapfrogConfig leapfrog_config{config.step_size, config.max_steps};
  const int steps = jittered_length(1.0, config.init_length, config.step_size, config.max_steps);
  ProposalOutcome outcome;
  outcome.resize(ensemble.particles(), ensemble.dimension());
  parallel_for(ensemble.particles(), threads, [&](Index j) {
    Engine engine = substream(config.seed, StreamPurpose::kProposal,
                              static_cast<std::uint64_t>(iteration),
                              static_cast<std::uint64_t>(j));
    PhaseState start{ensemble.positions.row(j).transpose(),
                     standard_normal_vector(engine, ensemble.dimension())};
    GradientCounter counter;
    const LeapfrogResult end = leapfrog(start, leapfrog_config, steps, target, counter);
    outcome.previous.row(j) = start.position.transpose();
    outcome.initial_momentum.row(j) = start.momentum.transpose();
    outcome.previous_log_density[j] = end.initial_log_density;
    outcome.gradient_evaluations[static_cast<std::size_t>(j)] = counter.count();
    outcome.divergent[static_cast<std::size_t>(j)] = end.divergent ? 1 : 0;
    const PhaseState& kept = end.divergent ? start : end.state;
    outcome.proposed.row(j) = kept.position.transpose();
    outcome.final_momentum.row(j) = kept.momentum.transpose();
    outcome.proposed_log_density[j] = end.divergent ? end.initial_log_density : end.log_density;
  });
  return outcome;
}

ProposalOutcome propose_nuts(const ParticleEnsemble& ensemble, const SmcConfig& config,
                             const TargetModel& target, int iteration, unsigned threads) {
  NutsConfig nuts_config;
  nuts_config.leapfrog = {config.step_size, config.max_steps};
  nuts_config.max_depth = config.max_depth;
  ProposalOutcome outcome;
  outcome.resize(ensemble.particles(), ensemble.dimension());
  parallel_for(ensemble.particles(), threads, [&](Index j) {
    Engine engine = substream(config.seed, StreamPurpose::kProposal,
                              static_cast<std::uint64_t>(iteration),
                              static_cast<std::uint64_t>(j));
    GradientCounter counter;
    const Vector start = ensemble.positions.row(j).transpose();
    const NutsResult step = nuts_step(start, nuts_config, target, counter, engine);
    outcome.previous.row(j) = start.transpose();
    outcome.proposed.row(j) = step.position.transpose();
    outcome.initial_momentum.row(j) = step.initial_momentum.transpose();
    outcome.final_momentum.row(j) = step.final_momentum.transpose();
    outcome.previous_log_density[j] = step.initial_log_density;
    outcome.proposed_log_density[j] = step.log_density;
    outcome.divergent[static_cast<std::size_t>(j)] = step.divergent ? 1 : 0;
    outcome.gradient_evaluations[static_cast<std::size_t>(j)] = counter.count();
  });
  return outcome;
}

}  // namespace

SmcRun run_smc(const SmcConfig& config, const TargetModel& target,
               const IterationObserver& observer, const JitterMatrix* jitter_override) {
  config.validate();
  const Index particles = config.particles;

  JitterMatrix generated;
  const JitterMatrix* jitter = jitter_override;
  CheesConfig chees_config;
  std::optional<CheesAdaptState> chees_state;
  if (config.proposal == ProposalKind::kChees) {
    if (jitter == nullptr) {
      generated = generate_jitter(config.jitter, particles, config.iterations, config.seed);
      jitter = &generated;
    }
    if (jitter->particles() != particles || jitter->iterations() < config.iterations) {
      throw std::invalid_argument("jitter matrix does not cover J x K");
    }
    chees_config.leapfrog = {config.step_size, config.max_steps};
    chees_config.initial_length = config.init_length;
    chees_config.warmup = config.warmup;
    chees_config.adam = config.adam;
    chees_config.gradient_momentum = config.gradient_momentum;
    chees_state = make_adapt_state(chees_config);
  }

  SmcRun run;
  run.diagnostics.reserve(static_cast<std::size_t>(config.iterations));
  ParticleEnsemble ensemble = init_ensemble(target, particles, config.seed);
  const double half = 0.5 * static_cast<double>(particles);
  std::uint64_t cumulative = 0;
  Vector weights;

  for (int k = 1; k <= config.iterations; ++k) {
    IterationDiagnostics row;
    row.iteration = k;

    weights = normalize_weights(ensemble.log_weights, k);
    row.ess_before_resample = effective_sample_size(weights);
    if (row.ess_before_resample < half) {
      Engine engine = substream(config.seed, StreamPurpose::kResample,
                                static_cast<std::uint64_t>(k));
      ensemble = multinomial_resample(ensemble, weights, engine);
      row.resampled = true;
    }

    ProposalOutcome outcome;
    switch (config.proposal) {
      case ProposalKind::kRandomWalk:
        outcome = propose_random_walk(ensemble, config.step_size, target, k, config.seed,
                                      config.threads);
        break;
      case ProposalKind::kHmc:
        outcome = propose_hmc(ensemble, config, target, k, config.threads);
        break;
      case ProposalKind::kNuts:
        outcome = propose_nuts(ensemble, config, target, k, config.threads);
        break;
      case ProposalKind::kChees: {
        row.trajectory_length = chees_state->trajectory_length;
        CheesStepResult step =
            chees_smc_step(ensemble.positions, jitter->values.col(k - 1), *chees_state,
                           chees_config, target, k, config.seed, config.threads);
        row.chees_criterion = step.criterion;
        chees_state = step.state;
        outcome = std::move(step.outcome);
        break;
      }
    }

    for (Index j = 0; j < particles; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      if (config.proposal == ProposalKind::kRandomWalk) {
        ensemble.log_weights[j] =
            symmetric_weight_update(ensemble.log_weights[j], outcome.previous_log_density[j],
                                    outcome.proposed_log_density[j]);
      } else {
        ensemble.log_weights[j] = weight_update(
            ensemble.log_weights[j], outcome.previous_log_density[j],
            outcome.proposed_log_density[j], outcome.initial_momentum.row(j).transpose(),
            outcome.final_momentum.row(j).transpose(), outcome.divergent[jj] != 0);
      }
    }
    ensemble.positions = std::move(outcome.proposed);
    ensemble.log_densities = std::move(outcome.proposed_log_density);
    ensemble.iteration = k;

    weights = normalize_weights(ensemble.log_weights, k);
    // Keep stored log-weights normalized so they never drift out of range.
    ensemble.log_weights.array() -= log_sum_exp(ensemble.log_weights);

    row.ess = effective_sample_size(weights);
    row.grad_evals = outcome.total_gradient_evaluations();
    cumulative += row.grad_evals;
    row.cumulative_grad_evals = cumulative;
    row.est_mean = weighted_mean(ensemble.positions, weights);
    row.est_var = weighted_variance(ensemble.positions, weights);
    if (target.true_mean) row.mse_mean = moment_mse(row.est_mean, *target.true_mean);
    if (target.true_variance) row.mse_var = moment_mse(row.est_var, *target.true_variance);

    if (observer) observer(ensemble, weights, row);
    run.diagnostics.push_back(std::move(row));
  }

  run.ensemble = std::move(ensemble);
  run.weights = std::move(weights);
  run.chees_state = chees_state;
  return run;
}

}  // namespace smcchees
