#include "smcchees/chees.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smcchees/parallel.hpp"
#include "smcchees/rng.hpp"

namespace smcchees {

CheesAdaptState make_adapt_state(const CheesConfig& config) {
  if (!(config.initial_length > 0.0)) {
    throw std::invalid_argument("ChEES initial trajectory length must be positive");
  }
  CheesAdaptState state;
  state.trajectory_length = config.initial_length;
  state.warmup_steps = config.warmup;
  return state;
}

int jittered_length(double jitter, double trajectory_length, double step_size, int cap) {
  if (!(jitter > 0.0) || !(trajectory_length > 0.0) || !(step_size > 0.0) || cap < 1) {
    throw std::invalid_argument("jittered_length: inputs must be positive");
  }
  const double steps = jitter * trajectory_length / step_size;
  if (steps >= static_cast<double>(cap)) return cap;
  // Quotients that are integers up to rounding noise (5 / 0.1) count as exact.
  const double nearest = std::round(steps);
  const double whole =
      std::abs(steps - nearest) <= 1e-9 * std::max(1.0, steps) ? nearest : std::ceil(steps);
  return std::clamp(static_cast<int>(whole), 1, cap);
}

namespace {

void require_ensemble(const CheesStepRecord& record) {
  if (record.previous.rows() < 2) {
    throw std::invalid_argument("ChEES estimates need at least two particles");
  }
  if (record.proposed.rows() != record.previous.rows() ||
      record.proposed.cols() != record.previous.cols()) {
    throw std::invalid_argument("ChEES record: position shape mismatch");
  }
}

Vector squared_distance_change(const CheesStepRecord& record, Matrix* centered_proposed) {
  const Eigen::RowVectorXd previous_mean = record.previous.colwise().mean();
  const Eigen::RowVectorXd proposed_mean = record.proposed.colwise().mean();
  Matrix proposed_centered = record.proposed.rowwise() - proposed_mean;
  const Matrix previous_centered = record.previous.rowwise() - previous_mean;
  Vector change = proposed_centered.rowwise().squaredNorm() -
                  previous_centered.rowwise().squaredNorm();
  if (centered_proposed != nullptr) *centered_proposed = std::move(proposed_centered);
  return change;
}

}  // namespace

Vector chees_gradient_estimate(const CheesStepRecord& record) {
  require_ensemble(record);
  Matrix centered;
  const Vector change = squared_distance_change(record, &centered);
  const Vector projection = centered.cwiseProduct(record.momenta).rowwise().sum();
  return record.lengths.cwiseProduct(change).cwiseProduct(projection);
}

double chees_criterion(const CheesStepRecord& record) {
  require_ensemble(record);
  const Vector change = squared_distance_change(record, nullptr);
  return 0.25 * change.squaredNorm() / static_cast<double>(change.size());
}

std::optional<double> weighted_gradient(const Vector& gradients, const Vector& acceptance) {
  if (gradients.size() != acceptance.size()) {
    throw std::invalid_argument("weighted_gradient: size mismatch");
  }
  const double total = acceptance.sum();
  if (!(total > 0.0)) return std::nullopt;
  return acceptance.dot(gradients) / total;
}

CheesAdaptState adam_update_log_length(CheesAdaptState state, double gradient,
                                       const AdamConfig& adam, double min_length,
                                       double max_length) {
  if (state.frozen) throw std::logic_error("Adam update on a frozen trajectory length");
  state.adam_steps += 1;
  state.adam_m1 = adam.beta1 * state.adam_m1 + (1.0 - adam.beta1) * gradient;
  state.adam_m2 = adam.beta2 * state.adam_m2 + (1.0 - adam.beta2) * gradient * gradient;
  const auto t = static_cast<double>(state.adam_steps);
  const double m_hat = state.adam_m1 / (1.0 - std::pow(adam.beta1, t));
  const double v_hat = state.adam_m2 / (1.0 - std::pow(adam.beta2, t));
  // Ascent: the criterion is maximized.
  const double current = std::log(state.trajectory_length);
  const double log_length =
      std::clamp(current + adam.learning_rate * m_hat / (std::sqrt(v_hat) + adam.epsilon),
                 std::log(min_length), std::log(max_length));
  if (log_length != current) state.trajectory_length = std::exp(log_length);
  return state;
}

CheesAdaptState update_moving_average(CheesAdaptState state) {
  if (state.frozen) throw std::logic_error("moving average update on a frozen state");
  state.moving_average = 0.9 * state.moving_average + 0.1 * state.trajectory_length;
  return state;
}

CheesAdaptState freeze_at_warmup(CheesAdaptState state, int iteration) {
  if (iteration != state.warmup_steps) {
    throw std::invalid_argument("freeze_at_warmup called off the warm-up boundary");
  }
  if (!(state.moving_average > 0.0)) {
    throw std::logic_error("trajectory-length adaptation never ran before warm-up ended");
  }
  state.frozen = true;
  state.trajectory_length = state.moving_average;
  return state;
}

CheesStepResult chees_smc_step(const Matrix& positions, const Vector& jitter_column,
                               const CheesAdaptState& state, const CheesConfig& config,
                               const TargetModel& target, int iteration, std::uint64_t seed,
                               unsigned threads) {
  config.leapfrog.validate();
  const Index particles = positions.rows();
  const Index dimension = positions.cols();
  if (particles < 2) throw std::invalid_argument("ChEES step needs at least two particles");
  if (jitter_column.size() != particles) {
    throw std::invalid_argument("ChEES step: jitter column has wrong length");
  }

  CheesStepResult result;
  result.state = state;
  result.outcome.resize(particles, dimension);
  result.step_counts.assign(static_cast<std::size_t>(particles), 0);
  CheesStepRecord& record = result.record;
  record.acceptance.resize(particles);
  record.lengths.resize(particles);

  const double step_size = config.leapfrog.step_size;
  const int cap = config.leapfrog.max_steps;
  ProposalOutcome& outcome = result.outcome;

  parallel_for(particles, threads, [&](Index j) {
    Engine engine = substream(seed, StreamPurpose::kProposal,
                              static_cast<std::uint64_t>(iteration),
                              static_cast<std::uint64_t>(j));
    const double jitter = jitter_column[j];
    const int steps = jittered_length(jitter, state.trajectory_length, step_size, cap);
    PhaseState start{positions.row(j).transpose(), standard_normal_vector(engine, dimension)};

    GradientCounter counter;
    LeapfrogResult end = leapfrog(start, config.leapfrog, steps, target, counter);

    const double start_energy = kinetic_energy(start.momentum) - end.initial_log_density;
    const double end_energy = kinetic_energy(end.state.momentum) - end.log_density;
    const bool divergent = end.divergent || !std::isfinite(start_energy) ||
                           !std::isfinite(end_energy);

    outcome.previous.row(j) = start.position.transpose();
    outcome.initial_momentum.row(j) = start.momentum.transpose();
    outcome.previous_log_density[j] = end.initial_log_density;
    outcome.gradient_evaluations[static_cast<std::size_t>(j)] = counter.count();
    outcome.divergent[static_cast<std::size_t>(j)] = divergent ? 1 : 0;
    if (divergent) {
      // Keep the particle where it was; its weight is zeroed by the update.
      outcome.proposed.row(j) = start.position.transpose();
      outcome.final_momentum.row(j) = start.momentum.transpose();
      outcome.proposed_log_density[j] = end.initial_log_density;
    } else {
      outcome.proposed.row(j) = end.state.position.transpose();
      outcome.final_momentum.row(j) = end.state.momentum.transpose();
      outcome.proposed_log_density[j] = end.log_density;
    }
    record.acceptance[j] = divergent ? 0.0 : accept_probability(start_energy, end_energy);
    record.lengths[j] = jitter * state.trajectory_length;
    result.step_counts[static_cast<std::size_t>(j)] = steps;
  });

  record.previous = outcome.previous;
  record.proposed = outcome.proposed;
  record.momenta = config.gradient_momentum == GradientMomentum::kInitial
                       ? outcome.initial_momentum
                       : outcome.final_momentum;
  result.criterion = chees_criterion(record);

  CheesAdaptState& next = result.state;
  if (!next.frozen) {
    if (iteration < next.warmup_steps) {
      result.weighted_gradient =
          weighted_gradient(chees_gradient_estimate(record), record.acceptance);
      if (result.weighted_gradient) {
        next = adam_update_log_length(next, *result.weighted_gradient, config.adam, step_size,
                                      cap * step_size);
      }
      next = update_moving_average(next);
    }
    if (iteration == next.warmup_steps) next = freeze_at_warmup(next, iteration);
  }
  return result;
}

}  // namespace smcchees
