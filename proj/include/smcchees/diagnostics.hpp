#ifndef SMCCHEES_DIAGNOSTICS_HPP
#define SMCCHEES_DIAGNOSTICS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "smcchees/types.hpp"

namespace smcchees {

/// One row of the per-iteration diagnostics stream.
struct IterationDiagnostics {
  int iteration = 0;
  double ess_before_resample = 0.0;  // drives the resampling decision
  bool resampled = false;
  double ess = 0.0;                  // after this iteration's reweighting
  std::uint64_t grad_evals = 0;      // summed over particles, this iteration
  std::uint64_t cumulative_grad_evals = 0;
  Vector est_mean;
  Vector est_var;
  std::optional<double> mse_mean;
  std::optional<double> mse_var;
  std::optional<double> trajectory_length;  // ChEES L used for this iteration
  std::optional<double> chees_criterion;
};

/// Effective samples per gradient evaluation; empty when no gradients were
/// taken (random walk), which keeps the iteration out of averages.
std::optional<double> ess_per_grad(double ess, std::uint64_t grad_evals);

/// Mean over dimensions of the squared error.
double moment_mse(const Vector& estimate, const Vector& truth);

struct ConfusionCounts {
  std::uint64_t true_positive = 0;
  std::uint64_t false_positive = 0;
  std::uint64_t false_negative = 0;
  std::uint64_t true_negative = 0;
};

/// Classification metrics with label 1 (bad credit) as the positive class.
/// Ratios with a zero denominator are reported as 0.
struct ClassificationReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
  double auroc = 0.0;
  ConfusionCounts counts;
};

class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

ClassificationReport metrics_from_confusion(const ConfusionCounts& counts);

/// Mann-Whitney statistic with midranks for ties. Throws UndefinedMetric
/// unless both classes are present.
double auroc(const Vector& scores, const Vector& labels);

/// Hard label = probability >= threshold.
ClassificationReport classification_report(const Vector& probabilities, const Vector& labels,
                                           double threshold = 0.5);

/// Weighted posterior predictive P(y = 1 | x) = sum_j w_j sigmoid(theta_j . x).
/// `design` already contains the intercept column.
Vector posterior_predictive(const Matrix& positions, const Vector& weights, const Matrix& design);

struct RunSummary {
  double grad_evals_per_sample = 0.0;  // mean over iterations of grads / J
  std::optional<double> ess_per_grad;  // mean over iterations with gradients
  std::optional<double> final_mse_mean;
  std::optional<double> final_mse_var;
  std::optional<double> post_burn_in_mse_mean;
  std::optional<double> post_burn_in_mse_var;
};

/// Per-run averages over all iterations; MSE averages use iterations after
/// `burn_in`.
RunSummary summarize_run(const std::vector<IterationDiagnostics>& stream, Index particles,
                         int burn_in);

/// Field-wise mean across repeated runs; optional fields average over the
/// runs that have them.
RunSummary average_summaries(const std::vector<RunSummary>& runs);

}  // namespace smcchees

#endif
