#include "smcchees/diagnostics.hpp"

#include <algorithm>
#include <numeric>

#include "smcchees/targets.hpp"

namespace smcchees {

std::optional<double> ess_per_grad(double ess, std::uint64_t grad_evals) {
  if (grad_evals == 0) return std::nullopt;
  return ess / static_cast<double>(grad_evals);
}

double moment_mse(const Vector& estimate, const Vector& truth) {
  if (estimate.size() != truth.size() || estimate.size() == 0) {
    throw std::invalid_argument("moment_mse: dimension mismatch");
  }
  return (estimate - truth).squaredNorm() / static_cast<double>(estimate.size());
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassificationReport metrics_from_confusion(const ConfusionCounts& c) {
  ClassificationReport r;
  r.counts = c;
  const std::uint64_t total = c.true_positive + c.false_positive + c.false_negative + c.true_negative;
  r.accuracy = ratio(c.true_positive + c.true_negative, total);
  r.precision = ratio(c.true_positive, c.true_positive + c.false_positive);
  r.recall = ratio(c.true_positive, c.true_positive + c.false_negative);
  r.specificity = ratio(c.true_negative, c.true_negative + c.false_positive);
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

double auroc(const Vector& scores, const Vector& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auroc: size mismatch");
  const auto n = static_cast<std::size_t>(scores.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Index>(a)] < scores[static_cast<Index>(b)];
  });

  double positive_rank_sum = 0.0;
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t end = i;
    while (end < n &&
           scores[static_cast<Index>(order[end])] == scores[static_cast<Index>(order[i])]) {
      ++end;
    }
    // Ranks i+1 .. end share the midrank.
    const double midrank = 0.5 * static_cast<double>(i + 1 + end);
    for (std::size_t k = i; k < end; ++k) {
      if (labels[static_cast<Index>(order[k])] != 0.0) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    i = end;
  }
  const std::uint64_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetric("AUROC needs both positive and negative labels");
  }
  const auto p = static_cast<double>(positives);
  const auto q = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

ClassificationReport classification_report(const Vector& probabilities, const Vector& labels,
                                           double threshold) {
  if (probabilities.size() != labels.size()) {
    throw std::invalid_argument("classification_report: size mismatch");
  }
  ConfusionCounts counts;
  for (Index i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    const bool actual = labels[i] != 0.0;
    if (predicted && actual) ++counts.true_positive;
    if (predicted && !actual) ++counts.false_positive;
    if (!predicted && actual) ++counts.false_negative;
    if (!predicted && !actual) ++counts.true_negative;
  }
  ClassificationReport report = metrics_from_confusion(counts);
  report.auroc = auroc(probabilities, labels);
  return report;
}

Vector posterior_predictive(const Matrix& positions, const Vector& weights, const Matrix& design) {
  if (positions.cols() != design.cols() || positions.rows() != weights.size()) {
    throw std::invalid_argument("posterior_predictive: shape mismatch");
  }
  const Matrix logits = design * positions.transpose();  // N x J
  Vector probability = Vector::Zero(design.rows());
  for (Index j = 0; j < positions.rows(); ++j) {
    if (weights[j] == 0.0) continue;
    for (Index n = 0; n < design.rows(); ++n) {
      probability[n] += weights[j] * sigmoid(logits(n, j));
    }
  }
  return probability;
}

RunSummary summarize_run(const std::vector<IterationDiagnostics>& stream, Index particles,
                         int burn_in) {
  if (particles < 1) throw std::invalid_argument("summarize_run: particles must be >= 1");
  RunSummary summary;
  if (stream.empty()) return summary;

  double grads_per_sample = 0.0;
  double ess_ratio_total = 0.0;
  std::size_t ess_ratio_count = 0;
  double mse_mean_total = 0.0;
  double mse_var_total = 0.0;
  std::size_t mse_count = 0;
  for (const auto& row : stream) {
    grads_per_sample += static_cast<double>(row.grad_evals) / static_cast<double>(particles);
    if (auto value = ess_per_grad(row.ess, row.grad_evals)) {
      ess_ratio_total += *value;
      ++ess_ratio_count;
    }
    if (row.iteration > burn_in && row.mse_mean && row.mse_var) {
      mse_mean_total += *row.mse_mean;
      mse_var_total += *row.mse_var;
      ++mse_count;
    }
  }
  summary.grad_evals_per_sample = grads_per_sample / static_cast<double>(stream.size());
  if (ess_ratio_count > 0) {
    summary.ess_per_grad = ess_ratio_total / static_cast<double>(ess_ratio_count);
  }
  summary.final_mse_mean = stream.back().mse_mean;
  summary.final_mse_var = stream.back().mse_var;
  if (mse_count > 0) {
    summary.post_burn_in_mse_mean = mse_mean_total / static_cast<double>(mse_count);
    summary.post_burn_in_mse_var = mse_var_total / static_cast<double>(mse_count);
  }
  return summary;
}

namespace {

std::optional<double> mean_of(const std::vector<RunSummary>& runs,
                              std::optional<double> RunSummary::*field) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& run : runs) {
    if (run.*field) {
      total += *(run.*field);
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return total / static_cast<double>(count);
}

}  // namespace

RunSummary average_summaries(const std::vector<RunSummary>& runs) {
  RunSummary mean;
  if (runs.empty()) return mean;
  for (const auto& run : runs) mean.grad_evals_per_sample += run.grad_evals_per_sample;
  mean.grad_evals_per_sample /= static_cast<double>(runs.size());
  mean.ess_per_grad = mean_of(runs, &RunSummary::ess_per_grad);
  mean.final_mse_mean = mean_of(runs, &RunSummary::final_mse_mean);
  mean.final_mse_var = mean_of(runs, &RunSummary::final_mse_var);
  mean.post_burn_in_mse_mean = mean_of(runs, &RunSummary::post_burn_in_mse_mean);
  mean.post_burn_in_mse_var = mean_of(runs, &RunSummary::post_burn_in_mse_var);
  return mean;
}

}  // namespace smcchees
