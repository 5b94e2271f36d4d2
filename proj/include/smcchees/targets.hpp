#ifndef SMCCHEES_TARGETS_HPP
#define SMCCHEES_TARGETS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smcchees/types.hpp"

namespace smcchees {

/// Unnormalized log posterior with its analytic gradient.
struct TargetModel {
  /// Returns log pi(theta); writes the gradient when `gradient` is non-null.
  using Evaluator = std::function<double(const Vector& theta, Vector* gradient)>;

  std::string name;
  Index dimension = 0;
  Evaluator evaluate;
  std::optional<Vector> true_mean;
  std::optional<Vector> true_variance;

  double log_density(const Vector& theta) const { return evaluate(theta, nullptr); }

  Vector grad_log_density(const Vector& theta) const {
    Vector g(dimension);
    evaluate(theta, &g);
    return g;
  }

  double log_density_and_gradient(const Vector& theta, Vector& gradient) const {
    gradient.resize(dimension);
    return evaluate(theta, &gradient);
  }
};

/// N(mean, diag(variance)); constants dropped.
TargetModel diagonal_gaussian_target(std::string name, Vector mean, Vector variance);

/// 5-d Gaussian, mean (-4,-2,0,2,4), covariance diag(1,1.5,2,2.5,3).
TargetModel gaussian_target();

struct IllConditionedSpec {
  std::uint64_t seed = 0;
  Vector eigenvalues;
  Matrix rotation;  // Q, Haar-distributed on O(100)
  Matrix covariance;

  double condition_number() const {
    return eigenvalues.maxCoeff() / eigenvalues.minCoeff();
  }
};

inline constexpr Index kIllConditionedDimension = 100;
inline constexpr double kEigenvalueFloor = 1e-8;

/// Q from the QR factorization of a seeded Gaussian matrix with R's diagonal
/// made positive; eigenvalues i.i.d. Gamma(0.5, 1) floored at 1e-8.
IllConditionedSpec make_ill_conditioned_spec(std::uint64_t seed,
                                             Index dimension = kIllConditionedDimension);

TargetModel ill_conditioned_target(const IllConditionedSpec& spec);
TargetModel ill_conditioned_target(std::uint64_t seed);

/// theta1 ~ N(0, 10), theta2 | theta1 ~ N(0.03 (theta1^2 - 100), 1).
TargetModel banana_target();

class DatasetIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DatasetFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr Index kGermanCreditFeatures = 24;
inline constexpr Index kGermanCreditRows = 1000;

struct GermanCreditDataset {
  Matrix features;  // N x 24, z-scored per column
  Vector labels;    // 1 = bad credit, 0 = good
  std::vector<std::string> warnings;

  Index size() const { return features.rows(); }
};

/// Reads the whitespace-separated `german.data-numeric` layout: 24 integer
/// features and a label in {1, 2} per row. `expected_rows` of 0 accepts any
/// positive row count.
GermanCreditDataset load_german_credit(const std::string& path,
                                       Index expected_rows = kGermanCreditRows);

/// Z-scores each column with the sample standard deviation. Constant columns
/// are centered only, and a warning naming the column is returned.
std::vector<std::string> standardize_columns(Matrix& features);

struct LabeledData {
  Matrix features;
  Vector labels;
};

struct DatasetSplit {
  LabeledData train;
  LabeledData test;
};

/// Seeded shuffle, first `train_fraction` of rows for training.
DatasetSplit split_dataset(const GermanCreditDataset& data, double train_fraction,
                           std::uint64_t seed);

/// Appends an intercept column of ones.
Matrix with_intercept(const Matrix& features);

/// Numerically stable log(sigmoid(z)).
double log_sigmoid(double z);
double sigmoid(double z);

/// Bernoulli-logit likelihood over `data` (intercept appended internally) with
/// a standard-normal prior on every coefficient.
TargetModel logistic_target(const LabeledData& data);
TargetModel logistic_target(const GermanCreditDataset& data);

/// J x D matrix of i.i.d. standard normals; the initial proposal q0.
Matrix sample_prior(Index dimension, Index particles, std::uint64_t seed);

}  // namespace smcchees

#endif
