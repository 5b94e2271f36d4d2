#include "smcchees/targets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "smcchees/rng.hpp"

namespace smcchees {

TargetModel diagonal_gaussian_target(std::string name, Vector mean, Vector variance) {
  if (mean.size() != variance.size() || mean.size() == 0) {
    throw std::invalid_argument("diagonal_gaussian_target: size mismatch");
  }
  Vector precision = variance.cwiseInverse();
  TargetModel target;
  target.name = std::move(name);
  target.dimension = mean.size();
  target.evaluate = [mean, precision](const Vector& theta, Vector* gradient) {
    const Vector scaled = (theta - mean).cwiseProduct(precision);
    if (gradient != nullptr) *gradient = -scaled;
    return -0.5 * (theta - mean).dot(scaled);
  };
  target.true_mean = std::move(mean);
  target.true_variance = std::move(variance);
  return target;
}

TargetModel gaussian_target() {
  Vector mean(5);
  mean << -4.0, -2.0, 0.0, 2.0, 4.0;
  Vector variance(5);
  variance << 1.0, 1.5, 2.0, 2.5, 3.0;
  return diagonal_gaussian_target("gaussian", std::move(mean), std::move(variance));
}

IllConditionedSpec make_ill_conditioned_spec(std::uint64_t seed, Index dimension) {
  Engine engine = substream(seed, StreamPurpose::kTarget);
  Matrix gaussian(dimension, dimension);
  for (Index c = 0; c < dimension; ++c) {
    for (Index r = 0; r < dimension; ++r) gaussian(r, c) = standard_normal(engine);
  }
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix q = qr.householderQ() * Matrix::Identity(dimension, dimension);
  const Matrix& r = qr.matrixQR();
  // Positive diagonal of R makes Q Haar distributed.
  for (Index i = 0; i < dimension; ++i) {
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }

  std::gamma_distribution<double> gamma(0.5, 1.0);
  Vector eigenvalues(dimension);
  for (Index i = 0; i < dimension; ++i) {
    eigenvalues[i] = std::max(gamma(engine), kEigenvalueFloor);
  }

  IllConditionedSpec spec;
  spec.seed = seed;
  spec.covariance = q * eigenvalues.asDiagonal() * q.transpose();
  spec.rotation = std::move(q);
  spec.eigenvalues = std::move(eigenvalues);
  return spec;
}

TargetModel ill_conditioned_target(const IllConditionedSpec& spec) {
  const Index dimension = spec.eigenvalues.size();
  Matrix precision =
      spec.rotation * spec.eigenvalues.cwiseInverse().asDiagonal() * spec.rotation.transpose();
  // Symmetrize away rounding so the gradient is an exact linear map.
  precision = 0.5 * (precision + precision.transpose()).eval();

  TargetModel target;
  target.name = "ill-gauss";
  target.dimension = dimension;
  target.evaluate = [precision = std::move(precision)](const Vector& theta, Vector* gradient) {
    if (gradient != nullptr) {
      gradient->noalias() = -(precision * theta);
      return 0.5 * theta.dot(*gradient);
    }
    return -0.5 * theta.dot(precision * theta);
  };
  target.true_mean = Vector::Zero(dimension);
  target.true_variance = spec.covariance.diagonal();
  return target;
}

TargetModel ill_conditioned_target(std::uint64_t seed) {
  return ill_conditioned_target(make_ill_conditioned_spec(seed));
}

TargetModel banana_target() {
  constexpr double kFirstVariance = 10.0;
  constexpr double kCurvature = 0.03;
  constexpr double kShift = 100.0;

  TargetModel target;
  target.name = "banana";
  target.dimension = 2;
  target.evaluate = [](const Vector& theta, Vector* gradient) {
    const double x = theta[0];
    const double residual = theta[1] - kCurvature * (x * x - kShift);
    if (gradient != nullptr) {
      (*gradient)[0] = -x / kFirstVariance + 2.0 * kCurvature * x * residual;
      (*gradient)[1] = -residual;
    }
    return -x * x / (2.0 * kFirstVariance) - 0.5 * residual * residual;
  };
  // E[theta2] = 0.03 (10 - 100); Var[theta2] = 0.03^2 Var[theta1^2] + 1.
  Vector mean(2);
  mean << 0.0, kCurvature * (kFirstVariance - kShift);
  Vector variance(2);
  variance << kFirstVariance,
      kCurvature * kCurvature * 2.0 * kFirstVariance * kFirstVariance + 1.0;
  target.true_mean = std::move(mean);
  target.true_variance = std::move(variance);
  return target;
}

std::vector<std::string> standardize_columns(Matrix& features) {
  std::vector<std::string> warnings;
  const auto n = static_cast<double>(features.rows());
  for (Index c = 0; c < features.cols(); ++c) {
    auto column = features.col(c);
    const double mean = column.mean();
    column.array() -= mean;
    double sd = n > 1.0 ? std::sqrt(column.squaredNorm() / (n - 1.0)) : 0.0;
    if (sd == 0.0) {
      warnings.push_back("feature column " + std::to_string(c + 1) +
                         " is constant; left unscaled");
      sd = 1.0;
    }
    column /= sd;
  }
  return warnings;
}

GermanCreditDataset load_german_credit(const std::string& path, Index expected_rows) {
  std::ifstream in(path);
  if (!in) throw DatasetIoError("cannot open German credit file '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      double value = 0.0;
      std::size_t consumed = 0;
      try {
        value = std::stod(token, &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != token.size()) {
        throw DatasetFormatError(path + ":" + std::to_string(line_number) +
                                 ": non-numeric field '" + token + "'");
      }
      row.push_back(value);
    }
    if (row.empty()) continue;
    if (row.size() != static_cast<std::size_t>(kGermanCreditFeatures + 1)) {
      throw DatasetFormatError(path + ":" + std::to_string(line_number) + ": expected " +
                               std::to_string(kGermanCreditFeatures + 1) +
                               " columns, found " + std::to_string(row.size()));
    }
    if (row.back() != 1.0 && row.back() != 2.0) {
      throw DatasetFormatError(path + ":" + std::to_string(line_number) +
                               ": label must be 1 or 2");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DatasetFormatError(path + ": no data rows");
  if (expected_rows > 0 && static_cast<Index>(rows.size()) != expected_rows) {
    throw DatasetFormatError(path + ": expected " + std::to_string(expected_rows) +
                             " rows, found " + std::to_string(rows.size()));
  }

  GermanCreditDataset data;
  const auto n = static_cast<Index>(rows.size());
  data.features.resize(n, kGermanCreditFeatures);
  data.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (Index c = 0; c < kGermanCreditFeatures; ++c) {
      data.features(i, c) = row[static_cast<std::size_t>(c)];
    }
    data.labels[i] = row.back() == 2.0 ? 1.0 : 0.0;
  }
  data.warnings = standardize_columns(data.features);
  return data;
}

DatasetSplit split_dataset(const GermanCreditDataset& data, double train_fraction,
                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("split_dataset: train fraction must be in (0, 1]");
  }
  const Index n = data.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Engine engine = substream(seed, StreamPurpose::kSplit);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[uniform_index(engine, i + 1)]);
  }
  const auto n_train = static_cast<Index>(std::llround(train_fraction * static_cast<double>(n)));

  const auto take = [&](Index begin, Index end) {
    LabeledData part;
    part.features.resize(end - begin, data.features.cols());
    part.labels.resize(end - begin);
    for (Index i = begin; i < end; ++i) {
      const Index src = order[static_cast<std::size_t>(i)];
      part.features.row(i - begin) = data.features.row(src);
      part.labels[i - begin] = data.labels[src];
    }
    return part;
  };
  return {take(0, n_train), take(n_train, n)};
}

Matrix with_intercept(const Matrix& features) {
  Matrix design(features.rows(), features.cols() + 1);
  design.leftCols(features.cols()) = features;
  design.col(features.cols()).setOnes();
  return design;
}

double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

TargetModel logistic_target(const LabeledData& data) {
  Matrix design = with_intercept(data.features);
  Eigen::ArrayXd labels = data.labels.array();

  TargetModel target;
  target.name = "german-credit";
  target.dimension = design.cols();
  target.evaluate = [design = std::move(design), labels = std::move(labels)](
                        const Vector& theta, Vector* gradient) {
    // y log s(z) + (1 - y) log s(-z) = y z - max(z, 0) - log1p(exp(-|z|)).
    const Eigen::ArrayXd z = (design * theta).array();
    const Eigen::ArrayXd e = (-z.abs()).exp();
    const Eigen::ArrayXd one_plus = 1.0 + e;
    if (gradient != nullptr) {
      const Eigen::ArrayXd s = (z >= 0.0).select(one_plus.inverse(), e / one_plus);
      gradient->noalias() = design.transpose() * (labels - s).matrix();
      *gradient -= theta;
    }
    // Sum of log1p terms as logs of partial products; each factor is in
    // [1, 2], so blocks of 512 cannot overflow.
    constexpr Index kBlock = 512;
    double softplus_tail = 0.0;
    for (Index start = 0; start < z.size(); start += kBlock) {
      softplus_tail += std::log(one_plus.segment(start, std::min(kBlock, z.size() - start)).prod());
    }
    return (labels * z - z.max(0.0)).sum() - softplus_tail - 0.5 * theta.squaredNorm();
  };
  return target;
}

TargetModel logistic_target(const GermanCreditDataset& data) {
  return logistic_target(LabeledData{data.features, data.labels});
}

Matrix sample_prior(Index dimension, Index particles, std::uint64_t seed) {
  if (dimension < 1 || particles < 1) {
    throw std::invalid_argument("sample_prior: dimension and particles must be >= 1");
  }
  Engine engine = substream(seed, StreamPurpose::kPrior);
  Matrix draws(particles, dimension);
  for (Index j = 0; j < particles; ++j) {
    for (Index d = 0; d < dimension; ++d) draws(j, d) = standard_normal(engine);
  }
  return draws;
}

}  // namespace smcchees
