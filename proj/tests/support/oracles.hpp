#ifndef SMCCHEES_TESTS_ORACLES_HPP
#define SMCCHEES_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <random>

#include "smcchees/hmc.hpp"
#include "smcchees/targets.hpp"

namespace oracles {

using smcchees::Index;
using smcchees::Matrix;
using smcchees::Vector;

/// Central differences of the log-density, one coordinate at a time.
inline Vector finite_difference_gradient(const smcchees::TargetModel& target, const Vector& theta,
                                         double step = 1e-5) {
  Vector g(theta.size());
  Vector probe = theta;
  for (Index i = 0; i < theta.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(theta[i]));
    probe[i] = theta[i] + h;
    const double up = target.log_density(probe);
    probe[i] = theta[i] - h;
    const double down = target.log_density(probe);
    probe[i] = theta[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Vector& approx, const Vector& exact) {
  return (approx - exact).norm() / std::max(exact.norm(), 1e-12);
}

/// Largest relative gradient error over `count` points drawn from
/// N(center, scale^2 I).
inline double worst_gradient_error(const smcchees::TargetModel& target, int count,
                                   unsigned seed, double scale = 1.0,
                                   const Vector* center = nullptr) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    Vector theta(target.dimension);
    for (Index d = 0; d < target.dimension; ++d) theta[d] = scale * normal(engine);
    if (center != nullptr) theta += *center;
    const Vector exact = target.grad_log_density(theta);
    worst = std::max(worst, relative_error(finite_difference_gradient(target, theta), exact));
  }
  return worst;
}

/// Leapfrog written out step by step with separate half kicks: the textbook
/// form, unfused, as an independent check of the fused integrator.
inline smcchees::PhaseState textbook_leapfrog(const smcchees::TargetModel& target,
                                              smcchees::PhaseState state, double eps,
                                              int steps) {
  for (int s = 0; s < steps; ++s) {
    state.momentum += 0.5 * eps * target.grad_log_density(state.position);
    state.position += eps * state.momentum;
    state.momentum += 0.5 * eps * target.grad_log_density(state.position);
  }
  return state;
}

/// Flat target in `dimension` dimensions.
inline smcchees::TargetModel flat_target(Index dimension) {
  smcchees::TargetModel t;
  t.name = "flat";
  t.dimension = dimension;
  t.evaluate = [](const Vector& theta, Vector* gradient) {
    if (gradient != nullptr) *gradient = Vector::Zero(theta.size());
    return 0.0;
  };
  return t;
}

/// Standard normal in `dimension` dimensions.
inline smcchees::TargetModel standard_normal_target(Index dimension) {
  return smcchees::diagonal_gaussian_target("std-normal", Vector::Zero(dimension),
                                            Vector::Ones(dimension));
}

/// Scalar Adam ascent on log L with bias correction and clamping.
struct ScalarAdam {
  double m = 0.0;
  double v = 0.0;
  int t = 0;
  double log_l = 0.0;

  void step(double g, double lo, double hi) {
    ++t;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    log_l += 0.025 * mh / (std::sqrt(vh) + 1e-8);
    log_l = std::min(std::max(log_l, std::log(lo)), std::log(hi));
  }
};

inline double log_normal_density(const Vector& x) {
  return -0.5 * x.squaredNorm() - 0.5 * static_cast<double>(x.size()) * std::log(2.0 * M_PI);
}

/// log |det d(position after `steps`)/d(initial momentum)| by central
/// differences through the textbook integrator.
inline double log_position_jacobian(const smcchees::TargetModel& t, const Vector& x,
                                    const Vector& p, double eps, int steps) {
  const Index d = x.size();
  Matrix jac(d, d);
  constexpr double h = 1e-5;
  for (Index i = 0; i < d; ++i) {
    Vector up = p;
    Vector down = p;
    up[i] += h;
    down[i] -= h;
    jac.col(i) = (textbook_leapfrog(t, {x, up}, eps, steps).position -
                  textbook_leapfrog(t, {x, down}, eps, steps).position) /
                 (2.0 * h);
  }
  return std::log(std::abs(jac.determinant()));
}

/// Log-weight increment from the proposal q(x1 | x0) and L-kernel
/// L(x0 | x1) written out as densities of the position map, Jacobians
/// included.
inline double explicit_increment(const smcchees::TargetModel& t, const Vector& x0,
                                 const Vector& p0, double eps, int steps) {
  const smcchees::PhaseState end = textbook_leapfrog(t, {x0, p0}, eps, steps);
  const double log_q = log_normal_density(p0) - log_position_jacobian(t, x0, p0, eps, steps);
  const Vector reversed = -end.momentum;
  const double log_l =
      log_normal_density(reversed) - log_position_jacobian(t, end.position, reversed, eps, steps);
  return t.log_density(end.position) - t.log_density(x0) + log_l - log_q;
}

}  // namespace oracles

#endif
