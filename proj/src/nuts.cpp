#include "smcchees/nuts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smcchees {

namespace {

struct Leaf {
  PhaseState state;
  Vector gradient;
  double log_density = 0.0;
};

struct Subtree {
  Leaf minus;
  Leaf plus;
  Leaf candidate;
  std::uint64_t valid = 0;  // leaves inside the slice
  bool keep_going = true;
  bool pruned = false;
  int steps = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const TargetModel& target, GradientCounter& counter, Engine& engine,
              double step_size, double log_slice, double max_energy_error)
      : target_(target),
        counter_(counter),
        engine_(engine),
        step_size_(step_size),
        log_slice_(log_slice),
        max_energy_error_(max_energy_error) {}

  Subtree build(const Leaf& from, int direction, int depth) {
    if (depth == 0) return single_step(from, direction);

    Subtree tree = build(from, direction, depth - 1);
    if (!tree.keep_going) return tree;
    Subtree outer = build(direction < 0 ? tree.minus : tree.plus, direction, depth - 1);
    if (direction < 0) {
      tree.minus = std::move(outer.minus);
    } else {
      tree.plus = std::move(outer.plus);
    }
    const std::uint64_t total = tree.valid + outer.valid;
    if (outer.valid > 0 &&
        uniform01(engine_) < static_cast<double>(outer.valid) / static_cast<double>(total)) {
      tree.candidate = std::move(outer.candidate);
    }
    tree.valid = total;
    tree.steps += outer.steps;
    tree.pruned = tree.pruned || outer.pruned;
    tree.keep_going = outer.keep_going && !u_turn(tree.minus.state, tree.plus.state);
    return tree;
  }

 private:
  Subtree single_step(const Leaf& from, int direction) {
    Leaf leaf = from;
    leapfrog_step(leaf.state, leaf.gradient, leaf.log_density, direction * step_size_,
                  target_, counter_);
    const double joint = leaf.log_density - kinetic_energy(leaf.state.momentum);
    const bool finite = std::isfinite(joint) && leaf.state.finite();

    Subtree tree;
    tree.steps = 1;
    tree.valid = finite && log_slice_ <= joint ? 1 : 0;
    tree.keep_going = finite && log_slice_ < max_energy_error_ + joint;
    tree.pruned = !tree.keep_going;
    tree.minus = leaf;
    tree.plus = leaf;
    tree.candidate = std::move(leaf);
    return tree;
  }

  const TargetModel& target_;
  GradientCounter& counter_;
  Engine& engine_;
  double step_size_;
  double log_slice_;
  double max_energy_error_;
};

}  // namespace

bool u_turn(const PhaseState& left, const PhaseState& right) {
  if (left.position.size() != right.position.size()) {
    throw std::invalid_argument("u_turn: dimension mismatch");
  }
  const Vector span = right.position - left.position;
  return span.dot(left.momentum) < 0.0 || span.dot(right.momentum) < 0.0;
}

NutsResult nuts_step(const Vector& position, const NutsConfig& config,
                     const TargetModel& target, GradientCounter& counter, Engine& engine) {
  config.leapfrog.validate();
  if (config.max_depth < 0) throw std::invalid_argument("nuts: max_depth must be >= 0");

  NutsResult result;
  result.position = position;
  result.initial_momentum = standard_normal_vector(engine, position.size());
  result.final_momentum = result.initial_momentum;

  Leaf start;
  start.state = {position, result.initial_momentum};
  start.log_density = target.log_density_and_gradient(position, start.gradient);
  counter.add();
  result.initial_log_density = start.log_density;
  result.log_density = start.log_density;
  if (!std::isfinite(start.log_density) || !start.gradient.allFinite()) {
    result.divergent = true;
    return result;
  }

  const double log_slice = std::log(uniform_open_closed(engine)) + start.log_density -
                           kinetic_energy(start.state.momentum);
  TreeBuilder builder(target, counter, engine, config.leapfrog.step_size, log_slice,
                      config.max_energy_error);

  Leaf minus = start;
  Leaf plus = start;
  Leaf candidate = std::move(start);
  std::uint64_t valid = 1;
  bool keep_going = true;
  const int max_doublings = std::max(1, config.max_depth);

  while (keep_going && result.depth < max_doublings) {
    const int direction = uniform01(engine) < 0.5 ? -1 : 1;
    Subtree tree = builder.build(direction < 0 ? minus : plus, direction, result.depth);
    if (direction < 0) {
      minus = std::move(tree.minus);
    } else {
      plus = std::move(tree.plus);
    }
    if (tree.keep_going && tree.valid > 0 &&
        uniform01(engine) < static_cast<double>(tree.valid) / static_cast<double>(valid)) {
      candidate = std::move(tree.candidate);
    }
    valid += tree.valid;
    result.leapfrog_steps += tree.steps;
    result.hit_energy_limit = result.hit_energy_limit || tree.pruned;
    keep_going = tree.keep_going && !u_turn(minus.state, plus.state);
    ++result.depth;
  }

  result.position = std::move(candidate.state.position);
  result.final_momentum = std::move(candidate.state.momentum);
  result.log_density = candidate.log_density;
  return result;
}

}  // namespace smcchees
