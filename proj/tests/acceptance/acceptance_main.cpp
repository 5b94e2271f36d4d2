// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles.hpp"
#include "smcchees/chees.hpp"
#include "smcchees/experiment.hpp"
#include "smcchees/hmc.hpp"
#include "smcchees/quasirandom.hpp"
#include "smcchees/smc.hpp"
#include "smcchees/targets.hpp"

using namespace smcchees;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

class Checks {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& text) {
    if (!notes_.empty()) notes_ += "; ";
    notes_ += text;
  }
  Verdict verdict() const {
    return {pass_, pass_ ? notes_ : failures_ + (notes_.empty() ? "" : " | " + notes_)};
  }

 private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

std::string fmt(const char* format, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, format, value);
  return buffer;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

fs::path scratch(const std::string& name) {
  const fs::path path = fs::temp_directory_path() / ("smcchees-acceptance-" + name);
  fs::remove_all(path);
  return path;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  apply_preset(c, name);
  return c;
}

Vector random_vector(std::mt19937_64& engine, Index n, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (auto& x : v) x = scale * normal(engine);
  return v;
}

PhaseState integrate(const TargetModel& t, const PhaseState& s, double eps, int steps) {
  GradientCounter counter;
  return leapfrog(s, {eps, 1000000}, steps, t, counter).state;
}

// --- 1 -------------------------------------------------------------------

Verdict quasirandom_oracles() {
  Checks checks;
  const std::vector<std::uint64_t> primes = first_primes(25);
  std::size_t mismatches = 0;
  for (std::uint64_t base : primes) {
    for (std::uint64_t index = 1; index <= 10000; ++index) {
      // Reverse the digits into an exact integer numerator over base^digits.
      std::uint64_t numerator = 0;
      std::uint64_t denominator = 1;
      for (std::uint64_t n = index; n > 0; n /= base) {
        numerator = numerator * base + n % base;
        denominator *= base;
      }
      const double expected = static_cast<double>(numerator) / static_cast<double>(denominator);
      if (radical_inverse(index, static_cast<unsigned>(base)) != expected) ++mismatches;
    }
  }
  checks.require(mismatches == 0, std::to_string(mismatches) + " radical-inverse mismatches");

  std::uint32_t x = 0;
  std::size_t sobol_mismatches = 0;
  for (std::uint64_t n = 1; n <= 4096; ++n) {
    std::uint64_t m = n - 1;
    int c = 0;
    for (; m & 1U; m >>= 1) ++c;
    x ^= std::uint32_t{1} << (31 - c);
    if (sobol_point(n, 1) != static_cast<double>(x) / 4294967296.0) ++sobol_mismatches;
  }
  checks.require(sobol_point(1, 1) == 0.5 && sobol_point(2, 1) == 0.75 &&
                     sobol_point(3, 1) == 0.25 && sobol_point(4, 1) == 0.375,
                 "Sobol dimension 1 prefix");
  checks.require(sobol_mismatches == 0,
                 std::to_string(sobol_mismatches) + " Sobol direction-number mismatches");

  double worst_seconds = 0.0;
  for (JitterScheme scheme : kAllJitterSchemes) {
    const auto start = std::chrono::steady_clock::now();
    const JitterMatrix m = generate_jitter(scheme, 1000, 200, 0);
    const double elapsed = seconds_since(start);
    worst_seconds = std::max(worst_seconds, elapsed);
    const bool shape = m.particles() == 1000 && m.iterations() == 200;
    const bool range = (m.values.array() > 0.0).all() && (m.values.array() <= 1.0).all();
    checks.require(shape && range, std::string(flag_name(scheme)) + " shape or range");
    checks.require(elapsed < 1.0, std::string(flag_name(scheme)) + " took " +
                                      fmt("%.3f", elapsed) + " s");
  }
  checks.note("slowest scheme " + fmt("%.3f", worst_seconds) + " s");
  return checks.verdict();
}

// --- 2 -------------------------------------------------------------------

Verdict leapfrog_physics() {
  Checks checks;
  const std::vector<TargetModel> targets = {gaussian_target(), banana_target(),
                                            oracles::standard_normal_target(3)};
  std::mt19937_64 engine(3);
  std::uniform_real_distribution<double> log_eps(std::log(1e-3), std::log(0.1));
  std::uniform_int_distribution<int> steps(1, 50);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const TargetModel& t = targets[static_cast<std::size_t>(i) % targets.size()];
    const PhaseState start{random_vector(engine, t.dimension, 2.0),
                           random_vector(engine, t.dimension)};
    const double eps = std::exp(log_eps(engine));
    const int n = steps(engine);
    PhaseState forward = integrate(t, start, eps, n);
    forward.momentum = -forward.momentum;
    const PhaseState back = integrate(t, forward, eps, n);
    worst = std::max(worst, (back.position - start.position).cwiseAbs().maxCoeff());
    worst = std::max(worst, (back.momentum + start.momentum).cwiseAbs().maxCoeff());
  }
  checks.require(worst < 1e-8, "reversibility error " + fmt("%.3g", worst));
  checks.note("reversibility " + fmt("%.2g", worst));

  const TargetModel g = gaussian_target();
  const PhaseState start{*g.true_mean + random_vector(engine, 5), random_vector(engine, 5)};
  const double h0 = hamiltonian(start, g);
  const auto worst_error = [&](double eps, int n) {
    PhaseState s = start;
    Vector grad = g.grad_log_density(s.position);
    double logp = g.log_density(s.position);
    GradientCounter counter;
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      leapfrog_step(s, grad, logp, eps, g, counter);
      e = std::max(e, std::abs(hamiltonian(s, g) - h0));
    }
    return e;
  };
  const double ratio = worst_error(0.05, 80) / worst_error(0.1, 40);
  checks.require(ratio <= 0.3, "energy-error ratio " + fmt("%.3f", ratio));
  checks.note("energy ratio " + fmt("%.3f", ratio));

  const TargetModel oscillator = oracles::standard_normal_target(1);
  const PhaseState quarter =
      integrate(oscillator, {Vector::Ones(1), Vector::Zero(1)}, 0.01, 157);
  const double off = std::max(std::abs(quarter.position[0]), std::abs(quarter.momentum[0] + 1.0));
  checks.require(off < 0.02, "quarter period off by " + fmt("%.4f", off));
  return checks.verdict();
}

// --- 3 -------------------------------------------------------------------

Verdict gradient_correctness() {
  Checks checks;
  const std::vector<std::pair<TargetModel, double>> cases = {
      {gaussian_target(), 3.0},
      {ill_conditioned_target(0), 3.0},
      {banana_target(), 3.0},
      {logistic_target(load_german_credit(german_credit_path())), 1.0}};
  unsigned seed = 1;
  for (const auto& [target, scale] : cases) {
    const double worst = oracles::worst_gradient_error(target, 100, seed++, scale);
    checks.require(worst < 1e-5, target.name + " relative error " + fmt("%.3g", worst));
    checks.note(target.name + " " + fmt("%.1e", worst));
  }
  return checks.verdict();
}

// --- 4 -------------------------------------------------------------------

Verdict smc_identities() {
  Checks checks;
  const TargetModel t = gaussian_target();
  SmcConfig config;
  config.particles = 500;
  config.iterations = 40;
  config.burn_in = 20;
  config.warmup = 20;
  config.seed = 3;
  int resamples = 0;
  double worst_sum = 0.0;
  double worst_post_resample = 0.0;
  bool rule_ok = true;
  run_smc(config, t, [&](const ParticleEnsemble& e, const Vector& w,
                         const IterationDiagnostics& row) {
    worst_sum = std::max(worst_sum, std::abs(w.sum() - 1.0));
    if (row.resampled != (row.ess_before_resample < config.particles / 2.0)) rule_ok = false;
    if (row.resampled) ++resamples;
    Engine engine = substream(99, StreamPurpose::kResample, static_cast<std::uint64_t>(row.iteration));
    const ParticleEnsemble r = multinomial_resample(e, w, engine);
    const double ess = effective_sample_size(normalize_weights(r.log_weights));
    worst_post_resample = std::max(worst_post_resample, std::abs(ess - config.particles));
  });
  checks.require(rule_ok, "resampling did not follow ESS < J/2");
  checks.require(resamples > 0, "no resampling event exercised");
  checks.require(worst_sum <= 1e-12, "weight sum off by " + fmt("%.3g", worst_sum));
  checks.require(worst_post_resample <= 1e-9,
                 "post-resample ESS off by " + fmt("%.3g", worst_post_resample));

  std::mt19937_64 engine(77);
  std::normal_distribution<double> normal;
  double worst_jacobian = 0.0;
  const TargetModel line = diagonal_gaussian_target("g", Vector::Ones(1), Vector::Constant(1, 2.0));
  const TargetModel banana = banana_target();
  for (int trial = 0; trial < 40; ++trial) {
    const bool planar = trial % 2 == 1;
    const TargetModel& target = planar ? banana : line;
    const double eps = planar ? 0.05 : 0.2;
    Vector x0 = random_vector(engine, target.dimension, 2.0);
    if (planar) x0[1] -= 2.7;
    const Vector p0 = random_vector(engine, target.dimension);
    const int steps = 1 + trial % 9;
    const PhaseState end = oracles::textbook_leapfrog(target, {x0, p0}, eps, steps);
    const double simple = weight_update(0.0, target.log_density(x0),
                                        target.log_density(end.position), p0, end.momentum);
    worst_jacobian = std::max(
        worst_jacobian, std::abs(simple - oracles::explicit_increment(target, x0, p0, eps, steps)));
  }
  checks.require(worst_jacobian <= 1e-8,
                 "momentum form vs explicit Jacobian " + fmt("%.3g", worst_jacobian));
  checks.note(std::to_string(resamples) + " resamples; Jacobian gap " +
              fmt("%.1e", worst_jacobian));
  return checks.verdict();
}

// --- 5 -------------------------------------------------------------------

Verdict chees_mechanics() {
  Checks checks;
  std::mt19937_64 engine(2024);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int seq = 0; seq < 1000; ++seq) {
    CheesAdaptState s;
    s.trajectory_length = 5.0;
    oracles::ScalarAdam oracle{0.0, 0.0, 0, std::log(5.0)};
    const double scale = std::pow(10.0, (seq % 7) - 3);
    for (int i = 0; i < 40; ++i) {
      const double g = scale * normal(engine);
      s = adam_update_log_length(s, g, {}, 0.1, 50.0);
      oracle.step(g, 0.1, 50.0);
      worst = std::max(worst, std::abs(std::log(s.trajectory_length) - oracle.log_l));
    }
  }
  checks.require(worst <= 1e-12, "Adam oracle gap " + fmt("%.3g", worst));

  CheesAdaptState avg;
  avg.trajectory_length = 5.0;
  for (int i = 0; i < 50; ++i) avg = update_moving_average(avg);
  const double closed = 5.0 * (1.0 - std::pow(0.9, 50));
  checks.require(std::abs(avg.moving_average - closed) <= 1e-12,
                 "moving average " + fmt("%.15g", avg.moving_average));

  SmcConfig config;
  config.particles = 100;
  config.iterations = 40;
  config.burn_in = 20;
  config.warmup = 20;
  const SmcRun run = run_smc(config, gaussian_target());
  bool constant = run.chees_state && run.chees_state->frozen;
  for (const auto& row : run.diagnostics) {
    if (row.iteration > config.warmup) {
      constant = constant && row.trajectory_length == run.chees_state->trajectory_length;
    }
  }
  checks.require(constant, "trajectory length changed after freeze");

  CheesStepRecord record;
  record.previous = (Matrix(2, 1) << 0.0, 2.0).finished();
  record.proposed = (Matrix(2, 1) << 0.0, 4.0).finished();
  record.momenta = Matrix::Ones(2, 1);
  record.lengths = Vector::Ones(2);
  record.acceptance = Vector::Ones(2);
  const Vector g = chees_gradient_estimate(record);
  checks.require(std::abs(g[0] + 6.0) <= 1e-12 && std::abs(g[1] - 6.0) <= 1e-12, "hand example gave (" + fmt("%g", g[0]) + ", " +
                                                  fmt("%g", g[1]) + ")");
  checks.note("frozen L " + fmt("%.4f", run.chees_state->trajectory_length));
  return checks.verdict();
}

// --- 6 -------------------------------------------------------------------

Verdict scaled_gaussian_table() {
  Checks checks;
  const auto start = std::chrono::steady_clock::now();
  std::map<std::string, RunSummary> means;
  for (ProposalKind kind : {ProposalKind::kNuts, ProposalKind::kChees}) {
    ExperimentConfig c = preset("gaussian");
    c.proposal = kind;
    c.jitter = JitterScheme::kHalton1d;
    c.particles = 500;
    c.iterations = 100;
    c.burn_in = 50;
    c.warmup = 50;
    c.repeats = 3;
    c.out = scratch("criterion6-" + std::string(flag_name(kind))).string();
    const ExperimentResult result = run_experiment(c);
    means[std::string(flag_name(kind))] = result.methods.front().mean;
    fs::remove_all(c.out);
  }
  const double elapsed = seconds_since(start);
  const RunSummary& nuts = means["nuts"];
  const RunSummary& chees = means["chees"];
  const double grad_ratio = nuts.grad_evals_per_sample / chees.grad_evals_per_sample;
  const double ess_ratio = chees.ess_per_grad.value_or(0.0) / nuts.ess_per_grad.value_or(1.0);
  checks.require(grad_ratio >= 3.0, "grad-eval ratio " + fmt("%.2f", grad_ratio) + " < 3");
  checks.require(ess_ratio >= 3.0, "ESS-per-grad ratio " + fmt("%.2f", ess_ratio) + " < 3");
  checks.require(elapsed < 300.0, "runtime " + fmt("%.0f", elapsed) + " s");
  checks.note("NUTS " + fmt("%.2f", nuts.grad_evals_per_sample) + " grads/N, " +
              fmt("%.4f", nuts.ess_per_grad.value_or(0.0)) + " ESS/grad; 1-d Halton " +
              fmt("%.2f", chees.grad_evals_per_sample) + " grads/N, " +
              fmt("%.4f", chees.ess_per_grad.value_or(0.0)) + " ESS/grad; " +
              fmt("%.0f", elapsed) + " s");
  return checks.verdict();
}

// --- 7 -------------------------------------------------------------------

Verdict capped_trajectories() {
  Checks checks;
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig c = preset("ill-gauss");
  c.jitter = JitterScheme::kNoJitter;
  c.particles = 200;
  c.iterations = 30;
  c.burn_in = 10;
  c.max_steps = 500;
  const SmcRun run = run_smc(smc_config_for(c, {"No Jitter", ProposalKind::kChees,
                                               JitterScheme::kNoJitter},
                                            c.seed + 1),
                             make_target(c));
  int off = 0;
  for (const auto& row : run.diagnostics) {
    if (row.grad_evals != static_cast<std::uint64_t>(501 * c.particles)) ++off;
  }
  const double elapsed = seconds_since(start);
  checks.require(off == 0, std::to_string(off) + " iterations without exactly 501 grads/N");
  checks.require(elapsed < 600.0, "runtime " + fmt("%.0f", elapsed) + " s");
  checks.note(std::to_string(run.diagnostics.size()) + " iterations at 501 grads/N; " +
              fmt("%.0f", elapsed) + " s");
  return checks.verdict();
}

// --- 8 -------------------------------------------------------------------

Verdict moment_convergence() {
  Checks checks;
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig c = preset("gaussian");
  c.jitter = JitterScheme::kHalton1d;
  c.particles = 1000;
  c.iterations = 200;
  c.repeats = 3;
  c.out = scratch("criterion8").string();
  const ExperimentResult result = run_experiment(c);
  fs::remove_all(c.out);
  int good = 0;
  std::string values;
  for (const RunSummary& r : result.methods.front().runs) {
    const double mean_mse = r.final_mse_mean.value_or(INFINITY);
    const double var_mse = r.final_mse_var.value_or(INFINITY);
    if (mean_mse < 0.05 && var_mse < 0.2) ++good;
    values += (values.empty() ? "" : ", ") + fmt("(%.4f", mean_mse) + fmt(", %.4f)", var_mse);
  }
  const double elapsed = seconds_since(start);
  checks.require(good >= 2, std::to_string(good) + " of 3 runs converged");
  checks.require(elapsed < 600.0, "runtime " + fmt("%.0f", elapsed) + " s");
  checks.note("final (mean, var) MSE " + values + "; " + fmt("%.0f", elapsed) + " s");
  return checks.verdict();
}

// --- 9 -------------------------------------------------------------------

Verdict german_credit() {
  Checks checks;
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig c = preset("german-credit");
  c.particles = 500;
  c.iterations = 200;
  c.repeats = 1;
  c.out = scratch("criterion9").string();
  const ExperimentResult result = run_experiment(c);
  fs::remove_all(c.out);
  const double elapsed = seconds_since(start);
  const MethodResult& m = result.methods.front();
  const ClassificationReport& report = m.classification.front();
  checks.require(report.accuracy >= 0.70 && report.accuracy <= 0.82,
                 "accuracy " + fmt("%.4f", report.accuracy) + " outside [0.70, 0.82]");
  checks.require(report.auroc >= 0.62 && report.auroc <= 0.76,
                 "AUROC " + fmt("%.4f", report.auroc) + " outside [0.62, 0.76]");
  checks.require(elapsed < 900.0, "runtime " + fmt("%.0f", elapsed) + " s");
  checks.note("accuracy " + fmt("%.4f", report.accuracy) + ", AUROC " +
              fmt("%.4f", report.auroc) + ", hard-label AUROC " +
              fmt("%.4f", m.hard_label_auroc.front()) + "; " + fmt("%.0f", elapsed) + " s");
  return checks.verdict();
}

// --- 10 ------------------------------------------------------------------

Verdict jitter_benefit() {
  Checks checks;
  const auto start = std::chrono::steady_clock::now();
  std::map<JitterScheme, double> ess_per_grad;
  for (JitterScheme scheme :
       {JitterScheme::kNoJitter, JitterScheme::kHalton1d, JitterScheme::kSobol1d}) {
    ExperimentConfig c = preset("banana");
    c.jitter = scheme;
    c.particles = 500;
    c.iterations = 100;
    c.burn_in = 50;
    c.warmup = 50;
    c.repeats = 3;
    c.out = scratch("criterion10-" + std::string(flag_name(scheme))).string();
    const ExperimentResult result = run_experiment(c);
    fs::remove_all(c.out);
    ess_per_grad[scheme] = result.methods.front().mean.ess_per_grad.value_or(0.0);
  }
  const double elapsed = seconds_since(start);
  const double base = ess_per_grad[JitterScheme::kNoJitter];
  const double best = std::max(ess_per_grad[JitterScheme::kHalton1d],
                               ess_per_grad[JitterScheme::kSobol1d]);
  checks.require(best > base, "no jittered scheme beats No Jitter");
  checks.require(elapsed < 600.0, "runtime " + fmt("%.0f", elapsed) + " s");
  checks.note("ESS/grad No Jitter " + fmt("%.4g", base) + ", 1-d Halton " +
              fmt("%.4g", ess_per_grad[JitterScheme::kHalton1d]) + ", 1-d Sobol " +
              fmt("%.4g", ess_per_grad[JitterScheme::kSobol1d]) + "; " + fmt("%.0f", elapsed) +
              " s");
  return checks.verdict();
}

// --- 11 ------------------------------------------------------------------

std::map<std::string, std::string> output_bytes(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    // The embedded config records the output directory and thread count.
    if (entry.path().filename() == "summary.json") {
      nlohmann::json document = nlohmann::json::parse(bytes);
      document.erase("config");
      bytes = document.dump(2);
    }
    files[fs::relative(entry.path(), root).string()] = std::move(bytes);
  }
  return files;
}

Verdict determinism() {
  Checks checks;
  std::vector<ExperimentConfig> experiments;
  {
    ExperimentConfig c = preset("gaussian");
    c.particles = 200;
    c.iterations = 30;
    c.burn_in = 15;
    c.warmup = 15;
    c.repeats = 2;
    experiments.push_back(c);
  }
  {
    ExperimentConfig c = preset("banana");
    c.proposal = ProposalKind::kNuts;
    c.particles = 100;
    c.iterations = 25;
    c.burn_in = 5;
    c.repeats = 1;
    experiments.push_back(c);
  }
  {
    ExperimentConfig c = preset("german-credit");
    c.jitter = JitterScheme::kSobolNd;
    c.particles = 40;
    c.iterations = 6;
    c.burn_in = 3;
    c.warmup = 3;
    c.step_size = 0.05;
    c.repeats = 1;
    experiments.push_back(c);
  }
  std::size_t compared = 0;
  for (std::size_t e = 0; e < experiments.size(); ++e) {
    std::vector<std::map<std::string, std::string>> outputs;
    for (unsigned threads : {1U, 1U, 4U}) {
      ExperimentConfig c = experiments[e];
      c.threads = threads;
      c.out = scratch("criterion11-" + std::to_string(e) + "-" +
                      std::to_string(outputs.size()))
                  .string();
      run_experiment(c);
      outputs.push_back(output_bytes(c.out));
      fs::remove_all(c.out);
    }
    const std::string name = experiments[e].target;
    checks.require(!outputs[0].empty(), name + " wrote no files");
    checks.require(outputs[0] == outputs[1], name + " differs between identical runs");
    checks.require(outputs[0] == outputs[2], name + " differs with 4 threads");
    compared += outputs[0].size();
  }
  checks.note(std::to_string(compared) + " files identical across reruns and 1 vs 4 threads (summary.json without its config block)");
  return checks.verdict();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"quasi-random oracles", quasirandom_oracles},
      {"leapfrog physics", leapfrog_physics},
      {"gradient correctness", gradient_correctness},
      {"SMC identities", smc_identities},
      {"ChEES adaptation mechanics", chees_mechanics},
      {"scaled Gaussian efficiency table", scaled_gaussian_table},
      {"trajectory cap on the ill-conditioned Gaussian", capped_trajectories},
      {"moment convergence on the 5-d Gaussian", moment_convergence},
      {"German credit classification", german_credit},
      {"jitter benefit on the banana target", jitter_benefit},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& error) {
      v = {false, std::string("exception: ") + error.what()};
    }
    if (!v.pass) ++failures;
    std::printf("[%s] criterion %zu: %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
