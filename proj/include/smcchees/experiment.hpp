#ifndef SMCCHEES_EXPERIMENT_HPP
#define SMCCHEES_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smcchees/chees.hpp"
#include "smcchees/diagnostics.hpp"
#include "smcchees/proposal.hpp"
#include "smcchees/quasirandom.hpp"
#include "smcchees/smc.hpp"
#include "smcchees/targets.hpp"

namespace smcchees {

/// Bad flags, config keys or values. Maps to exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string preset;  // empty when none was requested
  std::string target = "gaussian";
  ProposalKind proposal = ProposalKind::kChees;
  JitterScheme jitter = JitterScheme::kHalton1d;
  Index particles = 1000;
  int iterations = 200;
  int burn_in = 100;
  double step_size = 0.1;
  double init_length = 5.0;
  int max_steps = 500;
  int max_depth = 11;
  double adam_lr = 0.025;
  int warmup = 100;
  int repeats = 10;
  std::uint64_t seed = 0;
  std::string out = "results";
  bool sweep = false;  // NUTS plus ChEES with every jitter scheme
  unsigned threads = 1;
  std::uint64_t ill_seed = 0;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.8;
  GradientMomentum gradient_momentum = GradientMomentum::kInitial;
  bool dump_config = false;

  /// Throws UsageError naming the offending key.
  void validate() const;
};

inline const std::vector<std::string>& target_names() {
  static const std::vector<std::string> names = {"gaussian", "ill-gauss", "banana",
                                                 "german-credit"};
  return names;
}

/// Sets the target and its step size.
void apply_preset(ExperimentConfig& config, const std::string& name);

/// Overlays the keys of a JSON object; unknown keys throw UsageError.
void apply_config_json(ExperimentConfig& config, const std::string& json_text);

std::string config_to_json(const ExperimentConfig& config);

/// Defaults < preset < config file < flags. Throws UsageError.
ExperimentConfig parse_config(int argc, const char* const* argv);

/// Same as parse_config but with `--help` output written to `out`. Returns
/// nullopt when help was printed.
std::optional<ExperimentConfig> parse_command_line(int argc, const char* const* argv,
                                                   std::ostream& out);

/// One configured sampler within an experiment.
struct MethodSpec {
  std::string name;  // row label in the summary tables
  ProposalKind proposal = ProposalKind::kChees;
  JitterScheme jitter = JitterScheme::kHalton1d;
};

std::vector<MethodSpec> experiment_methods(const ExperimentConfig& config);

/// Lower-case, dash-separated directory name for a method label.
std::string method_slug(const std::string& name);

SmcConfig smc_config_for(const ExperimentConfig& config, const MethodSpec& method,
                         std::uint64_t seed);

struct MethodResult {
  MethodSpec method;
  std::vector<RunSummary> runs;
  RunSummary mean;
  std::vector<ClassificationReport> classification;  // german-credit only
  std::vector<double> hard_label_auroc;              // german-credit only
};

struct ExperimentResult {
  std::vector<MethodResult> methods;
  std::vector<std::filesystem::path> files;
};

/// Runs every method `repeats` times (run r seeded with seed + r) and writes
/// all CSV and JSON outputs under `config.out`. Partial outputs are removed
/// when an error escapes.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Reads the per-run iteration CSVs written by run_experiment and writes
/// neff_per_grad.csv, plus mse_mean.csv and mse_var.csv when the target has
/// known moments. Values are averaged over runs. Returns the files written.
std::vector<std::filesystem::path> emit_figure_data(const ExperimentConfig& config,
                                                    const std::vector<MethodSpec>& methods);

/// Resolves the German credit file from GERMAN_CREDIT_PATH or the bundled
/// data directory.
std::string german_credit_path();

/// Builds the named target. german-credit uses the training split.
TargetModel make_target(const ExperimentConfig& config);

/// CLI entry point; returns the process exit code (0, 1 usage, 2 runtime).
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smcchees

#endif
