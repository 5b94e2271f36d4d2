#include "smcchees/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace smcchees {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_number(*value) : std::string();
}

json optional_json(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

std::string_view momentum_name(GradientMomentum momentum) {
  return momentum == GradientMomentum::kInitial ? "initial" : "final";
}

GradientMomentum parse_momentum(const std::string& name) {
  if (name == "initial") return GradientMomentum::kInitial;
  if (name == "final") return GradientMomentum::kFinal;
  throw UsageError("gradient_momentum: expected 'initial' or 'final', got '" + name + "'");
}

ProposalKind parse_proposal_usage(const std::string& name) {
  try {
    return parse_proposal_kind(name);
  } catch (const std::invalid_argument&) {
    throw UsageError("proposal: unknown value '" + name + "' (rw, hmc, nuts, chees)");
  }
}

JitterScheme parse_jitter_usage(const std::string& name) {
  try {
    return parse_jitter_scheme(name);
  } catch (const std::invalid_argument&) {
    throw UsageError("jitter: unknown scheme '" + name + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto& names = target_names();
  if (std::find(names.begin(), names.end(), target) == names.end()) {
    throw UsageError("target: unknown target '" + target + "'");
  }
  if (!preset.empty() && preset != target) {
    throw UsageError("target: '" + target + "' conflicts with preset '" + preset + "'");
  }
  if (particles < 2) throw UsageError("particles: must be at least 2");
  if (iterations < 1) throw UsageError("iterations: must be at least 1");
  if (burn_in < 0 || burn_in >= iterations) {
    throw UsageError("burn-in: must satisfy 0 <= burn-in < iterations");
  }
  if (!(step_size > 0.0)) throw UsageError("step-size: must be positive");
  if (!(init_length > 0.0)) throw UsageError("init-L: must be positive");
  if (max_steps < 1) throw UsageError("max-steps: must be at least 1");
  if (max_depth < 0) throw UsageError("max-depth: must be non-negative");
  if (!(adam_lr > 0.0)) throw UsageError("adam-lr: must be positive");
  if (warmup < 2) throw UsageError("warmup: must be at least 2");
  if (repeats < 1) throw UsageError("repeats: must be at least 1");
  if (threads < 1) throw UsageError("threads: must be at least 1");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw UsageError("train_fraction: must lie strictly between 0 and 1");
  }
  if (out.empty()) throw UsageError("out: output directory must not be empty");
}

void apply_preset(ExperimentConfig& config, const std::string& name) {
  static const std::map<std::string, double> step_sizes = {
      {"gaussian", 0.1}, {"ill-gauss", 0.001}, {"banana", 0.01}, {"german-credit", 0.001}};
  const auto it = step_sizes.find(name);
  if (it == step_sizes.end()) throw UsageError("preset: unknown preset '" + name + "'");
  config.preset = name;
  config.target = name;
  config.step_size = it->second;
}

void apply_config_json(ExperimentConfig& config, const std::string& json_text) {
  json document;
  try {
    document = json::parse(json_text);
  } catch (const json::parse_error& error) {
    throw UsageError(std::string("config: invalid JSON: ") + error.what());
  }
  if (!document.is_object()) throw UsageError("config: top level must be an object");

  if (auto it = document.find("preset"); it != document.end()) {
    apply_preset(config, it->get<std::string>());
  }
  for (const auto& [key, value] : document.items()) {
    try {
      if (key == "preset") continue;
      if (key == "target") config.target = value.get<std::string>();
      else if (key == "proposal") config.proposal = parse_proposal_usage(value.get<std::string>());
      else if (key == "jitter") config.jitter = parse_jitter_usage(value.get<std::string>());
      else if (key == "particles") config.particles = value.get<Index>();
      else if (key == "iterations") config.iterations = value.get<int>();
      else if (key == "burn_in") config.burn_in = value.get<int>();
      else if (key == "step_size") config.step_size = value.get<double>();
      else if (key == "init_L") config.init_length = value.get<double>();
      else if (key == "max_steps") config.max_steps = value.get<int>();
      else if (key == "max_depth") config.max_depth = value.get<int>();
      else if (key == "adam_lr") config.adam_lr = value.get<double>();
      else if (key == "warmup") config.warmup = value.get<int>();
      else if (key == "repeats") config.repeats = value.get<int>();
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "out") config.out = value.get<std::string>();
      else if (key == "sweep") config.sweep = value.get<bool>();
      else if (key == "threads") config.threads = value.get<unsigned>();
      else if (key == "ill_seed") config.ill_seed = value.get<std::uint64_t>();
      else if (key == "split_seed") config.split_seed = value.get<std::uint64_t>();
      else if (key == "train_fraction") config.train_fraction = value.get<double>();
      else if (key == "gradient_momentum") config.gradient_momentum = parse_momentum(value.get<std::string>());
      else throw UsageError("config: unknown key '" + key + "'");
    } catch (const json::type_error&) {
      throw UsageError("config: wrong type for key '" + key + "'");
    }
  }
}

std::string config_to_json(const ExperimentConfig& config) {
  json document = {
      {"preset", config.preset},
      {"target", config.target},
      {"proposal", std::string(flag_name(config.proposal))},
      {"jitter", std::string(flag_name(config.jitter))},
      {"particles", config.particles},
      {"iterations", config.iterations},
      {"burn_in", config.burn_in},
      {"step_size", config.step_size},
      {"init_L", config.init_length},
      {"max_steps", config.max_steps},
      {"max_depth", config.max_depth},
      {"adam_lr", config.adam_lr},
      {"warmup", config.warmup},
      {"repeats", config.repeats},
      {"seed", config.seed},
      {"out", config.out},
      {"sweep", config.sweep},
      {"threads", config.threads},
      {"ill_seed", config.ill_seed},
      {"split_seed", config.split_seed},
      {"train_fraction", config.train_fraction},
      {"gradient_momentum", std::string(momentum_name(config.gradient_momentum))},
  };
  return document.dump(2);
}

std::optional<ExperimentConfig> parse_command_line(int argc, const char* const* argv,
                                                   std::ostream& out) {
  CLI::App app{"SMC sampler with ChEES-HMC, NUTS and quasi-random trajectory jitter",
               "smc-chees"};

  std::string preset, target, proposal, jitter, out_dir, config_path, momentum;
  Index particles = 0;
  int iterations = 0, burn_in = 0, max_steps = 0, max_depth = 0, warmup = 0, repeats = 0;
  double step_size = 0, init_length = 0, adam_lr = 0, train_fraction = 0;
  std::uint64_t seed = 0, ill_seed = 0, split_seed = 0;
  unsigned threads = 0;

  auto* o_preset = app.add_option("--preset", preset, "gaussian, ill-gauss, banana, german-credit");
  auto* o_target = app.add_option("--target", target, "Target posterior (same names as presets)");
  auto* o_proposal = app.add_option("--proposal", proposal, "rw, hmc, nuts or chees");
  auto* o_jitter = app.add_option("--jitter", jitter, "Jitter scheme, e.g. 1d-halton, nd-inverse-sobol");
  auto* o_particles = app.add_option("--particles", particles, "Number of particles J");
  auto* o_iterations = app.add_option("--iterations", iterations, "Number of SMC iterations K");
  auto* o_burn_in = app.add_option("--burn-in", burn_in, "Iterations excluded from MSE averages");
  auto* o_step = app.add_option("--step-size", step_size, "Leapfrog step size (random-walk scale for rw)");
  auto* o_init = app.add_option("--init-L", init_length, "Initial trajectory length");
  auto* o_max_steps = app.add_option("--max-steps", max_steps, "Leapfrog step cap per trajectory");
  auto* o_depth = app.add_option("--max-depth", max_depth, "NUTS tree-depth cap");
  auto* o_lr = app.add_option("--adam-lr", adam_lr, "Adam learning rate for log L");
  auto* o_warmup = app.add_option("--warmup", warmup, "ChEES adaptation iterations");
  auto* o_repeats = app.add_option("--repeats", repeats, "Independent runs (seed + r)");
  auto* o_seed = app.add_option("--seed", seed, "Base seed");
  auto* o_out = app.add_option("--out", out_dir, "Output directory");
  auto* o_threads = app.add_option("--threads", threads, "Worker threads per run");
  auto* o_ill = app.add_option("--ill-seed", ill_seed, "Seed of the ill-conditioned covariance");
  auto* o_split = app.add_option("--split-seed", split_seed, "Seed of the German credit train/test split");
  auto* o_train = app.add_option("--train-fraction", train_fraction, "Training share of the German credit data");
  auto* o_momentum = app.add_option("--gradient-momentum", momentum, "initial or final");
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  bool sweep = false;
  bool dump = false;
  app.add_flag("--sweep", sweep, "Run NUTS and ChEES with all 13 jitter schemes");
  app.add_flag("--dump-config", dump, "Print the resolved config as JSON and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& error) {
    throw UsageError(error.what());
  }

  ExperimentConfig config;
  if (o_preset->count() > 0) apply_preset(config, preset);
  if (!config_path.empty()) {
    std::ifstream file(config_path);
    std::stringstream text;
    text << file.rdbuf();
    const std::string flag_preset = config.preset;
    apply_config_json(config, text.str());
    if (!flag_preset.empty() && config.preset != flag_preset) {
      throw UsageError("preset: flag '" + flag_preset + "' conflicts with config file '" +
                       config.preset + "'");
    }
  }
  if (o_target->count() > 0) {
    if (config.preset.empty()) {
      // A bare target picks up its preset step size.
      apply_preset(config, target);
      config.preset.clear();
    } else {
      config.target = target;
    }
  }
  if (o_proposal->count() > 0) config.proposal = parse_proposal_usage(proposal);
  if (o_jitter->count() > 0) config.jitter = parse_jitter_usage(jitter);
  if (o_particles->count() > 0) config.particles = particles;
  if (o_iterations->count() > 0) config.iterations = iterations;
  if (o_burn_in->count() > 0) config.burn_in = burn_in;
  if (o_step->count() > 0) config.step_size = step_size;
  if (o_init->count() > 0) config.init_length = init_length;
  if (o_max_steps->count() > 0) config.max_steps = max_steps;
  if (o_depth->count() > 0) config.max_depth = max_depth;
  if (o_lr->count() > 0) config.adam_lr = adam_lr;
  if (o_warmup->count() > 0) config.warmup = warmup;
  if (o_repeats->count() > 0) config.repeats = repeats;
  if (o_seed->count() > 0) config.seed = seed;
  if (o_out->count() > 0) config.out = out_dir;
  if (o_threads->count() > 0) config.threads = threads;
  if (o_ill->count() > 0) config.ill_seed = ill_seed;
  if (o_split->count() > 0) config.split_seed = split_seed;
  if (o_train->count() > 0) config.train_fraction = train_fraction;
  if (o_momentum->count() > 0) config.gradient_momentum = parse_momentum(momentum);
  if (sweep) config.sweep = true;
  config.dump_config = dump;
  config.validate();
  return config;
}

ExperimentConfig parse_config(int argc, const char* const* argv) {
  std::ostringstream help;
  auto config = parse_command_line(argc, argv, help);
  if (!config) throw UsageError("help requested");
  return *config;
}

std::vector<MethodSpec> experiment_methods(const ExperimentConfig& config) {
  std::vector<MethodSpec> methods;
  if (config.sweep) {
    methods.push_back({"NUTS", ProposalKind::kNuts, config.jitter});
    for (JitterScheme scheme : kAllJitterSchemes) {
      methods.push_back({std::string(display_name(scheme)), ProposalKind::kChees, scheme});
    }
    return methods;
  }
  switch (config.proposal) {
    case ProposalKind::kRandomWalk:
      methods.push_back({"Random Walk", config.proposal, config.jitter});
      break;
    case ProposalKind::kHmc:
      methods.push_back({"HMC", config.proposal, config.jitter});
      break;
    case ProposalKind::kNuts:
      methods.push_back({"NUTS", config.proposal, config.jitter});
      break;
    case ProposalKind::kChees:
      methods.push_back({std::string(display_name(config.jitter)), config.proposal, config.jitter});
      break;
  }
  return methods;
}

std::string method_slug(const std::string& name) {
  std::string slug;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      slug.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!slug.empty() && slug.back() != '-') {
      slug.push_back('-');
    }
  }
  while (!slug.empty() && slug.back() == '-') slug.pop_back();
  return slug;
}

SmcConfig smc_config_for(const ExperimentConfig& config, const MethodSpec& method,
                         std::uint64_t seed) {
  SmcConfig smc;
  smc.particles = config.particles;
  smc.iterations = config.iterations;
  smc.burn_in = config.burn_in;
  smc.proposal = method.proposal;
  smc.jitter = method.jitter;
  smc.step_size = config.step_size;
  smc.init_length = config.init_length;
  smc.max_steps = config.max_steps;
  smc.max_depth = config.max_depth;
  smc.adam.learning_rate = config.adam_lr;
  smc.warmup = config.warmup;
  smc.gradient_momentum = config.gradient_momentum;
  smc.seed = seed;
  smc.threads = config.threads;
  return smc;
}

std::string german_credit_path() {
  if (const char* env = std::getenv("GERMAN_CREDIT_PATH"); env != nullptr && *env != '\0') {
    return env;
  }
  return std::string(SMCCHEES_DEFAULT_DATA_DIR) + "/german.data-numeric";
}

namespace {

DatasetSplit german_split(const ExperimentConfig& config) {
  const GermanCreditDataset data = load_german_credit(german_credit_path());
  for (const auto& warning : data.warnings) std::cerr << "warning: " << warning << '\n';
  return split_dataset(data, config.train_fraction, config.split_seed);
}

}  // namespace

TargetModel make_target(const ExperimentConfig& config) {
  if (config.target == "gaussian") return gaussian_target();
  if (config.target == "ill-gauss") return ill_conditioned_target(config.ill_seed);
  if (config.target == "banana") return banana_target();
  if (config.target == "german-credit") return logistic_target(german_split(config).train);
  throw UsageError("target: unknown target '" + config.target + "'");
}

namespace {

/// Files and directories created by one experiment, removed on failure.
class OutputLedger {
 public:
  void directory(const fs::path& path) {
    std::vector<fs::path> missing;
    for (fs::path p = path; !p.empty() && !fs::exists(p); p = p.parent_path()) {
      missing.push_back(p);
      if (p == p.parent_path()) break;
    }
    fs::create_directories(path);
    for (auto& p : missing) directories_.push_back(p);
  }

  std::ofstream open(const fs::path& path) {
    std::ofstream stream(path, std::ios::binary | std::ios::trunc);
    if (!stream) throw std::runtime_error("cannot write " + path.string());
    files_.push_back(path);
    return stream;
  }

  void close(std::ofstream& stream, const fs::path& path) {
    stream.close();
    if (!stream) throw std::runtime_error("error writing " + path.string());
  }

  void track(const fs::path& path) { files_.push_back(path); }
  void commit() { committed_ = true; }
  const std::vector<fs::path>& files() const { return files_; }

  ~OutputLedger() {
    if (committed_) return;
    std::error_code ignored;
    for (auto it = files_.rbegin(); it != files_.rend(); ++it) fs::remove(*it, ignored);
    auto dirs = directories_;
    std::sort(dirs.begin(), dirs.end(), [](const fs::path& a, const fs::path& b) {
      return a.string().size() > b.string().size();
    });
    for (const auto& dir : dirs) fs::remove(dir, ignored);
  }

 private:
  std::vector<fs::path> files_;
  std::vector<fs::path> directories_;
  bool committed_ = false;
};

fs::path method_dir(const ExperimentConfig& config, const MethodSpec& method) {
  return config.sweep ? fs::path(config.out) / method_slug(method.name) : fs::path(config.out);
}

fs::path iterations_file(const ExperimentConfig& config, const MethodSpec& method, int run) {
  return method_dir(config, method) / ("iterations_run" + std::to_string(run) + ".csv");
}

void write_iterations(std::ostream& csv, const std::vector<IterationDiagnostics>& stream,
                      Index particles) {
  const Index dimension = stream.empty() ? 0 : stream.front().est_mean.size();
  csv << "iteration,ess,ess_before_resample,resampled,grad_evals,cumulative_grad_evals,"
         "grad_evals_per_particle,ess_per_grad,mse_mean,mse_var,trajectory_length,"
         "chees_criterion";
  for (Index d = 1; d <= dimension; ++d) csv << ",mean_" << d;
  for (Index d = 1; d <= dimension; ++d) csv << ",var_" << d;
  csv << '\n';
  for (const auto& row : stream) {
    csv << row.iteration << ',' << format_number(row.ess) << ','
        << format_number(row.ess_before_resample) << ',' << (row.resampled ? 1 : 0) << ','
        << row.grad_evals << ',' << row.cumulative_grad_evals << ','
        << format_number(static_cast<double>(row.grad_evals) / static_cast<double>(particles))
        << ',' << format_optional(ess_per_grad(row.ess, row.grad_evals)) << ','
        << format_optional(row.mse_mean) << ',' << format_optional(row.mse_var) << ','
        << format_optional(row.trajectory_length) << ','
        << format_optional(row.chees_criterion);
    for (Index d = 0; d < dimension; ++d) csv << ',' << format_number(row.est_mean[d]);
    for (Index d = 0; d < dimension; ++d) csv << ',' << format_number(row.est_var[d]);
    csv << '\n';
  }
}

json summary_json(const RunSummary& summary) {
  return {{"grad_evals_per_sample", summary.grad_evals_per_sample},
          {"ess_per_grad", optional_json(summary.ess_per_grad)},
          {"final_mse_mean", optional_json(summary.final_mse_mean)},
          {"final_mse_var", optional_json(summary.final_mse_var)},
          {"post_burn_in_mse_mean", optional_json(summary.post_burn_in_mse_mean)},
          {"post_burn_in_mse_var", optional_json(summary.post_burn_in_mse_var)}};
}

json report_json(const ClassificationReport& report) {
  return {{"accuracy", report.accuracy},     {"precision", report.precision},
          {"recall", report.recall},         {"f1", report.f1},
          {"specificity", report.specificity}, {"auroc", report.auroc},
          {"true_positive", report.counts.true_positive},
          {"false_positive", report.counts.false_positive},
          {"false_negative", report.counts.false_negative},
          {"true_negative", report.counts.true_negative}};
}

ClassificationReport mean_report(const std::vector<ClassificationReport>& reports) {
  ClassificationReport mean;
  for (const auto& r : reports) {
    mean.accuracy += r.accuracy;
    mean.precision += r.precision;
    mean.recall += r.recall;
    mean.f1 += r.f1;
    mean.specificity += r.specificity;
    mean.auroc += r.auroc;
  }
  const auto n = static_cast<double>(std::max<std::size_t>(1, reports.size()));
  mean.accuracy /= n;
  mean.precision /= n;
  mean.recall /= n;
  mean.f1 /= n;
  mean.specificity /= n;
  mean.auroc /= n;
  return mean;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<fs::path> emit_figure_data(const ExperimentConfig& config,
                                       const std::vector<MethodSpec>& methods) {
  struct Series {
    std::map<int, std::pair<double, int>> by_iteration;
    void add(int k, const std::string& text) {
      if (text.empty()) return;
      auto& [total, count] = by_iteration[k];
      total += std::stod(text);
      ++count;
    }
  };
  const std::vector<std::string> columns = {"ess_per_grad", "mse_mean", "mse_var"};
  std::vector<std::vector<Series>> series(columns.size(), std::vector<Series>(methods.size()));

  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (int r = 1; r <= config.repeats; ++r) {
      const fs::path path = iterations_file(config, methods[m], r);
      std::ifstream csv(path);
      if (!csv) throw std::runtime_error("missing iterations file " + path.string());
      std::string line;
      if (!std::getline(csv, line)) throw std::runtime_error("empty file " + path.string());
      const auto header = split_csv_line(line);
      std::vector<std::size_t> index(columns.size());
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto it = std::find(header.begin(), header.end(), columns[c]);
        if (it == header.end()) {
          throw std::runtime_error(path.string() + ": missing column " + columns[c]);
        }
        index[c] = static_cast<std::size_t>(it - header.begin());
      }
      while (std::getline(csv, line)) {
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
          throw std::runtime_error(path.string() + ": ragged row");
        }
        const int k = std::stoi(fields[0]);
        for (std::size_t c = 0; c < columns.size(); ++c) series[c][m].add(k, fields[index[c]]);
      }
    }
  }

  const std::vector<std::string> outputs = {"neff_per_grad.csv", "mse_mean.csv", "mse_var.csv"};
  std::vector<fs::path> written;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    bool any = false;
    for (const auto& s : series[c]) any = any || !s.by_iteration.empty();
    if (!any) continue;
    const fs::path path = fs::path(config.out) / outputs[c];
    std::ofstream csv(path, std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write " + path.string());
    written.push_back(path);
    csv << "iteration,method,value\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
      for (const auto& [k, acc] : series[c][m].by_iteration) {
        csv << k << ',' << methods[m].name << ','
            << format_number(acc.first / static_cast<double>(acc.second)) << '\n';
      }
    }
    csv.close();
    if (!csv) throw std::runtime_error("error writing " + path.string());
  }
  return written;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  OutputLedger ledger;
  ExperimentResult result;
  const auto methods = experiment_methods(config);
  const bool german = config.target == "german-credit";
  const bool banana = config.target == "banana";

  std::optional<DatasetSplit> split;
  TargetModel target;
  Matrix test_design;
  if (german) {
    split = german_split(config);
    target = logistic_target(split->train);
    test_design = with_intercept(split->test.features);
  } else {
    target = make_target(config);
  }

  const fs::path out(config.out);
  ledger.directory(out);

  std::ofstream samples;
  const fs::path samples_path = out / "banana_samples.csv";
  if (banana) {
    samples = ledger.open(samples_path);
    samples << "method,x,y\n";
  }

  for (const auto& method : methods) {
    MethodResult method_result;
    method_result.method = method;
    ledger.directory(method_dir(config, method));
    for (int r = 1; r <= config.repeats; ++r) {
      const SmcConfig smc = smc_config_for(config, method, config.seed + static_cast<std::uint64_t>(r));
      IterationObserver observer;
      if (banana && r == 1) {
        observer = [&](const ParticleEnsemble& ensemble, const Vector&,
                       const IterationDiagnostics& row) {
          if (row.iteration <= config.iterations - 20) return;
          for (Index j = 0; j < ensemble.particles(); ++j) {
            samples << method.name << ',' << format_number(ensemble.positions(j, 0)) << ','
                    << format_number(ensemble.positions(j, 1)) << '\n';
          }
        };
      }
      const SmcRun run = run_smc(smc, target, observer);

      const fs::path path = iterations_file(config, method, r);
      std::ofstream csv = ledger.open(path);
      write_iterations(csv, run.diagnostics, config.particles);
      ledger.close(csv, path);

      method_result.runs.push_back(summarize_run(run.diagnostics, config.particles, config.burn_in));
      if (german) {
        const Vector probabilities = posterior_predictive(run.ensemble.positions, run.weights, test_design);
        const ClassificationReport report = classification_report(probabilities, split->test.labels);
        method_result.classification.push_back(report);
        method_result.hard_label_auroc.push_back(0.5 * (report.recall + report.specificity));
      }
    }
    method_result.mean = average_summaries(method_result.runs);
    result.methods.push_back(std::move(method_result));
  }
  if (banana) ledger.close(samples, samples_path);

  {
    const fs::path path = out / "summary.csv";
    std::ofstream csv = ledger.open(path);
    csv << "method,grad_evals_per_sample,ess_per_grad\n";
    for (const auto& m : result.methods) {
      csv << m.method.name << ',' << format_number(m.mean.grad_evals_per_sample) << ','
          << format_optional(m.mean.ess_per_grad) << '\n';
    }
    ledger.close(csv, path);
  }

  if (german) {
    const fs::path path = out / "classification.csv";
    std::ofstream csv = ledger.open(path);
    csv << "method,accuracy,precision,recall,f1,specificity,auroc\n";
    for (const auto& m : result.methods) {
      const ClassificationReport mean = mean_report(m.classification);
      csv << m.method.name << ',' << format_number(mean.accuracy) << ','
          << format_number(mean.precision) << ',' << format_number(mean.recall) << ','
          << format_number(mean.f1) << ',' << format_number(mean.specificity) << ','
          << format_number(mean.auroc) << '\n';
    }
    ledger.close(csv, path);
  }

  {
    json document;
    document["config"] = json::parse(config_to_json(config));
    document["methods"] = json::array();
    for (const auto& m : result.methods) {
      json entry = {{"method", m.method.name},
                    {"proposal", std::string(flag_name(m.method.proposal))},
                    {"mean", summary_json(m.mean)},
                    {"runs", json::array()}};
      if (m.method.proposal == ProposalKind::kChees) {
        entry["jitter"] = std::string(flag_name(m.method.jitter));
      }
      for (const auto& run : m.runs) entry["runs"].push_back(summary_json(run));
      if (german) {
        entry["classification"] = report_json(mean_report(m.classification));
        entry["classification_runs"] = json::array();
        for (std::size_t i = 0; i < m.classification.size(); ++i) {
          json run = report_json(m.classification[i]);
          run["hard_label_auroc"] = m.hard_label_auroc[i];
          entry["classification_runs"].push_back(run);
        }
      }
      document["methods"].push_back(entry);
    }
    const fs::path path = out / "summary.json";
    std::ofstream file = ledger.open(path);
    file << document.dump(2) << '\n';
    ledger.close(file, path);
  }

  for (const auto& path : emit_figure_data(config, methods)) ledger.track(path);
  ledger.commit();
  result.files = ledger.files();
  return result;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::optional<ExperimentConfig> config;
  try {
    config = parse_command_line(argc, argv, out);
  } catch (const UsageError& error) {
    err << "usage error: " << error.what() << '\n';
    return 1;
  }
  if (!config) return 0;
  if (config->dump_config) {
    out << config_to_json(*config) << '\n';
    return 0;
  }
  try {
    const ExperimentResult result = run_experiment(*config);
    out << "method,grad_evals_per_sample,ess_per_grad\n";
    for (const auto& m : result.methods) {
      out << m.method.name << ',' << format_number(m.mean.grad_evals_per_sample) << ','
          << format_optional(m.mean.ess_per_grad) << '\n';
    }
  } catch (const UsageError& error) {
    err << "usage error: " << error.what() << '\n';
    return 1;
  } catch (const std::exception& error) {
    err << "error: " << error.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace smcchees
