#include "tmreach/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "tmreach/baseline.hpp"
#include "tmreach/parallel.hpp"

namespace tmreach::cli {

namespace fs = std::filesystem;

namespace {

// Raw flag values; unset optionals fall back to the scenario.
struct Flags {
  std::string scenario;
  std::optional<std::string> network;
  std::optional<std::string> samples;
  std::optional<std::string> cells;
  std::optional<unsigned> order;
  std::optional<unsigned> bernstein_order;
  std::optional<unsigned> bernstein_steps;
  std::optional<unsigned> reinit;
  std::optional<std::string> noise;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> rollouts;
  std::optional<std::string> checkpoints;
  std::optional<std::string> mode;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::size_t jobs = 0;
  bool all_cells = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scenario", f.scenario, "Scenario document (JSON)")->required();
  cmd->add_option("--network", f.network, "Network weight file; overrides the scenario's \"network\"");
  cmd->add_option("--samples", f.samples, "CSV of initial states, one per row");
  cmd->add_option("--cells", f.cells, "Cells per dimension, e.g. 10 or 10,4");
  cmd->add_option("--order", f.order, "Taylor model truncation order (1-6)");
  cmd->add_option("--bernstein-order", f.bernstein_order, "Bernstein polynomial order");
  cmd->add_option("--bernstein-steps", f.bernstein_steps, "Bernstein error sampling steps");
  cmd->add_option("--reinit", f.reinit, "Re-initialization period in steps (0 = never)");
  cmd->add_option("--noise", f.noise, "Observation noise radius, one value or one per variable");
  cmd->add_option("--steps", f.steps, "Horizon T");
  cmd->add_option("--rollouts", f.rollouts, "Point-based rollouts per cell");
  cmd->add_option("--checkpoints", f.checkpoints, "Sample-count checkpoints, e.g. 100,250,500");
  cmd->add_option("--seed", f.seed, "Random seed for point-based sampling");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--jobs", f.jobs, "Worker threads (default: available parallelism)");
  cmd->add_option("--baseline-mode", f.mode, "ReLU propagation: optimized | always-bernstein");
  cmd->add_flag("--all-cells", f.all_cells, "Verify zero-mass cells too");
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(flag + ": cannot parse \"" + item + "\"");
    }
  }
  if (v.empty()) throw InputError(flag + ": empty list");
  return v;
}

std::vector<std::size_t> parse_counts(const std::string& text, const std::string& flag) {
  std::vector<std::size_t> out;
  for (double d : parse_list(text, flag)) {
    if (d < 1 || d != std::floor(d)) throw InputError(flag + ": expected positive integers");
    out.push_back(static_cast<std::size_t>(d));
  }
  return out;
}

// Broadcasts a single value to `dim` entries.
template <class T>
std::vector<T> broadcast(std::vector<T> v, std::size_t dim, const std::string& flag) {
  if (v.size() == 1 && dim > 1) v.assign(dim, v.front());
  if (v.size() != dim) throw InputError(flag + ": expected 1 or " + std::to_string(dim) + " values");
  return v;
}

RunConfig resolve(const std::string& command, const Flags& f, bool needs_samples) {
  RunConfig cfg;
  cfg.command = command;
  cfg.scenario_path = f.scenario;
  cfg.out_dir = f.out;
  cfg.seed = f.seed;
  cfg.jobs = f.jobs == 0 ? default_jobs() : f.jobs;
  cfg.all_cells = f.all_cells;
  cfg.scenario = load_scenario(f.scenario);
  Scenario& sc = cfg.scenario;
  const std::size_t dim = sc.dynamics.state_dim;

  auto& act = sc.options.propagation.activation;
  if (f.order) {
    if (*f.order < 1 || *f.order > kMaxOrder) throw InputError("--order: must be in [1, 6]");
    act.tm_order = *f.order;
  }
  if (f.bernstein_order) {
    if (*f.bernstein_order < 1) throw InputError("--bernstein-order: must be >= 1");
    act.bernstein_order = *f.bernstein_order;
  }
  if (f.bernstein_steps) {
    if (*f.bernstein_steps < 1) throw InputError("--bernstein-steps: must be >= 1");
    act.bernstein_steps = *f.bernstein_steps;
  }
  if (f.reinit) sc.options.reinit_period = *f.reinit;
  if (f.noise) {
    sc.options.noise_radius = broadcast(parse_list(*f.noise, "--noise"), dim, "--noise");
    for (double r : sc.options.noise_radius) {
      if (r < 0.0) throw InputError("--noise: radii must be >= 0");
    }
  }
  if (f.steps) {
    if (*f.steps < 1) throw InputError("--steps: must be >= 1");
    sc.steps = *f.steps;
  }
  if (f.rollouts) {
    if (*f.rollouts < 1) throw InputError("--rollouts: must be >= 1");
    sc.rollouts_per_cell = *f.rollouts;
  }
  if (f.mode) {
    try {
      sc.options.propagation.mode = parse_propagation_mode(*f.mode);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("--baseline-mode: ") + e.what());
    }
  }

  if (f.network) {
    cfg.network_path = *f.network;
  } else if (sc.network_path) {
    cfg.network_path = *sc.network_path;
  } else {
    throw InputError(f.scenario + ": no network given (use --network or the scenario's \"network\")");
  }
  try {
    cfg.network.emplace(Network::load(cfg.network_path));
  } catch (const NetworkError& e) {
    throw InputError(e.what());
  }
  if (cfg.network->input_dim() != dim || cfg.network->output_dim() != sc.dynamics.action_dim) {
    throw InputError(cfg.network_path + ": network maps " + std::to_string(cfg.network->input_dim()) + " -> " +
                     std::to_string(cfg.network->output_dim()) + " but the scenario needs " +
                     std::to_string(dim) + " -> " + std::to_string(sc.dynamics.action_dim));
  }

  if (needs_samples) {
    if (!f.samples) throw InputError(command + ": --samples is required");
    cfg.samples_path = *f.samples;
    cfg.samples = load_samples_csv(*f.samples);
    if (cfg.samples.front().size() != dim) {
      throw InputError(*f.samples + ": rows have " + std::to_string(cfg.samples.front().size()) +
                       " columns, scenario has " + std::to_string(dim) + " state variables");
    }
    cfg.partition_bounds = sc.partition_bounds.value_or(sc.initial_box);
    if (f.cells) {
      cfg.cells_per_dim = broadcast(parse_counts(*f.cells, "--cells"), dim, "--cells");
    } else if (!sc.cells_per_dim.empty()) {
      cfg.cells_per_dim = sc.cells_per_dim;
    } else {
      cfg.cells_per_dim.assign(dim, 1);
    }
    std::vector<std::size_t> cps;
    if (f.checkpoints) {
      cps = parse_counts(*f.checkpoints, "--checkpoints");
    } else {
      cps = sc.checkpoints;
    }
    const std::size_t n = cfg.samples.size();
    for (std::size_t c : cps) {
      if (c <= n && (cfg.checkpoints.empty() || c > cfg.checkpoints.back())) cfg.checkpoints.push_back(c);
    }
    if (cps.empty()) cfg.checkpoints = default_checkpoints(n);
    if (cfg.checkpoints.empty() || cfg.checkpoints.back() != n) cfg.checkpoints.push_back(n);
  }
  return cfg;
}

// Files are written under a temporary name and renamed into place.
void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
  }
  fs::rename(tmp, path);
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const Scenario& sc = cfg.scenario;
  const ReachTube tube = reach_trajectory(*cfg.network, sc.dynamics, sc.initial_box, sc.steps, sc.options);
  const Verdict verdict = check_safety(tube, sc.safety);

  fs::create_directories(cfg.out_dir);
  std::ostringstream csv;
  write_tube_csv(csv, tube);
  write_file(fs::path(cfg.out_dir) / "tube.csv", csv.str());
  write_file(fs::path(cfg.out_dir) / "verdict.json", verdict_json(verdict, tube));

  out << "verdict: " << to_string(verdict.kind);
  if (verdict.first_violation_step) out << " (first violation at step " << *verdict.first_violation_step << ")";
  out << '\n';
  return verdict.safe() ? kOk : kPossiblyUnsafe;
}

struct Assessment {
  OperationalProfile profile;
  std::vector<std::optional<Verdict>> verdicts;
  ReliabilityReport report;
};

Assessment assess(const RunConfig& cfg) {
  const Partitioning part(cfg.partition_bounds, cfg.cells_per_dim);
  OperationalProfile profile = fit_op(cfg.samples, part);
  auto verdicts = verify_cells(*cfg.network, cfg.scenario, profile, cfg.all_cells, cfg.jobs);
  ReliabilityReport report = assess_reliability(profile, verdicts);
  report.convergence = convergence_curve(cfg.samples, part, verdicts, cfg.checkpoints);
  return {std::move(profile), std::move(verdicts), std::move(report)};
}

int cmd_assess(const RunConfig& cfg, std::ostream& out) {
  const Assessment a = assess(cfg);
  fs::create_directories(cfg.out_dir);
  write_file(fs::path(cfg.out_dir) / "report.json", report_json(a.report, a.profile));
  std::string csv = "samples,failure_probability\n";
  for (const auto& [n, est] : a.report.convergence) csv += fmt::format("{},{}\n", n, est);
  write_file(fs::path(cfg.out_dir) / "convergence.csv", csv);
  out << "failure_probability: " << format_real(a.report.failure_probability) << " (" << a.report.cells_verified
      << " of " << a.report.cells_checked << " checked cells verified safe)\n";
  return kOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const Assessment a = assess(cfg);
  const Scenario& sc = cfg.scenario;
  const PointEstimate point = point_estimate(*cfg.network, sc.dynamics, sc.safety, a.profile, sc.steps,
                                             sc.rollouts_per_cell, cfg.seed, cfg.jobs);
  const Partitioning& part = a.profile.partitioning;
  std::string csv = "n_samples,interval_estimate,point_estimate\n";
  for (const auto& [n, interval_est] : a.report.convergence) {
    const OperationalProfile prefix = fit_op(std::span(cfg.samples).first(n), part);
    double point_est = 0.0;
    for (std::size_t i = 0; i < part.size(); ++i) {
      if (prefix.mass[i] > 0.0) point_est += prefix.mass[i] * point.cell_failure[i].value();
    }
    csv += fmt::format("{},{},{}\n", n, interval_est, point_est);
  }
  fs::create_directories(cfg.out_dir);
  write_file(fs::path(cfg.out_dir) / "compare.csv", csv);
  out << "interval_estimate: " << format_real(a.report.failure_probability)
      << "\npoint_estimate: " << format_real(point.failure_probability) << '\n';
  return kOk;
}

int cmd_fit_op(const RunConfig& cfg, std::ostream& out) {
  const Partitioning part(cfg.partition_bounds, cfg.cells_per_dim);
  const OperationalProfile profile = fit_op(cfg.samples, part);
  std::string csv = "samples,cell,mass\n";
  for (std::size_t n : cfg.checkpoints) {
    const OperationalProfile prefix = fit_op(std::span(cfg.samples).first(n), part);
    for (std::size_t i = 0; i < part.size(); ++i) csv += fmt::format("{},{},{}\n", n, i, prefix.mass[i]);
  }
  fs::create_directories(cfg.out_dir);
  write_file(fs::path(cfg.out_dir) / "profile.json", profile_json(profile));
  write_file(fs::path(cfg.out_dir) / "op_convergence.csv", csv);
  out << "fitted " << part.size() << " cells from " << profile.sample_count << " samples ("
      << profile.out_of_bounds << " out of bounds)\n";
  return kOk;
}

}  // namespace

std::vector<std::size_t> default_checkpoints(std::size_t n, std::size_t count) {
  std::vector<std::size_t> cps;
  for (std::size_t k = 1; k <= count; ++k) {
    const std::size_t c = (n * k + count - 1) / count;
    if (c >= 1 && (cps.empty() || c > cps.back())) cps.push_back(c);
  }
  return cps;
}

std::vector<std::optional<Verdict>> verify_cells(const Network& net, const Scenario& scenario,
                                                 const OperationalProfile& profile, bool all_cells,
                                                 std::size_t jobs) {
  const Partitioning& part = profile.partitioning;
  std::vector<std::optional<Verdict>> verdicts(part.size());
  parallel_for(part.size(), jobs, [&](std::size_t i) {
    if (!all_cells && profile.mass[i] <= 0.0) return;
    const ReachTube tube = reach_trajectory(net, scenario.dynamics, part.cell(i).box, scenario.steps,
                                            scenario.options);
    verdicts[i] = check_safety(tube, scenario.safety);
  });
  return verdicts;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Taylor-model reachability and operational-profile reliability assessment"};
  app.require_subcommand(1);
  Flags flags;
  struct Command {
    const char* name;
    const char* help;
    bool needs_samples;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Command commands[] = {
      {"verify", "Compute the reach tube of the initial box and check it against the unsafe set", false,
       cmd_verify},
      {"assess", "Fit the operational profile, verify every cell and aggregate the failure probability", true,
       cmd_assess},
      {"compare", "Interval-based vs point-based failure estimates across sample checkpoints", true, cmd_compare},
      {"fit-op", "Fit the operational profile and emit per-checkpoint cell masses", true, cmd_fit_op},
  };
  std::map<std::string, CLI::App*> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_flags(sub, flags);
    subs[c.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  for (const Command& c : commands) {
    if (!subs[c.name]->parsed()) continue;
    if (subs[c.name]->get_subcommands().empty() && subs[c.name]->count("--help") > 0) {
      out << subs[c.name]->help();
      return kOk;
    }
    RunConfig cfg;
    try {
      cfg = resolve(c.name, flags, c.needs_samples);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kInputError;
    }
    try {
      return c.fn(cfg, out);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kInputError;
    }
  }
  return kInputError;
}

}  // namespace tmreach::cli
