#include "proxphase/config.hpp"
#include "proxphase/core.hpp"
#include "proxphase/harness.hpp"
#include "proxphase/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace proxphase;

namespace {

struct ProblemFlags {
  long n = 0;
  long m = 0;
  double ratio = 0.0;
  std::string sensing = "gaussian";
  std::uint64_t seed = 0;
  double pfail = 0.0;
  std::string corruption = "zero";
  std::string signal = "rademacher";
};

void add_problem_flags(CLI::App *cmd, ProblemFlags &f) {
  cmd->add_option("--n", f.n, "Signal dimension");
  cmd->add_option("--m", f.m, "Number of measurements");
  cmd->add_option("--ratio", f.ratio, "Measurements per dimension (m / n)");
  cmd->add_option("--sensing", f.sensing, "gaussian | hadamard")
      ->check(CLI::IsMember({"gaussian", "hadamard"}));
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--pfail", f.pfail, "Fraction of corrupted measurements");
  cmd->add_option("--corruption", f.corruption, "zero | cauchy | constant");
  cmd->add_option("--signal", f.signal, "rademacher | gaussian");
}

TrialData generate(const ProblemFlags &f) {
  if (f.n < 1) {
    throw Error("--n must be positive");
  }
  BenchGrid grid;
  grid.sensing = f.sensing == "hadamard" ? SensingKind::Hadamard
                                         : SensingKind::Gaussian;
  if (grid.sensing == SensingKind::Hadamard && !is_power_of_two(f.n)) {
    throw Error("n must be a power of two");
  }
  double ratio = f.ratio;
  if (f.m > 0) {
    if (grid.sensing == SensingKind::Hadamard && f.m % f.n != 0) {
      throw Error("--m must be a multiple of n for hadamard sensing");
    }
    ratio = static_cast<double>(f.m) / static_cast<double>(f.n);
  }
  if (!(ratio > 0)) {
    throw Error("one of --m or --ratio is required");
  }
  grid.dims = {f.n};
  grid.ratios = {ratio};
  grid.p_fails = {f.pfail};
  grid.corruption = parse_corruption_kind(f.corruption);
  grid.signal = parse_signal_mode(f.signal);
  grid.base_seed = f.seed;
  grid.validate();
  return make_trial_data(grid, f.n, ratio, 0, 0);
}

void write_generated(const fs::path &dir, const TrialData &data) {
  io::write_bundle(dir, {data.ensemble, data.observations.b,
                         data.observations.outlier_mask,
                         data.observations.truth->x_star});
}

int cmd_gen(const ProblemFlags &f, const std::string &out) {
  const TrialData data = generate(f);
  write_generated(out, data);
  std::cout << "wrote " << out << " (m=" << data.ensemble.rows()
            << ", n=" << data.ensemble.cols() << ")\n";
  return 0;
}

struct SolveFlags {
  std::string bundle;
  std::string init = "big";
  std::string method = "proxlinear";
  std::string projector = "auto";
  std::string output;
  std::string report;
  int max_outer = 50;
};

int cmd_solve(const ProblemFlags &pf, const SolveFlags &sf) {
  TrialData data = [&] {
    if (sf.bundle.empty()) {
      return generate(pf);
    }
    io::ProblemBundle bundle = io::read_bundle(sf.bundle);
    Observations obs;
    obs.b = std::move(bundle.b);
    obs.outlier_mask = std::move(bundle.mask);
    obs.spec.p_fail = static_cast<double>(obs.outlier_mask.count()) /
                      static_cast<double>(obs.b.size());
    if (bundle.signal) {
      obs.truth = GroundTruth{std::move(*bundle.signal), SignalMode::FromFile};
    }
    return TrialData{pf.seed, std::move(bundle.ensemble), std::move(obs)};
  }();

  BenchGrid grid;
  grid.prox.projector = parse_projector_kind(sf.projector);
  grid.prox.max_outer = sf.max_outer;
  grid.record_timing = true;
  const SolveOutcome outcome = solve_instance(
      grid, data, parse_init_kind(sf.init), parse_method(sf.method));

  if (!sf.output.empty()) {
    io::write_vector_csv(sf.output, outcome.x_hat);
  }
  if (sf.report.empty()) {
    write_records_csv(std::cout, {outcome.record});
  } else {
    std::ofstream out(sf.report);
    if (!out) {
      throw Error("cannot write " + sf.report);
    }
    write_records_csv(out, {outcome.record});
  }
  if (data.observations.truth) {
    std::cout << "rel_error " << io::format_real(outcome.record.rel_error)
              << (outcome.record.success ? " (recovered)" : " (not recovered)")
              << '\n';
  }
  return 0;
}

struct BenchFlags {
  std::string dims;
  std::string ratios;
  std::string pfails = "0";
  int trials = 1;
  std::string methods = "proxlinear";
  std::string inits = "big";
  std::uint64_t seed = 0;
  int workers = 1;
  std::string corruption = "zero";
  std::string sensing = "gaussian";
  std::string signal = "rademacher";
  double eps_acc = 1e-5;
  bool timing = false;
  std::string records = "records.csv";
  std::string summary = "summary.csv";
  std::string heatmap;
};

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string &text, Parse parse) {
  std::vector<T> out;
  for (const std::string &item : split_list(text)) {
    out.push_back(parse(item));
  }
  return out;
}

int cmd_bench(const BenchFlags &f) {
  if (f.dims.empty() || f.ratios.empty()) {
    throw Error("--dims and --ratios are required");
  }
  BenchGrid grid;
  grid.dims = parse_list<Index>(f.dims, [](const std::string &s) {
    return static_cast<Index>(std::stol(s));
  });
  grid.ratios = parse_list<double>(f.ratios, [](const std::string &s) {
    return std::stod(s);
  });
  grid.p_fails = parse_list<double>(f.pfails, [](const std::string &s) {
    return std::stod(s);
  });
  grid.methods = parse_list<Method>(f.methods, [](const std::string &s) {
    return parse_method(s);
  });
  grid.inits = parse_list<InitKind>(f.inits, [](const std::string &s) {
    return parse_init_kind(s);
  });
  grid.trials = f.trials;
  grid.base_seed = f.seed;
  grid.corruption = parse_corruption_kind(f.corruption);
  grid.sensing =
      f.sensing == "hadamard" ? SensingKind::Hadamard : SensingKind::Gaussian;
  grid.signal = parse_signal_mode(f.signal);
  grid.eps_acc = f.eps_acc;
  grid.record_timing = f.timing;
  grid.validate();

  const std::vector<TrialRecord> records = run_grid(grid, f.workers);
  const std::vector<SummaryRow> rows = summarize(records);
  {
    std::ofstream out(f.records);
    if (!out) {
      throw Error("cannot write " + f.records);
    }
    write_records_csv(out, records);
  }
  {
    std::ofstream out(f.summary);
    if (!out) {
      throw Error("cannot write " + f.summary);
    }
    write_summary_csv(out, rows);
  }
  if (!f.heatmap.empty()) {
    fs::create_directories(f.heatmap);
    for (Index n : grid.dims) {
      for (Method method : grid.methods) {
        for (InitKind init : grid.inits) {
          const std::string name = "heatmap_n" + std::to_string(n) + "_" +
                                   std::string(to_string(method)) + "_" +
                                   std::string(to_string(init)) + ".svg";
          emit_heatmap(records, fs::path(f.heatmap) / name, {n, method, init});
        }
      }
    }
  }
  write_summary_csv(std::cout, rows);
  return 0;
}

int cmd_check(double samples, std::uint64_t seed) {
  if (!(samples >= 2)) {
    throw Error("--samples must be at least 2");
  }
  SeededRng rng(seed);
  const TheoryCheckReport report =
      theory_checks(static_cast<long>(std::llround(samples)), rng);
  print_theory_report(std::cout, report);
  return report.pass() ? 0 : 2;
}

/// Splices `--key=value` tokens from a --config file in front of the
/// subcommand's own arguments, so flags given on the command line win.
std::vector<std::string> expand_config(CLI::App &app,
                                       const std::vector<std::string> &args) {
  if (args.empty()) {
    return args;
  }
  CLI::App *sub = nullptr;
  for (CLI::App *candidate : app.get_subcommands({})) {
    if (candidate->check_name(args.front())) {
      sub = candidate;
    }
  }
  if (sub == nullptr) {
    return args;
  }
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) {
    return args;
  }
  std::vector<std::string> known;
  for (const CLI::Option *opt : sub->get_options()) {
    for (const std::string &name : opt->get_lnames()) {
      if (name != "config" && name != "help") {
        known.push_back(name);
      }
    }
  }
  const std::vector<ConfigEntry> entries = read_config_file(path);
  check_config_keys(entries, known, path);
  std::vector<std::string> out{args.front()};
  for (std::string &token : config_arguments(entries)) {
    out.push_back(std::move(token));
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Robust phase retrieval by the prox-linear method"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  ProblemFlags gen_flags;
  std::string gen_out;
  CLI::App *gen = app.add_subcommand("gen", "Generate a problem bundle");
  add_problem_flags(gen, gen_flags);
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--config", config_path, "key=value configuration file");

  ProblemFlags solve_problem;
  SolveFlags solve_flags;
  CLI::App *solve = app.add_subcommand("solve", "Solve one instance");
  add_problem_flags(solve, solve_problem);
  solve->add_option("--bundle", solve_flags.bundle, "Problem bundle directory");
  solve->add_option("--init", solve_flags.init, "noiseless | outlier | big | median");
  solve->add_option("--method", solve_flags.method, "proxlinear | taf");
  solve->add_option("--projector", solve_flags.projector, "auto | dense | cg");
  solve->add_option("--max-outer", solve_flags.max_outer, "Outer iteration limit");
  solve->add_option("--output", solve_flags.output, "Recovered signal CSV");
  solve->add_option("--report", solve_flags.report, "Report CSV (default stdout)");
  solve->add_option("--config", config_path, "key=value configuration file");

  BenchFlags bench_flags;
  CLI::App *bench = app.add_subcommand("bench", "Run a benchmark grid");
  bench->add_option("--dims", bench_flags.dims, "Comma-separated dimensions");
  bench->add_option("--ratios", bench_flags.ratios, "Comma-separated m/n values");
  bench->add_option("--pfails", bench_flags.pfails, "Comma-separated corruption fractions");
  bench->add_option("--trials", bench_flags.trials, "Trials per cell");
  bench->add_option("--methods", bench_flags.methods, "proxlinear,taf");
  bench->add_option("--inits", bench_flags.inits, "noiseless,outlier,big,median");
  bench->add_option("--seed", bench_flags.seed, "Base seed");
  bench->add_option("--workers", bench_flags.workers, "Worker threads");
  bench->add_option("--corruption", bench_flags.corruption, "zero | cauchy | constant");
  bench->add_option("--sensing", bench_flags.sensing, "gaussian | hadamard")
      ->check(CLI::IsMember({"gaussian", "hadamard"}));
  bench->add_option("--signal", bench_flags.signal, "rademacher | gaussian");
  bench->add_option("--eps-acc", bench_flags.eps_acc, "Relative success threshold");
  bench->add_flag("--timing", bench_flags.timing, "Record wall-clock time");
  bench->add_option("--records", bench_flags.records, "Per-trial CSV");
  bench->add_option("--summary", bench_flags.summary, "Per-cell CSV");
  bench->add_option("--heatmap", bench_flags.heatmap, "Directory for SVG heatmaps");
  bench->add_option("--config", config_path, "key=value configuration file");

  double samples = 1e6;
  std::uint64_t check_seed = 0;
  CLI::App *check = app.add_subcommand("check", "Monte-Carlo checks of constants");
  check->add_option("--samples", samples, "Samples per estimate");
  check->add_option("--seed", check_seed, "Random seed");
  check->add_option("--config", config_path, "key=value configuration file");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen(gen_flags, gen_out);
    }
    if (solve->parsed()) {
      return cmd_solve(solve_problem, solve_flags);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_flags);
    }
    return cmd_check(samples, check_seed);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
