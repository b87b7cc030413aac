#include "proxphase/harness.hpp"

#include "proxphase/core.hpp"
#include "proxphase/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <thread>

namespace proxphase {

namespace {

// Stream tags for SeededRng::split.
constexpr std::uint64_t kEnsembleStream = 1;
constexpr std::uint64_t kSignalStream = 2;
constexpr std::uint64_t kCorruptionStream = 3;
constexpr std::uint64_t kInitStream = 10;
constexpr std::uint64_t kSolverStream = 20;

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view name, const Enum (&values)[N],
                const char *what) {
  for (Enum v : values) {
    if (to_string(v) == name) {
      return v;
    }
  }
  throw Error(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

} // namespace

std::string_view to_string(Method method) {
  return method == Method::ProxLinear ? "proxlinear" : "taf";
}

Method parse_method(std::string_view name) {
  static constexpr Method all[] = {Method::ProxLinear, Method::Taf};
  return parse_enum(name, all, "method");
}

std::string_view to_string(SensingKind kind) {
  return kind == SensingKind::Gaussian ? "gaussian" : "hadamard";
}

std::string_view to_string(CorruptionKind kind) {
  switch (kind) {
  case CorruptionKind::Zero:
    return "zero";
  case CorruptionKind::Cauchy:
    return "cauchy";
  case CorruptionKind::Constant:
    return "constant";
  }
  return "unknown";
}

std::string_view to_string(SignalMode mode) {
  switch (mode) {
  case SignalMode::Rademacher:
    return "rademacher";
  case SignalMode::Gaussian:
    return "gaussian";
  case SignalMode::FromFile:
    return "file";
  }
  return "unknown";
}

CorruptionKind parse_corruption_kind(std::string_view name) {
  static constexpr CorruptionKind all[] = {
      CorruptionKind::Zero, CorruptionKind::Cauchy, CorruptionKind::Constant};
  return parse_enum(name, all, "corruption");
}

SignalMode parse_signal_mode(std::string_view name) {
  static constexpr SignalMode all[] = {SignalMode::Rademacher,
                                       SignalMode::Gaussian};
  return parse_enum(name, all, "signal");
}

void BenchGrid::validate() const {
  if (trials < 1) {
    throw Error("grid: trials must be at least 1");
  }
  if (!(eps_acc > 0)) {
    throw Error("grid: eps_acc must be positive");
  }
  for (Index n : dims) {
    if (n < 1) {
      throw Error("grid: dimensions must be positive");
    }
    if (sensing == SensingKind::Hadamard && !is_power_of_two(n)) {
      throw Error("n must be a power of two");
    }
    for (double r : ratios) {
      if (measurements(n, r) < 1) {
        throw Error("grid: ratio yields no measurements");
      }
    }
  }
  for (double r : ratios) {
    if (!(r > 0)) {
      throw Error("grid: ratios must be positive");
    }
    if (sensing == SensingKind::Hadamard &&
        std::abs(r - std::round(r)) > 1e-9) {
      throw Error("grid: Hadamard sensing needs integer ratios (block counts)");
    }
  }
  for (double p : p_fails) {
    CorruptionSpec{p, corruption}.validate();
  }
  prox.validate();
  taf.validate();
}

Index BenchGrid::measurements(Index n, double ratio) const {
  if (sensing == SensingKind::Hadamard) {
    return n * static_cast<Index>(std::llround(ratio));
  }
  return static_cast<Index>(std::llround(ratio * static_cast<double>(n)));
}

std::uint64_t trial_seed(std::uint64_t base_seed, Index n, Index m,
                         std::size_t p_index, int trial) {
  return mix_seed({base_seed, static_cast<std::uint64_t>(n),
                   static_cast<std::uint64_t>(m),
                   static_cast<std::uint64_t>(p_index),
                   static_cast<std::uint64_t>(trial)});
}

TrialData make_trial_data(const BenchGrid &grid, Index n, double ratio,
                          std::size_t p_index, int trial) {
  const Index m = grid.measurements(n, ratio);
  const std::uint64_t seed = trial_seed(grid.base_seed, n, m, p_index, trial);
  const SeededRng root(seed);

  SeededRng ensemble_rng = root.split(kEnsembleStream);
  MeasurementEnsemble ensemble =
      grid.sensing == SensingKind::Gaussian
          ? gen_gaussian_ensemble(m, n, ensemble_rng)
          : gen_hadamard_ensemble(m / n, n, ensemble_rng);

  SeededRng signal_rng = root.split(kSignalStream);
  GroundTruth truth = gen_signal(n, grid.signal, signal_rng);

  SeededRng corruption_rng = root.split(kCorruptionStream);
  const CorruptionSpec spec{grid.p_fails.at(p_index), grid.corruption};
  Observations obs =
      corrupt(measure(ensemble, truth.x_star), spec, corruption_rng);
  obs.truth = std::move(truth);
  return {seed, std::move(ensemble), std::move(obs)};
}

namespace {

TrialRecord blank_record(const TrialData &data, InitKind init, Method method) {
  TrialRecord r;
  r.n = data.ensemble.cols();
  r.m = data.ensemble.rows();
  r.ratio = static_cast<double>(r.m) / static_cast<double>(r.n);
  r.p_fail = data.observations.spec.p_fail;
  r.method = method;
  r.init = init;
  r.seed = data.seed;
  r.rel_error = std::numeric_limits<double>::quiet_NaN();
  return r;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

SolveOutcome run_method(const BenchGrid &grid, const TrialData &data,
                        const Vector &x0, TrialRecord record) {
  const auto start = std::chrono::steady_clock::now();
  const Vector &b = data.observations.b;
  const auto &truth = data.observations.truth;
  Vector x_hat;
  try {
    if (record.method == Method::ProxLinear) {
      ProxLinearConfig config = grid.prox;
      config.record_iterates =
          config.record_iterates || (grid.record_traces && truth);
      SeededRng solver_rng = SeededRng(data.seed).split(kSolverStream);
      SolveReport report =
          prox_linear_solve(data.ensemble, b, x0, config, solver_rng);
      record.outer_iters = report.outer_iters;
      record.inner_iters = report.total_inner_iterations();
      record.matvecs = report.total_matvecs();
      record.reason = std::string(to_string(report.reason));
      if (grid.record_traces && truth) {
        const double norm = truth->x_star.norm();
        for (const Vector &xk : report.iterates) {
          record.dist_trace.push_back(dist_to_signal(xk, truth->x_star) / norm);
        }
      }
      x_hat = std::move(report.final_x);
    } else {
      // Amplitude flow needs nonnegative data; negative outliers are clamped.
      const bool clamped = (b.array() < 0.0).any();
      x_hat = taf_solve(data.ensemble, b.cwiseMax(0.0), x0, grid.taf);
      record.outer_iters = grid.taf.iterations;
      record.matvecs = 2L * grid.taf.iterations;
      record.reason = clamped ? "completed_clamped" : "completed";
    }
    if (truth) {
      record.rel_error =
          dist_to_signal(x_hat, truth->x_star) / truth->x_star.norm();
      record.success = record.rel_error <= grid.eps_acc;
    }
  } catch (const std::exception &e) {
    record.success = false;
    record.reason = csv_safe(std::string("error: ") + e.what());
    x_hat = x0;
  }
  if (grid.record_timing) {
    record.wall_ms = elapsed_ms(start);
  }
  return {std::move(record), std::move(x_hat)};
}

struct InitOutcome {
  std::optional<Vector> x0;
  std::string error;
  double ms = 0.0;
};

InitOutcome initialize(const TrialData &data, InitKind init) {
  InitOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    SeededRng rng = SeededRng(data.seed).split(
        kInitStream + static_cast<std::uint64_t>(init));
    out.x0 = run_init(init, data.ensemble, data.observations.b, rng).x0;
  } catch (const std::exception &e) {
    out.error = csv_safe(std::string("init_error: ") + e.what());
  }
  out.ms = elapsed_ms(start);
  return out;
}

SolveOutcome solve_from(const BenchGrid &grid, const TrialData &data,
                        const InitOutcome &init, InitKind kind, Method method) {
  TrialRecord rec = blank_record(data, kind, method);
  if (!init.x0) {
    rec.reason = init.error;
    return {std::move(rec), Vector::Zero(data.ensemble.cols())};
  }
  SolveOutcome out = run_method(grid, data, *init.x0, std::move(rec));
  if (grid.record_timing) {
    out.record.wall_ms += init.ms;
  }
  return out;
}

/// Runs every (init, method) pair on one cell-seed. Output is indexed
/// [init][method].
std::vector<std::vector<TrialRecord>>
run_unit(const BenchGrid &grid, Index n, double ratio, std::size_t p_index,
         int trial) {
  const TrialData data = make_trial_data(grid, n, ratio, p_index, trial);
  std::vector<std::vector<TrialRecord>> out;
  for (InitKind kind : grid.inits) {
    const InitOutcome init = initialize(data, kind);
    std::vector<TrialRecord> row;
    for (Method method : grid.methods) {
      TrialRecord rec = solve_from(grid, data, init, kind, method).record;
      rec.ratio = ratio;
      row.push_back(std::move(rec));
    }
    out.push_back(std::move(row));
  }
  return out;
}

} // namespace

SolveOutcome solve_instance(const BenchGrid &grid, const TrialData &data,
                            InitKind init, Method method) {
  return solve_from(grid, data, initialize(data, init), init, method);
}

TrialRecord run_trial(const BenchGrid &grid, const TrialCell &cell, int trial) {
  BenchGrid single = grid;
  single.inits = {cell.init};
  single.methods = {cell.method};
  return run_unit(single, cell.n, cell.ratio, cell.p_index, trial)
      .front()
      .front();
}

std::vector<TrialRecord> run_grid(const BenchGrid &grid, int workers) {
  grid.validate();
  if (grid.methods.empty() || grid.inits.empty()) {
    return {};
  }
  struct Unit {
    std::size_t d, r, p;
    int trial;
  };
  std::vector<Unit> units;
  for (std::size_t d = 0; d < grid.dims.size(); ++d) {
    for (std::size_t r = 0; r < grid.ratios.size(); ++r) {
      for (std::size_t p = 0; p < grid.p_fails.size(); ++p) {
        for (int t = 0; t < grid.trials; ++t) {
          units.push_back({d, r, p, t});
        }
      }
    }
  }

  std::vector<std::vector<std::vector<TrialRecord>>> results(units.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < units.size(); i = next++) {
      const Unit &u = units[i];
      results[i] = run_unit(grid, grid.dims[u.d], grid.ratios[u.r], u.p,
                            u.trial);
    }
  };
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(units.size())));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(count));
    for (int w = 0; w < count; ++w) {
      pool.emplace_back(worker);
    }
    for (auto &t : pool) {
      t.join();
    }
  }

  // Units are laid out (d, r, p, trial); records go out grouped by cell.
  std::vector<TrialRecord> records;
  records.reserve(units.size() * grid.inits.size() * grid.methods.size());
  const auto trials = static_cast<std::size_t>(grid.trials);
  for (std::size_t block = 0; block < units.size(); block += trials) {
    for (std::size_t ii = 0; ii < grid.inits.size(); ++ii) {
      for (std::size_t mi = 0; mi < grid.methods.size(); ++mi) {
        for (std::size_t t = 0; t < trials; ++t) {
          records.push_back(std::move(results[block + t][ii][mi]));
        }
      }
    }
  }
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord> &records) {
  if (records.empty()) {
    throw Error("summarize: no records");
  }
  std::vector<SummaryRow> rows;
  std::vector<double> outer_sum;
  std::vector<double> matvec_sum;
  for (const TrialRecord &r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow &s) {
      return s.n == r.n && s.ratio == r.ratio && s.p_fail == r.p_fail &&
             s.method == r.method && s.init == r.init;
    });
    if (it == rows.end()) {
      SummaryRow s;
      s.n = r.n;
      s.ratio = r.ratio;
      s.p_fail = r.p_fail;
      s.method = r.method;
      s.init = r.init;
      rows.push_back(s);
      outer_sum.push_back(0.0);
      matvec_sum.push_back(0.0);
      it = rows.end() - 1;
    }
    const auto k = static_cast<std::size_t>(it - rows.begin());
    ++it->trials;
    matvec_sum[k] += static_cast<double>(r.matvecs);
    if (r.success) {
      ++it->successes;
      outer_sum[k] += r.outer_iters;
      it->max_outer_iters_success =
          std::max(it->max_outer_iters_success, r.outer_iters);
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    SummaryRow &s = rows[k];
    s.success_rate = static_cast<double>(s.successes) / s.trials;
    s.mean_outer_iters_success =
        s.successes > 0 ? outer_sum[k] / s.successes
                        : std::numeric_limits<double>::quiet_NaN();
    s.mean_matvecs = matvec_sum[k] / s.trials;
  }
  return rows;
}

void write_records_csv(std::ostream &out,
                       const std::vector<TrialRecord> &records) {
  out << "n,m,p_fail,method,init,seed,success,rel_error,outer_iters,"
         "inner_iters,matvecs,wall_ms,reason\n";
  for (const TrialRecord &r : records) {
    out << r.n << ',' << r.m << ',' << io::format_real(r.p_fail) << ','
        << to_string(r.method) << ',' << to_string(r.init) << ',' << r.seed
        << ',' << (r.success ? 1 : 0) << ',' << io::format_real(r.rel_error)
        << ',' << r.outer_iters << ',' << r.inner_iters << ',' << r.matvecs
        << ',' << io::format_real(r.wall_ms) << ',' << csv_safe(r.reason)
        << '\n';
  }
}

void write_summary_csv(std::ostream &out, const std::vector<SummaryRow> &rows) {
  out << "n,ratio,p_fail,method,init,trials,success_rate,"
         "mean_outer_iters_success,mean_matvecs\n";
  for (const SummaryRow &s : rows) {
    out << s.n << ',' << io::format_real(s.ratio) << ','
        << io::format_real(s.p_fail) << ',' << to_string(s.method) << ','
        << to_string(s.init) << ',' << s.trials << ','
        << io::format_real(s.success_rate) << ','
        << io::format_real(s.mean_outer_iters_success) << ','
        << io::format_real(s.mean_matvecs) << '\n';
  }
}

std::string render_heatmap_svg(const std::vector<SummaryRow> &rows,
                               const HeatmapSelector &selector) {
  std::vector<const SummaryRow *> cells;
  std::vector<double> p_values;
  std::vector<double> ratio_values;
  for (const SummaryRow &s : rows) {
    if (s.n == selector.n && s.method == selector.method &&
        s.init == selector.init) {
      cells.push_back(&s);
      p_values.push_back(s.p_fail);
      ratio_values.push_back(s.ratio);
    }
  }
  if (cells.empty()) {
    throw Error("heatmap: no cells match the selector");
  }
  const auto unique_sorted = [](std::vector<double> &v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  unique_sorted(p_values);
  unique_sorted(ratio_values);
  if (cells.size() != p_values.size() * ratio_values.size()) {
    throw Error("heatmap: records do not form a rectangular p_fail x m/n grid");
  }

  constexpr int cell = 24;
  constexpr int left = 64;
  constexpr int top = 16;
  constexpr int bottom = 48;
  const int cols = static_cast<int>(p_values.size());
  const int rows_count = static_cast<int>(ratio_values.size());
  const int width = left + cols * cell + 16;
  const int height = top + rows_count * cell + bottom;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\">\n";
  for (const SummaryRow *s : cells) {
    const auto col = std::lower_bound(p_values.begin(), p_values.end(), s->p_fail) -
                     p_values.begin();
    const auto row =
        std::lower_bound(ratio_values.begin(), ratio_values.end(), s->ratio) -
        ratio_values.begin();
    const int gray = static_cast<int>(std::floor(255.0 * s->success_rate));
    const int x = left + static_cast<int>(col) * cell;
    // Larger ratios at the top.
    const int y = top + (rows_count - 1 - static_cast<int>(row)) * cell;
    svg += "  <rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
           "\" width=\"" + std::to_string(cell) + "\" height=\"" +
           std::to_string(cell) + "\" fill=\"rgb(" + std::to_string(gray) +
           "," + std::to_string(gray) + "," + std::to_string(gray) + ")\"/>\n";
  }
  for (int c = 0; c < cols; ++c) {
    svg += "  <text x=\"" + std::to_string(left + c * cell + cell / 2) +
           "\" y=\"" + std::to_string(top + rows_count * cell + 14) +
           "\" font-size=\"9\" text-anchor=\"middle\">" +
           io::format_real(p_values[static_cast<std::size_t>(c)]) + "</text>\n";
  }
  for (int r = 0; r < rows_count; ++r) {
    svg += "  <text x=\"" + std::to_string(left - 4) + "\" y=\"" +
           std::to_string(top + (rows_count - 1 - r) * cell + cell / 2 + 3) +
           "\" font-size=\"9\" text-anchor=\"end\">" +
           io::format_real(ratio_values[static_cast<std::size_t>(r)]) +
           "</text>\n";
  }
  svg += "  <text x=\"" + std::to_string(left + cols * cell / 2) + "\" y=\"" +
         std::to_string(height - 8) +
         "\" font-size=\"11\" text-anchor=\"middle\">p_fail</text>\n";
  svg += "  <text x=\"12\" y=\"" + std::to_string(top + rows_count * cell / 2) +
         "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 12 " +
         std::to_string(top + rows_count * cell / 2) + ")\">m/n</text>\n";
  svg += "</svg>\n";
  return svg;
}

void emit_heatmap(const std::vector<TrialRecord> &records,
                  const std::filesystem::path &path,
                  const HeatmapSelector &selector) {
  const std::string svg = render_heatmap_svg(summarize(records), selector);
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << svg;
}

bool TheoryCheckReport::kappa_pass() const {
  return std::abs(kappa_st.value - kappa_st_exact) <= 3.0 * kappa_st.std_error;
}

bool TheoryCheckReport::conditional_pass() const {
  return !conditional_moments.empty() &&
         std::all_of(conditional_moments.begin(), conditional_moments.end(),
                     [](const ConditionalMomentCheck &c) { return c.pass(); });
}

namespace {

struct RunningMoments {
  long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  Estimate estimate() const {
    const double var = count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(count)), count};
  }
};

Vector random_unit(Index n, SeededRng &rng) {
  Vector v = rng.normal_vector<double>(n);
  return v / v.norm();
}

} // namespace

TheoryCheckReport theory_checks(long samples, SeededRng &rng) {
  if (samples < 2) {
    throw Error("theory_checks: need at least 2 samples");
  }
  TheoryCheckReport report;

  {
    constexpr Index n = 8;
    SeededRng local = rng.split(1);
    // Orthonormal pair from Gram-Schmidt on two Gaussian draws.
    const Vector u = random_unit(n, local);
    Vector v = local.normal_vector<double>(n);
    v -= u.dot(v) * u;
    v.normalize();
    RunningMoments acc;
    for (long s = 0; s < samples; ++s) {
      const Vector a = local.normal_vector<double>(n);
      acc.add(std::abs(a.dot(u) * a.dot(v)));
    }
    report.kappa_st = acc.estimate();
  }

  {
    SeededRng local = rng.split(2);
    for (double c : {0.5, 1.0, 2.0}) {
      RunningMoments acc;
      while (acc.count < samples) {
        const double z = local.normal();
        if (z * z <= c * c) {
          acc.add(z * z);
        }
      }
      report.conditional_moments.push_back({c, acc.estimate(), c * c / 3.0});
    }
  }

  {
    constexpr Index m = 200;
    constexpr Index n = 50;
    SeededRng local = rng.split(3);
    const MeasurementEnsemble ens = gen_gaussian_ensemble(m, n, local);
    const Vector b = measure(ens, local.normal_vector<double>(n));
    const Matrix &a = ens.matrix();
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a,
                                                    Eigen::EigenvaluesOnly);
    const double opnorm_over_m = eig.eigenvalues().maxCoeff() / m;
    report.sandwich_pairs = 1000;
    for (int k = 0; k < report.sandwich_pairs; ++k) {
      const Vector x = local.normal_vector<double>(n);
      const Vector y = local.normal_vector<double>(n);
      const double gap = std::abs(objective(ens, b, y) - model_value(ens, b, x, y));
      if (gap > opnorm_over_m * (x - y).squaredNorm() + 1e-9) {
        ++report.sandwich_violations;
      }
    }
  }

  {
    report.stability_n = 10;
    report.stability_m = 80;
    report.stability_pairs = 1000;
    SeededRng local = rng.split(4);
    const MeasurementEnsemble ens =
        gen_gaussian_ensemble(report.stability_m, report.stability_n, local);
    double inf = std::numeric_limits<double>::infinity();
    for (int k = 0; k < report.stability_pairs; ++k) {
      const Vector u = random_unit(report.stability_n, local);
      const Vector v = random_unit(report.stability_n, local);
      const double value =
          (ens.apply(u).array() * ens.apply(v).array()).abs().mean();
      inf = std::min(inf, value);
    }
    report.stability_inf = inf;
  }
  return report;
}

void print_theory_report(std::ostream &out, const TheoryCheckReport &r) {
  const auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };
  out << "kappa_st " << io::format_real(r.kappa_st.value) << " +- "
      << io::format_real(r.kappa_st.std_error) << " (2/pi = "
      << io::format_real(TheoryCheckReport::kappa_st_exact) << ", "
      << r.kappa_st.samples << " samples) " << verdict(r.kappa_pass()) << '\n';
  for (const auto &c : r.conditional_moments) {
    out << "ez_square c=" << io::format_real(c.c) << ' '
        << io::format_real(c.estimate.value) << " +- "
        << io::format_real(c.estimate.std_error) << " bound "
        << io::format_real(c.bound) << ' ' << verdict(c.pass()) << '\n';
  }
  out << "sandwich violations " << r.sandwich_violations << '/'
      << r.sandwich_pairs << ' ' << verdict(r.sandwich_pass()) << '\n';
  out << "stability inf (m=" << r.stability_m << ", n=" << r.stability_n
      << ", " << r.stability_pairs << " pairs) "
      << io::format_real(r.stability_inf) << ' ' << verdict(r.stability_pass())
      << '\n';
  out << "overall " << verdict(r.pass()) << '\n';
}

} // namespace proxphase
