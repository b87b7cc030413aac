#ifndef PROXPHASE_HARNESS_HPP
#define PROXPHASE_HARNESS_HPP

// Seeded Monte-Carlo recovery experiments and their reports.

#include "proxphase/init.hpp"
#include "proxphase/proxlin.hpp"
#include "proxphase/sensing.hpp"
#include "proxphase/taf.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace proxphase {

enum class Method { ProxLinear, Taf };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

enum class SensingKind { Gaussian, Hadamard };

std::string_view to_string(SensingKind kind);
std::string_view to_string(CorruptionKind kind);
std::string_view to_string(SignalMode mode);
CorruptionKind parse_corruption_kind(std::string_view name);
SignalMode parse_signal_mode(std::string_view name);

struct BenchGrid {
  std::vector<Index> dims;
  std::vector<double> ratios; // m / n; for Hadamard sensing the block count
  std::vector<double> p_fails;
  int trials = 1;
  std::vector<Method> methods;
  std::vector<InitKind> inits;
  CorruptionKind corruption = CorruptionKind::Zero;
  std::uint64_t base_seed = 0;
  double eps_acc = 1e-5;
  SensingKind sensing = SensingKind::Gaussian;
  SignalMode signal = SignalMode::Rademacher;
  /// Wall time is the only non-deterministic record field; it is written as
  /// 0 unless enabled.
  bool record_timing = false;
  /// Keep the relative distance of every prox-linear iterate.
  bool record_traces = false;
  ProxLinearConfig prox;
  TafConfig taf;

  void validate() const;
  /// Number of measurements for a (dimension, ratio) pair.
  Index measurements(Index n, double ratio) const;
};

/// One grid cell; trials are indexed separately.
struct TrialCell {
  Index n = 0;
  double ratio = 0.0;
  std::size_t p_index = 0;
  Method method = Method::ProxLinear;
  InitKind init = InitKind::Big;
};

struct TrialRecord {
  Index n = 0;
  Index m = 0;
  double ratio = 0.0;
  double p_fail = 0.0;
  Method method = Method::ProxLinear;
  InitKind init = InitKind::Big;
  std::uint64_t seed = 0;
  bool success = false;
  double rel_error = 0.0; // dist(x_hat, {+-x_star}) / ||x_star||
  int outer_iters = 0;
  long inner_iters = 0;
  long matvecs = 0;
  double wall_ms = 0.0;
  std::string reason;
  /// Relative distances of x_0, x_1, ... (prox-linear, when traced).
  std::vector<double> dist_trace;
};

/// The data every method of a cell-seed shares.
struct TrialData {
  std::uint64_t seed = 0;
  MeasurementEnsemble ensemble;
  Observations observations;
};

/// Sub-seed of a trial. The method and init are deliberately not mixed in,
/// so all of them see the same ensemble, signal and observations.
std::uint64_t trial_seed(std::uint64_t base_seed, Index n, Index m,
                         std::size_t p_index, int trial);

TrialData make_trial_data(const BenchGrid &grid, Index n, double ratio,
                          std::size_t p_index, int trial);

struct SolveOutcome {
  TrialRecord record;
  Vector x_hat;
};

/// Initializes and solves one instance. Without a ground truth the record
/// carries rel_error = NaN and success = false. Errors become failed records.
SolveOutcome solve_instance(const BenchGrid &grid, const TrialData &data,
                            InitKind init, Method method);

/// Runs one cell for one trial. Solver errors become failed records.
TrialRecord run_trial(const BenchGrid &grid, const TrialCell &cell, int trial);

/// Every cell and trial, ordered by (dims, ratios, p_fails, inits, methods,
/// trial) whatever the worker count.
std::vector<TrialRecord> run_grid(const BenchGrid &grid, int workers = 1);

struct SummaryRow {
  Index n = 0;
  double ratio = 0.0;
  double p_fail = 0.0;
  Method method = Method::ProxLinear;
  InitKind init = InitKind::Big;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_outer_iters_success = 0.0; // NaN without successes
  int max_outer_iters_success = 0;
  double mean_matvecs = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<TrialRecord> &records);

void write_records_csv(std::ostream &out, const std::vector<TrialRecord> &records);
void write_summary_csv(std::ostream &out, const std::vector<SummaryRow> &rows);

struct HeatmapSelector {
  Index n = 0;
  Method method = Method::ProxLinear;
  InitKind init = InitKind::Big;
};

/// Grayscale success-rate map: p_fail across, m/n up, white = 1, black = 0.
std::string render_heatmap_svg(const std::vector<SummaryRow> &rows,
                               const HeatmapSelector &selector);
void emit_heatmap(const std::vector<TrialRecord> &records,
                  const std::filesystem::path &path,
                  const HeatmapSelector &selector);

/// Monte-Carlo estimate with its standard error and sample count.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

struct ConditionalMomentCheck {
  double c = 0.0;
  Estimate estimate; // E[Z^2 | Z^2 <= c^2], Z ~ N(0, 1)
  double bound = 0.0; // c^2 / 3
  bool pass() const { return estimate.value <= bound + 3.0 * estimate.std_error; }
};

struct TheoryCheckReport {
  /// E|<a, u><a, v>| for orthonormal u, v and a ~ N(0, I).
  Estimate kappa_st;
  static constexpr double kappa_st_exact = 0.63661977236758134; // 2 / pi
  std::vector<ConditionalMomentCheck> conditional_moments;
  int sandwich_pairs = 0;
  int sandwich_violations = 0;
  int stability_pairs = 0;
  Index stability_m = 0;
  Index stability_n = 0;
  /// min over sampled unit pairs of (1/m) sum_i |<a_i, u><a_i, v>|
  double stability_inf = 0.0;

  bool kappa_pass() const;
  bool conditional_pass() const;
  bool sandwich_pass() const { return sandwich_violations == 0; }
  bool stability_pass() const { return stability_inf > 0.0; }
  bool pass() const {
    return kappa_pass() && conditional_pass() && sandwich_pass() &&
           stability_pass();
  }
};

TheoryCheckReport theory_checks(long samples, SeededRng &rng);
void print_theory_report(std::ostream &out, const TheoryCheckReport &report);

} // namespace proxphase

#endif // PROXPHASE_HARNESS_HPP
