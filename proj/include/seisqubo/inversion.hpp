#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seisqubo/solvers.hpp"

namespace seisqubo {

/// Inversion settings. Defaults: 5 spins per weight, scale 0.1 around the
/// background, one epoch.
struct InversionConfig {
  Mode mode = Mode::PreStack;
  double lambda = 0.05;
  std::size_t n_spins = 5;
  double initial_scale = 0.1;
  double shrink_factor = 0.5;
  std::size_t n_epochs = 1;
  SolverOptions solver;
  std::size_t smoothing_window = 11;  // used only when the background is derived from a model

  void validate() const {
    RegularizationConfig{lambda}.validate();
    detail::require(n_spins >= 1, "n_spins must be >= 1");
    detail::require(std::isfinite(initial_scale) && initial_scale > 0.0, "initial_scale must be > 0");
    detail::require(std::isfinite(shrink_factor) && shrink_factor > 0.0 && shrink_factor < 1.0,
                    "shrink_factor must lie in (0, 1)");
    detail::require(n_epochs >= 1, "n_epochs must be >= 1");
    detail::require(smoothing_window >= 1 && smoothing_window % 2 == 1, "smoothing_window must be odd and >= 1");
    solver.schedule.validate();
  }
};

struct InversionReport {
  explicit InversionReport(ElasticModel model) : predicted_model(std::move(model)) {}

  ElasticModel predicted_model;
  std::vector<double> predicted_ip;
  std::optional<std::vector<double>> predicted_is;
  std::optional<double> rms_ip;
  std::optional<double> rms_is;
  double data_misfit_initial = 0.0;
  double data_misfit_final = 0.0;
  std::vector<double> objective_per_epoch;
  std::vector<std::vector<double>> epoch_weights;
  std::vector<double> epoch_solver_energy;
  std::size_t best_epoch = 0;
  std::size_t n_spins_total = 0;
  double solver_time = 0.0;               // seconds summed over epochs
  std::map<std::string, double> timings;  // seconds per stage
  std::vector<std::vector<std::vector<double>>> energy_traces;  // [epoch][restart][sweep]
};

/// Root-mean-square difference, in the units of the inputs.
inline double rms_error(const std::vector<double>& predicted, const std::vector<double>& truth) {
  detail::require(predicted.size() == truth.size(), "rms_error: length mismatch");
  detail::require(!predicted.empty(), "rms_error: empty sequences");
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) acc += (predicted[i] - truth[i]) * (predicted[i] - truth[i]);
  return std::sqrt(acc / static_cast<double>(predicted.size()));
}

inline SpinEncoding initial_encoding(const ElasticModel& m_lf, const InversionConfig& config) {
  return SpinEncoding::uniform(m_lf.stacked(), config.initial_scale, config.n_spins, config.shrink_factor);
}

namespace detail {

inline void check_inputs(const SeismicGather& gather, const ElasticModel& m_lf, const AngleSet& wavelets,
                         const InversionConfig& config, const std::optional<ElasticModel>& truth) {
  config.validate();
  gather.validate();
  require(m_lf.mode() == config.mode, "invert: background model mode does not match configured mode");
  require(gather.axis == m_lf.axis(), "invert: gather and background time axes differ");
  require(gather.angles == wavelets.angles(), "invert: gather angles do not match wavelet angles");
  require(wavelets.valid_for(config.mode), "invert: PostStack requires a single 0-degree angle");
  if (truth) {
    require(truth->mode() == config.mode, "invert: truth model mode mismatch");
    require(truth->axis() == m_lf.axis(), "invert: truth model axis mismatch");
  }
}

}  // namespace detail

/// Single-step inversion: operator from the background, spin encoding centred
/// on the background, compile-solve-refine epochs, then impedances and metrics.
inline InversionReport invert(const SeismicGather& gather, const ElasticModel& m_lf, const AngleSet& wavelets,
                              const InversionConfig& config, const std::optional<ElasticModel>& truth = std::nullopt) {
  using clock = std::chrono::steady_clock;
  auto seconds_since = [](clock::time_point t) { return std::chrono::duration<double>(clock::now() - t).count(); };
  detail::check_inputs(gather, m_lf, wavelets, config, truth);

  InversionReport report(m_lf);
  auto t = clock::now();
  const ForwardOperator op = assemble_operator(config.mode, m_lf.axis(), wavelets, m_lf);
  const std::vector<double> lf = m_lf.stacked();
  report.timings["assemble_operator"] = seconds_since(t);

  t = clock::now();
  const QuadraticObjective quad = assemble_quadratic(gather, op, lf, config.lambda);
  report.timings["assemble_quadratic"] = seconds_since(t);

  const SpinEncoding enc0 = initial_encoding(m_lf, config);
  report.n_spins_total = enc0.total_spins();

  t = clock::now();
  const EpochRun run = run_epochs([&](const SpinEncoding& enc) { return compile_to_ising(quad, enc); },
                                  [&](const std::vector<double>& w) {
                                    return evaluate_objective(gather, op, w, lf, config.lambda);
                                  },
                                  enc0, config.n_epochs, config.solver);
  report.timings["epochs"] = seconds_since(t);

  for (const auto& e : run.epochs) {
    report.objective_per_epoch.push_back(e.objective);
    report.epoch_weights.push_back(e.weights);
    report.epoch_solver_energy.push_back(e.result.best_energy);
    report.energy_traces.push_back(e.result.energy_trace);
    report.solver_time += e.result.elapsed;
  }
  report.best_epoch = run.best_epoch;

  t = clock::now();
  report.predicted_model = ElasticModel::from_stacked(config.mode, m_lf.axis(), run.final_weights);
  Impedances imp = to_impedances(report.predicted_model);
  report.predicted_ip = std::move(imp.ip);
  report.predicted_is = std::move(imp.is);
  if (truth) {
    const Impedances ti = to_impedances(*truth);
    report.rms_ip = rms_error(report.predicted_ip, ti.ip);
    if (report.predicted_is) report.rms_is = rms_error(*report.predicted_is, *ti.is);
  }
  report.data_misfit_initial = data_misfit(gather, op, lf);
  report.data_misfit_final = data_misfit(gather, op, run.final_weights);
  report.timings["metrics"] = seconds_since(t);
  return report;
}

struct SweepRow {
  std::size_t n_spins = 0;
  double runtime_s = 0.0;
  double solver_time_s = 0.0;  // local solver time, not hardware time
  double objective = 0.0;
  std::optional<double> rms_ip;
  std::optional<double> rms_is;
};

/// One inversion per spin count with identical seeds.
inline std::vector<SweepRow> spin_sweep(const InversionConfig& base, const SeismicGather& gather,
                                        const ElasticModel& m_lf, const AngleSet& wavelets,
                                        const std::optional<ElasticModel>& truth,
                                        const std::vector<std::size_t>& spin_counts) {
  detail::require(!spin_counts.empty(), "spin_sweep: spin_counts must be non-empty");
  for (auto s : spin_counts) detail::require(s >= 1, "spin_sweep: spin counts must be >= 1");
  std::vector<SweepRow> rows;
  for (std::size_t ns : spin_counts) {
    InversionConfig cfg = base;
    cfg.n_spins = ns;
    const auto t0 = std::chrono::steady_clock::now();
    const InversionReport rep = invert(gather, m_lf, wavelets, cfg, truth);
    SweepRow row;
    row.n_spins = ns;
    row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.solver_time_s = rep.solver_time;
    row.objective = rep.objective_per_epoch[rep.best_epoch];
    row.rms_ip = rep.rms_ip;
    row.rms_is = rep.rms_is;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace seisqubo
