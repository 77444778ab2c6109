#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "seisqubo/qubo.hpp"

namespace seisqubo {

enum class SolverId { Exact, SimulatedAnnealing, Imported };
enum class SolverKind { Exact, SimulatedAnnealing };

inline const char* to_string(SolverId s) {
  switch (s) {
    case SolverId::Exact: return "exact";
    case SolverId::SimulatedAnnealing: return "sa";
    case SolverId::Imported: return "imported";
  }
  return "?";
}

struct SolveResult {
  SpinAssignment best_assignment;
  double best_energy = 0.0;                       // H + constant
  std::vector<std::vector<double>> energy_trace;  // [restart][sweep] best-so-far
  double elapsed = 0.0;                           // seconds
  SolverId solver_id = SolverId::Exact;
};

/// Geometric temperature ladder. Unset temperatures are resolved per problem:
/// t_initial from the spread of random-assignment energies, t_final = 1e-3 t_initial.
struct AnnealSchedule {
  std::optional<double> t_initial;
  std::optional<double> t_final;
  std::size_t n_sweeps = 200;
  std::optional<std::size_t> moves_per_sweep;  // defaults to n_spins_total
  std::size_t restarts = 8;
  std::uint64_t seed = 20250101;

  void validate() const {
    detail::require(n_sweeps >= 1, "AnnealSchedule: n_sweeps must be >= 1");
    detail::require(restarts >= 1, "AnnealSchedule: restarts must be >= 1");
    if (moves_per_sweep) detail::require(*moves_per_sweep >= 1, "AnnealSchedule: moves_per_sweep must be >= 1");
    if (t_initial) detail::require(std::isfinite(*t_initial) && *t_initial > 0.0, "AnnealSchedule: t_initial must be > 0");
    if (t_final) detail::require(std::isfinite(*t_final) && *t_final > 0.0, "AnnealSchedule: t_final must be > 0");
    if (t_initial && t_final)
      detail::require(*t_final < *t_initial, "AnnealSchedule: t_final must be below t_initial");
  }
};

struct ResolvedSchedule {
  double t_initial = 1.0;
  double t_final = 1e-3;
  std::size_t n_sweeps = 1;
  std::size_t moves_per_sweep = 1;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;

  double temperature(std::size_t sweep) const {
    if (n_sweeps == 1) return t_initial;
    const double frac = static_cast<double>(sweep) / static_cast<double>(n_sweeps - 1);
    return t_initial * std::pow(t_final / t_initial, frac);
  }
};

namespace detail {

inline SpinAssignment random_assignment(std::size_t n, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  SpinAssignment s(n);
  for (auto& v : s) v = coin(rng) ? 1 : -1;
  return s;
}

/// f_k = h_k + sum_j J_kj s_j; flipping spin k changes H by -2 s_k f_k.
inline Eigen::VectorXd local_fields(const IsingProblem& p, const SpinAssignment& s) {
  Eigen::VectorXd sv(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) sv(static_cast<Eigen::Index>(i)) = s[i];
  return p.h + p.couplings * sv;
}

inline double energy_from_fields(const IsingProblem& p, const SpinAssignment& s, const Eigen::VectorXd& f) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    e += 0.5 * s[i] * (f(k) + p.h(k));
  }
  return e;
}

inline void flip(const IsingProblem& p, SpinAssignment& s, Eigen::VectorXd& f, std::size_t k) {
  const double delta = -2.0 * s[k];
  s[k] = static_cast<std::int8_t>(-s[k]);
  f.noalias() += delta * p.couplings.col(static_cast<Eigen::Index>(k));
}

inline double energy_scale(const IsingProblem& p) {
  return 1.0 + 0.5 * p.couplings.cwiseAbs().sum() + p.h.cwiseAbs().sum() + std::abs(p.constant);
}

}  // namespace detail

inline ResolvedSchedule resolve_schedule(const IsingProblem& problem, const AnnealSchedule& schedule) {
  schedule.validate();
  ResolvedSchedule r;
  r.n_sweeps = schedule.n_sweeps;
  r.restarts = schedule.restarts;
  r.seed = schedule.seed;
  r.moves_per_sweep = schedule.moves_per_sweep.value_or(std::max<std::size_t>(1, problem.n_spins_total()));
  if (schedule.t_initial) {
    r.t_initial = *schedule.t_initial;
  } else {
    std::mt19937_64 rng(schedule.seed ^ 0x9e3779b97f4a7c15ULL);
    constexpr int kSamples = 100;
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const double e = problem.hamiltonian(detail::random_assignment(problem.n_spins_total(), rng));
      const double d = e - mean;
      mean += d / (i + 1);
      m2 += d * (e - mean);
    }
    const double sd = std::sqrt(m2 / (kSamples - 1));
    r.t_initial = (std::isfinite(sd) && sd > 0.0) ? sd : 1.0;
  }
  r.t_final = schedule.t_final.value_or(1e-3 * r.t_initial);
  detail::require(r.t_final < r.t_initial, "AnnealSchedule: t_final must be below t_initial");
  return r;
}

/// Exhaustive Gray-code enumeration. Ties resolve to the lexicographically
/// smallest assignment (-1 < +1).
inline SolveResult solve_exact(const IsingProblem& problem, std::size_t cap = 24) {
  const std::size_t n = problem.n_spins_total();
  if (n > cap)
    throw SolverError("solve_exact: " + std::to_string(n) + " spins exceeds the enumeration cap of " +
                      std::to_string(cap));
  detail::require(n <= 62, "solve_exact: too many spins");
  const auto t0 = std::chrono::steady_clock::now();

  SpinAssignment s(n, -1);
  Eigen::VectorXd f = detail::local_fields(problem, s);
  double e = detail::energy_from_fields(problem, s, f);
  SpinAssignment best = s;
  double best_e = e;
  const double tie_tol = 1e-12 * detail::energy_scale(problem);

  const std::uint64_t count = n == 0 ? 1 : (std::uint64_t{1} << n);
  for (std::uint64_t step = 1; step < count; ++step) {
    const auto k = static_cast<std::size_t>(std::countr_zero(step));
    e += -2.0 * s[k] * f(static_cast<Eigen::Index>(k));
    detail::flip(problem, s, f, k);
    if ((step & 0xFFF) == 0) {
      f = detail::local_fields(problem, s);
      e = detail::energy_from_fields(problem, s, f);
    }
    if (e < best_e - tie_tol) {
      best_e = e;
      best = s;
    } else if (e <= best_e + tie_tol && std::lexicographical_compare(s.begin(), s.end(), best.begin(), best.end())) {
      best_e = std::min(best_e, e);
      best = s;
    }
  }

  SolveResult r;
  r.best_assignment = std::move(best);
  r.best_energy = problem.energy(r.best_assignment);
  r.energy_trace = {{r.best_energy}};
  r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.solver_id = SolverId::Exact;
  return r;
}

/// Single-spin-flip Metropolis annealing with independent restarts. Restart r
/// draws from a generator seeded with seed + r; the result is the best state
/// seen over all restarts and sweeps.
inline SolveResult solve_sa(const IsingProblem& problem, const AnnealSchedule& schedule) {
  const auto t0 = std::chrono::steady_clock::now();
  const ResolvedSchedule sch = resolve_schedule(problem, schedule);
  const std::size_t n = problem.n_spins_total();

  SolveResult r;
  r.solver_id = SolverId::SimulatedAnnealing;
  r.best_energy = std::numeric_limits<double>::infinity();

  for (std::size_t restart = 0; restart < sch.restarts; ++restart) {
    std::mt19937_64 rng(sch.seed + restart);
    std::uniform_int_distribution<std::size_t> pick(0, n == 0 ? 0 : n - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SpinAssignment s = detail::random_assignment(n, rng);
    Eigen::VectorXd f = detail::local_fields(problem, s);
    double e = detail::energy_from_fields(problem, s, f);
    SpinAssignment best = s;
    double best_e = e;
    std::vector<double> trace;
    trace.reserve(sch.n_sweeps);

    for (std::size_t sweep = 0; sweep < sch.n_sweeps && n > 0; ++sweep) {
      const double temp = sch.temperature(sweep);
      for (std::size_t move = 0; move < sch.moves_per_sweep; ++move) {
        const std::size_t k = pick(rng);
        const double dh = -2.0 * s[k] * f(static_cast<Eigen::Index>(k));
        if (dh <= 0.0 || unif(rng) < std::exp(-dh / temp)) {
          detail::flip(problem, s, f, k);
          e += dh;
          if (e < best_e) {
            best_e = e;
            best = s;
          }
        }
      }
      // Resynchronise to keep incremental bookkeeping free of drift.
      f = detail::local_fields(problem, s);
      e = detail::energy_from_fields(problem, s, f);
      trace.push_back(best_e + problem.constant);
    }
    if (n == 0) trace.push_back(problem.constant);

    if (best_e + problem.constant < r.best_energy) {
      r.best_energy = best_e + problem.constant;
      r.best_assignment = std::move(best);
    }
    r.energy_trace.push_back(std::move(trace));
  }
  r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

struct EpochRecord {
  SpinEncoding encoding;
  SolveResult result;
  std::vector<double> weights;
  double objective = 0.0;
};

struct EpochRun {
  std::vector<double> final_weights;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> epochs;
};

struct SolverOptions {
  SolverKind kind = SolverKind::SimulatedAnnealing;
  AnnealSchedule schedule;
  std::size_t exact_cap = 24;
};

inline SolveResult solve(const IsingProblem& problem, const SolverOptions& opts) {
  if (opts.kind == SolverKind::Exact) return solve_exact(problem, opts.exact_cap);
  return solve_sa(problem, opts.schedule);
}

/// Epoch seed offset; epoch 0 uses the schedule seed unchanged.
inline constexpr std::uint64_t kEpochSeedStride = 1000003;

/// Compile-solve-decode-refine loop. Returns the weights of the epoch with the
/// lowest objective, which need not be the last one.
inline EpochRun run_epochs(const std::function<IsingProblem(const SpinEncoding&)>& problem_builder,
                           const std::function<double(const std::vector<double>&)>& objective,
                           const SpinEncoding& enc0, std::size_t n_epochs, const SolverOptions& opts) {
  detail::require(n_epochs >= 1, "run_epochs: n_epochs must be >= 1");
  EpochRun run;
  SpinEncoding enc = enc0;
  for (std::size_t k = 0; k < n_epochs; ++k) {
    SolverOptions epoch_opts = opts;
    epoch_opts.schedule.seed = opts.schedule.seed + k * kEpochSeedStride;
    const IsingProblem problem = problem_builder(enc);
    SolveResult res = solve(problem, epoch_opts);
    std::vector<double> w = enc.decode(res.best_assignment);
    const double obj = objective(w);
    SpinEncoding next = enc.refine(w);
    run.epochs.push_back({enc, std::move(res), std::move(w), obj});
    enc = std::move(next);
  }
  for (std::size_t k = 1; k < run.epochs.size(); ++k)
    if (run.epochs[k].objective < run.epochs[run.best_epoch].objective) run.best_epoch = k;
  run.final_weights = run.epochs[run.best_epoch].weights;
  return run;
}

}  // namespace seisqubo
