#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

using namespace seisqubo;

namespace {

IsingProblem empty_problem(std::size_t n) {
  IsingProblem p;
  p.couplings = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  p.h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  return p;
}

// Plain loop over all states in lexicographic order, strict improvement only.
std::pair<SpinAssignment, double> brute_force(const IsingProblem& p) {
  const std::size_t n = p.n_spins_total();
  SpinAssignment best;
  double best_e = 1e300;
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
    const auto s = testutil::from_index(i, n);
    const double e = testutil::naive_hamiltonian(p, s) + p.constant;
    if (e < best_e) {
      best_e = e;
      best = s;
    }
  }
  return {best, best_e};
}

QuadraticObjective toy_objective() {
  QuadraticObjective q;
  q.Q = Eigen::MatrixXd::Constant(1, 1, 1.0);
  q.b = Eigen::VectorXd::Constant(1, -0.6);
  q.constant = 0.09;
  return q;
}

}  // namespace

TEST(Exact, SingleBias) {
  auto p = empty_problem(1);
  p.h(0) = 1.0;
  p.constant = 2.5;
  const auto r = solve_exact(p);
  EXPECT_EQ(r.best_assignment, SpinAssignment{-1});
  EXPECT_EQ(r.best_energy, 1.5);
  EXPECT_EQ(r.solver_id, SolverId::Exact);
}

TEST(Exact, FlatLandscapeTieRule) {
  auto p = empty_problem(6);
  p.constant = -0.3;
  const auto r = solve_exact(p);
  EXPECT_EQ(r.best_assignment, SpinAssignment(6, -1));
  EXPECT_EQ(r.best_energy, -0.3);
}

TEST(Exact, DegenerateGroundStatesPickSmallest) {
  auto p = empty_problem(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) p.couplings(i, j) = -1.0;
  EXPECT_EQ(solve_exact(p).best_assignment, SpinAssignment(3, -1));

  auto q = empty_problem(2);
  q.couplings(0, 1) = q.couplings(1, 0) = 1.0;  // (-1,+1) and (+1,-1) tie
  EXPECT_EQ(solve_exact(q).best_assignment, (SpinAssignment{-1, 1}));
}

TEST(Exact, MatchesIndependentEnumeration) {
  std::mt19937_64 rng(50);
  for (int rep = 0; rep < 5; ++rep) {
    const auto p = testutil::random_ising(10, rng);
    const auto r = solve_exact(p);
    const auto [s, e] = brute_force(p);
    EXPECT_EQ(r.best_assignment, s);
    EXPECT_NEAR(r.best_energy, e, 1e-10);
    EXPECT_NEAR(r.best_energy, p.energy(r.best_assignment), 1e-10);
  }
}

TEST(Exact, RefusesAboveCap) {
  const auto p = empty_problem(25);
  EXPECT_THROW(solve_exact(p), SolverError);
  EXPECT_THROW(solve_exact(empty_problem(10), 8), SolverError);
}

TEST(Schedule, DefaultsAndValidation) {
  std::mt19937_64 rng(51);
  const auto p = testutil::random_ising(12, rng);
  const AnnealSchedule def;
  EXPECT_EQ(def.n_sweeps, 200u);
  EXPECT_EQ(def.restarts, 8u);
  const auto r = resolve_schedule(p, def);
  EXPECT_EQ(r.moves_per_sweep, 12u);
  EXPECT_NEAR(r.t_final, 1e-3 * r.t_initial, 1e-15 * r.t_initial);
  EXPECT_NEAR(r.temperature(0), r.t_initial, 1e-12 * r.t_initial);
  EXPECT_NEAR(r.temperature(199), r.t_final, 1e-12 * r.t_initial);
  EXPECT_GT(r.temperature(50), r.temperature(51));

  // t_initial is the spread of random-assignment energies.
  std::mt19937_64 probe(def.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> es;
  for (int i = 0; i < 100; ++i) es.push_back(p.hamiltonian(detail::random_assignment(12, probe)));
  double mean = 0.0, var = 0.0;
  for (double e : es) mean += e / 100.0;
  for (double e : es) var += (e - mean) * (e - mean) / 99.0;
  EXPECT_NEAR(r.t_initial, std::sqrt(var), 1e-9 * std::sqrt(var));

  AnnealSchedule bad;
  bad.n_sweeps = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = {};
  bad.restarts = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = {};
  bad.t_initial = 1.0;
  bad.t_final = 2.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = {};
  bad.t_initial = -1.0;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Annealing, SingleSpin) {
  auto p = empty_problem(1);
  p.h(0) = -2.0;
  AnnealSchedule s;
  s.n_sweeps = 1;
  s.restarts = 1;
  const auto r = solve_sa(p, s);
  EXPECT_EQ(r.best_assignment, SpinAssignment{1});
  EXPECT_EQ(r.best_energy, -2.0);
}

TEST(Annealing, FrustratedTriangle) {
  auto p = empty_problem(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) p.couplings(i, j) = 1.0;
  p.constant = 0.5;
  const auto sa = solve_sa(p, AnnealSchedule{});
  EXPECT_EQ(sa.best_energy, -0.5);
  EXPECT_EQ(sa.best_energy, solve_exact(p).best_energy);
}

TEST(Annealing, FindsGroundStatesOnSixteenSpins) {
  std::mt19937_64 rng(52);
  int hits = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = testutil::random_ising(16, rng);
    AnnealSchedule s;
    s.restarts = 20;
    s.seed = 1000 + static_cast<std::uint64_t>(rep);
    const double exact = solve_exact(p).best_energy;
    const double sa = solve_sa(p, s).best_energy;
    EXPECT_GE(sa, exact - 1e-9);
    if (sa <= exact + 1e-9 * (1.0 + std::abs(exact))) ++hits;
  }
  EXPECT_GE(hits, 19);
}

TEST(Annealing, EnergyAccountingAndTraces) {
  std::mt19937_64 rng(53);
  const auto p = testutil::random_ising(40, rng);
  AnnealSchedule s;
  s.restarts = 3;
  s.n_sweeps = 50;
  const auto r = solve_sa(p, s);
  EXPECT_NEAR(r.best_energy, testutil::naive_hamiltonian(p, r.best_assignment) + p.constant, 1e-10);
  ASSERT_EQ(r.energy_trace.size(), 3u);
  double overall = 1e300;
  for (const auto& tr : r.energy_trace) {
    ASSERT_EQ(tr.size(), 50u);
    for (std::size_t k = 1; k < tr.size(); ++k) EXPECT_LE(tr[k], tr[k - 1]);
    overall = std::min(overall, tr.back());
  }
  EXPECT_EQ(overall, r.best_energy);
  EXPECT_EQ(r.solver_id, SolverId::SimulatedAnnealing);
}

TEST(Annealing, Deterministic) {
  std::mt19937_64 rng(54);
  const auto p = testutil::random_ising(30, rng);
  const auto a = solve_sa(p, AnnealSchedule{});
  const auto b = solve_sa(p, AnnealSchedule{});
  EXPECT_EQ(a.best_assignment, b.best_assignment);
  EXPECT_EQ(a.best_energy, b.best_energy);
  EXPECT_EQ(a.energy_trace, b.energy_trace);
}

TEST(Annealing, NeverBelowExact) {
  std::mt19937_64 rng(55);
  for (int rep = 0; rep < 10; ++rep) {
    const auto p = testutil::random_ising(4 + static_cast<std::size_t>(rep % 9), rng);
    AnnealSchedule s;
    s.n_sweeps = 5;
    s.restarts = 1;
    s.seed = static_cast<std::uint64_t>(rep);
    EXPECT_GE(solve_sa(p, s).best_energy, solve_exact(p).best_energy - 1e-10);
  }
}

TEST(Epochs, SingleEpochIsOnePass) {
  std::mt19937_64 rng(56);
  QuadraticObjective q;
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(4, 4);
  q.Q = a.transpose() * a + Eigen::MatrixXd::Identity(4, 4);
  q.b = Eigen::VectorXd::Random(4);
  const auto enc = SpinEncoding::uniform({0.1, 0.2, 0.3, 0.4}, 0.5, 4, 0.5);
  const SolverOptions opts;
  const auto run = run_epochs([&](const SpinEncoding& e) { return compile_to_ising(q, e); },
                              [&](const std::vector<double>& w) { return q.evaluate(w); }, enc, 1, opts);
  const auto direct = solve_sa(compile_to_ising(q, enc), opts.schedule);
  ASSERT_EQ(run.epochs.size(), 1u);
  EXPECT_EQ(run.final_weights, enc.decode(direct.best_assignment));
  EXPECT_EQ(run.epochs[0].objective, q.evaluate(run.final_weights));
  EXPECT_THROW(run_epochs([&](const SpinEncoding& e) { return compile_to_ising(q, e); },
                          [&](const std::vector<double>& w) { return q.evaluate(w); }, enc, 0, opts),
               ValidationError);
}

TEST(Epochs, ToyGeometricShrinkage) {
  const auto q = toy_objective();
  const auto enc0 = SpinEncoding::uniform({0.0}, 0.5, 3, 0.5);
  SolverOptions opts;
  opts.kind = SolverKind::Exact;
  const auto run = run_epochs([&](const SpinEncoding& e) { return compile_to_ising(q, e); },
                              [&](const std::vector<double>& w) { return q.evaluate(w); }, enc0, 4, opts);
  ASSERT_EQ(run.epochs.size(), 4u);
  std::vector<double> err;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& ep = run.epochs[k];
    const double s_k = 0.5 * std::pow(0.5, static_cast<double>(k));
    EXPECT_NEAR(ep.encoding.scales()[0], s_k, 1e-15);
    const auto r = ep.encoding.representable_range(0);
    const double e = std::abs(ep.weights[0] - 0.3);
    EXPECT_LE(e, (r.max - r.min) / 2 + r.grid_step / 2 + 1e-15);
    EXPECT_LE(e, r.grid_step / 2 + 1e-15);  // 0.3 lies inside every grid
    EXPECT_NEAR(ep.objective, e * e, 1e-14);
    err.push_back(e);
    if (k > 0) { EXPECT_EQ(ep.encoding.centers()[0], run.epochs[k - 1].weights[0]); }
  }
  EXPECT_LT(err[3], err[0]);
  EXPECT_NEAR(err[0], 0.0125, 1e-15);
  for (const auto& ep : run.epochs) EXPECT_LE(q.evaluate(run.final_weights), ep.objective);
}

TEST(Epochs, BestEpochIsReturned) {
  const auto q = toy_objective();
  SolverOptions opts;
  opts.kind = SolverKind::Exact;
  const auto run = run_epochs([&](const SpinEncoding& e) { return compile_to_ising(q, e); },
                              [&](const std::vector<double>& w) { return q.evaluate(w); },
                              SpinEncoding::uniform({0.0}, 0.5, 3, 0.5), 4, opts);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(run.epochs[run.best_epoch].objective, run.epochs[k].objective);
  EXPECT_EQ(run.final_weights, run.epochs[run.best_epoch].weights);
  EXPECT_EQ(run.best_epoch, 2u);
}

TEST(Epochs, SeedsAdvancePerEpoch) {
  std::mt19937_64 rng(57);
  QuadraticObjective q;
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 3);
  q.Q = a.transpose() * a + Eigen::MatrixXd::Identity(3, 3);
  q.b = Eigen::VectorXd::Random(3);
  const auto enc = SpinEncoding::uniform({0.0, 0.0, 0.0}, 1.0, 4, 0.5);
  SolverOptions opts;
  const auto run = run_epochs([&](const SpinEncoding& e) { return compile_to_ising(q, e); },
                              [&](const std::vector<double>& w) { return q.evaluate(w); }, enc, 2, opts);
  AnnealSchedule second = opts.schedule;
  second.seed += kEpochSeedStride;
  const auto direct = solve_sa(compile_to_ising(q, run.epochs[1].encoding), second);
  EXPECT_EQ(direct.best_assignment, run.epochs[1].result.best_assignment);
}
