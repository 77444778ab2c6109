#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "seisqubo/io.hpp"
#include "test_util.hpp"

using namespace seisqubo;
namespace fs = std::filesystem;

TEST(Csv, ModelRoundTrip) {
  std::mt19937_64 rng(70);
  const auto m = testutil::random_prestack(TimeAxis(17, 0.004), rng);
  const auto back = io::model_from_csv(io::model_to_csv(m));
  EXPECT_EQ(back.mode(), Mode::PreStack);
  EXPECT_EQ(back.axis().n_samples, 17u);
  EXPECT_NEAR(back.axis().dt, 0.004, 1e-15);
  const auto a = m.stacked(), b = back.stacked();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);

  const auto p = testutil::random_poststack(TimeAxis(9, 0.002), rng);
  const auto pb = io::model_from_csv(io::model_to_csv(p));
  EXPECT_EQ(pb.mode(), Mode::PostStack);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(pb.ln_ip()[i], p.ln_ip()[i], 1e-12);
}

TEST(Csv, WaveletRoundTrip) {
  const Wavelet w = make_ricker(25.0, 0.002, 30);
  const std::string text = io::wavelet_to_csv(w, 0.002);
  EXPECT_EQ(text.rfind("# center_index=30\nt,amplitude\n", 0), 0u);
  const Wavelet back = io::wavelet_from_csv(text);
  EXPECT_EQ(back.center_index(), 30u);
  ASSERT_EQ(back.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(back.samples()[i], w.samples()[i], 1e-12);
}

TEST(Csv, GatherRoundTrip) {
  std::mt19937_64 rng(71);
  const TimeAxis axis(20, 0.002);
  const auto m = testutil::random_prestack(axis, rng);
  const auto g = forward_model(
      assemble_operator(Mode::PreStack, axis, AngleSet({12.0, 24.0, 36.0}, make_ricker(30.0, 0.002, 25)), m), m,
      NoiseSpec{0.01, 3});
  const auto back = io::gather_from_csv(io::gather_to_csv(g));
  EXPECT_EQ(back.angles, g.angles);
  EXPECT_EQ(back.axis, g.axis);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(back.traces[a][k], g.traces[a][k], 1e-12);
}

TEST(Csv, ErrorsCarryLineNumbers) {
  auto expect_msg = [](auto&& fn, const std::string& needle) {
    try {
      fn();
      FAIL() << "expected IoError containing " << needle;
    } catch (const IoError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_msg([] { io::model_from_csv("t,ip\n0,5\n0.002,abc\n", "m.csv"); }, "m.csv:3");
  expect_msg([] { io::model_from_csv("t,ip\n0,5\n0.002,5,1\n", "m.csv"); }, "m.csv:3");
  expect_msg([] { io::model_from_csv("t,ip\n0,5\n0.002,-1\n", "m.csv"); }, "m.csv:3");
  expect_msg([] { io::model_from_csv("t,x\n0,5\n0.002,1\n", "m.csv"); }, "header");
  expect_msg([] { io::model_from_csv("t,ip\n0,5\n0.002,5\n0.005,5\n", "m.csv"); }, "uniformly");
  expect_msg([] { io::gather_from_csv("t,angle,amplitude\n0,10,1\n0,10,2\n0.002,10,1\n", "g.csv"); }, "g.csv:3");
  expect_msg([] { io::gather_from_csv("t,angle,amplitude\n0,10,1\n0,20,2\n0.002,10,1\n", "g.csv"); }, "exactly one");
  expect_msg([] { io::wavelet_from_csv("t,amplitude\n0,1\n", "w.csv"); }, "center_index");
  EXPECT_THROW(io::load_model("/nonexistent/model.csv"), IoError);
}

TEST(WaveletSpec, Grammar) {
  const auto a = io::parse_wavelet_spec("ricker:30", {12.0, 24.0, 36.0}, 0.002);
  EXPECT_EQ(a.size(), 3u);
  EXPECT_EQ(a.wavelets()[0], make_ricker(30.0, 0.002, default_ricker_half_width(30.0, 0.002)));
  const auto b = io::parse_wavelet_spec("ricker:30,ricker:25", {5.0, 20.0}, 0.002);
  EXPECT_NE(b.wavelets()[0], b.wavelets()[1]);

  const auto path = (fs::temp_directory_path() / "seisqubo_io_wavelet.csv").string();
  io::write_file(path, io::wavelet_to_csv(Wavelet({0.2, 1.0, 0.2}, 1), 0.002));
  const auto c = io::parse_wavelet_spec("file:" + path, {0.0}, 0.002);
  EXPECT_EQ(c.wavelets()[0].samples(), (std::vector<double>{0.2, 1.0, 0.2}));
  fs::remove(path);

  EXPECT_THROW(io::parse_wavelet_spec("gabor:30", {0.0}, 0.002), ValidationError);
  EXPECT_THROW(io::parse_wavelet_spec("ricker:x", {0.0}, 0.002), ValidationError);
  EXPECT_THROW(io::parse_wavelet_spec("ricker:300", {0.0}, 0.002), ValidationError);
  EXPECT_THROW(io::parse_wavelet_spec("ricker:30,ricker:20", {0.0, 10.0, 20.0}, 0.002), ValidationError);
}

TEST(Config, JsonRoundTripAndValidation) {
  InversionConfig c;
  c.lambda = 0.2;
  c.n_spins = 4;
  c.solver.kind = SolverKind::Exact;
  c.solver.schedule.t_final = 0.5;
  InversionConfig d;
  io::apply_config_json(d, io::config_to_json(c));
  EXPECT_EQ(io::config_to_json(d), io::config_to_json(c));

  InversionConfig e;
  EXPECT_THROW(io::apply_config_json(e, io::json{{"n_spin", 3}}), ValidationError);
  EXPECT_THROW(io::apply_config_json(e, io::json{{"n_spins", "five"}}), ValidationError);
  EXPECT_THROW(io::apply_config_json(e, io::json{{"solver", "qpu"}}), ValidationError);
  EXPECT_THROW(io::apply_config_json(e, io::json{{"mode", "stack"}}), ValidationError);
  EXPECT_THROW(io::apply_config_json(e, io::json::array()), ValidationError);
  EXPECT_THROW(io::parse_json("{ bad", "c.json"), IoError);
}

TEST(Config, SeedFromEnvironment) {
  ::unsetenv(io::kSeedEnv);
  EXPECT_EQ(io::default_seed(), 20250101u);
  ::setenv(io::kSeedEnv, "99", 1);
  EXPECT_EQ(io::default_seed(), 99u);
  ::setenv(io::kSeedEnv, "x9", 1);
  EXPECT_THROW(io::default_seed(), ValidationError);
  ::unsetenv(io::kSeedEnv);
}

TEST(Bits, Parsing) {
  EXPECT_EQ(io::assignment_from_bits("1 0,1\n0"), (SpinAssignment{1, -1, 1, -1}));
  EXPECT_EQ(io::assignment_from_bits("0110"), (SpinAssignment{-1, 1, 1, -1}));
  EXPECT_THROW(io::assignment_from_bits("012"), IoError);
  EXPECT_EQ(io::assignment_to_csv({1, -1}), "1,-1\n");
}

TEST(Sidecar, RoundTrip) {
  const SpinEncoding enc({0.1, 0.2}, {0.1, 0.05}, 3, 0.5);
  IsingProblem p;
  p.couplings = Eigen::MatrixXd::Zero(6, 6);
  p.h = Eigen::VectorXd::Zero(6);
  const auto j = io::encoding_sidecar(enc, Mode::PostStack, TimeAxis(2, 0.002), ising_to_qubo(p));
  const auto back = io::sidecar_from_json(io::json::parse(j.dump()), "s.json");
  EXPECT_EQ(back.encoding, enc);
  EXPECT_EQ(back.mode, Mode::PostStack);
  EXPECT_EQ(back.axis, TimeAxis(2, 0.002));
  auto broken = j;
  broken["format"] = "other";
  EXPECT_THROW(io::sidecar_from_json(broken, "s.json"), IoError);
  broken = j;
  broken.erase("centers");
  EXPECT_THROW(io::sidecar_from_json(broken, "s.json"), IoError);
}

TEST(Report, RmsFieldsOnlyWithTruth) {
  auto inst = testutil::three_layer_instance(Mode::PostStack, {0.0});
  InversionConfig cfg;
  cfg.mode = Mode::PostStack;
  cfg.solver.schedule.n_sweeps = 20;
  const auto with = io::report_to_json(invert(inst.gather, inst.lf, inst.angles, cfg, inst.truth), cfg);
  const auto without = io::report_to_json(invert(inst.gather, inst.lf, inst.angles, cfg), cfg);
  EXPECT_TRUE(with.contains("rms_ip"));
  EXPECT_FALSE(with.contains("rms_is"));
  EXPECT_FALSE(without.contains("rms_ip"));
  EXPECT_FALSE(without.contains("rms_is"));
  EXPECT_EQ(with["config"]["n_spins"], 5);
  EXPECT_EQ(with["config"]["initial_scale"], 0.1);
}

TEST(Sweep, CsvHeader) {
  const std::string csv = io::sweep_csv({SweepRow{3, 0.5, 0.25, 1.0, 0.1, std::nullopt}});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n_spins,runtime_s,solver_time_s,objective,rms_ip,rms_is");
  EXPECT_NE(csv.find("\n3,0.5,0.25,1,0.10000000000000001,\n"), std::string::npos) << csv;
}

TEST(Digest, Sha256) {
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
