// seisqubo: forward modeling, QUBO-based impedance inversion, QUBO export/decode
// and spin-count sweeps from the command line.
//
// Exit codes: 0 success, 2 validation error, 3 solver failure, 4 I/O error.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seisqubo/io.hpp"
#include "seisqubo/seisqubo.hpp"

namespace fs = std::filesystem;
using namespace seisqubo;
using io::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

std::vector<double> parse_angles(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : io::split(s, ',')) {
    try {
      out.push_back(io::parse_double(tok, "--angles"));
    } catch (const IoError& e) {
      throw ValidationError(e.what());
    }
  }
  return out;
}

/// "1-6" or "1,2,5".
std::vector<std::size_t> parse_counts(const std::string& s) {
  std::vector<std::size_t> out;
  auto to_count = [](const std::string& t) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      throw ValidationError("expected a positive integer, got '" + t + "'");
    return v;
  };
  for (const auto& tok : io::split(s, ',')) {
    const auto dash = tok.find('-');
    if (dash == std::string::npos) {
      out.push_back(to_count(tok));
    } else {
      const std::size_t lo = to_count(io::trim(tok.substr(0, dash)));
      const std::size_t hi = to_count(io::trim(tok.substr(dash + 1)));
      if (lo > hi) throw ValidationError("empty range '" + tok + "'");
      for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
    }
  }
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

/// Flags that override config-file values. Unset optionals leave the config alone.
struct ConfigOverrides {
  std::string config_file;
  std::optional<double> lambda, initial_scale, shrink_factor, t_initial, t_final;
  std::optional<std::size_t> n_spins, n_epochs, n_sweeps, restarts, moves_per_sweep, smoothing_window, exact_cap;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> solver;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "Flat JSON config (InversionConfig field names)");
    app->add_option("--lambda", lambda, "Regularization weight (default 0.05)");
    app->add_option("--n-spins", n_spins, "Spins per weight (default 5)");
    app->add_option("--initial-scale", initial_scale, "Initial encoding scale s_i (default 0.1)");
    app->add_option("--shrink-factor", shrink_factor, "Scale shrink factor per epoch (default 0.5)");
    app->add_option("--epochs", n_epochs, "Refinement epochs (default 1)");
    app->add_option("--solver", solver, "sa | exact (default sa)");
    app->add_option("--exact-cap", exact_cap, "Maximum spins for the exact solver (default 24)");
    app->add_option("--sweeps", n_sweeps, "Annealing sweeps (default 200)");
    app->add_option("--restarts", restarts, "Annealing restarts (default 8)");
    app->add_option("--moves-per-sweep", moves_per_sweep, "Metropolis proposals per sweep (default: spin count)");
    app->add_option("--t-initial", t_initial, "Initial temperature (default: energy spread)");
    app->add_option("--t-final", t_final, "Final temperature (default: 1e-3 t_initial)");
    app->add_option("--seed", seed, std::string("Random seed (default: $") + io::kSeedEnv + " or built-in)");
    app->add_option("--smoothing-window", smoothing_window, "Window for a derived background (default 11)");
  }

  /// defaults < environment seed < config file < flags.
  InversionConfig resolve(Mode data_mode) const {
    InversionConfig c;
    c.solver.schedule.seed = io::default_seed();
    bool mode_given = false;
    if (!config_file.empty()) {
      const json j = io::parse_json(io::read_file(config_file), config_file);
      io::apply_config_json(c, j);
      mode_given = j.contains("mode");
    }
    if (mode_given && c.mode != data_mode)
      throw ValidationError("config mode '" + std::string(to_string(c.mode)) + "' does not match input data mode '" +
                            to_string(data_mode) + "'");
    c.mode = data_mode;
    auto& s = c.solver.schedule;
    if (lambda) c.lambda = *lambda;
    if (n_spins) c.n_spins = *n_spins;
    if (initial_scale) c.initial_scale = *initial_scale;
    if (shrink_factor) c.shrink_factor = *shrink_factor;
    if (n_epochs) c.n_epochs = *n_epochs;
    if (solver) c.solver.kind = io::solver_from_string(*solver);
    if (exact_cap) c.solver.exact_cap = *exact_cap;
    if (n_sweeps) s.n_sweeps = *n_sweeps;
    if (restarts) s.restarts = *restarts;
    if (moves_per_sweep) s.moves_per_sweep = *moves_per_sweep;
    if (t_initial) s.t_initial = *t_initial;
    if (t_final) s.t_final = *t_final;
    if (seed) s.seed = *seed;
    if (smoothing_window) c.smoothing_window = *smoothing_window;
    c.validate();
    return c;
  }
};

/// Shared inputs of invert, export-qubo and the sweeps.
struct InversionInputs {
  std::string gather_file;
  std::string lf_file;
  std::string truth_file;
  std::string wavelet_spec = "ricker:30";
  ConfigOverrides overrides;

  void attach(CLI::App* app, bool with_truth = true) {
    app->add_option("--gather", gather_file, "Observed gather CSV (t,angle,amplitude)")->required();
    app->add_option("--lf", lf_file, "Low-frequency background model CSV; derived from --truth when omitted");
    if (with_truth) app->add_option("--truth", truth_file, "True model CSV for RMS metrics");
    app->add_option("--wavelet", wavelet_spec, "ricker:<hz> or file:<path>, optionally one per angle");
    overrides.attach(app);
  }

  struct Loaded {
    SeismicGather gather;
    ElasticModel m_lf;
    std::optional<ElasticModel> truth;
    AngleSet wavelets;
    InversionConfig config;
  };

  Loaded load(io::RunManifest& manifest) const {
    SeismicGather gather = io::load_gather(gather_file);
    manifest.add_input(gather_file);
    std::optional<ElasticModel> truth;
    if (!truth_file.empty()) {
      truth = io::load_model(truth_file);
      manifest.add_input(truth_file);
    }
    std::optional<ElasticModel> lf;
    if (!lf_file.empty()) {
      lf = io::load_model(lf_file);
      manifest.add_input(lf_file);
    }
    if (!lf && !truth) throw ValidationError("either --lf or --truth (to derive the background) is required");
    const Mode mode = lf ? lf->mode() : truth->mode();
    InversionConfig config = overrides.resolve(mode);
    if (!lf) lf = low_frequency_model(*truth, config.smoothing_window);
    AngleSet wavelets = io::parse_wavelet_spec(wavelet_spec, gather.angles, gather.axis.dt);
    if (!config_file_is_empty()) manifest.add_input(overrides.config_file);
    manifest.config = io::config_to_json(config);
    manifest.seed = config.solver.schedule.seed;
    return {std::move(gather), std::move(*lf), std::move(truth), std::move(wavelets), std::move(config)};
  }

  bool config_file_is_empty() const { return overrides.config_file.empty(); }
};

void write_manifest(io::RunManifest& m, const std::string& path) {
  m.outputs.push_back(path);
  io::write_file(path, m.to_json().dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seisqubo: seismic impedance inversion compiled to Ising/QUBO problems"};
  app.require_subcommand(1);
  io::RunManifest manifest;
  for (int i = 0; i < argc; ++i) manifest.argv.emplace_back(argv[i]);

  // forward ---------------------------------------------------------------
  auto* fwd = app.add_subcommand("forward", "Synthetic gather from a model (convolutional, linearized AVO)");
  std::string fwd_model, fwd_background, fwd_out, fwd_angles, fwd_wavelet = "ricker:30";
  double fwd_noise = 0.0;
  std::optional<std::uint64_t> fwd_seed;
  fwd->add_option("--model", fwd_model, "Model CSV (t,vp,vs,rho or t,ip)")->required();
  fwd->add_option("--background", fwd_background, "Background model for the (Vs/Vp)^2 ratio; default: --model");
  fwd->add_option("--angles", fwd_angles, "Comma-separated angles in degrees (default 0 post-stack, 12,24,36 pre-stack)");
  fwd->add_option("--wavelet", fwd_wavelet, "ricker:<hz> or file:<path>, optionally one per angle");
  fwd->add_option("--noise-std", fwd_noise, "Gaussian noise standard deviation (default 0)");
  fwd->add_option("--seed", fwd_seed, "Noise seed");
  fwd->add_option("--out", fwd_out, "Output gather CSV")->required();

  // invert ----------------------------------------------------------------
  auto* inv = app.add_subcommand("invert", "Invert a gather for impedances");
  InversionInputs inv_in;
  std::string inv_out;
  bool inv_trace = false;
  inv_in.attach(inv);
  inv->add_option("--out-dir", inv_out, "Output directory")->required();
  inv->add_flag("--dump-trace", inv_trace, "Write per-epoch energy traces (restart,sweep,best_energy)");

  // export-qubo -----------------------------------------------------------
  auto* exq = app.add_subcommand("export-qubo", "Write the first-epoch problem as a 0/1 QUBO coordinate list");
  InversionInputs exq_in;
  std::string exq_out, exq_sidecar, exq_quad;
  exq_in.attach(exq, false);
  exq->add_option("--out", exq_out, "Output QUBO file")->required();
  exq->add_option("--sidecar", exq_sidecar, "Encoding sidecar JSON (default: <out>.json)");
  exq->add_option("--dump-quadratic", exq_quad, "Also write (Q, b, constant) as JSON");

  // decode ----------------------------------------------------------------
  auto* dec = app.add_subcommand("decode", "Decode an external 0/1 solution through an encoding sidecar");
  std::string dec_sidecar, dec_solution, dec_out, dec_qubo;
  dec->add_option("--sidecar", dec_sidecar, "Encoding sidecar JSON written by export-qubo")->required();
  dec->add_option("--solution", dec_solution, "File with one 0/1 value per QUBO variable")->required();
  dec->add_option("--qubo", dec_qubo, "QUBO file, to report the solution's objective value");
  dec->add_option("--out-dir", dec_out, "Output directory")->required();

  // sweep -----------------------------------------------------------------
  auto* swp = app.add_subcommand("sweep", "Repeat the inversion over spins-per-weight counts");
  InversionInputs swp_in;
  std::string swp_counts = "1-6", swp_out;
  swp_in.attach(swp);
  swp->add_option("--spins", swp_counts, "Spin counts, e.g. 1-6 or 2,4,5");
  swp->add_option("--out", swp_out, "Output CSV")->required();

  // sweep-lambda ----------------------------------------------------------
  auto* slam = app.add_subcommand("sweep-lambda", "Regularization sensitivity: repeat the inversion over lambda values");
  InversionInputs slam_in;
  std::string slam_values = "0,0.01,0.05,0.1,0.5,1", slam_out;
  slam_in.attach(slam);
  slam->add_option("--lambdas", slam_values, "Comma-separated lambda values");
  slam->add_option("--out", slam_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    const auto t_start = std::chrono::steady_clock::now();

    if (*fwd) {
      manifest.command = "forward";
      const ElasticModel model = io::load_model(fwd_model);
      manifest.add_input(fwd_model);
      ElasticModel background = model;
      if (!fwd_background.empty()) {
        background = io::load_model(fwd_background);
        manifest.add_input(fwd_background);
      }
      if (fwd_angles.empty()) fwd_angles = model.mode() == Mode::PostStack ? "0" : "12,24,36";
      const AngleSet angles = io::parse_wavelet_spec(fwd_wavelet, parse_angles(fwd_angles), model.axis().dt);
      const std::uint64_t seed = fwd_seed.value_or(io::default_seed());
      const ForwardOperator op = assemble_operator(model.mode(), model.axis(), angles, background);
      const SeismicGather g = forward_model(op, model, NoiseSpec{fwd_noise, seed});
      io::save_gather(g, fwd_out);
      manifest.outputs.push_back(fwd_out);
      manifest.seed = seed;
      manifest.config = {{"mode", to_string(model.mode())}, {"angles", angles.angles()},
                         {"wavelet", fwd_wavelet},           {"noise_std", fwd_noise},
                         {"seed", seed}};
      manifest.timings["total"] = seconds_since(t_start);
      write_manifest(manifest, fwd_out + ".manifest.json");
      return 0;
    }

    if (*inv) {
      manifest.command = "invert";
      auto in = inv_in.load(manifest);
      std::cout << io::config_to_json(in.config).dump(2) << std::endl;
      ensure_dir(inv_out);
      const InversionReport rep = invert(in.gather, in.m_lf, in.wavelets, in.config, in.truth);
      auto out = [&](const std::string& name, const std::string& content) {
        const std::string p = join(inv_out, name);
        io::write_file(p, content);
        manifest.outputs.push_back(p);
      };
      out("report.json", io::report_to_json(rep, in.config).dump(2) + "\n");
      out("impedance.csv", io::impedance_csv(rep, in.truth));
      out("model.csv", io::model_to_csv(rep.predicted_model));
      out("epochs.csv", io::epochs_csv(rep));
      if (inv_trace)
        for (std::size_t k = 0; k < rep.energy_traces.size(); ++k)
          out("energy_trace_epoch" + std::to_string(k + 1) + ".csv", io::energy_trace_csv(rep.energy_traces[k]));
      manifest.timings = rep.timings;
      manifest.timings["solver"] = rep.solver_time;
      manifest.timings["total"] = seconds_since(t_start);
      write_manifest(manifest, join(inv_out, "manifest.json"));
      std::cerr << "data misfit " << rep.data_misfit_initial << " -> " << rep.data_misfit_final;
      if (rep.rms_ip) std::cerr << ", rms_ip " << *rep.rms_ip;
      if (rep.rms_is) std::cerr << ", rms_is " << *rep.rms_is;
      std::cerr << "\n";
      return 0;
    }

    if (*exq) {
      manifest.command = "export-qubo";
      auto in = exq_in.load(manifest);
      const ForwardOperator op = assemble_operator(in.config.mode, in.m_lf.axis(), in.wavelets, in.m_lf);
      const QuadraticObjective quad = assemble_quadratic(in.gather, op, in.m_lf.stacked(), in.config.lambda);
      const SpinEncoding enc = initial_encoding(in.m_lf, in.config);
      const IsingProblem ising = compile_to_ising(quad, enc);
      const QuboModel qubo = ising_to_qubo(ising);
      std::ostringstream qs;
      write_qubo(qubo, qs);
      io::write_file(exq_out, qs.str());
      manifest.outputs.push_back(exq_out);
      if (exq_sidecar.empty()) exq_sidecar = exq_out + ".json";
      io::write_file(exq_sidecar, io::encoding_sidecar(enc, in.config.mode, in.m_lf.axis(), qubo).dump(2) + "\n");
      manifest.outputs.push_back(exq_sidecar);
      if (!exq_quad.empty()) {
        io::write_file(exq_quad, io::quadratic_to_json(quad).dump(2) + "\n");
        manifest.outputs.push_back(exq_quad);
      }
      manifest.timings["total"] = seconds_since(t_start);
      write_manifest(manifest, exq_out + ".manifest.json");
      std::cerr << "wrote " << qubo.n_variables() << " variables to " << exq_out << "\n";
      return 0;
    }

    if (*dec) {
      manifest.command = "decode";
      const auto side = io::sidecar_from_json(io::parse_json(io::read_file(dec_sidecar), dec_sidecar), dec_sidecar);
      manifest.add_input(dec_sidecar);
      const SpinAssignment spins = io::assignment_from_bits(io::read_file(dec_solution), dec_solution);
      manifest.add_input(dec_solution);
      if (spins.size() != side.encoding.total_spins())
        throw ValidationError("solution has " + std::to_string(spins.size()) + " values, encoding expects " +
                              std::to_string(side.encoding.total_spins()));
      const ElasticModel model = ElasticModel::from_stacked(side.mode, side.axis, side.encoding.decode(spins));
      ensure_dir(dec_out);
      InversionReport rep(model);
      Impedances imp = to_impedances(model);
      rep.predicted_ip = std::move(imp.ip);
      rep.predicted_is = std::move(imp.is);
      auto out = [&](const std::string& name, const std::string& content) {
        const std::string p = join(dec_out, name);
        io::write_file(p, content);
        manifest.outputs.push_back(p);
      };
      out("model.csv", io::model_to_csv(model));
      out("impedance.csv", io::impedance_csv(rep, std::nullopt));
      out("assignment.csv", io::assignment_to_csv(spins));
      if (!dec_qubo.empty()) {
        const QuboModel q = import_qubo(dec_qubo);
        manifest.add_input(dec_qubo);
        std::vector<int> bits(spins.size());
        for (std::size_t i = 0; i < spins.size(); ++i) bits[i] = spins[i] > 0 ? 1 : 0;
        const double value = q.value(bits);
        std::cout << "objective " << io::fmt(value) << "\n";
        manifest.config = {{"objective", value}};
      }
      manifest.timings["total"] = seconds_since(t_start);
      write_manifest(manifest, join(dec_out, "manifest.json"));
      return 0;
    }

    if (*swp) {
      manifest.command = "sweep";
      auto in = swp_in.load(manifest);
      const auto rows = spin_sweep(in.config, in.gather, in.m_lf, in.wavelets, in.truth, parse_counts(swp_counts));
      io::write_file(swp_out, io::sweep_csv(rows));
      manifest.outputs.push_back(swp_out);
      manifest.timings["total"] = seconds_since(t_start);
      write_manifest(manifest, swp_out + ".manifest.json");
      return 0;
    }

    if (*slam) {
      manifest.command = "sweep-lambda";
      auto in = slam_in.load(manifest);
      std::ostringstream os;
      os << "lambda,objective,data_misfit,rms_ip,rms_is\n";
      for (const auto& tok : io::split(slam_values, ',')) {
        InversionConfig cfg = in.config;
        try {
          cfg.lambda = io::parse_double(tok, "--lambdas");
        } catch (const IoError& e) {
          throw ValidationError(e.what());
        }
        const InversionReport rep = invert(in.gather, in.m_lf, in.wavelets, cfg, in.truth);
        os << io::fmt(cfg.lambda) << ',' << io::fmt(rep.objective_per_epoch[rep.best_epoch]) << ','
           << io::fmt(rep.data_misfit_final) << ',' << (rep.rms_ip ? io::fmt(*rep.rms_ip) : "") << ','
           << (rep.rms_is ? io::fmt(*rep.rms_is) : "") << '\n';
      }
      io::write_file(slam_out, os.str());
      manifest.outputs.push_back(slam_out);
      manifest.timings["total"] = seconds_since(t_start);
      write_manifest(manifest, slam_out + ".manifest.json");
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
