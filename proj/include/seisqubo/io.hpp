#pragma once

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "seisqubo/inversion.hpp"

namespace seisqubo::io {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSeedEnv = "SEISQUBO_SEED";

// ---------------------------------------------------------------------------
// Low-level text helpers

inline std::string fmt(double v) { return detail::format_g17(v); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 digest failed");
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return ss.str();
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || tok.empty()) throw IoError(where + ": cannot parse number '" + tok + "'");
  return v;
}

/// Rows of a comma-separated file after its header, with 1-based line numbers.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;
  std::vector<std::string> comments;  // '#' lines, without the marker
};

inline CsvTable parse_csv(const std::string& text, const std::string& name) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string l = trim(line);
    if (l.empty()) continue;
    if (l[0] == '#') {
      t.comments.push_back(trim(std::string_view(l).substr(1)));
      continue;
    }
    const auto cells = split(l, ',');
    if (t.header.empty()) {
      t.header = cells;
      continue;
    }
    const std::string where = name + ":" + std::to_string(lineno);
    if (cells.size() != t.header.size())
      throw IoError(where + ": expected " + std::to_string(t.header.size()) + " columns, got " +
                    std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, where));
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(lineno);
  }
  if (t.header.empty()) throw IoError(name + ": missing header line");
  return t;
}

/// dt from the t column; samples must be uniformly spaced.
inline TimeAxis axis_from_times(const std::vector<double>& times, const std::string& name) {
  if (times.size() < 2) throw IoError(name + ": at least two time samples are required");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw IoError(name + ": time column must be increasing");
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double expect = times[0] + static_cast<double>(k) * dt;
    if (std::abs(times[k] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
      throw IoError(name + ": time samples are not uniformly spaced at row " + std::to_string(k + 1));
  }
  return TimeAxis(times.size(), dt);
}

// ---------------------------------------------------------------------------
// Models: `t,vp,vs,rho` (PreStack) or `t,ip` (PostStack), linear values.

inline std::string model_to_csv(const ElasticModel& m) {
  std::ostringstream os;
  const std::size_t n = m.n_samples();
  if (m.mode() == Mode::PreStack) {
    os << "t,vp,vs,rho\n";
    for (std::size_t k = 0; k < n; ++k)
      os << fmt(m.axis().time(k)) << ',' << fmt(std::exp(m.ln_vp()[k])) << ',' << fmt(std::exp(m.ln_vs()[k])) << ','
         << fmt(std::exp(m.ln_rho()[k])) << '\n';
  } else {
    os << "t,ip\n";
    for (std::size_t k = 0; k < n; ++k) os << fmt(m.axis().time(k)) << ',' << fmt(std::exp(m.ln_ip()[k])) << '\n';
  }
  return os.str();
}

inline ElasticModel model_from_csv(const std::string& text, const std::string& name = "<model>") {
  const CsvTable t = parse_csv(text, name);
  const bool pre = t.header == std::vector<std::string>{"t", "vp", "vs", "rho"};
  const bool post = t.header == std::vector<std::string>{"t", "ip"};
  if (!pre && !post) throw IoError(name + ": header must be 't,vp,vs,rho' or 't,ip'");
  std::vector<double> times;
  std::vector<std::vector<double>> cols(t.header.size() - 1);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    times.push_back(t.rows[r][0]);
    for (std::size_t c = 1; c < t.header.size(); ++c) {
      const double v = t.rows[r][c];
      if (!(v > 0.0) || !std::isfinite(v))
        throw IoError(name + ":" + std::to_string(t.line_numbers[r]) + ": values must be positive and finite");
      cols[c - 1].push_back(std::log(v));
    }
  }
  const TimeAxis axis = axis_from_times(times, name);
  if (post) return ElasticModel::poststack(axis, std::move(cols[0]));
  return ElasticModel::prestack(axis, std::move(cols[0]), std::move(cols[1]), std::move(cols[2]));
}

inline void save_model(const ElasticModel& m, const std::string& path) { write_file(path, model_to_csv(m)); }
inline ElasticModel load_model(const std::string& path) { return model_from_csv(read_file(path), path); }

// ---------------------------------------------------------------------------
// Wavelets: `# center_index=<k>` then `t,amplitude`.

inline std::string wavelet_to_csv(const Wavelet& w, double dt) {
  std::ostringstream os;
  os << "# center_index=" << w.center_index() << "\n";
  os << "t,amplitude\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(w.center_index())) * dt;
    os << fmt(t) << ',' << fmt(w.samples()[i]) << '\n';
  }
  return os.str();
}

inline Wavelet wavelet_from_csv(const std::string& text, const std::string& name = "<wavelet>") {
  const CsvTable t = parse_csv(text, name);
  if (t.header != std::vector<std::string>{"t", "amplitude"}) throw IoError(name + ": header must be 't,amplitude'");
  std::optional<std::size_t> center;
  for (const auto& c : t.comments) {
    const std::string key = "center_index=";
    if (c.rfind(key, 0) == 0) {
      const std::string v = trim(std::string_view(c).substr(key.size()));
      std::size_t k = 0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), k);
      if (ec != std::errc() || ptr != v.data() + v.size()) throw IoError(name + ": malformed center_index");
      center = k;
    }
  }
  if (!center) throw IoError(name + ": missing '# center_index=<k>' line");
  std::vector<double> samples;
  for (const auto& r : t.rows) samples.push_back(r[1]);
  try {
    return Wavelet(std::move(samples), *center);
  } catch (const ValidationError& e) {
    throw IoError(name + ": " + e.what());
  }
}

inline Wavelet load_wavelet(const std::string& path) { return wavelet_from_csv(read_file(path), path); }

/// `ricker:<hz>` or `file:<path>`, optionally comma-separated per angle.
inline AngleSet parse_wavelet_spec(const std::string& spec, const std::vector<double>& angles, double dt) {
  const auto parts = split(spec, ',');
  detail::require(!parts.empty() && !parts[0].empty(), "wavelet spec is empty");
  detail::require(parts.size() == 1 || parts.size() == angles.size(),
                  "wavelet spec must give one wavelet or one per angle");
  std::vector<Wavelet> ws;
  for (const auto& p : parts) {
    if (p.rfind("ricker:", 0) == 0) {
      double hz = 0.0;
      try {
        hz = parse_double(p.substr(7), "wavelet spec");
      } catch (const IoError&) {
        throw ValidationError("wavelet spec: malformed frequency in '" + p + "'");
      }
      detail::require(hz > 0.0 && hz < 0.5 / dt, "wavelet spec: Ricker frequency must lie in (0, Nyquist)");
      ws.push_back(make_ricker(hz, dt, default_ricker_half_width(hz, dt)));
    } else if (p.rfind("file:", 0) == 0) {
      ws.push_back(load_wavelet(p.substr(5)));
    } else {
      throw ValidationError("wavelet spec: expected 'ricker:<hz>' or 'file:<path>', got '" + p + "'");
    }
  }
  if (ws.size() == 1 && angles.size() > 1) ws.assign(angles.size(), ws[0]);
  return AngleSet(angles, std::move(ws));
}

// ---------------------------------------------------------------------------
// Gathers: `t,angle,amplitude`, sample-major rows.

inline std::string gather_to_csv(const SeismicGather& g) {
  g.validate();
  std::ostringstream os;
  os << "t,angle,amplitude\n";
  for (std::size_t k = 0; k < g.axis.n_samples; ++k)
    for (std::size_t a = 0; a < g.angles.size(); ++a)
      os << fmt(g.axis.time(k)) << ',' << fmt(g.angles[a]) << ',' << fmt(g.traces[a][k]) << '\n';
  return os.str();
}

inline SeismicGather gather_from_csv(const std::string& text, const std::string& name = "<gather>") {
  const CsvTable t = parse_csv(text, name);
  if (t.header != std::vector<std::string>{"t", "angle", "amplitude"})
    throw IoError(name + ": header must be 't,angle,amplitude'");
  std::vector<double> times;
  std::set<double> angle_set;
  for (const auto& r : t.rows) {
    if (times.empty() || r[0] != times.back()) {
      if (!times.empty() && r[0] < times.back()) throw IoError(name + ": rows must be ordered by time");
      times.push_back(r[0]);
    }
    angle_set.insert(r[1]);
  }
  SeismicGather g;
  g.axis = axis_from_times(times, name);
  g.angles.assign(angle_set.begin(), angle_set.end());
  std::map<double, std::size_t> angle_index;
  for (std::size_t a = 0; a < g.angles.size(); ++a) angle_index[g.angles[a]] = a;
  g.traces.assign(g.angles.size(), std::vector<double>(times.size(), 0.0));
  std::vector<std::vector<bool>> seen(g.angles.size(), std::vector<bool>(times.size(), false));
  std::size_t k = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (r > 0 && t.rows[r][0] != t.rows[r - 1][0]) ++k;
    const std::size_t a = angle_index.at(t.rows[r][1]);
    if (seen[a][k]) throw IoError(name + ":" + std::to_string(t.line_numbers[r]) + ": duplicate (t, angle) row");
    seen[a][k] = true;
    g.traces[a][k] = t.rows[r][2];
  }
  for (const auto& row : seen)
    if (std::find(row.begin(), row.end(), false) != row.end())
      throw IoError(name + ": every (t, angle) pair needs exactly one row");
  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw IoError(name + ": " + e.what());
  }
  return g;
}

inline void save_gather(const SeismicGather& g, const std::string& path) { write_file(path, gather_to_csv(g)); }
inline SeismicGather load_gather(const std::string& path) { return gather_from_csv(read_file(path), path); }

// ---------------------------------------------------------------------------
// Spin assignments and external solutions

/// One row of +-1 integers.
inline std::string assignment_to_csv(const SpinAssignment& s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << int(s[i]);
  os << '\n';
  return os.str();
}

/// 0/1 bits separated by whitespace or commas, or packed as one string.
inline SpinAssignment assignment_from_bits(const std::string& text, const std::string& name = "<bits>") {
  SpinAssignment s;
  for (char c : text) {
    if (c == '0' || c == '1')
      s.push_back(c == '1' ? 1 : -1);
    else if (c == ',' || c == ' ' || c == '\n' || c == '\r' || c == '\t')
      continue;
    else
      throw IoError(name + ": unexpected character '" + std::string(1, c) + "' in bitstring");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Configuration: flat JSON with InversionConfig field names.

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv)) {
    std::uint64_t v = 0;
    const std::string_view sv(env);
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec != std::errc() || ptr != sv.data() + sv.size())
      throw ValidationError(std::string(kSeedEnv) + " must be an unsigned integer");
    return v;
  }
  return AnnealSchedule{}.seed;
}

inline const char* to_string(SolverKind k) { return k == SolverKind::Exact ? "exact" : "sa"; }

inline SolverKind solver_from_string(const std::string& s) {
  if (s == "exact") return SolverKind::Exact;
  if (s == "sa") return SolverKind::SimulatedAnnealing;
  throw ValidationError("solver must be 'exact' or 'sa', got '" + s + "'");
}

inline json config_to_json(const InversionConfig& c) {
  const auto& s = c.solver.schedule;
  json j;
  j["mode"] = to_string(c.mode);
  j["lambda"] = c.lambda;
  j["n_spins"] = c.n_spins;
  j["initial_scale"] = c.initial_scale;
  j["shrink_factor"] = c.shrink_factor;
  j["n_epochs"] = c.n_epochs;
  j["solver"] = to_string(c.solver.kind);
  j["exact_cap"] = c.solver.exact_cap;
  j["n_sweeps"] = s.n_sweeps;
  j["restarts"] = s.restarts;
  j["moves_per_sweep"] = s.moves_per_sweep ? json(*s.moves_per_sweep) : json(nullptr);
  j["t_initial"] = s.t_initial ? json(*s.t_initial) : json(nullptr);
  j["t_final"] = s.t_final ? json(*s.t_final) : json(nullptr);
  j["seed"] = s.seed;
  j["smoothing_window"] = c.smoothing_window;
  return j;
}

/// Overlays the keys present in `j` onto `c`. Unknown keys are rejected.
inline void apply_config_json(InversionConfig& c, const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  auto& s = c.solver.schedule;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "mode") {
        const auto m = v.get<std::string>();
        if (m == "prestack") c.mode = Mode::PreStack;
        else if (m == "poststack") c.mode = Mode::PostStack;
        else throw ValidationError("mode must be 'prestack' or 'poststack'");
      } else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "n_spins") c.n_spins = v.get<std::size_t>();
      else if (key == "initial_scale") c.initial_scale = v.get<double>();
      else if (key == "shrink_factor") c.shrink_factor = v.get<double>();
      else if (key == "n_epochs") c.n_epochs = v.get<std::size_t>();
      else if (key == "solver") c.solver.kind = solver_from_string(v.get<std::string>());
      else if (key == "exact_cap") c.solver.exact_cap = v.get<std::size_t>();
      else if (key == "n_sweeps") s.n_sweeps = v.get<std::size_t>();
      else if (key == "restarts") s.restarts = v.get<std::size_t>();
      else if (key == "moves_per_sweep") s.moves_per_sweep = v.is_null() ? std::nullopt : std::optional(v.get<std::size_t>());
      else if (key == "t_initial") s.t_initial = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "t_final") s.t_final = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "smoothing_window") c.smoothing_window = v.get<std::size_t>();
      else throw ValidationError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

inline json parse_json(const std::string& text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(name + ": " + e.what());
  }
}

inline InversionConfig load_config(const std::string& path) {
  InversionConfig c;
  c.solver.schedule.seed = default_seed();
  apply_config_json(c, parse_json(read_file(path), path));
  return c;
}

// ---------------------------------------------------------------------------
// Reports and sidecars

/// Deterministic report; wall-clock timings live in the manifest instead.
inline json report_to_json(const InversionReport& r, const InversionConfig& c) {
  json j;
  j["config"] = config_to_json(c);
  j["mode"] = to_string(r.predicted_model.mode());
  j["n_samples"] = r.predicted_model.n_samples();
  j["dt"] = r.predicted_model.axis().dt;
  j["n_spins_total"] = r.n_spins_total;
  j["predicted_ip"] = r.predicted_ip;
  if (r.predicted_is) j["predicted_is"] = *r.predicted_is;
  j["predicted_log_model"] = r.predicted_model.stacked();
  if (r.rms_ip) j["rms_ip"] = *r.rms_ip;
  if (r.rms_is) j["rms_is"] = *r.rms_is;
  j["data_misfit_initial"] = r.data_misfit_initial;
  j["data_misfit_final"] = r.data_misfit_final;
  j["objective_per_epoch"] = r.objective_per_epoch;
  j["solver_energy_per_epoch"] = r.epoch_solver_energy;
  j["best_epoch"] = r.best_epoch;
  return j;
}

inline std::string impedance_csv(const InversionReport& r, const std::optional<ElasticModel>& truth) {
  std::optional<Impedances> ti;
  if (truth) ti = to_impedances(*truth);
  const bool has_is = r.predicted_is.has_value();
  std::ostringstream os;
  os << "t,ip" << (has_is ? ",is" : "");
  if (ti) os << ",ip_true" << (has_is ? ",is_true" : "");
  os << '\n';
  for (std::size_t k = 0; k < r.predicted_ip.size(); ++k) {
    os << fmt(r.predicted_model.axis().time(k)) << ',' << fmt(r.predicted_ip[k]);
    if (has_is) os << ',' << fmt((*r.predicted_is)[k]);
    if (ti) {
      os << ',' << fmt(ti->ip[k]);
      if (has_is) os << ',' << fmt((*ti->is)[k]);
    }
    os << '\n';
  }
  return os.str();
}

inline std::string epochs_csv(const InversionReport& r) {
  std::ostringstream os;
  os << "epoch,objective,solver_energy\n";
  for (std::size_t k = 0; k < r.objective_per_epoch.size(); ++k)
    os << k + 1 << ',' << fmt(r.objective_per_epoch[k]) << ',' << fmt(r.epoch_solver_energy[k]) << '\n';
  return os.str();
}

/// `restart,sweep,best_energy` for one solve (epoch).
inline std::string energy_trace_csv(const std::vector<std::vector<double>>& trace) {
  std::ostringstream os;
  os << "restart,sweep,best_energy\n";
  for (std::size_t r = 0; r < trace.size(); ++r)
    for (std::size_t s = 0; s < trace[r].size(); ++s) os << r << ',' << s << ',' << fmt(trace[r][s]) << '\n';
  return os.str();
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "n_spins,runtime_s,solver_time_s,objective,rms_ip,rms_is\n";
  for (const auto& r : rows) {
    os << r.n_spins << ',' << fmt(r.runtime_s) << ',' << fmt(r.solver_time_s) << ',' << fmt(r.objective) << ','
       << (r.rms_ip ? fmt(*r.rms_ip) : "") << ',' << (r.rms_is ? fmt(*r.rms_is) : "") << '\n';
  }
  return os.str();
}

/// Everything needed to turn an external solution back into a model.
inline json encoding_sidecar(const SpinEncoding& enc, Mode mode, const TimeAxis& axis, const QuboModel& q) {
  json j;
  j["format"] = "seisqubo-encoding-v1";
  j["mode"] = to_string(mode);
  j["n_samples"] = axis.n_samples;
  j["dt"] = axis.dt;
  j["n_spins"] = enc.n_spins();
  j["shrink_factor"] = enc.shrink_factor();
  j["centers"] = enc.centers();
  j["scales"] = enc.scales();
  j["variables"] = q.n_variables();
  j["offset"] = q.offset;
  j["spin_layout"] = "weight-major, most significant first, sigma=2x-1";
  return j;
}

struct DecodedSidecar {
  Mode mode;
  TimeAxis axis;
  SpinEncoding encoding;
};

inline DecodedSidecar sidecar_from_json(const json& j, const std::string& name) {
  try {
    if (j.at("format").get<std::string>() != "seisqubo-encoding-v1") throw IoError(name + ": unknown sidecar format");
    const auto m = j.at("mode").get<std::string>();
    if (m != "poststack" && m != "prestack") throw IoError(name + ": unknown mode '" + m + "'");
    const Mode mode = m == "poststack" ? Mode::PostStack : Mode::PreStack;
    const TimeAxis axis(j.at("n_samples").get<std::size_t>(), j.at("dt").get<double>());
    SpinEncoding enc(j.at("centers").get<std::vector<double>>(), j.at("scales").get<std::vector<double>>(),
                     j.at("n_spins").get<std::size_t>(), j.at("shrink_factor").get<double>());
    return {mode, axis, std::move(enc)};
  } catch (const json::exception& e) {
    throw IoError(name + ": " + e.what());
  }
}

inline json quadratic_to_json(const QuadraticObjective& q) {
  json j;
  json rows = json::array();
  for (Eigen::Index i = 0; i < q.Q.rows(); ++i) {
    std::vector<double> row(q.Q.cols());
    for (Eigen::Index k = 0; k < q.Q.cols(); ++k) row[static_cast<std::size_t>(k)] = q.Q(i, k);
    rows.push_back(row);
  }
  j["Q"] = rows;
  j["b"] = std::vector<double>(q.b.data(), q.b.data() + q.b.size());
  j["constant"] = q.constant;
  return j;
}

// ---------------------------------------------------------------------------
// Manifest

struct RunManifest {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::vector<std::string> outputs;
  std::map<std::string, double> timings;
  std::vector<std::string> argv;

  void add_input(const std::string& path) { inputs.emplace_back(path, sha256_hex(read_file(path))); }

  json to_json() const {
    json j;
    j["tool"] = "seisqubo";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    j["seed"] = seed;
    json in = json::array();
    for (const auto& [p, d] : inputs) in.push_back({{"path", p}, {"sha256", d}});
    j["inputs"] = in;
    j["outputs"] = outputs;
    j["timings_s"] = timings;
    return j;
  }
};

}  // namespace seisqubo::io
