#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "seisqubo/encoding.hpp"
#include "seisqubo/forward.hpp"

namespace seisqubo {

struct RegularizationConfig {
  double lambda = 0.05;

  void validate() const {
    detail::require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and >= 0");
  }
};

/// E(m) = m^T Q m + b.m + constant, with Q symmetric.
struct QuadraticObjective {
  Eigen::MatrixXd Q;
  Eigen::VectorXd b;
  double constant = 0.0;

  std::size_t n_weights() const { return static_cast<std::size_t>(b.size()); }

  double evaluate(const std::vector<double>& m) const {
    detail::require(m.size() == n_weights(), "QuadraticObjective: weight count mismatch");
    const Eigen::Map<const Eigen::VectorXd> x(m.data(), static_cast<Eigen::Index>(m.size()));
    return x.dot(Q * x) + b.dot(x) + constant;
  }
};

/// H(sigma) = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i; `constant` carries everything
/// spin-independent, so H + constant is the original objective.
///
/// `couplings` is stored as a dense symmetric matrix with a zero diagonal;
/// entry (i, j) is the coefficient of the unordered pair.
struct IsingProblem {
  Eigen::MatrixXd couplings;
  Eigen::VectorXd h;
  double constant = 0.0;

  std::size_t n_spins_total() const { return static_cast<std::size_t>(h.size()); }

  /// H(sigma) without the constant.
  double hamiltonian(const SpinAssignment& s) const {
    detail::require(s.size() == n_spins_total(), "IsingProblem: assignment length mismatch");
    const auto n = static_cast<Eigen::Index>(s.size());
    double e = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double si = s[static_cast<std::size_t>(i)];
      double row = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) row += couplings(i, j) * s[static_cast<std::size_t>(j)];
      e += si * (row + h(i));
    }
    return e;
  }

  double energy(const SpinAssignment& s) const { return hamiltonian(s) + constant; }
};

namespace detail {

inline void check_dimensions(const SeismicGather& data, const ForwardOperator& op, std::size_t m_size,
                             std::size_t m_lf_size) {
  data.validate();
  require(data.axis == op.axis(), "objective: gather axis does not match operator");
  require(data.angles == op.angles(), "objective: gather angles do not match operator");
  require(m_size == op.n_weights(), "objective: model length does not match operator");
  require(m_lf_size == op.n_weights(), "objective: background length does not match operator");
}

}  // namespace detail

/// Sum over (t, theta) of squared data residuals.
inline double data_misfit(const SeismicGather& data, const ForwardOperator& op, const std::vector<double>& m) {
  detail::check_dimensions(data, op, m.size(), m.size());
  const Eigen::Map<const Eigen::VectorXd> x(m.data(), static_cast<Eigen::Index>(m.size()));
  double acc = 0.0;
  for (std::size_t a = 0; a < op.n_angles(); ++a) {
    const Eigen::Map<const Eigen::VectorXd> d(data.traces[a].data(), static_cast<Eigen::Index>(data.traces[a].size()));
    acc += (d - op.composed(a) * x).squaredNorm();
  }
  return acc;
}

/// Data misfit plus lambda * ||m - m_lf||^2.
inline double evaluate_objective(const SeismicGather& data, const ForwardOperator& op, const std::vector<double>& m,
                                 const std::vector<double>& m_lf, double lambda) {
  detail::check_dimensions(data, op, m.size(), m_lf.size());
  RegularizationConfig{lambda}.validate();
  double reg = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) reg += (m[i] - m_lf[i]) * (m[i] - m_lf[i]);
  return data_misfit(data, op, m) + lambda * reg;
}

/// Q = sum_theta G^T G + lambda I, b = -2 sum_theta G^T d - 2 lambda m_lf,
/// constant = sum_theta d^T d + lambda m_lf^T m_lf.
inline QuadraticObjective assemble_quadratic(const SeismicGather& data, const ForwardOperator& op,
                                             const std::vector<double>& m_lf, double lambda) {
  detail::check_dimensions(data, op, m_lf.size(), m_lf.size());
  RegularizationConfig{lambda}.validate();
  const auto n = static_cast<Eigen::Index>(op.n_weights());
  const Eigen::Map<const Eigen::VectorXd> lf(m_lf.data(), n);

  QuadraticObjective q;
  q.Q = Eigen::MatrixXd::Zero(n, n);
  q.b = Eigen::VectorXd::Zero(n);
  q.constant = 0.0;
  // Fixed angle order keeps the reduction bit-stable.
  for (std::size_t a = 0; a < op.n_angles(); ++a) {
    const Eigen::MatrixXd& g = op.composed(a);
    const Eigen::Map<const Eigen::VectorXd> d(data.traces[a].data(), g.rows());
    q.Q.noalias() += g.transpose() * g;
    q.b.noalias() -= 2.0 * (g.transpose() * d);
    q.constant += d.squaredNorm();
  }
  q.Q.diagonal().array() += lambda;
  q.b -= 2.0 * lambda * lf;
  q.constant += lambda * lf.squaredNorm();
  const Eigen::MatrixXd sym = 0.5 * (q.Q + q.Q.transpose());
  q.Q = sym;
  return q;
}

/// Substitutes the spin expansion into the quadratic objective. Spin p = (i, a)
/// has place value v_p = s_i 2^-(a+1):
///   J_pq = 2 Q_ij v_p v_q            for p != q
///   h_p  = v_p (2 (Q c)_i + b_i)
///   constant = q.constant + c^T Q c + b.c + sum_p Q_ii v_p^2   (sigma^2 = 1)
inline IsingProblem compile_to_ising(const QuadraticObjective& q, const SpinEncoding& enc) {
  detail::require(q.n_weights() == enc.n_weights(), "compile_to_ising: encoding does not match objective");
  const std::size_t nw = enc.n_weights();
  const std::size_t ns = enc.n_spins();
  const auto total = static_cast<Eigen::Index>(enc.total_spins());

  const Eigen::Map<const Eigen::VectorXd> c(enc.centers().data(), static_cast<Eigen::Index>(nw));
  const Eigen::VectorXd qc = q.Q * c;

  Eigen::VectorXd place(total);
  std::vector<Eigen::Index> owner(static_cast<std::size_t>(total));
  for (std::size_t i = 0; i < nw; ++i)
    for (std::size_t a = 0; a < ns; ++a) {
      const auto p = static_cast<Eigen::Index>(enc.spin_index(i, a));
      place(p) = enc.place_value(i, a);
      owner[static_cast<std::size_t>(p)] = static_cast<Eigen::Index>(i);
    }

  IsingProblem out;
  out.couplings = Eigen::MatrixXd::Zero(total, total);
  out.h = Eigen::VectorXd::Zero(total);
  out.constant = q.constant + c.dot(qc) + q.b.dot(c);
  for (Eigen::Index p = 0; p < total; ++p) {
    const Eigen::Index i = owner[static_cast<std::size_t>(p)];
    out.h(p) = place(p) * (2.0 * qc(i) + q.b(i));
    out.constant += q.Q(i, i) * place(p) * place(p);
    for (Eigen::Index r = p + 1; r < total; ++r) {
      const double v = 2.0 * q.Q(i, owner[static_cast<std::size_t>(r)]) * place(p) * place(r);
      out.couplings(p, r) = v;
      out.couplings(r, p) = v;
    }
  }
  return out;
}

/// Binary form x^T M x + offset over x in {0, 1}, M upper triangular.
struct QuboModel {
  Eigen::MatrixXd upper;
  double offset = 0.0;

  std::size_t n_variables() const { return static_cast<std::size_t>(upper.rows()); }

  double value(const std::vector<int>& x) const {
    detail::require(x.size() == n_variables(), "QuboModel: assignment length mismatch");
    const auto n = static_cast<Eigen::Index>(x.size());
    double e = offset;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!x[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = i; j < n; ++j)
        if (x[static_cast<std::size_t>(j)]) e += upper(i, j);
    }
    return e;
  }
};

/// sigma = 2x - 1. The offset includes the Ising constant, so x^T M x + offset
/// equals H(sigma) + constant.
inline QuboModel ising_to_qubo(const IsingProblem& ising) {
  const auto n = static_cast<Eigen::Index>(ising.n_spins_total());
  QuboModel q;
  q.upper = Eigen::MatrixXd::Zero(n, n);
  q.offset = ising.constant;
  for (Eigen::Index i = 0; i < n; ++i) {
    q.upper(i, i) += 2.0 * ising.h(i);
    q.offset -= ising.h(i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double jij = ising.couplings(i, j);
      if (jij == 0.0) continue;
      q.upper(i, j) += 4.0 * jij;
      q.upper(i, i) -= 2.0 * jij;
      q.upper(j, j) -= 2.0 * jij;
      q.offset += jij;
    }
  }
  return q;
}

/// x = (sigma + 1) / 2.
inline IsingProblem qubo_to_ising(const QuboModel& q) {
  const auto n = static_cast<Eigen::Index>(q.n_variables());
  IsingProblem out;
  out.couplings = Eigen::MatrixXd::Zero(n, n);
  out.h = Eigen::VectorXd::Zero(n);
  out.constant = q.offset;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.h(i) += 0.5 * q.upper(i, i);
    out.constant += 0.5 * q.upper(i, i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double m = q.upper(i, j);
      if (m == 0.0) continue;
      out.couplings(i, j) += 0.25 * m;
      out.couplings(j, i) += 0.25 * m;
      out.h(i) += 0.25 * m;
      out.h(j) += 0.25 * m;
      out.constant += 0.25 * m;
    }
  }
  return out;
}

namespace detail {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Coordinate-list QUBO:
///   # seisqubo qubo v1
///   # variables=<n>
///   # offset=<c>
///   # sigma=2x-1
///   i j value        (i <= j, row-major, zeros omitted)
inline void write_qubo(const QuboModel& q, std::ostream& os) {
  os << "# seisqubo qubo v1\n";
  os << "# variables=" << q.n_variables() << "\n";
  os << "# offset=" << detail::format_g17(q.offset) << "\n";
  os << "# sigma=2x-1\n";
  const auto n = static_cast<Eigen::Index>(q.n_variables());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      if (q.upper(i, j) != 0.0) os << i << ' ' << j << ' ' << detail::format_g17(q.upper(i, j)) << '\n';
}

inline void export_qubo(const IsingProblem& ising, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("export_qubo: cannot open " + path);
  write_qubo(ising_to_qubo(ising), out);
  if (!out) throw IoError("export_qubo: write failed for " + path);
}

inline QuboModel read_qubo(std::istream& in, const std::string& name = "<stream>") {
  std::string line;
  long long n = -1;
  double offset = 0.0;
  bool have_offset = false;
  std::vector<std::tuple<long long, long long, double, std::size_t>> entries;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw IoError(name + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const std::string val = line.substr(eq + 1);
      try {
        if (key == "variables") n = std::stoll(val);
        if (key == "offset") {
          offset = std::stod(val);
          have_offset = true;
        }
      } catch (const std::exception&) {
        fail("malformed header value");
      }
      continue;
    }
    std::istringstream ls(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(ls >> i >> j >> v)) fail("expected 'i j value'");
    if (i > j) fail("expected i <= j");
    entries.emplace_back(i, j, v, lineno);
  }
  if (n < 0) fail("missing '# variables=' header");
  if (!have_offset) fail("missing '# offset=' header");
  QuboModel q;
  q.upper = Eigen::MatrixXd::Zero(n, n);
  q.offset = offset;
  for (const auto& [i, j, v, at] : entries) {
    if (i < 0 || j >= n) throw IoError(name + ":" + std::to_string(at) + ": variable index out of range");
    q.upper(i, j) += v;
  }
  return q;
}

inline QuboModel import_qubo(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("import_qubo: cannot open " + path);
  return read_qubo(in, path);
}

}  // namespace seisqubo
