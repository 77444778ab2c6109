#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "seisqubo/elastic_model.hpp"

namespace seisqubo {

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Linearized angle weights applied to d/dt ln Vp, d/dt ln Vs and d/dt ln rho.
struct AvoCoefficients {
  double c_p = 0.5;
  double c_s = 0.0;
  double c_rho = 0.5;
  double theta = 0.0;                // degrees
  double background_ratio_sq = 0.0;  // (Vs/Vp)^2 of the background

  static AvoCoefficients at(double theta_deg, double ratio_sq) {
    detail::require(ratio_sq > 0.0 && ratio_sq < 1.0, "AvoCoefficients: (Vs/Vp)^2 must lie in (0, 1)");
    const double t = deg2rad(theta_deg);
    const double sin2 = std::sin(t) * std::sin(t);
    const double tan2 = std::tan(t) * std::tan(t);
    AvoCoefficients c;
    c.theta = theta_deg;
    c.background_ratio_sq = ratio_sq;
    c.c_p = 0.5 * (1.0 + tan2);
    c.c_s = -4.0 * ratio_sq * sin2;
    c.c_rho = 0.5 * (1.0 - 4.0 * ratio_sq * sin2);
    return c;
  }
};

struct AvoAttributes {
  double intercept = 0.0;  // R
  double gradient = 0.0;   // G
  double curvature = 0.0;  // F
};

/// Intercept, gradient and curvature across an interface from the layer properties on each side.
inline AvoAttributes avo_attributes(const LayerProperties& upper, const LayerProperties& lower) {
  for (double v : {upper.vp, upper.vs, upper.rho, lower.vp, lower.vs, lower.rho})
    detail::require(std::isfinite(v) && v > 0.0, "avo_attributes: properties must be positive");
  const double vp = 0.5 * (upper.vp + lower.vp), dvp = lower.vp - upper.vp;
  const double vs = 0.5 * (upper.vs + lower.vs), dvs = lower.vs - upper.vs;
  const double rho = 0.5 * (upper.rho + lower.rho), drho = lower.rho - upper.rho;
  const double k = (vs * vs) / (vp * vp);
  AvoAttributes a;
  a.intercept = 0.5 * (dvp / vp + drho / rho);
  a.gradient = 0.5 * dvp / vp - 2.0 * k * (drho / rho + 2.0 * dvs / vs);
  a.curvature = 0.5 * dvp / vp;
  return a;
}

/// r_PP(theta) = R + G sin^2 + F (tan^2 - sin^2).
inline double reflection_coefficient(const AvoAttributes& a, double theta_deg) {
  detail::require(theta_deg >= 0.0 && theta_deg < 90.0, "reflection_coefficient: theta must lie in [0, 90)");
  const double t = deg2rad(theta_deg);
  const double sin2 = std::sin(t) * std::sin(t);
  const double tan2 = std::tan(t) * std::tan(t);
  return a.intercept + a.gradient * sin2 + a.curvature * (tan2 - sin2);
}

/// Angle coefficients with (Vs/Vp)^2 taken from the background model at `sample`.
inline AvoCoefficients avo_coefficients(double theta_deg, const ElasticModel& background, std::size_t sample) {
  detail::require(background.mode() == Mode::PreStack, "avo_coefficients: PreStack background required");
  detail::require(sample < background.n_samples(), "avo_coefficients: sample out of range");
  detail::require(theta_deg >= 0.0 && theta_deg < 45.0, "avo_coefficients: theta must lie in [0, 45)");
  const double ratio_sq = std::exp(2.0 * (background.ln_vs()[sample] - background.ln_vp()[sample]));
  return AvoCoefficients::at(theta_deg, ratio_sq);
}

struct SeismicGather {
  TimeAxis axis;
  std::vector<double> angles;               // degrees
  std::vector<std::vector<double>> traces;  // traces[angle][sample]

  void validate() const {
    detail::require(angles.size() == traces.size() && !angles.empty(), "SeismicGather: one trace per angle");
    for (const auto& tr : traces) {
      detail::require(tr.size() == axis.n_samples, "SeismicGather: trace length must equal n_samples");
      for (double v : tr) detail::require(std::isfinite(v), "SeismicGather: non-finite amplitude");
    }
  }
};

/// First difference scaled by 1/dt; the last row is zero.
inline Eigen::MatrixXd difference_matrix(const TimeAxis& axis) {
  const auto n = static_cast<Eigen::Index>(axis.n_samples);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    d(k, k) = -1.0 / axis.dt;
    d(k, k + 1) = 1.0 / axis.dt;
  }
  return d;
}

/// Same-length convolution with the wavelet's time zero at center_index:
/// out[t] = sum_u W[t][u] in[u] with W[t][u] = w[t - u + center].
inline Eigen::MatrixXd convolution_matrix(const Wavelet& w, std::size_t n_samples) {
  const auto n = static_cast<std::ptrdiff_t>(n_samples);
  const auto c = static_cast<std::ptrdiff_t>(w.center_index());
  const auto len = static_cast<std::ptrdiff_t>(w.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::ptrdiff_t t = 0; t < n; ++t)
    for (std::ptrdiff_t u = 0; u < n; ++u) {
      const std::ptrdiff_t k = t - u + c;
      if (k >= 0 && k < len) m(t, u) = w.samples()[static_cast<std::size_t>(k)];
    }
  return m;
}

/// Discrete operator d(theta) = W(theta) A(theta) D m, cached per angle as a dense G(theta).
class ForwardOperator {
 public:
  Mode mode() const { return mode_; }
  const TimeAxis& axis() const { return axis_; }
  std::size_t n_samples() const { return axis_.n_samples; }
  std::size_t n_weights() const { return mode_ == Mode::PreStack ? 3 * n_samples() : n_samples(); }
  const std::vector<double>& angles() const { return angles_; }
  std::size_t n_angles() const { return angles_.size(); }

  const Eigen::MatrixXd& diff_matrix() const { return diff_; }
  /// avo(angle)[sample]; empty for PostStack, where A = I/2.
  const std::vector<std::vector<AvoCoefficients>>& avo_blocks() const { return avo_; }
  const Eigen::MatrixXd& convolution(std::size_t angle) const { return conv_.at(angle); }
  const Eigen::MatrixXd& composed(std::size_t angle) const { return composed_.at(angle); }

  /// A(theta): n x 3n block [diag(c_p) diag(c_s) diag(c_rho)] or I/2 for PostStack.
  Eigen::MatrixXd reflectivity_matrix(std::size_t angle) const {
    const auto n = static_cast<Eigen::Index>(n_samples());
    if (mode_ == Mode::PostStack) return 0.5 * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, 3 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& c = avo_.at(angle)[static_cast<std::size_t>(k)];
      a(k, k) = c.c_p;
      a(k, n + k) = c.c_s;
      a(k, 2 * n + k) = c.c_rho;
    }
    return a;
  }

  /// W (A (D m)), stage by stage; a constant model maps to exact zeros.
  Eigen::VectorXd apply(std::size_t angle, const Eigen::VectorXd& m) const {
    detail::require(static_cast<std::size_t>(m.size()) == n_weights(), "ForwardOperator: model length mismatch");
    const auto n = static_cast<Eigen::Index>(n_samples());
    Eigen::VectorXd r;
    if (mode_ == Mode::PostStack) {
      r = 0.5 * (diff_ * m);
    } else {
      const Eigen::VectorXd dp = diff_ * m.segment(0, n), ds = diff_ * m.segment(n, n), dr = diff_ * m.segment(2 * n, n);
      r.resize(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        const auto& c = avo_.at(angle)[static_cast<std::size_t>(k)];
        r(k) = c.c_p * dp(k) + c.c_s * ds(k) + c.c_rho * dr(k);
      }
    }
    return conv_.at(angle) * r;
  }

  friend ForwardOperator assemble_operator(Mode, const TimeAxis&, const AngleSet&, const ElasticModel&);

 private:
  Mode mode_ = Mode::PostStack;
  TimeAxis axis_;
  std::vector<double> angles_;
  Eigen::MatrixXd diff_;
  std::vector<std::vector<AvoCoefficients>> avo_;
  std::vector<Eigen::MatrixXd> conv_;
  std::vector<Eigen::MatrixXd> composed_;
};

inline ForwardOperator assemble_operator(Mode mode, const TimeAxis& axis, const AngleSet& angles,
                                         const ElasticModel& background) {
  detail::require(background.mode() == mode, "assemble_operator: background mode mismatch");
  detail::require(background.axis() == axis, "assemble_operator: background axis mismatch");
  detail::require(angles.valid_for(mode), "assemble_operator: PostStack requires exactly one 0-degree angle");

  ForwardOperator op;
  op.mode_ = mode;
  op.axis_ = axis;
  op.angles_ = angles.angles();
  op.diff_ = difference_matrix(axis);
  const std::size_t n = axis.n_samples;
  const auto ni = static_cast<Eigen::Index>(n);

  for (std::size_t a = 0; a < angles.size(); ++a) {
    op.conv_.push_back(convolution_matrix(angles.wavelets()[a], n));
    if (mode == Mode::PreStack) {
      std::vector<AvoCoefficients> per_sample;
      per_sample.reserve(n);
      for (std::size_t k = 0; k < n; ++k) per_sample.push_back(avo_coefficients(angles.angles()[a], background, k));
      op.avo_.push_back(std::move(per_sample));
    }
    // A D applied blockwise: row k of block b is coeff_b[k] * D row k.
    Eigen::MatrixXd ad;
    if (mode == Mode::PostStack) {
      ad = 0.5 * op.diff_;
    } else {
      ad = Eigen::MatrixXd::Zero(ni, 3 * ni);
      const auto& c = op.avo_.back();
      for (Eigen::Index k = 0; k < ni; ++k) {
        const auto& ck = c[static_cast<std::size_t>(k)];
        ad.block(k, 0, 1, ni) = ck.c_p * op.diff_.row(k);
        ad.block(k, ni, 1, ni) = ck.c_s * op.diff_.row(k);
        ad.block(k, 2 * ni, 1, ni) = ck.c_rho * op.diff_.row(k);
      }
    }
    op.composed_.push_back(op.conv_.back() * ad);
  }
  return op;
}

struct NoiseSpec {
  double std_dev = 0.0;
  std::uint64_t seed = 0;
};

/// Synthetic gather; optional zero-mean Gaussian noise drawn angle-major from a seeded generator.
inline SeismicGather forward_model(const ForwardOperator& op, const ElasticModel& model,
                                   std::optional<NoiseSpec> noise = std::nullopt) {
  detail::require(model.mode() == op.mode(), "forward_model: model mode mismatch");
  detail::require(model.axis() == op.axis(), "forward_model: model axis mismatch");
  if (noise)
    detail::require(std::isfinite(noise->std_dev) && noise->std_dev >= 0.0, "forward_model: noise std must be >= 0");
  const std::vector<double> w = model.stacked();
  const Eigen::Map<const Eigen::VectorXd> m(w.data(), static_cast<Eigen::Index>(w.size()));

  SeismicGather g;
  g.axis = op.axis();
  g.angles = op.angles();
  std::mt19937_64 rng(noise ? noise->seed : 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t a = 0; a < op.n_angles(); ++a) {
    const Eigen::VectorXd tr = op.apply(a, m);
    std::vector<double> trace(tr.data(), tr.data() + tr.size());
    if (noise && noise->std_dev > 0.0)
      for (double& v : trace) v += noise->std_dev * gauss(rng);
    g.traces.push_back(std::move(trace));
  }
  return g;
}

}  // namespace seisqubo
