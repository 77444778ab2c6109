#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "seisqubo/error.hpp"

namespace seisqubo {

enum class Mode { PreStack, PostStack };

inline const char* to_string(Mode m) { return m == Mode::PreStack ? "prestack" : "poststack"; }

struct TimeAxis {
  std::size_t n_samples = 0;
  double dt = 0.0;  // seconds

  TimeAxis() = default;
  TimeAxis(std::size_t n, double step) : n_samples(n), dt(step) {
    detail::require(n >= 2, "TimeAxis: n_samples must be >= 2");
    detail::require(std::isfinite(step) && step > 0.0, "TimeAxis: dt must be > 0");
  }

  double time(std::size_t k) const { return static_cast<double>(k) * dt; }

  friend bool operator==(const TimeAxis&, const TimeAxis&) = default;
};

/// Subsurface model in log space.
///
/// PreStack models carry ln Vp, ln Vs (km/s) and ln rho (g/cc); PostStack
/// models carry only ln Ip (km/s * g/cc). The stacked weight vector used by
/// the forward operator and the spin encoding is [ln_vp; ln_vs; ln_rho] or
/// [ln_ip] respectively.
class ElasticModel {
 public:
  static ElasticModel prestack(TimeAxis axis, std::vector<double> ln_vp, std::vector<double> ln_vs,
                               std::vector<double> ln_rho) {
    ElasticModel m;
    m.mode_ = Mode::PreStack;
    m.axis_ = axis;
    m.ln_vp_ = std::move(ln_vp);
    m.ln_vs_ = std::move(ln_vs);
    m.ln_rho_ = std::move(ln_rho);
    m.validate();
    return m;
  }

  static ElasticModel poststack(TimeAxis axis, std::vector<double> ln_ip) {
    ElasticModel m;
    m.mode_ = Mode::PostStack;
    m.axis_ = axis;
    m.ln_ip_ = std::move(ln_ip);
    m.validate();
    return m;
  }

  /// Rebuilds a model from a stacked weight vector laid out as `stacked()` returns it.
  static ElasticModel from_stacked(Mode mode, TimeAxis axis, const std::vector<double>& w) {
    const std::size_t n = axis.n_samples;
    if (mode == Mode::PostStack) {
      detail::require(w.size() == n, "from_stacked: expected n_samples weights");
      return poststack(axis, w);
    }
    detail::require(w.size() == 3 * n, "from_stacked: expected 3*n_samples weights");
    auto slice = [&](std::size_t b) {
      return std::vector<double>(w.begin() + static_cast<std::ptrdiff_t>(b * n),
                                 w.begin() + static_cast<std::ptrdiff_t>((b + 1) * n));
    };
    return prestack(axis, slice(0), slice(1), slice(2));
  }

  Mode mode() const { return mode_; }
  const TimeAxis& axis() const { return axis_; }
  std::size_t n_samples() const { return axis_.n_samples; }
  std::size_t n_weights() const { return mode_ == Mode::PreStack ? 3 * n_samples() : n_samples(); }

  const std::vector<double>& ln_vp() const { return ln_vp_; }
  const std::vector<double>& ln_vs() const { return ln_vs_; }
  const std::vector<double>& ln_rho() const { return ln_rho_; }
  const std::vector<double>& ln_ip() const { return ln_ip_; }

  std::vector<double> stacked() const {
    if (mode_ == Mode::PostStack) return ln_ip_;
    std::vector<double> w;
    w.reserve(3 * n_samples());
    w.insert(w.end(), ln_vp_.begin(), ln_vp_.end());
    w.insert(w.end(), ln_vs_.begin(), ln_vs_.end());
    w.insert(w.end(), ln_rho_.begin(), ln_rho_.end());
    return w;
  }

  friend bool operator==(const ElasticModel&, const ElasticModel&) = default;

 private:
  ElasticModel() = default;

  void validate() const {
    auto check = [&](const std::vector<double>& v, const char* name) {
      detail::require(v.size() == axis_.n_samples,
                      std::string("ElasticModel: ") + name + " length must equal n_samples");
      for (double x : v)
        detail::require(std::isfinite(x), std::string("ElasticModel: non-finite value in ") + name);
    };
    detail::require(axis_.n_samples >= 2 && axis_.dt > 0.0, "ElasticModel: invalid time axis");
    if (mode_ == Mode::PreStack) {
      check(ln_vp_, "ln_vp");
      check(ln_vs_, "ln_vs");
      check(ln_rho_, "ln_rho");
    } else {
      check(ln_ip_, "ln_ip");
    }
  }

  Mode mode_ = Mode::PreStack;
  TimeAxis axis_;
  std::vector<double> ln_vp_, ln_vs_, ln_rho_, ln_ip_;
};

/// Source pulse; time zero sits at `center_index`. Peak |amplitude| is 1.
class Wavelet {
 public:
  Wavelet(std::vector<double> samples, std::size_t center_index)
      : samples_(std::move(samples)), center_(center_index) {
    detail::require(!samples_.empty(), "Wavelet: samples must be non-empty");
    detail::require(center_ < samples_.size(), "Wavelet: center_index out of range");
    double peak = 0.0;
    for (double s : samples_) {
      detail::require(std::isfinite(s), "Wavelet: non-finite sample");
      peak = std::max(peak, std::abs(s));
    }
    detail::require(peak > 0.0, "Wavelet: all-zero samples");
    for (double& s : samples_) s /= peak;
  }

  const std::vector<double>& samples() const { return samples_; }
  std::size_t center_index() const { return center_; }
  std::size_t size() const { return samples_.size(); }

  static Wavelet impulse() { return Wavelet({1.0}, 0); }

  friend bool operator==(const Wavelet&, const Wavelet&) = default;

 private:
  std::vector<double> samples_;
  std::size_t center_;
};

/// Reflection angles (degrees) and one wavelet per angle.
class AngleSet {
 public:
  AngleSet(std::vector<double> angles, std::vector<Wavelet> wavelets)
      : angles_(std::move(angles)), wavelets_(std::move(wavelets)) {
    detail::require(!angles_.empty(), "AngleSet: at least one angle required");
    detail::require(angles_.size() == wavelets_.size(), "AngleSet: one wavelet per angle required");
    for (std::size_t i = 0; i < angles_.size(); ++i) {
      detail::require(std::isfinite(angles_[i]) && angles_[i] >= 0.0 && angles_[i] < 45.0,
                      "AngleSet: angles must lie in [0, 45) degrees");
      if (i > 0) detail::require(angles_[i] > angles_[i - 1], "AngleSet: angles must be strictly increasing");
    }
  }

  AngleSet(std::vector<double> angles, const Wavelet& shared)
      : AngleSet(angles, std::vector<Wavelet>(angles.size(), shared)) {}

  const std::vector<double>& angles() const { return angles_; }
  const std::vector<Wavelet>& wavelets() const { return wavelets_; }
  std::size_t size() const { return angles_.size(); }

  bool valid_for(Mode mode) const {
    return mode == Mode::PreStack || (angles_.size() == 1 && angles_[0] == 0.0);
  }

 private:
  std::vector<double> angles_;
  std::vector<Wavelet> wavelets_;
};

/// Ricker (1 - 2 pi^2 f^2 t^2) exp(-pi^2 f^2 t^2) on t = k dt, k in [-half_width, half_width].
inline Wavelet make_ricker(double peak_frequency, double dt, std::size_t half_width) {
  detail::require(std::isfinite(peak_frequency) && peak_frequency > 0.0, "make_ricker: peak_frequency must be > 0");
  detail::require(std::isfinite(dt) && dt > 0.0, "make_ricker: dt must be > 0");
  detail::require(half_width >= 1, "make_ricker: half_width must be >= 1");
  detail::require(peak_frequency < 0.5 / dt, "make_ricker: peak_frequency must be below Nyquist");
  const double a = std::numbers::pi * std::numbers::pi * peak_frequency * peak_frequency;
  std::vector<double> s(2 * half_width + 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(half_width)) * dt;
    s[i] = (1.0 - 2.0 * a * t * t) * std::exp(-a * t * t);
  }
  return Wavelet(std::move(s), half_width);
}

/// Half width covering +-1.5 periods; the Ricker tail there is about 1e-8.
inline std::size_t default_ricker_half_width(double peak_frequency, double dt) {
  return static_cast<std::size_t>(std::ceil(1.5 / (peak_frequency * dt)));
}

struct LayerProperties {
  double vp;   // km/s
  double vs;   // km/s
  double rho;  // g/cc
};

/// Piecewise-constant PreStack model. `layer_boundaries` holds the first sample
/// index of every layer after the first.
inline ElasticModel make_blocky_model(const std::vector<std::size_t>& layer_boundaries,
                                      const std::vector<LayerProperties>& layers, TimeAxis axis) {
  detail::require(layers.size() == layer_boundaries.size() + 1,
                  "make_blocky_model: need exactly one layer more than boundaries");
  for (std::size_t i = 0; i < layer_boundaries.size(); ++i) {
    detail::require(layer_boundaries[i] <= axis.n_samples, "make_blocky_model: boundary beyond n_samples");
    if (i > 0)
      detail::require(layer_boundaries[i] > layer_boundaries[i - 1],
                      "make_blocky_model: boundaries must be strictly increasing");
  }
  for (const auto& l : layers) {
    detail::require(l.vs > 0.0 && l.rho > 0.0, "make_blocky_model: Vs and rho must be positive");
    detail::require(l.vp > l.vs, "make_blocky_model: Vp must exceed Vs");
  }
  std::vector<double> vp(axis.n_samples), vs(axis.n_samples), rho(axis.n_samples);
  std::size_t layer = 0;
  for (std::size_t k = 0; k < axis.n_samples; ++k) {
    while (layer < layer_boundaries.size() && k >= layer_boundaries[layer]) ++layer;
    vp[k] = std::log(layers[layer].vp);
    vs[k] = std::log(layers[layer].vs);
    rho[k] = std::log(layers[layer].rho);
  }
  return ElasticModel::prestack(axis, std::move(vp), std::move(vs), std::move(rho));
}

namespace detail {

inline std::vector<double> moving_average_replicate(const std::vector<double>& x, std::size_t window) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  std::vector<double> out(x.size());
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::ptrdiff_t j = k - half; j <= k + half; ++j)
      acc += x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, n - 1))];
    out[static_cast<std::size_t>(k)] = acc / static_cast<double>(window);
  }
  return out;
}

}  // namespace detail

/// Background trend: centered moving average of every log sequence, edges replicated.
inline ElasticModel low_frequency_model(const ElasticModel& truth, std::size_t smoothing_window) {
  detail::require(smoothing_window % 2 == 1, "low_frequency_model: window must be odd");
  detail::require(smoothing_window >= 1 && smoothing_window <= truth.n_samples(),
                  "low_frequency_model: window must lie in [1, n_samples]");
  using detail::moving_average_replicate;
  if (truth.mode() == Mode::PostStack)
    return ElasticModel::poststack(truth.axis(), moving_average_replicate(truth.ln_ip(), smoothing_window));
  return ElasticModel::prestack(truth.axis(), moving_average_replicate(truth.ln_vp(), smoothing_window),
                                moving_average_replicate(truth.ln_vs(), smoothing_window),
                                moving_average_replicate(truth.ln_rho(), smoothing_window));
}

struct Impedances {
  std::vector<double> ip;                 // km/s * g/cc
  std::optional<std::vector<double>> is;  // absent for PostStack
};

inline Impedances to_impedances(const ElasticModel& model) {
  Impedances out;
  const std::size_t n = model.n_samples();
  out.ip.resize(n);
  if (model.mode() == Mode::PostStack) {
    for (std::size_t k = 0; k < n; ++k) out.ip[k] = std::exp(model.ln_ip()[k]);
    return out;
  }
  out.is.emplace(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.ip[k] = std::exp(model.ln_vp()[k] + model.ln_rho()[k]);
    (*out.is)[k] = std::exp(model.ln_vs()[k] + model.ln_rho()[k]);
  }
  return out;
}

/// ln Ip = ln Vp + ln rho; the acoustic model seen at normal incidence.
inline ElasticModel to_poststack(const ElasticModel& model) {
  if (model.mode() == Mode::PostStack) return model;
  std::vector<double> ip(model.n_samples());
  for (std::size_t k = 0; k < ip.size(); ++k) ip[k] = model.ln_vp()[k] + model.ln_rho()[k];
  return ElasticModel::poststack(model.axis(), std::move(ip));
}

}  // namespace seisqubo
