#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "seisqubo/error.hpp"

namespace seisqubo {

/// Spin values in {-1, +1}, weight-major: all spins of weight 0, then weight 1, ...
/// Within a weight, position 0 is the most significant spin (place value 2^-1).
using SpinAssignment = std::vector<std::int8_t>;

inline void validate_assignment(const SpinAssignment& s) {
  for (auto v : s) detail::require(v == -1 || v == 1, "SpinAssignment: entries must be -1 or +1");
}

struct RepresentableRange {
  double min = 0.0;
  double max = 0.0;
  double grid_step = 0.0;
};

/// Fixed-point spin expansion w_i = c_i + s_i * sum_{a=1..n} sigma_i^(a) 2^-a.
///
/// Every weight takes one of 2^n values spaced s_i 2^(1-n) apart, symmetric
/// about c_i and never equal to it. `refine` re-centres on a previous best and
/// shrinks the scales by `shrink_factor`.
class SpinEncoding {
 public:
  SpinEncoding(std::vector<double> centers, std::vector<double> scales, std::size_t n_spins, double shrink_factor)
      : centers_(std::move(centers)), scales_(std::move(scales)), n_spins_(n_spins), shrink_(shrink_factor) {
    detail::require(n_spins_ >= 1, "SpinEncoding: n_spins must be >= 1");
    detail::require(n_spins_ <= 52, "SpinEncoding: n_spins must be <= 52");
    detail::require(centers_.size() == scales_.size(), "SpinEncoding: centers and scales length mismatch");
    detail::require(std::isfinite(shrink_) && shrink_ > 0.0 && shrink_ < 1.0,
                    "SpinEncoding: shrink_factor must lie in (0, 1)");
    for (std::size_t i = 0; i < centers_.size(); ++i) {
      detail::require(std::isfinite(centers_[i]), "SpinEncoding: non-finite center");
      detail::require(std::isfinite(scales_[i]) && scales_[i] > 0.0, "SpinEncoding: scales must be > 0");
    }
  }

  /// Same scale for every weight.
  static SpinEncoding uniform(std::vector<double> centers, double scale, std::size_t n_spins, double shrink_factor) {
    std::vector<double> scales(centers.size(), scale);
    return SpinEncoding(std::move(centers), std::move(scales), n_spins, shrink_factor);
  }

  std::size_t n_weights() const { return centers_.size(); }
  std::size_t n_spins() const { return n_spins_; }
  std::size_t total_spins() const { return n_weights() * n_spins_; }
  double shrink_factor() const { return shrink_; }
  const std::vector<double>& centers() const { return centers_; }
  const std::vector<double>& scales() const { return scales_; }

  std::size_t spin_index(std::size_t weight, std::size_t alpha) const { return weight * n_spins_ + alpha; }

  /// s_i 2^-(alpha+1) for zero-based alpha.
  double place_value(std::size_t weight, std::size_t alpha) const {
    return std::ldexp(scales_[weight], -static_cast<int>(alpha + 1));
  }

  std::vector<double> decode(const SpinAssignment& spins) const {
    detail::require(spins.size() == total_spins(), "decode: assignment length mismatch");
    validate_assignment(spins);
    std::vector<double> w(n_weights());
    for (std::size_t i = 0; i < n_weights(); ++i) {
      double frac = 0.0;
      for (std::size_t a = 0; a < n_spins_; ++a)
        frac += static_cast<double>(spins[spin_index(i, a)]) * std::ldexp(1.0, -static_cast<int>(a + 1));
      w[i] = centers_[i] + scales_[i] * frac;
    }
    return w;
  }

  RepresentableRange representable_range(std::size_t weight) const {
    detail::require(weight < n_weights(), "representable_range: weight index out of range");
    const double half = scales_[weight] * (1.0 - std::ldexp(1.0, -static_cast<int>(n_spins_)));
    return {centers_[weight] - half, centers_[weight] + half,
            std::ldexp(scales_[weight], 1 - static_cast<int>(n_spins_))};
  }

  /// Per weight, the spin string whose decoding is closest to the target;
  /// ties go to the lexicographically smaller string (-1 < +1).
  SpinAssignment nearest_assignment(const std::vector<double>& target) const {
    detail::require(target.size() == n_weights(), "nearest_assignment: target length mismatch");
    SpinAssignment out(total_spins());
    const std::uint64_t levels = std::uint64_t{1} << n_spins_;
    for (std::size_t i = 0; i < n_weights(); ++i) {
      // Level m decodes to c + s (2m + 1 - 2^n) / 2^n and orders spin strings lexicographically.
      auto value = [&](std::uint64_t m) {
        return centers_[i] + scales_[i] * std::ldexp(2.0 * static_cast<double>(m) + 1.0 - static_cast<double>(levels),
                                                     -static_cast<int>(n_spins_));
      };
      const double x = std::ldexp((target[i] - centers_[i]) / scales_[i], static_cast<int>(n_spins_));
      const double m_real = 0.5 * (x + static_cast<double>(levels) - 1.0);
      std::uint64_t best = 0;
      if (m_real >= static_cast<double>(levels - 1)) {
        best = levels - 1;
      } else if (m_real > 0.0) {
        const auto lo = static_cast<std::uint64_t>(std::floor(m_real));
        const std::uint64_t hi = lo + 1;
        best = std::abs(value(hi) - target[i]) < std::abs(value(lo) - target[i]) ? hi : lo;
      }
      for (std::size_t a = 0; a < n_spins_; ++a) {
        const bool bit = (best >> (n_spins_ - 1 - a)) & 1U;
        out[spin_index(i, a)] = bit ? 1 : -1;
      }
    }
    return out;
  }

  SpinEncoding refine(const std::vector<double>& best_weights) const {
    detail::require(best_weights.size() == n_weights(), "refine: weight count mismatch");
    for (double w : best_weights) detail::require(std::isfinite(w), "refine: non-finite weight");
    std::vector<double> scales(scales_);
    for (double& s : scales) s *= shrink_;
    return SpinEncoding(best_weights, std::move(scales), n_spins_, shrink_);
  }

  friend bool operator==(const SpinEncoding&, const SpinEncoding&) = default;

 private:
  std::vector<double> centers_;
  std::vector<double> scales_;
  std::size_t n_spins_;
  double shrink_;
};

inline std::vector<double> decode(const SpinEncoding& enc, const SpinAssignment& spins) { return enc.decode(spins); }

}  // namespace seisqubo
