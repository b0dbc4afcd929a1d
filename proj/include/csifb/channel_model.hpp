#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "csifb/linalg.hpp"
#include "csifb/random.hpp"

namespace csifb {

enum class ModelKind { DiscreteDip, PhysicalWssus };

/// Triangle of peak 1 at t = 0 spanning [-base/2, base/2]. The convolution of
/// two sample-and-hold rectangles of width 1/W has base 2/W.
struct TriangularPulse {
  double base_width_s = 0.0;
};

/// Raised-cosine pulse, truncated to `span_symbols` sample periods in total.
struct RaisedCosinePulse {
  double rolloff = 0.0;
  double span_symbols = 8.0;
};

/// Pulse given by samples at start_s + i * spacing_s, linearly interpolated
/// and zero outside the table.
struct TabulatedPulse {
  std::vector<double> samples;
  double spacing_s = 0.0;
  double start_s = 0.0;
};

using Pulse = std::variant<TriangularPulse, RaisedCosinePulse, TabulatedPulse>;

/// psi(t) for t in seconds; W is the sampling rate (used by the raised cosine).
double evaluate_pulse(const Pulse& pulse, double t_s, double sample_rate_hz);

/// Closed support interval [lo, hi] of the pulse in seconds.
std::pair<double, double> pulse_support(const Pulse& pulse, double sample_rate_hz);

/// Second-order description of the per-antenna channel. Immutable once built;
/// use build_dip_stats / build_physical_stats.
class ChannelStats {
 public:
  ModelKind kind() const { return kind_; }
  int n_subcarriers() const { return n_subcarriers_; }
  int n_taps() const { return n_taps_; }
  /// P for the physical model; equals L for a DIP channel.
  int n_paths() const { return static_cast<int>(psi_.cols()); }
  /// Number of independent coefficients the channel carries (L or P).
  int n_coefficients() const { return kind_ == ModelKind::DiscreteDip ? n_taps_ : n_paths(); }

  /// Diagonal of Sigma_h. For a DIP channel this is the DIP itself.
  const RVec& tap_variances() const { return tap_variances_; }
  const RVec& path_delays() const { return path_delays_; }
  /// mu_p^2 for the physical model, the DIP for the discrete model.
  const RVec& path_variances() const { return path_variances_; }
  const std::optional<Pulse>& pulse() const { return pulse_; }
  double sample_rate() const { return sample_rate_; }

  /// L x P masking matrix; identity for a DIP channel.
  const CMat& psi() const { return psi_; }
  /// L x L tap covariance Sigma_h.
  const CMat& tap_covariance() const { return tap_cov_; }
  /// sigma_H^2 = trace(Sigma_h).
  double total_power() const { return total_power_; }
  /// N x L block sqrt(N) F[:, 0:L], mapping taps to subcarriers.
  const CMat& dft_block() const { return dft_block_; }

  /// Diagonal of Psi^H Psi (the path weights of the weighted distortion).
  RVec path_weights() const;

 private:
  friend ChannelStats build_dip_stats(std::span<const double> dip, int n_subcarriers);
  friend ChannelStats build_physical_stats(std::span<const double>, std::span<const double>, const Pulse&,
                                           double, std::optional<int>, int);
  void finalize();

  ModelKind kind_ = ModelKind::DiscreteDip;
  int n_subcarriers_ = 0;
  int n_taps_ = 0;
  RVec tap_variances_;
  RVec path_delays_;
  RVec path_variances_;
  std::optional<Pulse> pulse_;
  double sample_rate_ = 0.0;
  CMat psi_;
  CMat tap_cov_;
  double total_power_ = 0.0;
  CMat dft_block_;
};

ChannelStats build_dip_stats(std::span<const double> dip, int n_subcarriers);

/// Builds the sampled physical channel. With `n_taps` empty the smallest L
/// covering every pulse tail is used.
ChannelStats build_physical_stats(std::span<const double> delays_s, std::span<const double> path_vars,
                                  const Pulse& pulse, double sample_rate_hz, std::optional<int> n_taps,
                                  int n_subcarriers);

/// One fading block. Entry k of each vector is user k; rows are BS antennas.
struct ChannelRealization {
  std::vector<CMat> taps;    // K x (M x L)
  std::vector<CMat> freq;    // K x (M x N)
  std::vector<CMat> phys;    // K x (M x P), physical model only
  int n_users() const { return static_cast<int>(freq.size()); }
  int n_antennas() const { return freq.empty() ? 0 : static_cast<int>(freq.front().rows()); }
};

/// Maps an M x L tap matrix to its M x N frequency response.
CMat taps_to_freq(const ChannelStats& stats, const CMat& taps);

ChannelRealization sample_channel(const ChannelStats& stats, int n_antennas, int n_users, const TrialSeed& seed);

/// Frequency correlation c(delta), averaged over the reference subcarrier.
/// Reduces to sum_l sigma_l^2 exp(-j 2 pi l delta / N) / sigma_H^2.
cd freq_correlation(const ChannelStats& stats, int delta);

/// Sigma_H = F [N Sigma_h 0; 0 0] F^H.
CMat freq_covariance(const ChannelStats& stats);

/// Named presets: "paper-dip5" and "sui4-omni".
std::vector<std::string> preset_names();
ChannelStats preset_stats(const std::string& name, int n_subcarriers);

}  // namespace csifb
