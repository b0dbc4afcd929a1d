#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "csifb/analog_feedback.hpp"
#include "csifb/channel_model.hpp"
#include "csifb/quantizers.hpp"

namespace csifb {

/// Zero-forcing directions for every subcarrier. beams[n] is M x K with unit
/// columns; degenerate subcarriers carry all-zero beams.
struct BeamformerSet {
  std::vector<CMat> beams;
  std::vector<char> degenerate;

  int n_subcarriers() const { return static_cast<int>(beams.size()); }
  int degenerate_count() const;
};

/// Condition number above which the CSIT matrix is treated as rank deficient.
inline constexpr double kZfConditionLimit = 1e12;

/// Column k is the normalized k-th column of the inverse of the K x M matrix
/// whose rows are the CSIT vectors. csit_n is M x K (column k = user k).
/// Returns false when the matrix is numerically rank deficient.
bool zf_directions(const CMat& csit_n, CMat& beams);

/// csit[k] is the M x N CSIT of user k.
BeamformerSet zf_beamformer(const std::vector<CMat>& csit);

/// e^x E1(x) with x = M / (snr sigma_H^2), in nats.
double perfect_csit_rate(double snr, int antennas, double sigma_h2);

inline double nats_to_bits(double nats) { return nats / 0.69314718055994530942; }

/// Produces per-user M x N CSIT from a true channel realization.
using CsitScheme = std::function<std::vector<CMat>(const ChannelRealization&, const TrialSeed&)>;

struct McOptions {
  std::size_t n_trials = 1000;
  std::uint64_t seed = 1;
  int jobs = 1;
};

/// Monte Carlo rate estimates per user, in nats. Units: P = snr, N0 = 1.
struct RateEstimate {
  double lower_nats = 0.0;        // (1 - degenerate fraction) csit - gap
  double genie_upper_nats = 0.0;
  double csit_rate_nats = 0.0;
  double gap_nats = 0.0;          // (1/N) sum_n log(1 + I_n)
  double gap_stderr = 0.0;        // delta method over trials
  double genie_stderr = 0.0;
  std::size_t n_trials = 0;
  std::vector<double> per_user_gap;
  std::vector<double> per_user_genie;
  RVec interference_mean;         // E|I_k[n]|^2 averaged over users, per n
  RVec interference_stderr;
  double degenerate_fraction = 0.0;

  double stderr_nats() const { return std::max(gap_stderr, genie_stderr); }
};

RateEstimate mc_rates(const ChannelStats& stats, const CsitScheme& scheme, double snr, int antennas, int users,
                      const McOptions& opts);

// ---------------------------------------------------------------------------
// CSIT schemes
// ---------------------------------------------------------------------------

CsitScheme perfect_csit_scheme();

/// Noisy analog feedback of J subcarriers followed by MMSE interpolation.
CsitScheme analog_scheme(const MmseInterpolator& interp, AnalogFeedbackConfig cfg);

/// Cluster offsets (a, b): cluster i spans i N' - a ... i N' + b with N' = N / J.
std::pair<int, int> rvq_cluster_offsets(int n_subcarriers, int clusters);

/// RVQ of the representative subcarrier of each cluster with `bits` bits; the
/// chosen codeword is the CSIT of the whole cluster. A fresh codebook is drawn
/// per trial and user.
CsitScheme rvq_scheme(int n_subcarriers, int clusters, int bits, int bit_cap = kDefaultRvqBitCap);

/// Scalar uniform quantization of the transform coefficients.
CsitScheme tdq_scheme(TransformCodec codec, BitAllocation alloc);

/// Rate-distortion-limit reconstruction of the transform coefficients.
CsitScheme tdq_limit_scheme(TransformCodec codec, BitAllocation alloc);

}  // namespace csifb
