#pragma once

#include <span>
#include <utility>
#include <vector>

#include "csifb/analog_feedback.hpp"
#include "csifb/channel_model.hpp"
#include "csifb/quantizers.hpp"

namespace csifb {

// All gaps are per user, in nats, with P = snr and N0 = 1.

enum class BudgetScheme { Analog, Rvq, Digital };

struct FeedbackBudget {
  double alpha_fb = 0.0;
  int antennas = 4;
  double snr = 1.0;
  BudgetScheme scheme = BudgetScheme::Digital;
};

/// Total feedback bits per user and frame. Throws for the analog scheme.
double budget_to_bits(const FeedbackBudget& b);

/// log(1 + (M-1)/M snr D) for a mean per-subcarrier CSIT error D.
double gap_from_distortion(double distortion, double snr, int antennas);

// ---------------------------------------------------------------------------
// Analog feedback
// ---------------------------------------------------------------------------

/// Eigenvalue bound for MMSE-interpolated analog feedback. Uses the L taps of
/// a DIP channel or the P paths of a physical channel.
double bound_analog(const ChannelStats& stats, int clusters, double beta, double snr, int antennas);

/// High-SNR limit of bound_analog; +inf when fewer than n_coefficients
/// nonzero eigenvalues are observed (J too small).
double bound_analog_limit(const ChannelStats& stats, int clusters, double beta, int antennas);

/// gap_from_distortion of trace(Sigma_e) / N for the interpolator's own prior.
double analog_trace_gap(const MmseInterpolator& interp, double snr, int antennas);

/// Same, with the channel following `truth` instead of the interpolator prior.
double analog_trace_gap_under(const MmseInterpolator& interp, const ChannelStats& truth, double snr, int antennas);

/// (1/N) sum_n log(1 + (M-1)/M snr sigma_e^2[n]).
double analog_jensen_gap(const MmseInterpolator& interp, double snr, int antennas);

// ---------------------------------------------------------------------------
// RVQ
// ---------------------------------------------------------------------------

/// Cluster gap with `bits` bits per cluster (real-valued bits allowed).
double bound_rvq(const ChannelStats& stats, int clusters, double bits, double snr, int antennas);

struct RvqBudgetChoice {
  int best_clusters = 0;
  double best_gap = 0.0;
  std::vector<std::pair<int, double>> per_clusters;
};

/// Splits B_tot = alpha_fb (M-1) log2(1 + snr) over J clusters for every J in
/// the grid; ties go to the smaller J.
RvqBudgetChoice bound_rvq_budget(const ChannelStats& stats, double alpha_fb, double snr, int antennas,
                                 std::span<const int> cluster_grid);

/// One cluster per subcarrier: log(1 + sigma_H^2 snr (1 + snr)^(-alpha_fb / N)).
double rvq_per_carrier_gap(double sigma_h2, double alpha_fb, double snr, int n_subcarriers);

/// Its high-SNR relaxation log(1 + sigma_H^2 snr^(1 - alpha_fb / N)).
double rvq_per_carrier_relaxed(double sigma_h2, double alpha_fb, double snr, int n_subcarriers);

// ---------------------------------------------------------------------------
// Transform-domain quantization
// ---------------------------------------------------------------------------

enum class TdqDomain { TimeTaps, KlOfSigmaH };

/// Rate-distortion-limit gap for distortion D measured in the given domain.
/// K-L distortion lives on the N-scaled eigenvalues, hence the 1/N.
double bound_tdq_limit(const ChannelStats& stats, double distortion, double snr, int antennas, TdqDomain domain);

/// Gap at `rate_bits` per antenna with weighted reverse waterfilling in `domain`.
double bound_tdq_rate(const ChannelStats& stats, QuantDomain domain, double rate_bits, double snr, int antennas);

/// log(1 + sigma_H^2 snr (M-1)/M 2^(-R / n)).
double bound_tdq_highsnr_rate(const ChannelStats& stats, double rate_bits, double snr, int antennas, int n_coeff);

/// log(1 + sigma_H^2 (M-1)/M snr^(1 - alpha_fb / n)).
double bound_tdq_highsnr_budget(const ChannelStats& stats, double alpha_fb, double snr, int antennas, int n_coeff);

/// log(1 + snr (M-1)/M n gamma), gamma = 2^(-R/n) (prod variances)^(1/n):
/// the form before the arithmetic-geometric mean relaxation.
double bound_tdq_geometric(std::span<const double> variances, double rate_bits, double snr, int antennas);

/// Gap of a scalar-quantizer allocation: log(1 + (M-1)/M snr sum_l w_l D_l).
double bound_suq(const BitAllocation& alloc, double snr, int antennas);

/// Uniform-allocation SUQ asymptotics: the exact-rate form with B_tot and the
/// budget form in alpha_fb. kappa is the SUQ distortion constant (about 6).
double bound_suq_uniform(const ChannelStats& stats, double total_bits, double snr, int antennas, int n_coeff,
                         double kappa = 6.0);
double bound_suq_asymptotic(const ChannelStats& stats, double alpha_fb, double snr, int antennas, int n_coeff,
                            double kappa = 6.0);

// ---------------------------------------------------------------------------

/// K max(0, R_CSIT - gap).
double sum_rate_lower(const ChannelStats& stats, double snr, int antennas, int users, double gap_nats);

/// Divisors of n in increasing order.
std::vector<int> divisors(int n);

}  // namespace csifb
