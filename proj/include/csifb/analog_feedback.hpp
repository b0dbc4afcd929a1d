#pragma once

#include <vector>

#include "csifb/channel_model.hpp"

namespace csifb {

struct AnalogFeedbackConfig {
  int clusters = 1;    // J; N / J must be an integer
  double beta = 1.0;   // bandwidth expansion M'/M >= 1
  double snr_fb = 1.0; // feedback-link P/N0, linear

  double rho() const { return beta * snr_fb; }
};

/// Throws std::invalid_argument when J does not divide N or beta < 1.
void validate(const AnalogFeedbackConfig& cfg, int n_subcarriers);

/// Fed-back subcarrier indices i * N / J.
std::vector<int> sampled_subcarriers(int n_subcarriers, int clusters);

/// Leftmost J x L block of S F.
CMat sampled_dft_block(const ChannelStats& stats, int clusters);

/// Linear MMSE interpolator of the frequency response from the J noisy
/// samples. Works in noise-normalised units: the observation is
/// g = sqrt(rho) S H + w with w ~ CN(0, I).
class MmseInterpolator {
 public:
  MmseInterpolator(const ChannelStats& prior, const AnalogFeedbackConfig& cfg);

  /// N x J estimator matrix.
  const CMat& gain() const { return gain_; }
  /// Sigma_e under the prior the interpolator was built for.
  const CMat& error_covariance() const { return err_cov_; }
  /// sigma_e^2 = trace(Sigma_e) / N.
  double mean_error() const { return mean_err_; }
  RVec error_per_subcarrier() const { return err_cov_.diagonal().real(); }

  /// Error covariance when the true channel follows `truth` rather than the
  /// prior (e.g. an interpolator built assuming independent taps).
  CMat error_covariance_under(const ChannelStats& truth) const;

  CVec estimate(const CVec& observation) const;

  const std::vector<int>& sampled() const { return sampled_; }
  int n_subcarriers() const { return static_cast<int>(gain_.rows()); }
  double rho() const { return rho_; }

 private:
  std::vector<int> sampled_;
  double rho_ = 0.0;
  CMat gain_;
  CMat err_cov_;
  double mean_err_ = 0.0;
};

inline MmseInterpolator build_interpolator(const ChannelStats& stats, const AnalogFeedbackConfig& cfg) {
  return MmseInterpolator(stats, cfg);
}

enum class FeedbackNoise { Enabled, Disabled };

/// Per-user M x J observation matrices; row m is g_{k,m}^T.
std::vector<CMat> simulate_feedback(const ChannelRealization& real, const AnalogFeedbackConfig& cfg,
                                    const TrialSeed& seed, FeedbackNoise noise = FeedbackNoise::Enabled);

/// Per-user M x N estimated frequency responses.
std::vector<CMat> estimate(const std::vector<CMat>& observations, const MmseInterpolator& interp);

/// trace(Sigma_h [I + rho N Sigma_h^{1/2} alpha^H alpha Sigma_h^{1/2}]^{-1}), the
/// L x L route to trace(Sigma_e) / N.
double interpolation_error_small(const ChannelStats& stats, const AnalogFeedbackConfig& cfg);

}  // namespace csifb
