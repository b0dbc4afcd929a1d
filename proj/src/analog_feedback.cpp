#include "csifb/analog_feedback.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace csifb {

void validate(const AnalogFeedbackConfig& cfg, int n_subcarriers) {
  if (cfg.clusters <= 0 || n_subcarriers % cfg.clusters != 0)
    throw std::invalid_argument("analog feedback: J = " + std::to_string(cfg.clusters) + " does not divide N = " +
                                std::to_string(n_subcarriers));
  if (!(cfg.beta >= 1.0)) throw std::invalid_argument("analog feedback: beta must be >= 1");
  if (!(cfg.snr_fb >= 0.0)) throw std::invalid_argument("analog feedback: feedback SNR must be nonnegative");
}

std::vector<int> sampled_subcarriers(int n_subcarriers, int clusters) {
  const int spacing = n_subcarriers / clusters;
  std::vector<int> idx(clusters);
  for (int i = 0; i < clusters; ++i) idx[i] = i * spacing;
  return idx;
}

CMat sampled_dft_block(const ChannelStats& stats, int clusters) {
  const int n = stats.n_subcarriers();
  const std::vector<int> rows = sampled_subcarriers(n, clusters);
  CMat alpha(clusters, stats.n_taps());
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < clusters; ++i) {
    for (int l = 0; l < stats.n_taps(); ++l) {
      const long k = (static_cast<long>(rows[i]) * l) % n;
      alpha(i, l) = std::polar(scale, -2.0 * kPi * static_cast<double>(k) / n);
    }
  }
  return alpha;
}

MmseInterpolator::MmseInterpolator(const ChannelStats& prior, const AnalogFeedbackConfig& cfg)
    : sampled_((validate(cfg, prior.n_subcarriers()), sampled_subcarriers(prior.n_subcarriers(), cfg.clusters))),
      rho_(cfg.rho()) {
  const int n = prior.n_subcarriers();
  const int j = cfg.clusters;
  const CMat cov = freq_covariance(prior);

  CMat s_cov(j, n);  // S Sigma_H
  for (int i = 0; i < j; ++i) s_cov.row(i) = cov.row(sampled_[i]);
  CMat system = CMat::Identity(j, j);
  for (int i = 0; i < j; ++i)
    for (int q = 0; q < j; ++q) system(i, q) += rho_ * s_cov(i, sampled_[q]);

  const Eigen::LLT<CMat> llt(system);
  if (llt.info() != Eigen::Success) throw std::runtime_error("MmseInterpolator: factorization failed");
  const CMat solved = llt.solve(s_cov);  // (I + rho S Sigma_H S^H)^{-1} S Sigma_H

  gain_ = std::sqrt(rho_) * solved.adjoint();
  err_cov_ = cov - rho_ * s_cov.adjoint() * solved;
  err_cov_ = 0.5 * (err_cov_ + err_cov_.adjoint()).eval();
  mean_err_ = err_cov_.diagonal().real().sum() / n;
}

CMat MmseInterpolator::error_covariance_under(const ChannelStats& truth) const {
  const int n = n_subcarriers();
  if (truth.n_subcarriers() != n) throw std::invalid_argument("error_covariance_under: N mismatch");
  // e = (I - sqrt(rho) G S) H - G w
  CMat transfer = CMat::Identity(n, n);
  const double root = std::sqrt(rho_);
  for (std::size_t i = 0; i < sampled_.size(); ++i) transfer.col(sampled_[i]) -= root * gain_.col(i);
  CMat cov = transfer * freq_covariance(truth) * transfer.adjoint() + gain_ * gain_.adjoint();
  return 0.5 * (cov + cov.adjoint());
}

CVec MmseInterpolator::estimate(const CVec& observation) const {
  if (observation.size() != gain_.cols())
    throw std::invalid_argument("MmseInterpolator::estimate: observation length " +
                                std::to_string(observation.size()) + " != J = " + std::to_string(gain_.cols()));
  return gain_ * observation;
}

std::vector<CMat> simulate_feedback(const ChannelRealization& real, const AnalogFeedbackConfig& cfg,
                                    const TrialSeed& seed, FeedbackNoise noise) {
  const int users = real.n_users();
  const int antennas = real.n_antennas();
  const int n = users > 0 ? static_cast<int>(real.freq.front().cols()) : 0;
  validate(cfg, n);
  const std::vector<int> idx = sampled_subcarriers(n, cfg.clusters);
  const double root = std::sqrt(cfg.rho());

  std::vector<CMat> obs(users);
  for (int k = 0; k < users; ++k) {
    obs[k].resize(antennas, cfg.clusters);
    for (int m = 0; m < antennas; ++m) {
      RandomStream rng = seed.stream(StreamTag::FeedbackNoise, static_cast<std::uint64_t>(k),
                                     static_cast<std::uint64_t>(m));
      for (int i = 0; i < cfg.clusters; ++i) {
        const cd w = noise == FeedbackNoise::Enabled ? rng.complex_normal(1.0) : cd{0.0, 0.0};
        obs[k](m, i) = root * real.freq[k](m, idx[i]) + w;
      }
    }
  }
  return obs;
}

std::vector<CMat> estimate(const std::vector<CMat>& observations, const MmseInterpolator& interp) {
  std::vector<CMat> out;
  out.reserve(observations.size());
  for (const CMat& g : observations) {
    if (g.cols() != interp.gain().cols()) throw std::invalid_argument("estimate: observation width != J");
    out.push_back(g * interp.gain().transpose());
  }
  return out;
}

double interpolation_error_small(const ChannelStats& stats, const AnalogFeedbackConfig& cfg) {
  validate(cfg, stats.n_subcarriers());
  const CMat alpha = sampled_dft_block(stats, cfg.clusters);
  const CMat root = psd_sqrt(stats.tap_covariance());
  const int l = stats.n_taps();
  const double scale = cfg.rho() * stats.n_subcarriers();
  CMat b = CMat::Identity(l, l) + scale * root * alpha.adjoint() * alpha * root;
  b = 0.5 * (b + b.adjoint()).eval();
  const Eigen::LLT<CMat> llt(b);
  const CMat x = llt.solve(stats.tap_covariance());
  return x.trace().real();
}

}  // namespace csifb
