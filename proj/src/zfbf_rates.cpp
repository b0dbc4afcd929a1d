#include "csifb/zfbf_rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/expint.hpp>

namespace csifb {

int BeamformerSet::degenerate_count() const {
  return static_cast<int>(std::count(degenerate.begin(), degenerate.end(), char{1}));
}

bool zf_directions(const CMat& csit_n, CMat& beams) {
  const Eigen::Index m = csit_n.rows();
  const Eigen::Index k = csit_n.cols();
  if (k != m) throw std::invalid_argument("zf_directions: K must equal M");
  const CMat a = csit_n.adjoint();  // row k = H_k^H
  const Eigen::ColPivHouseholderQR<CMat> qr(a);
  const double top = qr.maxPivot();
  const double bottom = std::abs(qr.matrixQR()(k - 1, k - 1));
  if (!(top > 0.0) || !(bottom * kZfConditionLimit > top)) {
    beams = CMat::Zero(m, k);
    return false;
  }
  beams = qr.solve(CMat::Identity(k, k));
  for (Eigen::Index j = 0; j < k; ++j) beams.col(j).normalize();
  return true;
}

BeamformerSet zf_beamformer(const std::vector<CMat>& csit) {
  if (csit.empty()) throw std::invalid_argument("zf_beamformer: no users");
  const Eigen::Index m = csit.front().rows();
  const Eigen::Index n = csit.front().cols();
  const auto k = static_cast<Eigen::Index>(csit.size());
  for (const CMat& c : csit)
    if (c.rows() != m || c.cols() != n) throw std::invalid_argument("zf_beamformer: CSIT shapes differ");
  BeamformerSet set;
  set.beams.resize(n);
  set.degenerate.assign(n, 0);
  CMat stacked(m, k);
  for (Eigen::Index sc = 0; sc < n; ++sc) {
    for (Eigen::Index u = 0; u < k; ++u) stacked.col(u) = csit[u].col(sc);
    if (!zf_directions(stacked, set.beams[sc])) set.degenerate[sc] = 1;
  }
  return set;
}

double perfect_csit_rate(double snr, int antennas, double sigma_h2) {
  if (!(snr > 0.0)) throw std::invalid_argument("perfect_csit_rate: snr must be positive");
  if (antennas <= 0 || !(sigma_h2 > 0.0)) throw std::invalid_argument("perfect_csit_rate: bad M or sigma_H^2");
  const double x = antennas / (snr * sigma_h2);
  if (x > 700.0) {
    // e^x E1(x) ~ (1/x)(1 - 1/x + 2/x^2 - 6/x^3)
    const double r = 1.0 / x;
    return r * (1.0 - r + 2.0 * r * r - 6.0 * r * r * r);
  }
  return std::exp(x) * boost::math::expint(1, x);
}

namespace {

struct TrialResult {
  RMat interference;  // K x N
  double genie_sum = 0.0;
  RVec genie_user;
  int degenerate = 0;
};

TrialResult run_trial(const ChannelStats& stats, const CsitScheme& scheme, double snr, int antennas, int users,
                      const TrialSeed& seed) {
  const ChannelRealization real = sample_channel(stats, antennas, users, seed);
  const std::vector<CMat> csit = scheme(real, seed);
  if (static_cast<int>(csit.size()) != users) throw std::runtime_error("CSIT scheme returned the wrong user count");
  const BeamformerSet set = zf_beamformer(csit);
  const int n = set.n_subcarriers();
  const double p = snr / antennas;

  TrialResult out;
  out.interference = RMat::Zero(users, n);
  out.genie_user = RVec::Zero(users);
  out.degenerate = set.degenerate_count();
  CMat h(antennas, users);
  for (int sc = 0; sc < n; ++sc) {
    if (set.degenerate[sc]) continue;
    for (int k = 0; k < users; ++k) h.col(k) = real.freq[k].col(sc);
    const RMat coupling = (h.adjoint() * set.beams[sc]).cwiseAbs2();  // |a_kj|^2
    for (int k = 0; k < users; ++k) {
      const double interf = (coupling.row(k).sum() - coupling(k, k)) * p;
      out.interference(k, sc) = interf;
      out.genie_user(k) += std::log1p(coupling(k, k) * p / (1.0 + interf));
    }
  }
  out.genie_sum = out.genie_user.sum();
  return out;
}

}  // namespace

RateEstimate mc_rates(const ChannelStats& stats, const CsitScheme& scheme, double snr, int antennas, int users,
                      const McOptions& opts) {
  if (users != antennas) throw std::invalid_argument("mc_rates: K must equal M");
  if (opts.n_trials < 2) throw std::invalid_argument("mc_rates: need at least two trials");
  const std::size_t t_count = opts.n_trials;
  std::vector<TrialResult> trials(t_count);
  parallel_for(t_count, opts.jobs, [&](std::size_t t) {
    trials[t] = run_trial(stats, scheme, snr, antennas, users, TrialSeed{opts.seed, t});
  });

  const int n = stats.n_subcarriers();
  const double tn = static_cast<double>(t_count);
  RMat mean_kn = RMat::Zero(users, n);
  RVec genie_user = RVec::Zero(users);
  long degenerate = 0;
  for (const TrialResult& tr : trials) {
    mean_kn += tr.interference;
    genie_user += tr.genie_user;
    degenerate += tr.degenerate;
  }
  mean_kn /= tn;
  const RVec mean_n = mean_kn.colwise().mean().transpose();

  RateEstimate est;
  est.n_trials = t_count;
  est.csit_rate_nats = perfect_csit_rate(snr, antennas, stats.total_power());
  est.degenerate_fraction = static_cast<double>(degenerate) / (tn * n);
  est.interference_mean = mean_n;

  for (int sc = 0; sc < n; ++sc) est.gap_nats += std::log1p(mean_n(sc));
  est.gap_nats /= n;
  est.per_user_gap.resize(users);
  for (int k = 0; k < users; ++k) {
    double g = 0.0;
    for (int sc = 0; sc < n; ++sc) g += std::log1p(mean_kn(k, sc));
    est.per_user_gap[k] = g / n;
  }

  // delta method: gap is smooth in the per-subcarrier means
  RVec y(t_count);
  RVec genie(t_count);
  RMat xbar(t_count, n);
  for (std::size_t t = 0; t < t_count; ++t) {
    const RVec row = trials[t].interference.colwise().mean().transpose();
    xbar.row(t) = row.transpose();
    y(t) = (row.array() / (1.0 + mean_n.array())).sum() / n;
    genie(t) = trials[t].genie_sum / (static_cast<double>(users) * n);
  }
  auto stderr_of = [tn](const RVec& v) {
    const double mu = v.mean();
    return std::sqrt((v.array() - mu).square().sum() / (tn - 1.0) / tn);
  };
  est.gap_stderr = stderr_of(y);
  est.interference_stderr.resize(n);
  for (int sc = 0; sc < n; ++sc) est.interference_stderr(sc) = stderr_of(xbar.col(sc));

  const double live = 1.0 - est.degenerate_fraction;
  if (live > 0.0) {
    est.genie_upper_nats = genie.mean() / live;
    est.genie_stderr = stderr_of(genie) / live;
    est.per_user_genie.resize(users);
    for (int k = 0; k < users; ++k) est.per_user_genie[k] = genie_user(k) / (tn * n) / live;
  } else {
    est.per_user_genie.assign(users, 0.0);
  }
  est.lower_nats = live * est.csit_rate_nats - est.gap_nats;
  return est;
}

// ---------------------------------------------------------------------------
// Schemes
// ---------------------------------------------------------------------------

CsitScheme perfect_csit_scheme() {
  return [](const ChannelRealization& real, const TrialSeed&) { return real.freq; };
}

CsitScheme analog_scheme(const MmseInterpolator& interp, AnalogFeedbackConfig cfg) {
  return [interp, cfg](const ChannelRealization& real, const TrialSeed& seed) {
    return estimate(simulate_feedback(real, cfg, seed), interp);
  };
}

std::pair<int, int> rvq_cluster_offsets(int n_subcarriers, int clusters) {
  if (clusters <= 0 || n_subcarriers % clusters != 0)
    throw std::invalid_argument("RVQ: J = " + std::to_string(clusters) + " does not divide N = " +
                                std::to_string(n_subcarriers));
  const int width = n_subcarriers / clusters;
  if (width % 2 == 0) return {width / 2 - 1, width / 2};
  return {width / 2, width / 2};
}

CsitScheme rvq_scheme(int n_subcarriers, int clusters, int bits, int bit_cap) {
  const auto [a, b] = rvq_cluster_offsets(n_subcarriers, clusters);
  if (bits > bit_cap)
    throw ResourceError("RVQ: " + std::to_string(bits) + " bits per cluster exceeds the cap of " +
                        std::to_string(bit_cap));
  const int width = n_subcarriers / clusters;
  return [=](const ChannelRealization& real, const TrialSeed& seed) {
    const int m = real.n_antennas();
    std::vector<CMat> out(real.n_users());
    CMat reps(m, clusters);
    for (int k = 0; k < real.n_users(); ++k) {
      RandomStream rng = seed.stream(StreamTag::Codebook, static_cast<std::uint64_t>(k));
      const RvqCodebook cb = rvq_build(m, bits, rng, bit_cap);
      for (int i = 0; i < clusters; ++i) reps.col(i) = real.freq[k].col(i * width);
      const std::vector<std::size_t> idx = rvq_quantize_columns(reps, cb);
      out[k].resize(m, n_subcarriers);
      for (int i = 0; i < clusters; ++i)
        for (int d = -a; d <= b; ++d) {
          const int sc = ((i * width + d) % n_subcarriers + n_subcarriers) % n_subcarriers;
          out[k].col(sc) = cb.codewords.col(static_cast<Eigen::Index>(idx[i]));
        }
    }
    return out;
  };
}

CsitScheme tdq_scheme(TransformCodec codec, BitAllocation alloc) {
  return [codec = std::move(codec), alloc = std::move(alloc)](const ChannelRealization& real, const TrialSeed&) {
    return codec.quantize(real, alloc);
  };
}

CsitScheme tdq_limit_scheme(TransformCodec codec, BitAllocation alloc) {
  return [codec = std::move(codec), alloc = std::move(alloc)](const ChannelRealization& real,
                                                              const TrialSeed& seed) {
    return codec.rd_limit(real, alloc, seed);
  };
}

}  // namespace csifb
