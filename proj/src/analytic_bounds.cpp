#include "csifb/analytic_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "csifb/zfbf_rates.hpp"

namespace csifb {

double budget_to_bits(const FeedbackBudget& b) {
  if (!(b.alpha_fb >= 0.0)) throw std::invalid_argument("budget_to_bits: negative alpha_fb");
  const double per_use = std::log2(1.0 + b.snr);
  switch (b.scheme) {
    case BudgetScheme::Rvq:
      return b.alpha_fb * (b.antennas - 1) * per_use;
    case BudgetScheme::Digital:
      return b.alpha_fb * b.antennas * per_use;
    case BudgetScheme::Analog:
      break;
  }
  throw std::invalid_argument("budget_to_bits: analog feedback is measured in channel uses, not bits");
}

double gap_from_distortion(double distortion, double snr, int antennas) {
  return std::log1p((antennas - 1.0) / antennas * snr * std::max(0.0, distortion));
}

// ---------------------------------------------------------------------------

namespace {

struct AnalogSpectra {
  std::vector<double> source;   // decreasing, n_coefficients entries
  std::vector<double> observed; // top z eigenvalues of alpha Sigma_h alpha^H, increasing
};

AnalogSpectra analog_spectra(const ChannelStats& stats, int clusters) {
  validate(AnalogFeedbackConfig{clusters, 1.0, 1.0}, stats.n_subcarriers());
  const int n = stats.n_coefficients();
  const RVec src = hermitian_eigenvalues(stats.tap_covariance());
  AnalogSpectra s;
  for (Eigen::Index i = src.size() - 1; i >= src.size() - n; --i) s.source.push_back(std::max(0.0, src(i)));

  const CMat alpha = sampled_dft_block(stats, clusters);
  const RVec lam = hermitian_eigenvalues(alpha * stats.tap_covariance() * alpha.adjoint());
  const double top = lam.size() > 0 ? lam(lam.size() - 1) : 0.0;
  const int z = std::min(clusters, n);
  for (Eigen::Index i = lam.size() - z; i < lam.size(); ++i)
    s.observed.push_back(lam(i) > 1e-9 * top ? lam(i) : 0.0);
  return s;
}

}  // namespace

double bound_analog(const ChannelStats& stats, int clusters, double beta, double snr, int antennas) {
  if (!(beta >= 1.0)) throw std::invalid_argument("bound_analog: beta must be >= 1");
  const AnalogSpectra s = analog_spectra(stats, clusters);
  const int n = static_cast<int>(s.source.size());
  const int z = static_cast<int>(s.observed.size());
  const double scale = stats.n_subcarriers() * beta * snr;
  double term = 0.0;
  for (int i = 0; i < n - z; ++i) term += s.source[i];
  for (int l = n - z; l < n; ++l) term += s.source[l] / (1.0 + scale * s.observed[l - n + z]);
  return gap_from_distortion(term, snr, antennas);
}

double bound_analog_limit(const ChannelStats& stats, int clusters, double beta, int antennas) {
  const AnalogSpectra s = analog_spectra(stats, clusters);
  const int n = static_cast<int>(s.source.size());
  if (static_cast<int>(s.observed.size()) < n) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int l = 0; l < n; ++l) {
    if (s.source[l] == 0.0) continue;
    if (s.observed[l] == 0.0) return std::numeric_limits<double>::infinity();
    sum += s.source[l] / (beta * s.observed[l]);
  }
  return std::log1p((antennas - 1.0) / (antennas * static_cast<double>(stats.n_subcarriers())) * sum);
}

double analog_trace_gap(const MmseInterpolator& interp, double snr, int antennas) {
  return gap_from_distortion(interp.mean_error(), snr, antennas);
}

double analog_trace_gap_under(const MmseInterpolator& interp, const ChannelStats& truth, double snr, int antennas) {
  const CMat cov = interp.error_covariance_under(truth);
  return gap_from_distortion(cov.diagonal().real().mean(), snr, antennas);
}

double analog_jensen_gap(const MmseInterpolator& interp, double snr, int antennas) {
  const RVec per = interp.error_per_subcarrier();
  double acc = 0.0;
  for (Eigen::Index n = 0; n < per.size(); ++n) acc += gap_from_distortion(per(n), snr, antennas);
  return acc / static_cast<double>(per.size());
}

// ---------------------------------------------------------------------------

double bound_rvq(const ChannelStats& stats, int clusters, double bits, double snr, int antennas) {
  if (!(bits >= 0.0)) throw std::invalid_argument("bound_rvq: negative bit count");
  if (antennas < 2) throw std::invalid_argument("bound_rvq: needs M >= 2");
  const int n = stats.n_subcarriers();
  const auto [a, b] = rvq_cluster_offsets(n, clusters);
  const double quant = std::exp2(-bits / (antennas - 1.0));
  const double spread = (antennas - 1.0) / antennas;
  double acc = 0.0;
  for (int d = -a; d <= b; ++d) {
    const double c2 = std::norm(freq_correlation(stats, d));
    acc += std::log1p(stats.total_power() * snr * (c2 * quant + spread * (1.0 - c2)));
  }
  return acc * clusters / n;
}

RvqBudgetChoice bound_rvq_budget(const ChannelStats& stats, double alpha_fb, double snr, int antennas,
                                 std::span<const int> cluster_grid) {
  if (cluster_grid.empty()) throw std::invalid_argument("bound_rvq_budget: empty J grid");
  const double total = budget_to_bits({alpha_fb, antennas, snr, BudgetScheme::Rvq});
  std::vector<int> grid(cluster_grid.begin(), cluster_grid.end());
  std::sort(grid.begin(), grid.end());
  RvqBudgetChoice out;
  out.best_gap = std::numeric_limits<double>::infinity();
  for (int j : grid) {
    const double gap = bound_rvq(stats, j, total / j, snr, antennas);
    out.per_clusters.emplace_back(j, gap);
    if (gap < out.best_gap) {
      out.best_gap = gap;
      out.best_clusters = j;
    }
  }
  return out;
}

double rvq_per_carrier_gap(double sigma_h2, double alpha_fb, double snr, int n_subcarriers) {
  return std::log1p(sigma_h2 * snr * std::pow(1.0 + snr, -alpha_fb / n_subcarriers));
}

double rvq_per_carrier_relaxed(double sigma_h2, double alpha_fb, double snr, int n_subcarriers) {
  return std::log1p(sigma_h2 * std::pow(snr, 1.0 - alpha_fb / n_subcarriers));
}

// ---------------------------------------------------------------------------

double bound_tdq_limit(const ChannelStats& stats, double distortion, double snr, int antennas, TdqDomain domain) {
  const double n = stats.n_subcarriers();
  const double scale = domain == TdqDomain::TimeTaps ? 1.0 : n;
  if (!(distortion >= 0.0) || distortion > scale * stats.total_power() * (1.0 + 1e-12))
    throw std::invalid_argument("bound_tdq_limit: distortion outside [0, total variance]");
  return gap_from_distortion(distortion / scale, snr, antennas);
}

double bound_tdq_rate(const ChannelStats& stats, QuantDomain domain, double rate_bits, double snr, int antennas) {
  const TransformCodec codec(stats, domain);
  const RVec& v = codec.variances();
  const RVec& w = codec.weights();
  const BitAllocation a = weighted_rwf_by_rate(std::span<const double>(v.data(), v.size()),
                                               std::span<const double>(w.data(), w.size()), rate_bits);
  return gap_from_distortion(a.total_distortion, snr, antennas);
}

double bound_tdq_highsnr_rate(const ChannelStats& stats, double rate_bits, double snr, int antennas, int n_coeff) {
  return std::log1p(stats.total_power() * snr * (antennas - 1.0) / antennas * std::exp2(-rate_bits / n_coeff));
}

double bound_tdq_highsnr_budget(const ChannelStats& stats, double alpha_fb, double snr, int antennas, int n_coeff) {
  return std::log1p(stats.total_power() * (antennas - 1.0) / antennas * std::pow(snr, 1.0 - alpha_fb / n_coeff));
}

double bound_tdq_geometric(std::span<const double> variances, double rate_bits, double snr, int antennas) {
  const double n = static_cast<double>(variances.size());
  double log_gm = 0.0;
  for (double v : variances) {
    if (!(v > 0.0)) throw std::invalid_argument("bound_tdq_geometric: variances must be positive");
    log_gm += std::log2(v);
  }
  const double gamma = std::exp2(-rate_bits / n + log_gm / n);
  return std::log1p(snr * (antennas - 1.0) / antennas * n * gamma);
}

double bound_suq(const BitAllocation& alloc, double snr, int antennas) {
  double d = 0.0;
  for (std::size_t l = 0; l < alloc.size(); ++l) d += alloc.weights[l] * alloc.distortions[l];
  return gap_from_distortion(d, snr, antennas);
}

double bound_suq_uniform(const ChannelStats& stats, double total_bits, double snr, int antennas, int n_coeff,
                         double kappa) {
  const double per = total_bits / (static_cast<double>(n_coeff) * antennas);
  return std::log1p(kappa * stats.total_power() * (antennas - 1.0) / antennas * snr * std::exp2(-per) * per);
}

double bound_suq_asymptotic(const ChannelStats& stats, double alpha_fb, double snr, int antennas, int n_coeff,
                            double kappa) {
  return std::log1p(kappa * alpha_fb * stats.total_power() / n_coeff * (antennas - 1.0) / antennas *
                    std::pow(snr, 1.0 - alpha_fb / n_coeff) * std::log2(1.0 + snr));
}

// ---------------------------------------------------------------------------

double sum_rate_lower(const ChannelStats& stats, double snr, int antennas, int users, double gap_nats) {
  if (users != antennas) throw std::invalid_argument("sum_rate_lower: K must equal M");
  return users * std::max(0.0, perfect_csit_rate(snr, antennas, stats.total_power()) - gap_nats);
}

std::vector<int> divisors(int n) {
  std::vector<int> out;
  for (int d = 1; d <= n; ++d)
    if (n % d == 0) out.push_back(d);
  return out;
}

}  // namespace csifb
