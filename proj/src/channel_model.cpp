#include "csifb/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csifb {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

struct PulseEval {
  double w;
  double operator()(const TriangularPulse& p, double t) const {
    const double half = 0.5 * p.base_width_s;
    return std::max(0.0, 1.0 - std::abs(t) / half);
  }
  double operator()(const RaisedCosinePulse& p, double t) const {
    const double x = t * w;
    if (std::abs(x) > 0.5 * p.span_symbols) return 0.0;
    const double b = p.rolloff;
    const double denom = 1.0 - 4.0 * b * b * x * x;
    if (b > 0.0 && std::abs(denom) < 1e-10) return 0.25 * kPi * sinc(0.5 / b);
    return sinc(x) * std::cos(kPi * b * x) / denom;
  }
  double operator()(const TabulatedPulse& p, double t) const {
    if (p.samples.empty()) return 0.0;
    const double pos = (t - p.start_s) / p.spacing_s;
    const double last = static_cast<double>(p.samples.size() - 1);
    if (pos < 0.0 || pos > last) return 0.0;
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= p.samples.size()) return p.samples.back();
    const double frac = pos - static_cast<double>(i);
    return (1.0 - frac) * p.samples[i] + frac * p.samples[i + 1];
  }
};

struct PulseSupport {
  double w;
  std::pair<double, double> operator()(const TriangularPulse& p) const {
    return {-0.5 * p.base_width_s, 0.5 * p.base_width_s};
  }
  std::pair<double, double> operator()(const RaisedCosinePulse& p) const {
    const double half = 0.5 * p.span_symbols / w;
    return {-half, half};
  }
  std::pair<double, double> operator()(const TabulatedPulse& p) const {
    const double n = p.samples.empty() ? 0.0 : static_cast<double>(p.samples.size() - 1);
    return {p.start_s, p.start_s + n * p.spacing_s};
  }
};

void validate_pulse(const Pulse& pulse) {
  if (const auto* t = std::get_if<TriangularPulse>(&pulse); t && !(t->base_width_s > 0.0))
    throw std::invalid_argument("triangular pulse needs a positive base width");
  if (const auto* r = std::get_if<RaisedCosinePulse>(&pulse);
      r && (r->rolloff < 0.0 || r->rolloff > 1.0 || !(r->span_symbols > 0.0)))
    throw std::invalid_argument("raised-cosine pulse needs rolloff in [0, 1] and a positive span");
  if (const auto* tab = std::get_if<TabulatedPulse>(&pulse);
      tab && (tab->samples.empty() || !(tab->spacing_s > 0.0)))
    throw std::invalid_argument("tabulated pulse needs samples and a positive spacing");
}

constexpr double kNegligiblePulse = 1e-12;
constexpr double kTailTolerance = 1e-6;
constexpr double kPsdTolerance = 1e-10;

}  // namespace

double evaluate_pulse(const Pulse& pulse, double t_s, double sample_rate_hz) {
  return std::visit([&](const auto& p) { return PulseEval{sample_rate_hz}(p, t_s); }, pulse);
}

std::pair<double, double> pulse_support(const Pulse& pulse, double sample_rate_hz) {
  return std::visit([&](const auto& p) { return PulseSupport{sample_rate_hz}(p); }, pulse);
}

RVec ChannelStats::path_weights() const { return psi_.colwise().squaredNorm().transpose(); }

void ChannelStats::finalize() {
  total_power_ = tap_cov_.diagonal().real().sum();
  tap_variances_ = tap_cov_.diagonal().real();
  const CMat f = unitary_dft(n_subcarriers_);
  dft_block_ = std::sqrt(static_cast<double>(n_subcarriers_)) * f.leftCols(n_taps_);
}

ChannelStats build_dip_stats(std::span<const double> dip, int n_subcarriers) {
  if (dip.empty()) throw std::invalid_argument("build_dip_stats: empty delay intensity profile");
  if (n_subcarriers <= 0) throw std::invalid_argument("build_dip_stats: N must be positive");
  if (static_cast<int>(dip.size()) > n_subcarriers)
    throw std::invalid_argument("build_dip_stats: L exceeds N");
  double sum = 0.0;
  for (double v : dip) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("build_dip_stats: negative DIP entry");
    sum += v;
  }
  if (sum <= 0.0) throw std::invalid_argument("build_dip_stats: all-zero DIP");

  ChannelStats s;
  s.kind_ = ModelKind::DiscreteDip;
  s.n_subcarriers_ = n_subcarriers;
  s.n_taps_ = static_cast<int>(dip.size());
  s.path_variances_ = Eigen::Map<const RVec>(dip.data(), s.n_taps_);
  s.psi_ = CMat::Identity(s.n_taps_, s.n_taps_);
  s.tap_cov_ = s.path_variances_.cast<cd>().asDiagonal();
  s.finalize();
  return s;
}

ChannelStats build_physical_stats(std::span<const double> delays_s, std::span<const double> path_vars,
                                  const Pulse& pulse, double sample_rate_hz, std::optional<int> n_taps,
                                  int n_subcarriers) {
  if (delays_s.empty() || delays_s.size() != path_vars.size())
    throw std::invalid_argument("build_physical_stats: delays and variances must be non-empty and equal length");
  if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("build_physical_stats: sample rate must be positive");
  if (n_subcarriers <= 0) throw std::invalid_argument("build_physical_stats: N must be positive");
  validate_pulse(pulse);
  for (std::size_t p = 0; p < delays_s.size(); ++p) {
    if (!(delays_s[p] >= 0.0)) throw std::invalid_argument("build_physical_stats: negative path delay");
    if (p > 0 && delays_s[p] < delays_s[p - 1])
      throw std::invalid_argument("build_physical_stats: delays must be nondecreasing");
    if (!(path_vars[p] > 0.0)) throw std::invalid_argument("build_physical_stats: path variances must be positive");
  }

  const int n_paths = static_cast<int>(delays_s.size());
  const auto [lo, hi] = pulse_support(pulse, sample_rate_hz);

  // Sample every path's pulse over its full support; record energies.
  int last_tap = 0;
  std::vector<std::vector<std::pair<long, double>>> samples(n_paths);
  for (int p = 0; p < n_paths; ++p) {
    const double shift = delays_s[p] * sample_rate_hz;
    const long first = static_cast<long>(std::floor(shift + lo * sample_rate_hz)) - 1;
    const long last = static_cast<long>(std::ceil(shift + hi * sample_rate_hz)) + 1;
    for (long l = first; l <= last; ++l) {
      const double v = evaluate_pulse(pulse, static_cast<double>(l) / sample_rate_hz - delays_s[p], sample_rate_hz);
      if (std::abs(v) > kNegligiblePulse) {
        samples[p].emplace_back(l, v);
        last_tap = std::max<int>(last_tap, static_cast<int>(l));
      }
    }
    if (samples[p].empty()) throw std::invalid_argument("build_physical_stats: pulse misses every sample instant");
  }

  const int taps = n_taps.value_or(last_tap + 1);
  if (taps <= 0) throw std::invalid_argument("build_physical_stats: L must be positive");
  if (taps > n_subcarriers) throw std::invalid_argument("build_physical_stats: L exceeds N");

  CMat psi = CMat::Zero(taps, n_paths);
  for (int p = 0; p < n_paths; ++p) {
    double total = 0.0;
    double inside = 0.0;
    for (const auto& [l, v] : samples[p]) {
      total += v * v;
      if (l >= 0 && l < taps) {
        inside += v * v;
        psi(l, p) = v;
      }
    }
    if (total - inside > kTailTolerance * total)
      throw std::invalid_argument("build_physical_stats: pulse energy of path " + std::to_string(p) +
                                  " truncated by the tap window");
  }

  ChannelStats s;
  s.kind_ = ModelKind::PhysicalWssus;
  s.n_subcarriers_ = n_subcarriers;
  s.n_taps_ = taps;
  s.path_delays_ = Eigen::Map<const RVec>(delays_s.data(), n_paths);
  s.path_variances_ = Eigen::Map<const RVec>(path_vars.data(), n_paths);
  s.pulse_ = pulse;
  s.sample_rate_ = sample_rate_hz;
  s.psi_ = psi;

  CMat cov = psi * s.path_variances_.cast<cd>().asDiagonal() * psi.adjoint();
  cov = 0.5 * (cov + cov.adjoint()).eval();
  const double trace = cov.diagonal().real().sum();
  const HermitianEig eig = hermitian_eig(cov);
  if (eig.values.minCoeff() < -kPsdTolerance * trace)
    throw std::invalid_argument("build_physical_stats: tap covariance is not PSD");
  if (eig.values.minCoeff() < 0.0) {
    const RVec clamped = eig.values.cwiseMax(0.0);
    cov = eig.vectors * clamped.cast<cd>().asDiagonal() * eig.vectors.adjoint();
  }
  s.tap_cov_ = cov;
  s.finalize();
  return s;
}

CMat taps_to_freq(const ChannelStats& stats, const CMat& taps) { return taps * stats.dft_block().transpose(); }

ChannelRealization sample_channel(const ChannelStats& stats, int n_antennas, int n_users, const TrialSeed& seed) {
  if (n_antennas <= 0 || n_users <= 0) throw std::invalid_argument("sample_channel: M and K must be positive");
  const bool physical = stats.kind() == ModelKind::PhysicalWssus;
  const int n_coef = physical ? stats.n_paths() : stats.n_taps();
  const RVec& var = stats.path_variances();

  ChannelRealization real;
  real.taps.resize(n_users);
  real.freq.resize(n_users);
  if (physical) real.phys.resize(n_users);
  for (int k = 0; k < n_users; ++k) {
    CMat coef(n_antennas, n_coef);
    for (int m = 0; m < n_antennas; ++m) {
      RandomStream rng = seed.stream(StreamTag::Channel, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(m));
      for (int c = 0; c < n_coef; ++c) coef(m, c) = rng.complex_normal(var(c));
    }
    if (physical) {
      real.taps[k] = coef * stats.psi().transpose();
      real.phys[k] = std::move(coef);
    } else {
      real.taps[k] = std::move(coef);
    }
    real.freq[k] = taps_to_freq(stats, real.taps[k]);
  }
  return real;
}

cd freq_correlation(const ChannelStats& stats, int delta) {
  const int n = stats.n_subcarriers();
  const long shift = ((static_cast<long>(delta) % n) + n) % n;
  cd acc = 0.0;
  const RVec& diag = stats.tap_variances();
  for (int l = 0; l < stats.n_taps(); ++l) {
    const long k = (static_cast<long>(l) * shift) % n;
    acc += diag(l) * std::polar(1.0, -2.0 * kPi * static_cast<double>(k) / n);
  }
  return acc / stats.total_power();
}

CMat freq_covariance(const ChannelStats& stats) {
  const CMat& d = stats.dft_block();
  CMat cov = d * stats.tap_covariance() * d.adjoint();
  return 0.5 * (cov + cov.adjoint());
}

std::vector<std::string> preset_names() { return {"paper-dip5", "sui4-omni"}; }

ChannelStats preset_stats(const std::string& name, int n_subcarriers) {
  if (name == "paper-dip5") {
    const std::vector<double> dip{0.5, 0.24, 0.17, 0.06, 0.03};
    return build_dip_stats(dip, n_subcarriers);
  }
  if (name == "sui4-omni") {
    const double w = 1e6;
    const std::vector<double> delays{0.0, 1.5e-6, 4e-6};
    const std::vector<double> vars{1.0, 0.3162, 0.1585};
    return build_physical_stats(delays, vars, TriangularPulse{2.0 / w}, w, std::nullopt, n_subcarriers);
  }
  throw std::invalid_argument("unknown channel preset '" + name + "'");
}

}  // namespace csifb
