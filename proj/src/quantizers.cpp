#include "csifb/quantizers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace csifb {

// ---------------------------------------------------------------------------
// RVQ
// ---------------------------------------------------------------------------

RvqCodebook rvq_build(int antennas, int bits, RandomStream& rng, int bit_cap) {
  if (antennas <= 0) throw std::invalid_argument("rvq_build: M must be positive");
  if (bits < 0) throw std::invalid_argument("rvq_build: negative bit count");
  if (bits > bit_cap)
    throw ResourceError("rvq_build: B = " + std::to_string(bits) + " exceeds the codebook cap of " +
                        std::to_string(bit_cap) + " bits");
  const Eigen::Index count = Eigen::Index{1} << bits;
  RvqCodebook cb;
  cb.antennas = antennas;
  cb.bits = bits;
  cb.codewords.resize(antennas, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (int m = 0; m < antennas; ++m) cb.codewords(m, i) = rng.complex_normal(1.0);
    cb.codewords.col(i).normalize();
  }
  return cb;
}

RvqChoice rvq_quantize(const CVec& h, const RvqCodebook& cb) {
  if (h.size() != cb.antennas) throw std::invalid_argument("rvq_quantize: dimension mismatch");
  const double norm2 = h.squaredNorm();
  if (!(norm2 > 0.0)) throw std::invalid_argument("rvq_quantize: zero channel vector has no direction");
  const RVec gains = (cb.codewords.adjoint() * h).cwiseAbs2();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < gains.size(); ++i)
    if (gains(i) > gains(best)) best = i;
  return {static_cast<std::size_t>(best), cb.codewords.col(best), std::max(0.0, 1.0 - gains(best) / norm2)};
}

std::vector<std::size_t> rvq_quantize_columns(const CMat& channels, const RvqCodebook& cb) {
  if (channels.rows() != cb.antennas) throw std::invalid_argument("rvq_quantize_columns: dimension mismatch");
  const RMat gains = (cb.codewords.adjoint() * channels).cwiseAbs2();
  std::vector<std::size_t> out(channels.cols());
  for (Eigen::Index c = 0; c < channels.cols(); ++c) {
    if (!(channels.col(c).squaredNorm() > 0.0))
      throw std::invalid_argument("rvq_quantize_columns: zero channel vector has no direction");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < gains.rows(); ++i)
      if (gains(i, c) > gains(best, c)) best = i;
    out[c] = static_cast<std::size_t>(best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reverse waterfilling
// ---------------------------------------------------------------------------

namespace {

std::vector<double> sorted_positive_desc(std::span<const double> v) {
  std::vector<double> s;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("reverse waterfilling: negative variance");
    if (x > 0.0) s.push_back(x);
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

// Solves sum_l min(gamma, v_l) = D exactly on the piecewise-linear segments.
double level_for_distortion(const std::vector<double>& desc, double distortion) {
  const double total = std::accumulate(desc.begin(), desc.end(), 0.0);
  if (distortion >= total) return desc.front();
  double tail = total;
  for (std::size_t k = 1; k <= desc.size(); ++k) {
    tail -= desc[k - 1];  // sum of variances below the k largest
    const double gamma = (distortion - tail) / static_cast<double>(k);
    const double next = k < desc.size() ? desc[k] : 0.0;
    if (gamma >= next && gamma <= desc[k - 1]) return gamma;
  }
  return distortion / static_cast<double>(desc.size());
}

// Solves sum_l [log2 v_l / gamma]_+ = R exactly.
double level_for_rate(const std::vector<double>& desc, double rate) {
  if (rate <= 0.0) return desc.front();
  double log_sum = 0.0;
  for (std::size_t k = 1; k <= desc.size(); ++k) {
    log_sum += std::log2(desc[k - 1]);
    const double gamma = std::exp2((log_sum - rate) / static_cast<double>(k));
    const double next = k < desc.size() ? desc[k] : 0.0;
    if (gamma >= next && gamma <= desc[k - 1]) return gamma;
  }
  return std::exp2((log_sum - rate) / static_cast<double>(desc.size()));
}

BitAllocation allocation_from_level(std::span<const double> variances, std::span<const double> weights,
                                    double gamma) {
  BitAllocation a;
  a.variances.assign(variances.begin(), variances.end());
  a.weights.assign(weights.begin(), weights.end());
  a.waterlevel = gamma;
  const std::size_t n = variances.size();
  a.bits.resize(n);
  a.distortions.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double w = weights[l];
    const double eff = w * variances[l];
    if (eff <= 0.0) {
      a.bits[l] = 0.0;
      a.distortions[l] = variances[l];
    } else {
      a.bits[l] = std::max(0.0, std::log2(eff / gamma));
      a.distortions[l] = std::min(gamma, eff) / w;
    }
    a.total_bits += a.bits[l];
    a.total_distortion += w * a.distortions[l];
  }
  return a;
}

std::vector<double> effective(std::span<const double> variances, std::span<const double> weights) {
  if (variances.size() != weights.size()) throw std::invalid_argument("reverse waterfilling: weight count mismatch");
  std::vector<double> e(variances.size());
  for (std::size_t l = 0; l < e.size(); ++l) {
    if (!(weights[l] >= 0.0)) throw std::invalid_argument("reverse waterfilling: negative weight");
    e[l] = weights[l] * variances[l];
  }
  return e;
}

}  // namespace

BitAllocation rwf_by_distortion(std::span<const double> variances, double distortion) {
  const std::vector<double> desc = sorted_positive_desc(variances);
  if (desc.empty()) throw std::invalid_argument("rwf_by_distortion: all variances are zero");
  const double total = std::accumulate(desc.begin(), desc.end(), 0.0);
  if (!(distortion > 0.0) || distortion > total * (1.0 + 1e-12))
    throw std::invalid_argument("rwf_by_distortion: D must lie in (0, sum of variances]");
  const std::vector<double> ones(variances.size(), 1.0);
  return allocation_from_level(variances, ones, level_for_distortion(desc, distortion));
}

BitAllocation rwf_by_rate(std::span<const double> variances, double rate_bits) {
  const std::vector<double> ones(variances.size(), 1.0);
  return weighted_rwf_by_rate(variances, ones, rate_bits);
}

BitAllocation weighted_rwf_by_rate(std::span<const double> variances, std::span<const double> weights,
                                   double rate_bits) {
  if (!(rate_bits >= 0.0)) throw std::invalid_argument("rwf_by_rate: negative rate");
  const std::vector<double> eff = effective(variances, weights);
  const std::vector<double> desc = sorted_positive_desc(eff);
  if (desc.empty()) return allocation_from_level(variances, weights, 0.0);
  return allocation_from_level(variances, weights, level_for_rate(desc, rate_bits));
}

// ---------------------------------------------------------------------------
// Scalar uniform quantizer
// ---------------------------------------------------------------------------

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double std_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Integral of (eta - c)^2 f(eta) over [a, b] with f = N(0, s^2); b may be +inf.
double second_moment(double a, double b, double c, double s) {
  const double za = a / s;
  const bool open = std::isinf(b);
  const double zb = open ? 0.0 : b / s;
  const double m0 = 0.5 * (std::erfc(za / std::sqrt(2.0)) - (open ? 0.0 : std::erfc(zb / std::sqrt(2.0))));
  const double pa = std_pdf(za);
  const double pb = open ? 0.0 : std_pdf(zb);
  const double m1 = s * (pa - pb);
  const double m2 = s * s * (m0 + za * pa - (open ? 0.0 : zb * pb));
  return m2 - 2.0 * c * m1 + c * c * m0;
}

constexpr double kNegligibleTail = 40.0;  // standard deviations

SuqDesign line_search_unit(int bits) {
  const int levels = 1 << (bits / 2);
  const double s = std::sqrt(0.5);
  auto cost = [&](double log_step) { return suq_real_distortion(levels, std::exp(log_step), 0.5); };

  // coarse log grid from 1e-6 s to 10 s, then golden-section around its minimum
  const double lo = std::log(1e-6 * s);
  const double hi = std::log(10.0 * s);
  constexpr int kGrid = 160;
  double best_u = lo;
  double best_v = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i <= kGrid; ++i) {
    const double u = lo + (hi - lo) * i / kGrid;
    const double v = cost(u);
    if (v < best_v) {
      best_v = v;
      best_u = u;
      best_i = i;
    }
  }
  const double cell = (hi - lo) / kGrid;
  double a = best_i == 0 ? best_u : best_u - cell;
  double b = best_i == kGrid ? best_u : best_u + cell;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = cost(x1);
  double f2 = cost(x2);
  while (b - a > 1e-13) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = cost(x2);
    }
  }
  const double u = 0.5 * (a + b);
  SuqDesign d;
  d.bits = bits;
  d.levels = levels;
  d.step = std::exp(u);
  d.distortion = 2.0 * cost(u);
  return d;
}

const SuqDesign& unit_design(int bits) {
  static std::array<std::once_flag, kMaxSuqBits + 1> flags;
  static std::array<SuqDesign, kMaxSuqBits + 1> table;
  std::call_once(flags[bits], [bits] { table[bits] = line_search_unit(bits); });
  return table[bits];
}

void check_bits(int bits) {
  if (bits < 0) throw std::invalid_argument("design_suq: negative bit count");
  if (bits == 1)
    throw std::invalid_argument("design_suq: one bit cannot be split over the real and imaginary parts");
  if (bits > kMaxSuqBits)
    throw std::invalid_argument("design_suq: more than " + std::to_string(kMaxSuqBits) + " bits per coefficient");
}

}  // namespace

double suq_real_distortion(int levels, double step, double real_variance) {
  if (levels <= 1) return real_variance;
  if (levels % 2 != 0) throw std::invalid_argument("suq_real_distortion: level count must be even");
  if (!(step > 0.0)) throw std::invalid_argument("suq_real_distortion: step must be positive");
  if (real_variance <= 0.0) return 0.0;
  const double s = std::sqrt(real_variance);
  const int half = levels / 2;
  double sum = 0.0;
  for (int i = 0; i <= half - 2; ++i) {
    const double a = i * step;
    if (a > kNegligibleTail * s) break;
    sum += second_moment(a, a + step, (i + 0.5) * step, s);
  }
  const double over = (half - 1) * step;
  if (over <= kNegligibleTail * s)
    sum += second_moment(over, std::numeric_limits<double>::infinity(), (levels - 1) * 0.5 * step, s);
  return 2.0 * sum;
}

double unit_suq_distortion(int bits) {
  check_bits(bits);
  if (bits == 0) return 1.0;
  return unit_design(bits).distortion;
}

SuqDesign design_suq(double sigma2, int bits, StepRule rule) {
  check_bits(bits);
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("design_suq: negative variance");
  SuqDesign d;
  d.bits = bits;
  if (bits == 0) {
    d.distortion = sigma2;
    return d;
  }
  d.levels = 1 << (bits / 2);
  if (sigma2 == 0.0) return d;
  if (rule == StepRule::LineSearch) {
    const SuqDesign& u = unit_design(bits);
    d.step = std::sqrt(sigma2) * u.step;
    d.distortion = sigma2 * u.distortion;
  } else {
    d.step = std::sqrt(4.0 * bits * sigma2 / std::log2(std::exp(1.0))) * std::exp2(-0.5 * bits);
    d.distortion = 2.0 * suq_real_distortion(d.levels, d.step, 0.5 * sigma2);
  }
  return d;
}

double suq_quantize_real(double x, double step, int levels) {
  if (levels <= 1 || !(step > 0.0)) return 0.0;
  const int half = levels / 2;
  const double cell = std::floor(std::abs(x) / step);
  const double idx = std::min(cell, static_cast<double>(half - 1));
  const double mag = (idx + 0.5) * step;
  return std::signbit(x) ? -mag : mag;
}

cd suq_quantize(cd value, double step, int levels) {
  return {suq_quantize_real(value.real(), step, levels), suq_quantize_real(value.imag(), step, levels)};
}

BitAllocation suq_allocation(std::span<const double> variances, std::span<const double> weights,
                             std::span<const int> bits) {
  if (variances.size() != weights.size() || variances.size() != bits.size())
    throw std::invalid_argument("suq_allocation: length mismatch");
  BitAllocation a;
  a.variances.assign(variances.begin(), variances.end());
  a.weights.assign(weights.begin(), weights.end());
  const std::size_t n = variances.size();
  a.bits.resize(n);
  a.distortions.resize(n);
  a.steps.resize(n);
  a.levels.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    const SuqDesign d = design_suq(variances[l], bits[l]);
    a.bits[l] = bits[l];
    a.steps[l] = d.step;
    a.levels[l] = d.levels;
    a.distortions[l] = d.distortion;
    a.total_bits += bits[l];
    a.total_distortion += weights[l] * d.distortion;
  }
  return a;
}

BitAllocation greedy_bit_alloc(std::span<const double> variances, std::span<const double> weights, int total_bits,
                               int step) {
  if (total_bits < 0) throw std::invalid_argument("greedy_bit_alloc: negative budget");
  if (step <= 0 || step % 2 != 0) throw std::invalid_argument("greedy_bit_alloc: step must be a positive even number");
  if (variances.size() != weights.size()) throw std::invalid_argument("greedy_bit_alloc: length mismatch");
  const std::size_t n = variances.size();
  std::vector<int> bits(n, 0);
  int remaining = total_bits;
  while (remaining >= step) {
    std::ptrdiff_t best = -1;
    double best_gain = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (bits[l] + step > kMaxSuqBits) continue;
      const double scale = weights[l] * variances[l];
      const double gain = scale * (unit_suq_distortion(bits[l]) - unit_suq_distortion(bits[l] + step));
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<std::ptrdiff_t>(l);
      }
    }
    if (best < 0) break;
    bits[best] += step;
    remaining -= step;
  }
  return suq_allocation(variances, weights, bits);
}

BitAllocation rwf_suq_alloc(std::span<const double> variances, std::span<const double> weights, int total_bits,
                            int step) {
  if (total_bits < 0) throw std::invalid_argument("rwf_suq_alloc: negative budget");
  if (step <= 0 || step % 2 != 0) throw std::invalid_argument("rwf_suq_alloc: step must be a positive even number");
  const BitAllocation real = weighted_rwf_by_rate(variances, weights, total_bits);
  const std::size_t n = variances.size();
  std::vector<int> bits(n);
  std::vector<double> remainder(n);
  int used = 0;
  for (std::size_t l = 0; l < n; ++l) {
    bits[l] = std::min(kMaxSuqBits, step * static_cast<int>(std::floor(real.bits[l] / step + 1e-12)));
    remainder[l] = real.bits[l] - bits[l];
    used += bits[l];
  }
  int leftover = total_bits - used;
  while (leftover >= step) {
    std::ptrdiff_t best = -1;
    for (std::size_t l = 0; l < n; ++l) {
      if (bits[l] + step > kMaxSuqBits || !(weights[l] * variances[l] > 0.0)) continue;
      if (best < 0 || remainder[l] > remainder[best]) best = static_cast<std::ptrdiff_t>(l);
    }
    if (best < 0) break;
    bits[best] += step;
    remainder[best] -= step;
    leftover -= step;
  }
  return suq_allocation(variances, weights, bits);
}

std::string format_allocation_table(const BitAllocation& a) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%5s %12s %10s %8s %12s %12s\n", "coef", "variance", "weight", "bits", "step",
                "distortion");
  out << line;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const double step = a.steps.empty() ? 0.0 : a.steps[l];
    std::snprintf(line, sizeof line, "%5zu %12.6g %10.4g %8.3f %12.6g %12.6g\n", l, a.variances[l], a.weights[l],
                  a.bits[l], step, a.distortions[l]);
    out << line;
  }
  std::snprintf(line, sizeof line, "total bits %.3f, weighted distortion %.6g\n", a.total_bits, a.total_distortion);
  out << line;
  return out.str();
}

// ---------------------------------------------------------------------------
// Transform-domain quantization
// ---------------------------------------------------------------------------

KlBasis kl_transform(const ChannelStats& stats) {
  const HermitianEig eig = hermitian_eig(freq_covariance(stats));
  const Eigen::Index n = eig.values.size();
  const double top = eig.values(n - 1);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = n - 1; i >= 0; --i)
    if (eig.values(i) > 1e-9 * top) keep.push_back(i);
  KlBasis kl;
  kl.basis.resize(n, static_cast<Eigen::Index>(keep.size()));
  kl.eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t p = 0; p < keep.size(); ++p) {
    kl.basis.col(p) = eig.vectors.col(keep[p]);
    kl.eigenvalues(p) = eig.values(keep[p]);
  }
  return kl;
}

TransformCodec::TransformCodec(const ChannelStats& stats, QuantDomain domain) : domain_(domain) {
  const CMat& dft = stats.dft_block();
  switch (domain) {
    case QuantDomain::TimeTaps:
      variances_ = stats.tap_variances();
      weights_ = RVec::Ones(stats.n_taps());
      synth_ = dft.transpose();
      break;
    case QuantDomain::KlCoeffs: {
      KlBasis kl = kl_transform(stats);
      variances_ = kl.eigenvalues;
      weights_ = RVec::Constant(kl.eigenvalues.size(), 1.0 / stats.n_subcarriers());
      analysis_ = kl.basis.conjugate();
      synth_ = kl.basis.transpose();
      break;
    }
    case QuantDomain::PhysPaths:
      if (stats.kind() != ModelKind::PhysicalWssus)
        throw std::invalid_argument("path-coefficient quantization needs a physical channel model");
      variances_ = stats.path_variances();
      weights_ = stats.path_weights();
      synth_ = (dft * stats.psi()).transpose();
      break;
  }
}

CMat TransformCodec::analyze(const ChannelRealization& real, int user) const {
  switch (domain_) {
    case QuantDomain::TimeTaps:
      return real.taps.at(user);
    case QuantDomain::KlCoeffs:
      return real.freq.at(user) * analysis_;
    case QuantDomain::PhysPaths:
      if (real.phys.empty()) throw std::invalid_argument("TransformCodec: realization has no path coefficients");
      return real.phys.at(user);
  }
  return {};
}

CMat TransformCodec::synthesize(const CMat& coefficients) const { return coefficients * synth_; }

void TransformCodec::check(const BitAllocation& alloc) const {
  if (static_cast<int>(alloc.size()) != n_coefficients())
    throw std::invalid_argument("TransformCodec: allocation has " + std::to_string(alloc.size()) +
                                " coefficients, domain has " + std::to_string(n_coefficients()));
}

std::vector<CMat> TransformCodec::quantize(const ChannelRealization& real, const BitAllocation& alloc) const {
  check(alloc);
  if (alloc.levels.size() != alloc.size())
    throw std::invalid_argument("TransformCodec::quantize: allocation carries no scalar quantizer design");
  std::vector<CMat> out(real.n_users());
  for (int k = 0; k < real.n_users(); ++k) {
    CMat coef = analyze(real, k);
    for (Eigen::Index c = 0; c < coef.cols(); ++c)
      for (Eigen::Index m = 0; m < coef.rows(); ++m)
        coef(m, c) = suq_quantize(coef(m, c), alloc.steps[c], alloc.levels[c]);
    out[k] = synthesize(coef);
  }
  return out;
}

std::vector<CMat> TransformCodec::rd_limit(const ChannelRealization& real, const BitAllocation& alloc,
                                           const TrialSeed& seed) const {
  check(alloc);
  std::vector<CMat> out(real.n_users());
  for (int k = 0; k < real.n_users(); ++k) {
    CMat coef = analyze(real, k);
    for (Eigen::Index m = 0; m < coef.rows(); ++m) {
      RandomStream rng = seed.stream(StreamTag::TestChannel, static_cast<std::uint64_t>(k),
                                     static_cast<std::uint64_t>(m));
      for (Eigen::Index c = 0; c < coef.cols(); ++c) {
        const double v = variances_(c);
        const double d = std::min(alloc.distortions[c], v);
        const cd z = rng.complex_normal(1.0);
        if (v <= 0.0) {
          coef(m, c) = 0.0;
          continue;
        }
        const double shrink = 1.0 - d / v;
        coef(m, c) = shrink * coef(m, c) + std::sqrt(std::max(0.0, d * shrink)) * z;
      }
    }
    out[k] = synthesize(coef);
  }
  return out;
}

std::vector<CMat> quantize_channel_tdq(const ChannelStats& stats, const ChannelRealization& real,
                                       const BitAllocation& alloc, QuantDomain domain) {
  return TransformCodec(stats, domain).quantize(real, alloc);
}

}  // namespace csifb
