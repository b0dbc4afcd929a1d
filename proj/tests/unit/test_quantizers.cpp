#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "csifb/quantizers.hpp"

using namespace csifb;

namespace {

const std::vector<double> kDip{0.5, 0.24, 0.17, 0.06, 0.03};

double bisect_level(const std::vector<double>& v, double d) {
  double lo = 0.0, hi = *std::max_element(v.begin(), v.end());
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (double x : v) s += std::min(mid, x);
    (s < d ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Composite Simpson on the real-dimension distortion integral.
double quadrature_distortion(int levels, double step, double s2) {
  const double s = std::sqrt(s2);
  auto f = [&](double x) {
    const int half = levels / 2;
    const double idx = std::min(std::floor(x / step), half - 1.0);
    const double c = (idx + 0.5) * step;
    return (x - c) * (x - c) * std::exp(-0.5 * x * x / s2) / (s * std::sqrt(2.0 * kPi));
  };
  // integrate piecewise so every kink is a node
  std::vector<double> nodes;
  for (int i = 0; i < levels / 2; ++i) nodes.push_back(i * step);
  nodes.push_back(std::max(nodes.back() + step, 14.0 * s));
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double a = nodes[k], b = nodes[k + 1];
    const int n = 2000;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    total += acc * h / 3.0;
  }
  return 2.0 * total;
}

}  // namespace

TEST_CASE("RVQ codebook and nearest-codeword search") {
  RandomStream rng(5);
  const RvqCodebook cb = rvq_build(4, 6, rng);
  CHECK(cb.size() == 64);
  for (Eigen::Index i = 0; i < 64; ++i) CHECK(cb.codewords.col(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(rvq_build(4, 23, rng), ResourceError);
  CHECK_THROWS_AS(rvq_build(4, 12, rng, 10), ResourceError);

  CMat hs(4, 10);
  for (Eigen::Index i = 0; i < hs.size(); ++i) hs(i) = rng.complex_normal();
  const auto idx = rvq_quantize_columns(hs, cb);
  for (int c = 0; c < 10; ++c) {
    std::size_t best = 0;
    double g = -1.0;
    for (std::size_t i = 0; i < cb.size(); ++i) {
      const double v = std::norm(cb.codewords.col(i).dot(hs.col(c)));
      if (v > g) {
        g = v;
        best = i;
      }
    }
    CHECK(idx[c] == best);
    CHECK(rvq_quantize(hs.col(c), cb).index == best);
  }

  // identical codewords: lowest index wins
  RvqCodebook dup = cb;
  dup.codewords.col(9) = dup.codewords.col(3);
  const CVec h = dup.codewords.col(3);
  CHECK(rvq_quantize(h, dup).index == 3);
  CHECK(rvq_quantize(h, dup).sin2 < 1e-12);
}

TEST_CASE("RVQ with M = 2 follows the minimum-of-uniforms law") {
  // For M = 2, sin^2 to one random codeword is uniform on [0, 1]; with 2^B
  // codewords P(sin^2 <= x) = 1 - (1 - x)^(2^B). Kolmogorov-Smirnov check.
  for (int bits : {2, 4}) {
    const int draws = 4000;
    std::vector<double> s;
    for (int t = 0; t < draws; ++t) {
      RandomStream rng(TrialSeed{77, static_cast<std::uint64_t>(t)}.stream(StreamTag::Codebook, bits));
      const RvqCodebook cb = rvq_build(2, bits, rng);
      CVec h(2);
      h << rng.complex_normal(), rng.complex_normal();
      s.push_back(rvq_quantize(h, cb).sin2);
    }
    std::sort(s.begin(), s.end());
    const double q = std::exp2(bits);
    double ks = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double cdf = 1.0 - std::pow(1.0 - s[i], q);
      ks = std::max({ks, std::abs(cdf - (i + 1.0) / draws), std::abs(cdf - static_cast<double>(i) / draws)});
    }
    // 1% critical value 1.63 / sqrt(n)
    CHECK(ks < 1.63 / std::sqrt(draws));
  }
}

TEST_CASE("reverse waterfilling matches a bisection oracle") {
  for (double d : {0.01, 0.05, 0.1, 0.2, 0.5, 0.9, 1.0}) {
    const BitAllocation a = rwf_by_distortion(kDip, d);
    CHECK(a.waterlevel == doctest::Approx(bisect_level(kDip, d)).epsilon(1e-10));
    double s = 0.0;
    for (double v : kDip) s += std::min(a.waterlevel, v);
    CHECK(s == doctest::Approx(d).epsilon(1e-9));
    CHECK(a.total_distortion == doctest::Approx(d).epsilon(1e-9));
  }
  CHECK_THROWS_AS(rwf_by_distortion(kDip, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rwf_by_distortion(kDip, 1.5), std::invalid_argument);

  for (double r : {0.0, 0.5, 3.0, 10.0, 40.0}) {
    const BitAllocation a = rwf_by_rate(kDip, r);
    CHECK(a.total_bits == doctest::Approx(r).epsilon(1e-9));
    // the rate and distortion forms agree
    const BitAllocation b = rwf_by_distortion(kDip, a.total_distortion);
    CHECK(b.total_bits == doctest::Approx(r).epsilon(1e-7));
  }
}

TEST_CASE("weighted reverse waterfilling works on effective variances") {
  const std::vector<double> v{1.0, 0.3162, 0.1585};
  const std::vector<double> w{1.0, 0.5, 1.0};
  const BitAllocation a = weighted_rwf_by_rate(v, w, 6.0);
  const std::vector<double> eff{1.0, 0.1581, 0.1585};
  const BitAllocation b = rwf_by_rate(eff, 6.0);
  CHECK(a.total_distortion == doctest::Approx(b.total_distortion).epsilon(1e-9));
  for (int l = 0; l < 3; ++l) CHECK(a.bits[l] == doctest::Approx(b.bits[l]).epsilon(1e-9));
}

TEST_CASE("scalar quantizer distortion agrees with quadrature") {
  for (int levels : {2, 4, 8, 32}) {
    for (double step : {0.1, 0.4, 1.0}) {
      const double closed = suq_real_distortion(levels, step, 0.5);
      CHECK(closed == doctest::Approx(quadrature_distortion(levels, step, 0.5)).epsilon(1e-8));
    }
  }
}

TEST_CASE("scalar quantizer design") {
  const SuqDesign one = design_suq(1.0, 2);
  CHECK(one.levels == 2);
  CHECK(std::abs(one.step - 2.0 / std::sqrt(kPi)) < 1e-6);
  CHECK(std::abs(one.distortion - 2.0 * (0.5 - 1.0 / kPi)) < 1e-8);

  CHECK_THROWS_AS(design_suq(1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(design_suq(1.0, kMaxSuqBits + 1), std::invalid_argument);
  const SuqDesign zero = design_suq(0.7, 0);
  CHECK(zero.distortion == 0.7);
  CHECK(zero.levels == 1);

  // odd bit counts use floor(B/2) bits per dimension
  CHECK(design_suq(1.0, 5).levels == 4);
  CHECK(design_suq(1.0, 5).distortion == doctest::Approx(design_suq(1.0, 4).distortion));

  // scale invariance
  const SuqDesign big = design_suq(3.0, 6);
  CHECK(big.distortion == doctest::Approx(3.0 * unit_suq_distortion(6)).epsilon(1e-12));
  CHECK(big.step == doctest::Approx(std::sqrt(3.0) * design_suq(1.0, 6).step).epsilon(1e-12));

  // grid search oracle for the step
  for (int bits : {4, 8}) {
    const int q = 1 << (bits / 2);
    double best = std::numeric_limits<double>::infinity();
    for (double d = 0.001; d < 3.0; d += 0.0005) best = std::min(best, 2.0 * suq_real_distortion(q, d, 0.5));
    CHECK(unit_suq_distortion(bits) <= best + 1e-12);
    CHECK(unit_suq_distortion(bits) == doctest::Approx(best).epsilon(1e-5));
  }

  // asymptotic step is worse than the line search but of the same order
  for (int bits : {8, 12}) {
    const double asym = design_suq(1.0, bits, StepRule::Asymptotic).distortion;
    CHECK(asym >= unit_suq_distortion(bits));
    CHECK(asym < 10.0 * unit_suq_distortion(bits));
  }
}

TEST_CASE("scalar quantizer reconstruction and Monte Carlo distortion") {
  CHECK(suq_quantize_real(0.3, 1.0, 4) == 0.5);
  CHECK(suq_quantize_real(-0.3, 1.0, 4) == -0.5);
  CHECK(suq_quantize_real(1.2, 1.0, 4) == 1.5);
  CHECK(suq_quantize_real(9.0, 1.0, 4) == 1.5);
  CHECK(suq_quantize_real(9.0, 1.0, 1) == 0.0);

  const SuqDesign d = design_suq(2.0, 6);
  RandomStream rng(8);
  const int n = 200000;
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const cd x = rng.complex_normal(2.0);
    const double e = std::norm(x - suq_quantize(x, d.step, d.levels));
    acc += e;
    acc2 += e * e;
  }
  const double mean = acc / n;
  const double se = std::sqrt((acc2 / n - mean * mean) / n);
  CHECK(std::abs(mean - d.distortion) < 4 * se);
}

TEST_CASE("greedy allocation is optimal against exhaustive search") {
  const std::vector<double> v{0.5, 0.24, 0.17, 0.06};
  const std::vector<double> w(4, 1.0);
  for (int total : {0, 4, 10, 16, 22}) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= total; a += 2)
      for (int b = 0; a + b <= total; b += 2)
        for (int c = 0; a + b + c <= total; c += 2) {
          const int d = total - a - b - c;
          const int bits[] = {a, b, c, d};
          double dist = 0.0;
          for (int l = 0; l < 4; ++l) dist += v[l] * unit_suq_distortion(bits[l]);
          best = std::min(best, dist);
        }
    const BitAllocation g = greedy_bit_alloc(v, w, total);
    CHECK(g.total_distortion == doctest::Approx(best).epsilon(1e-12));
    CHECK(g.total_bits == total);
  }
  CHECK_THROWS_AS(greedy_bit_alloc(v, w, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(greedy_bit_alloc(v, w, 10, 3), std::invalid_argument);
}

TEST_CASE("integer RWF allocation spends the whole budget in even steps") {
  for (int total : {2, 7, 20, 41}) {
    const BitAllocation a = rwf_suq_alloc(kDip, std::vector<double>(5, 1.0), total);
    CHECK(a.total_bits == 2 * (total / 2));
    for (double b : a.bits) CHECK(static_cast<int>(b) % 2 == 0);
  }
  // the cap bounds what can be spent
  const BitAllocation capped = greedy_bit_alloc(std::vector<double>{1.0}, std::vector<double>{1.0}, 100);
  CHECK(capped.total_bits == kMaxSuqBits);
}

TEST_CASE("K-L transform of a DIP channel") {
  const ChannelStats s = preset_stats("paper-dip5", 64);
  const KlBasis kl = kl_transform(s);
  CHECK(kl.eigenvalues.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(kl.eigenvalues(i) == doctest::Approx(64.0 * kDip[i]).epsilon(1e-10));
  CHECK((kl.basis.adjoint() * kl.basis - CMat::Identity(5, 5)).norm() < 1e-10);
  CHECK(kl_transform(preset_stats("sui4-omni", 64)).eigenvalues.size() == 3);
}

TEST_CASE("transform codecs reconstruct the frequency response") {
  const ChannelStats sui = preset_stats("sui4-omni", 32);
  const ChannelRealization r = sample_channel(sui, 3, 2, TrialSeed{2, 0});
  for (QuantDomain d : {QuantDomain::TimeTaps, QuantDomain::KlCoeffs, QuantDomain::PhysPaths}) {
    const TransformCodec codec(sui, d);
    for (int k = 0; k < 2; ++k) CHECK((codec.synthesize(codec.analyze(r, k)) - r.freq[k]).norm() < 1e-10);
  }
  const ChannelStats dip = preset_stats("paper-dip5", 32);
  CHECK_THROWS_AS(TransformCodec(dip, QuantDomain::PhysPaths), std::invalid_argument);
}

TEST_CASE("rate-distortion test channel attains the allocated distortion") {
  const ChannelStats s = preset_stats("sui4-omni", 16);
  const TransformCodec codec(s, QuantDomain::PhysPaths);
  const RVec& v = codec.variances();
  const RVec& w = codec.weights();
  const BitAllocation a = weighted_rwf_by_rate(std::span<const double>(v.data(), v.size()),
                                               std::span<const double>(w.data(), w.size()), 4.0);
  const int trials = 4000;
  double acc = 0.0, acc2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const TrialSeed seed{31, static_cast<std::uint64_t>(t)};
    const ChannelRealization r = sample_channel(s, 1, 1, seed);
    const auto est = codec.rd_limit(r, a, seed);
    const double e = (est[0] - r.freq[0]).squaredNorm() / 16.0;
    acc += e;
    acc2 += e * e;
  }
  const double mean = acc / trials;
  const double se = std::sqrt((acc2 / trials - mean * mean) / trials);
  CHECK(std::abs(mean - a.total_distortion) < 4 * se);
}

TEST_CASE("allocation table lists every coefficient") {
  const BitAllocation a = greedy_bit_alloc(kDip, std::vector<double>(5, 1.0), 12);
  const std::string t = format_allocation_table(a);
  CHECK(std::count(t.begin(), t.end(), '\n') == 7);
}
