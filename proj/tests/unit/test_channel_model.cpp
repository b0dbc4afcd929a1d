#include <doctest.h>

#include <cmath>
#include <vector>

#include "csifb/channel_model.hpp"

using namespace csifb;

TEST_CASE("DIP construction validates its input") {
  const std::vector<double> ok{0.5, 0.5};
  CHECK_NOTHROW(build_dip_stats(ok, 4));
  const std::vector<double> too_long{1, 1, 1, 1, 1};
  CHECK_THROWS_AS(build_dip_stats(too_long, 4), std::invalid_argument);
  const std::vector<double> negative{1, -0.1};
  CHECK_THROWS_AS(build_dip_stats(negative, 8), std::invalid_argument);
  const std::vector<double> zero{0, 0};
  CHECK_THROWS_AS(build_dip_stats(zero, 8), std::invalid_argument);
}

TEST_CASE("DIP covariance is circulant with constant diagonal") {
  const ChannelStats s = preset_stats("paper-dip5", 64);
  CHECK(s.n_taps() == 5);
  CHECK(s.total_power() == doctest::Approx(1.0).epsilon(1e-12));
  const CMat cov = freq_covariance(s);
  for (int n = 0; n < 64; ++n) CHECK(cov(n, n).real() == doctest::Approx(1.0).epsilon(1e-12));
  // direct sum over taps
  for (int d : {0, 1, 5, 33, -3}) {
    cd c = 0.0;
    const double dip[] = {0.5, 0.24, 0.17, 0.06, 0.03};
    for (int l = 0; l < 5; ++l) c += dip[l] * std::polar(1.0, -2.0 * kPi * l * d / 64.0);
    CHECK(std::abs(freq_correlation(s, d) - c) < 1e-12);
    const int m = ((d % 64) + 64) % 64;
    CHECK(std::abs(cov((m) % 64, 0) - c) < 1e-12);
  }
}

TEST_CASE("SUI-4 masking matrix from the triangular pulse") {
  const ChannelStats s = preset_stats("sui4-omni", 64);
  CHECK(s.kind() == ModelKind::PhysicalWssus);
  CHECK(s.n_taps() == 5);
  CHECK(s.n_paths() == 3);
  // psi(l - tau) sampled at 1 us; tau = 0, 1.5, 4 us
  CMat expect = CMat::Zero(5, 3);
  expect(0, 0) = 1.0;
  expect(1, 1) = 0.5;
  expect(2, 1) = 0.5;
  expect(4, 2) = 1.0;
  CHECK((s.psi() - expect).norm() < 1e-12);
  CHECK(s.total_power() == doctest::Approx(1.0 + 0.5 * 0.3162 + 0.1585).epsilon(1e-12));
  const RVec w = s.path_weights();
  CHECK(w(0) == doctest::Approx(1.0));
  CHECK(w(1) == doctest::Approx(0.5));
  CHECK(w(2) == doctest::Approx(1.0));

  // diag(Sigma_H) is not constant, but averages to sigma_H^2
  const CMat cov = freq_covariance(s);
  CHECK(cov.diagonal().real().mean() == doctest::Approx(s.total_power()).epsilon(1e-12));
  // n-averaged correlation against the covariance matrix
  for (int d : {1, 7, 20}) {
    cd avg = 0.0;
    for (int n = 0; n < 64; ++n) avg += cov((n + d) % 64, n);
    avg /= 64.0 * s.total_power();
    CHECK(std::abs(freq_correlation(s, d) - avg) < 1e-12);
  }
}

TEST_CASE("physical model rejects a truncated pulse tail") {
  const std::vector<double> delays{0.0, 4e-6};
  const std::vector<double> vars{1.0, 0.5};
  CHECK_THROWS_AS(build_physical_stats(delays, vars, TriangularPulse{2e-6}, 1e6, 3, 64), std::invalid_argument);
  CHECK_NOTHROW(build_physical_stats(delays, vars, TriangularPulse{2e-6}, 1e6, 5, 64));
}

TEST_CASE("realizations obey Parseval and are reproducible") {
  const ChannelStats s = preset_stats("sui4-omni", 32);
  const ChannelRealization a = sample_channel(s, 4, 4, TrialSeed{1, 2});
  const ChannelRealization b = sample_channel(s, 4, 4, TrialSeed{1, 2});
  for (int k = 0; k < 4; ++k) {
    CHECK((a.freq[k] - b.freq[k]).norm() == 0.0);
    CHECK(a.freq[k].squaredNorm() == doctest::Approx(32.0 * a.taps[k].squaredNorm()).epsilon(1e-12));
    CHECK((a.taps[k] - a.phys[k] * s.psi().transpose()).norm() < 1e-12);
  }
}

TEST_CASE("sample tap covariance matches Sigma_h") {
  const ChannelStats s = preset_stats("sui4-omni", 16);
  const int trials = 20000;
  CMat acc = CMat::Zero(5, 5);
  for (int t = 0; t < trials; ++t) {
    const ChannelRealization r = sample_channel(s, 1, 1, TrialSeed{9, static_cast<std::uint64_t>(t)});
    const CVec h = r.taps[0].row(0).transpose();
    acc += h * h.adjoint();
  }
  acc /= trials;
  const CMat& cov = s.tap_covariance();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      // |h_i h_j^*| has variance at most cov_ii cov_jj
      const double se = std::sqrt(cov(i, i).real() * cov(j, j).real() / trials);
      CHECK(std::abs(acc(i, j) - cov(i, j)) < 5 * se + 1e-12);
    }
}
