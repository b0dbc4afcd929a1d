#include <doctest.h>

#include <cmath>
#include <vector>

#include "csifb/analog_feedback.hpp"

using namespace csifb;

namespace {

ChannelStats random_dip(RandomStream& rng, int taps, int n) {
  std::vector<double> dip(taps);
  for (double& d : dip) d = 0.05 + rng.uniform();
  return build_dip_stats(dip, n);
}

}  // namespace

TEST_CASE("feedback configuration is validated") {
  const ChannelStats s = preset_stats("paper-dip5", 64);
  CHECK_THROWS_AS(MmseInterpolator(s, {5, 1.0, 10.0}), std::invalid_argument);
  CHECK_THROWS_AS(MmseInterpolator(s, {0, 1.0, 10.0}), std::invalid_argument);
  CHECK_THROWS_AS(MmseInterpolator(s, {8, 0.5, 10.0}), std::invalid_argument);
  CHECK(sampled_subcarriers(64, 4) == std::vector<int>{0, 16, 32, 48});
}

TEST_CASE("L x L trace form equals the N x N interpolation error") {
  RandomStream rng(17);
  const ChannelStats sui = preset_stats("sui4-omni", 32);
  for (int i = 0; i < 20; ++i) {
    const ChannelStats s = i % 4 == 0 ? sui : random_dip(rng, 1 + static_cast<int>(rng.uniform() * 6), 32);
    const int js[] = {1, 2, 4, 8, 16, 32};
    const int j = js[static_cast<int>(rng.uniform() * 6)];
    const double rho = std::pow(10.0, -1.0 + 5.0 * rng.uniform());
    const AnalogFeedbackConfig cfg{j, 1.0, rho};
    const double direct = MmseInterpolator(s, cfg).mean_error();
    const double small = interpolation_error_small(s, cfg);
    CHECK(std::abs(direct - small) <= 1e-9 * small);
  }
}

TEST_CASE("error covariance under the prior itself is the MMSE covariance") {
  const ChannelStats s = preset_stats("sui4-omni", 32);
  const MmseInterpolator m(s, {4, 2.0, 10.0});
  CHECK((m.error_covariance_under(s) - m.error_covariance()).norm() < 1e-10);
  // a mismatched interpolator can only do worse on average
  const RVec d = s.tap_variances();
  const ChannelStats wrong = build_dip_stats(std::span<const double>(d.data(), d.size()), 32);
  const MmseInterpolator mis(wrong, {4, 2.0, 10.0});
  CHECK(mis.error_covariance_under(s).trace().real() >= m.error_covariance().trace().real() - 1e-12);
}

TEST_CASE("noiseless feedback of at least L samples recovers the channel") {
  const ChannelStats s = preset_stats("paper-dip5", 64);
  const AnalogFeedbackConfig cfg{8, 1.0, 1e8};
  const MmseInterpolator m(s, cfg);
  CHECK(m.mean_error() < 1e-7);
  const ChannelRealization r = sample_channel(s, 2, 2, TrialSeed{4, 0});
  const auto est = estimate(simulate_feedback(r, cfg, TrialSeed{4, 0}, FeedbackNoise::Disabled), m);
  for (int k = 0; k < 2; ++k) CHECK((est[k] - r.freq[k]).norm() < 1e-3 * r.freq[k].norm());
}

TEST_CASE("Monte Carlo estimation error matches Sigma_e per subcarrier") {
  const ChannelStats s = preset_stats("paper-dip5", 16);
  const AnalogFeedbackConfig cfg{4, 1.0, 3.0};
  const MmseInterpolator m(s, cfg);
  const int trials = 4000;
  RVec acc = RVec::Zero(16);
  RVec acc2 = RVec::Zero(16);
  for (int t = 0; t < trials; ++t) {
    const TrialSeed seed{21, static_cast<std::uint64_t>(t)};
    const ChannelRealization r = sample_channel(s, 1, 1, seed);
    const auto est = estimate(simulate_feedback(r, cfg, seed), m);
    const RVec e = (est[0] - r.freq[0]).row(0).cwiseAbs2().transpose();
    acc += e;
    acc2 += e.cwiseAbs2();
  }
  const RVec mean = acc / trials;
  const RVec target = m.error_per_subcarrier();
  int outside = 0;
  for (int n = 0; n < 16; ++n) {
    const double se = std::sqrt((acc2(n) / trials - mean(n) * mean(n)) / trials);
    outside += std::abs(mean(n) - target(n)) > 3.5 * se;
  }
  CHECK(outside == 0);
}
