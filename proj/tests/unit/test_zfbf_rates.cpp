#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "csifb/analog_feedback.hpp"
#include "csifb/analytic_bounds.hpp"
#include "csifb/zfbf_rates.hpp"

using namespace csifb;

namespace {

// |<a, b>| = |a| |b|, i.e. equal up to a unit phase
bool same_direction(const CVec& a, const CVec& b) {
  return std::abs(std::abs(a.dot(b)) - a.norm() * b.norm()) < 1e-12;
}

}  // namespace

TEST_CASE("zero-forcing on hand-checked 2 x 2 cases") {
  CMat h(2, 2), v;
  h << 1, 0, 0, 1;
  REQUIRE(zf_directions(h, v));
  CHECK(same_direction(v.col(0), CVec::Unit(2, 0)));
  CHECK(same_direction(v.col(1), CVec::Unit(2, 1)));

  h << 1, 1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0);
  REQUIRE(zf_directions(h, v));
  CVec e1(2), e2(2);
  e1 << 1, -1;
  e2 << 0, 1;
  CHECK(same_direction(v.col(0), e1));
  CHECK(same_direction(v.col(1), e2));
}

TEST_CASE("zero-forcing against a pseudoinverse oracle") {
  RandomStream rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    CMat h(4, 4), v;
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = rng.complex_normal();
    REQUIRE(zf_directions(h, v));
    const CMat pinv = h.adjoint().completeOrthogonalDecomposition().pseudoInverse();
    for (int k = 0; k < 4; ++k) {
      CHECK(v.col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(same_direction(v.col(k), pinv.col(k)));
      for (int j = 0; j < 4; ++j)
        if (j != k) CHECK(std::abs(h.col(j).dot(v.col(k))) < 1e-9 * h.col(j).norm());
    }
  }
}

TEST_CASE("rank-deficient CSIT is flagged, not fatal") {
  CMat h(3, 3), v;
  h << 1, 2, 1, 0, 1, 0, 1, 3, 1;  // columns 0 and 2 equal
  CHECK_FALSE(zf_directions(h, v));
  CHECK(v.norm() == 0.0);
  std::vector<CMat> csit(3, CMat::Ones(3, 4));
  const BeamformerSet set = zf_beamformer(csit);
  CHECK(set.degenerate_count() == 4);
}

TEST_CASE("perfect-CSIT rate against quadrature") {
  boost::math::quadrature::exp_sinh<double> integrator;
  for (double x : {0.05, 0.4, 2.0, 9.0}) {
    const double e1 = integrator.integrate([x](double t) { return std::exp(-x * t) / t; }, 1.0,
                                           std::numeric_limits<double>::infinity());
    CHECK(perfect_csit_rate(4.0 / x, 4, 1.0) == doctest::Approx(std::exp(x) * e1).epsilon(1e-10));
  }
  CHECK(perfect_csit_rate(10.0, 4, 1.0) == doctest::Approx(1.0478).epsilon(1e-4));
  CHECK_THROWS_AS(perfect_csit_rate(0.0, 4, 1.0), std::invalid_argument);

  // pre-log one
  double previous = 1.0;
  for (double snr : {1e3, 1e6, 1e9}) {
    const double dev = std::abs(perfect_csit_rate(snr, 4, 1.0) / std::log(snr) - 1.0);
    CHECK(dev < previous);
    previous = dev;
    const double prelog = (perfect_csit_rate(100 * snr, 4, 1.0) - perfect_csit_rate(snr, 4, 1.0)) / std::log(100.0);
    CHECK(prelog == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("perfect CSIT leaves no interference") {
  const ChannelStats s = preset_stats("paper-dip5", 64);
  const RateEstimate est = mc_rates(s, perfect_csit_scheme(), 10.0, 4, 4, {300, 5, 2});
  CHECK(est.interference_mean.maxCoeff() < 1e-15 * 10.0);
  CHECK(est.gap_nats < 1e-15);
  CHECK(est.lower_nats == doctest::Approx(est.csit_rate_nats).epsilon(1e-12));
  CHECK(std::abs(est.genie_upper_nats - est.csit_rate_nats) < 4 * est.genie_stderr + 0.02);
  CHECK(est.degenerate_fraction == 0.0);
}

TEST_CASE("analog feedback at very high feedback SNR closes the gap") {
  const ChannelStats s = preset_stats("paper-dip5", 64);
  const AnalogFeedbackConfig cfg{8, 1.0, 1e9};
  const RateEstimate est = mc_rates(s, analog_scheme(MmseInterpolator(s, cfg), cfg), 10.0, 4, 4, {100, 6, 1});
  CHECK(est.gap_nats < 1e-6);
}

TEST_CASE("interference power equals (M-1)/M P sigma_e^2[n]") {
  const ChannelStats s = preset_stats("sui4-omni", 32);
  const AnalogFeedbackConfig cfg{4, 1.0, 10.0};
  const MmseInterpolator interp(s, cfg);
  const RateEstimate est = mc_rates(s, analog_scheme(interp, cfg), 10.0, 4, 4, {2000, 13, 2});
  const RVec target = 0.75 * 10.0 * interp.error_per_subcarrier();
  const double avg_target = target.mean();
  const double avg = est.interference_mean.mean();
  CHECK(std::abs(avg - avg_target) < 3 * est.interference_stderr.mean());
  int outside = 0;
  for (int n = 0; n < 32; ++n)
    outside += std::abs(est.interference_mean(n) - target(n)) > 3 * est.interference_stderr(n);
  CHECK(outside <= 2);
}

TEST_CASE("users are exchangeable and the genie bound dominates") {
  const ChannelStats s = preset_stats("paper-dip5", 64);
  const TransformCodec codec(s, QuantDomain::TimeTaps);
  const RVec& v = codec.variances();
  const BitAllocation a = greedy_bit_alloc(std::span<const double>(v.data(), v.size()),
                                           std::vector<double>(5, 1.0), 20);
  const RateEstimate est = mc_rates(s, tdq_scheme(codec, a), 10.0, 4, 4, {600, 8, 2});
  CHECK(est.genie_upper_nats >= est.lower_nats - 3 * est.stderr_nats());
  const double spread = *std::max_element(est.per_user_gap.begin(), est.per_user_gap.end()) -
                        *std::min_element(est.per_user_gap.begin(), est.per_user_gap.end());
  CHECK(spread < 6 * est.gap_stderr * 2.0);
  CHECK(est.gap_nats <= bound_suq(a, 10.0, 4) + 3 * est.gap_stderr);
}

TEST_CASE("scalar-quantized feedback stays under its bound at alpha_fb = 8") {
  const ChannelStats s = preset_stats("paper-dip5", 64);
  const int bits = static_cast<int>(budget_to_bits({8.0, 4, 10.0, BudgetScheme::Digital}) / 4);
  const TransformCodec codec(s, QuantDomain::TimeTaps);
  const RVec& v = codec.variances();
  const BitAllocation a = rwf_suq_alloc(std::span<const double>(v.data(), v.size()), std::vector<double>(5, 1.0),
                                        bits);
  const RateEstimate est = mc_rates(s, tdq_scheme(codec, a), 10.0, 4, 4, {400, 21, 2});
  CHECK(est.gap_nats <= bound_suq(a, 10.0, 4) + 3 * est.gap_stderr);
}

TEST_CASE("RVQ clusters share one codeword") {
  CHECK(rvq_cluster_offsets(64, 8) == std::pair{3, 4});
  CHECK(rvq_cluster_offsets(27, 9) == std::pair{1, 1});
  CHECK_THROWS_AS(rvq_cluster_offsets(64, 5), std::invalid_argument);
  CHECK_THROWS_AS(rvq_scheme(64, 8, 30), ResourceError);

  const ChannelStats s = preset_stats("paper-dip5", 16);
  const ChannelRealization r = sample_channel(s, 4, 4, TrialSeed{1, 0});
  const auto csit = rvq_scheme(16, 4, 6)(r, TrialSeed{1, 0});
  // cluster 1 covers subcarriers 3..6 (a = 1, b = 2 around 4)
  for (int n = 3; n <= 6; ++n) CHECK((csit[0].col(n) - csit[0].col(4)).norm() == 0.0);
  CHECK((csit[0].col(2) - csit[0].col(4)).norm() > 0.0);
  // cluster 0 wraps around: 15, 0, 1, 2
  CHECK((csit[0].col(15) - csit[0].col(0)).norm() == 0.0);
}

TEST_CASE("Monte Carlo results do not depend on the worker count") {
  const ChannelStats s = preset_stats("paper-dip5", 16);
  const CsitScheme scheme = rvq_scheme(16, 4, 6);
  const RateEstimate a = mc_rates(s, scheme, 10.0, 4, 4, {50, 3, 1});
  const RateEstimate b = mc_rates(s, scheme, 10.0, 4, 4, {50, 3, 4});
  CHECK(a.gap_nats == b.gap_nats);
  CHECK(a.genie_upper_nats == b.genie_upper_nats);
  CHECK(a.gap_stderr == b.gap_stderr);
}
