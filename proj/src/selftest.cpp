#include "csifb/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "csifb/analytic_bounds.hpp"
#include "csifb/harness.hpp"
#include "csifb/zfbf_rates.hpp"

namespace csifb {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

SelftestResult check(std::string name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    return {std::move(name), ok, std::move(detail)};
  } catch (const std::exception& e) {
    return {std::move(name), false, std::string("threw: ") + e.what()};
  }
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  std::vector<SelftestResult> out;
  const ChannelStats dip = preset_stats("paper-dip5", 16);
  const ChannelStats sui = preset_stats("sui4-omni", 16);

  out.push_back(check("zf orthogonality", [] {
    RandomStream rng(TrialSeed{7, 0}.stream(StreamTag::Selftest));
    CMat h(4, 4);
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = rng.complex_normal();
    CMat v;
    zf_directions(h, v);
    const RMat c = (h.adjoint() * v).cwiseAbs();
    double worst = 0.0;
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        if (j != k) worst = std::max(worst, c(j, k) / h.col(j).norm());
    return std::pair{worst < 1e-9, "max leakage " + num(worst)};
  }));

  out.push_back(check("reverse waterfilling level", [&] {
    const RVec& v = dip.tap_variances();
    const BitAllocation a = rwf_by_distortion(std::span<const double>(v.data(), v.size()), 0.2);
    double sum = 0.0;
    for (Eigen::Index l = 0; l < v.size(); ++l) sum += std::min(a.waterlevel, v(l));
    return std::pair{std::abs(sum - 0.2) < 1e-12, "sum min(gamma, v) = " + num(sum)};
  }));

  out.push_back(check("one-bit scalar quantizer", [] {
    const SuqDesign d = design_suq(1.0, 2);
    const bool ok = std::abs(d.step - 2.0 / std::sqrt(kPi)) < 1e-6 && std::abs(d.distortion - (1.0 - 2.0 / kPi)) < 1e-8;
    return std::pair{ok, "step " + num(d.step) + ", D " + num(d.distortion)};
  }));

  out.push_back(check("interpolation error routes agree", [&] {
    const AnalogFeedbackConfig cfg{4, 1.5, 10.0};
    const double a = MmseInterpolator(sui, cfg).mean_error();
    const double b = interpolation_error_small(sui, cfg);
    return std::pair{std::abs(a - b) <= 1e-9 * b, num(a) + " vs " + num(b)};
  }));

  out.push_back(check("analog bound dominates exact trace", [&] {
    const AnalogFeedbackConfig cfg{4, 1.0, 10.0};
    const double exact = analog_trace_gap(MmseInterpolator(dip, cfg), 10.0, 4);
    const double bound = bound_analog(dip, 4, 1.0, 10.0, 4);
    return std::pair{bound >= exact - 1e-12, num(bound) + " >= " + num(exact)};
  }));

  out.push_back(check("perfect CSIT Monte Carlo", [&] {
    const RateEstimate est = mc_rates(dip, perfect_csit_scheme(), 10.0, 4, 4, {400, 11, 1});
    const double rel = std::abs(est.genie_upper_nats - est.csit_rate_nats) / est.csit_rate_nats;
    const bool ok = est.interference_mean.maxCoeff() < 1e-15 * 10.0 && rel < 0.05;
    return std::pair{ok, "genie " + num(est.genie_upper_nats) + " vs " + num(est.csit_rate_nats)};
  }));

  out.push_back(check("worker count does not change results", [] {
    ExperimentConfig cfg;
    cfg.subcarriers = 16;
    cfg.alpha_fb_grid = {4};
    cfg.schemes = {"analog", "tdq-suq-greedy"};
    cfg.n_trials = 20;
    cfg.master_seed = 3;
    std::ostringstream one, two;
    write_csv(run_sweep(cfg, RunMode::Sweep), one);
    cfg.jobs = 3;
    write_csv(run_sweep(cfg, RunMode::Sweep), two);
    return std::pair{one.str() == two.str(), one.str() == two.str() ? "identical" : "CSV differs"};
  }));

  return out;
}

}  // namespace csifb
