#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "csifb/config.hpp"
#include "csifb/zfbf_rates.hpp"

namespace csifb {

enum class RunMode { Bounds, Simulate, Sweep };

/// One CSV row. Rates are sum rates over the K users in bits per channel use;
/// analytic_gap_bits is per user. Quantities that a mode does not compute are
/// NaN. J is 0 for schemes without clusters.
struct SweepRecord {
  std::string scheme;
  double alpha_fb = 0.0;
  double snr_db = 0.0;
  int clusters = 0;
  double b_tot_bits = 0.0;
  double rate_lower_bits = 0.0;
  double rate_genie_upper_bits = 0.0;
  double analytic_gap_bits = 0.0;
  double rate_csit_bits = 0.0;
  std::size_t n_trials = 0;
  double stderr_bits = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";
};

/// A feedback scheme resolved for one (alpha_fb, snr) point.
struct SchemePoint {
  int clusters = 0;
  double b_tot_bits = 0.0;
  double analytic_gap_nats = 0.0;
  std::optional<CsitScheme> csit;  // empty when the point cannot be simulated
  std::string status = "ok";
};

/// Budget conversion, parameter choice, analytic gap and CSIT adapter.
SchemePoint plan_scheme(const ExperimentConfig& cfg, const ChannelStats& stats, const std::string& scheme,
                        double alpha_fb, double snr);

/// Runs every (scheme, alpha_fb, snr) point. Progress goes to `log` if set.
std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, RunMode mode, std::ostream* log = nullptr);

std::string csv_header();
void write_csv(const std::vector<SweepRecord>& records, std::ostream& out);
/// Writes to `path`; throws std::runtime_error naming the path on failure.
void emit_csv(const std::vector<SweepRecord>& records, const std::string& path);
std::vector<SweepRecord> parse_csv(std::istream& in);

}  // namespace csifb
