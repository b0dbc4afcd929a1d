#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "csifb/channel_model.hpp"
#include "csifb/errors.hpp"

namespace csifb {

/// Inline channel description used when no preset is named. Either `dip` or
/// the physical triple (delays, path variances, sample rate) must be set.
struct ChannelSpec {
  std::vector<double> dip;
  std::vector<double> delays_us;
  std::vector<double> path_variances;
  double sample_rate_hz = 1e6;
  std::optional<int> taps;
};

inline const std::vector<std::string>& known_schemes() {
  static const std::vector<std::string> names = {"analog",         "rvq",    "tdq-limit", "tdq-suq-rwf",
                                                 "tdq-suq-greedy", "kl-suq", "phys-tq"};
  return names;
}

struct ExperimentConfig {
  std::string channel_preset = "paper-dip5";
  std::optional<ChannelSpec> channel;
  int antennas = 4;     // M
  int users = 4;        // K
  int subcarriers = 64; // N
  std::vector<double> snr_db_grid{10.0};
  std::vector<double> alpha_fb_grid{2, 4, 6, 8, 10, 12};
  std::vector<std::string> schemes{"analog", "rvq", "tdq-limit", "tdq-suq-rwf", "tdq-suq-greedy"};
  std::size_t n_trials = 1000;
  std::uint64_t master_seed = 1;
  int jobs = 1;
  std::vector<int> rvq_clusters;     // empty: divisors of N
  int rvq_bit_cap = 22;
  std::vector<int> analog_clusters;  // empty: divisors of N
  /// Physical presets only: when false the feedback schemes assume
  /// independent taps with variances diag(Sigma_h).
  bool psi_known = true;

  ChannelStats build_stats() const;
};

/// Throws ConfigError describing the first violated rule.
void validate(const ExperimentConfig& cfg);

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

}  // namespace csifb
