#include "csifb/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "csifb/analytic_bounds.hpp"

namespace csifb {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

bool is_physical(const ChannelStats& s) { return s.kind() == ModelKind::PhysicalWssus; }

ChannelStats independent_taps_prior(const ChannelStats& stats) {
  const RVec& d = stats.tap_variances();
  return build_dip_stats(std::span<const double>(d.data(), d.size()), stats.n_subcarriers());
}

std::span<const double> as_span(const RVec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

SchemePoint plan_analog(const ExperimentConfig& cfg, const ChannelStats& stats, double alpha_fb, double snr) {
  SchemePoint p;
  p.b_tot_bits = kNan;
  const std::vector<int> grid = cfg.analog_clusters.empty() ? divisors(stats.n_subcarriers()) : cfg.analog_clusters;
  const bool mismatched = is_physical(stats) && !cfg.psi_known;
  const ChannelStats prior = mismatched ? independent_taps_prior(stats) : stats;

  double best = std::numeric_limits<double>::infinity();
  for (int j : grid) {
    if (j > alpha_fb) continue;
    const double beta = alpha_fb / j;
    double gap;
    if (mismatched) {
      const MmseInterpolator interp(prior, {j, beta, snr});
      gap = analog_trace_gap_under(interp, stats, snr, cfg.antennas);
    } else {
      gap = bound_analog(stats, j, beta, snr, cfg.antennas);
    }
    if (gap < best) {
      best = gap;
      p.clusters = j;
    }
  }
  if (p.clusters == 0) {
    p.status = "alpha-below-one";
    p.analytic_gap_nats = kNan;
    return p;
  }
  p.analytic_gap_nats = best;
  const AnalogFeedbackConfig fb{p.clusters, alpha_fb / p.clusters, snr};
  p.csit = analog_scheme(MmseInterpolator(prior, fb), fb);
  return p;
}

SchemePoint plan_rvq(const ExperimentConfig& cfg, const ChannelStats& stats, double alpha_fb, double snr) {
  SchemePoint p;
  const std::vector<int> grid = cfg.rvq_clusters.empty() ? divisors(stats.n_subcarriers()) : cfg.rvq_clusters;
  p.b_tot_bits = budget_to_bits({alpha_fb, cfg.antennas, snr, BudgetScheme::Rvq});
  const RvqBudgetChoice choice = bound_rvq_budget(stats, alpha_fb, snr, cfg.antennas, grid);
  p.clusters = choice.best_clusters;
  p.analytic_gap_nats = choice.best_gap;
  const int bits = static_cast<int>(std::floor(p.b_tot_bits / p.clusters + 1e-9));
  if (bits > cfg.rvq_bit_cap) {
    p.status = "rvq-bits-over-cap";
    return p;
  }
  p.csit = rvq_scheme(stats.n_subcarriers(), p.clusters, bits, cfg.rvq_bit_cap);
  return p;
}

enum class Alloc { Limit, SuqRwf, SuqGreedy };

SchemePoint plan_transform(const ExperimentConfig& cfg, const ChannelStats& stats, QuantDomain domain, Alloc kind,
                           double alpha_fb, double snr) {
  SchemePoint p;
  p.b_tot_bits = budget_to_bits({alpha_fb, cfg.antennas, snr, BudgetScheme::Digital});
  TransformCodec codec(stats, domain);
  const auto v = as_span(codec.variances());
  const auto w = as_span(codec.weights());
  const double per_antenna = p.b_tot_bits / cfg.antennas;
  BitAllocation alloc;
  switch (kind) {
    case Alloc::Limit:
      alloc = weighted_rwf_by_rate(v, w, per_antenna);
      p.analytic_gap_nats = gap_from_distortion(alloc.total_distortion, snr, cfg.antennas);
      p.csit = tdq_limit_scheme(std::move(codec), std::move(alloc));
      return p;
    case Alloc::SuqRwf:
    case Alloc::SuqGreedy: {
      const int bits = static_cast<int>(std::floor(per_antenna + 1e-9));
      alloc = kind == Alloc::SuqRwf ? rwf_suq_alloc(v, w, bits) : greedy_bit_alloc(v, w, bits);
      p.analytic_gap_nats = bound_suq(alloc, snr, cfg.antennas);
      p.csit = tdq_scheme(std::move(codec), std::move(alloc));
      return p;
    }
  }
  return p;
}

QuantDomain time_domain_for(const ExperimentConfig& cfg, const ChannelStats& stats) {
  return is_physical(stats) && cfg.psi_known ? QuantDomain::PhysPaths : QuantDomain::TimeTaps;
}

}  // namespace

SchemePoint plan_scheme(const ExperimentConfig& cfg, const ChannelStats& stats, const std::string& scheme,
                        double alpha_fb, double snr) {
  if (scheme == "analog") return plan_analog(cfg, stats, alpha_fb, snr);
  if (scheme == "rvq") return plan_rvq(cfg, stats, alpha_fb, snr);
  const QuantDomain td = time_domain_for(cfg, stats);
  if (scheme == "tdq-limit") return plan_transform(cfg, stats, td, Alloc::Limit, alpha_fb, snr);
  if (scheme == "tdq-suq-rwf") return plan_transform(cfg, stats, td, Alloc::SuqRwf, alpha_fb, snr);
  if (scheme == "tdq-suq-greedy") return plan_transform(cfg, stats, td, Alloc::SuqGreedy, alpha_fb, snr);
  if (scheme == "kl-suq") return plan_transform(cfg, stats, QuantDomain::KlCoeffs, Alloc::SuqGreedy, alpha_fb, snr);
  if (scheme == "phys-tq") {
    if (!is_physical(stats)) {
      SchemePoint p;
      p.b_tot_bits = budget_to_bits({alpha_fb, cfg.antennas, snr, BudgetScheme::Digital});
      p.analytic_gap_nats = kNan;
      p.status = "needs-physical-model";
      return p;
    }
    return plan_transform(cfg, stats, QuantDomain::PhysPaths, Alloc::SuqGreedy, alpha_fb, snr);
  }
  throw ConfigError("unknown scheme '" + scheme + "'");
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, RunMode mode, std::ostream* log) {
  validate(cfg);
  const ChannelStats stats = cfg.build_stats();
  const int k = cfg.users;
  std::vector<SweepRecord> out;
  for (const std::string& scheme : cfg.schemes) {
    for (double alpha : cfg.alpha_fb_grid) {
      for (double snr_db : cfg.snr_db_grid) {
        const double snr = std::pow(10.0, snr_db / 10.0);
        const SchemePoint p = plan_scheme(cfg, stats, scheme, alpha, snr);
        const double csit = perfect_csit_rate(snr, cfg.antennas, stats.total_power());

        SweepRecord r;
        r.scheme = scheme;
        r.alpha_fb = alpha;
        r.snr_db = snr_db;
        r.clusters = p.clusters;
        r.b_tot_bits = p.b_tot_bits;
        r.rate_csit_bits = nats_to_bits(k * csit);
        r.seed = cfg.master_seed;
        r.status = p.status;
        r.rate_genie_upper_bits = kNan;
        r.analytic_gap_bits = kNan;
        r.rate_lower_bits = kNan;
        r.stderr_bits = 0.0;

        if (mode != RunMode::Simulate) {
          r.analytic_gap_bits = nats_to_bits(p.analytic_gap_nats);
          if (std::isfinite(p.analytic_gap_nats))
            r.rate_lower_bits = nats_to_bits(sum_rate_lower(stats, snr, cfg.antennas, k, p.analytic_gap_nats));
        }
        if (mode != RunMode::Bounds && p.csit) {
          const RateEstimate est =
              mc_rates(stats, *p.csit, snr, cfg.antennas, k, {cfg.n_trials, cfg.master_seed, cfg.jobs});
          r.n_trials = est.n_trials;
          r.rate_genie_upper_bits = nats_to_bits(k * est.genie_upper_nats);
          if (mode == RunMode::Simulate) {
            r.rate_lower_bits = nats_to_bits(k * std::max(0.0, est.lower_nats));
            r.stderr_bits = nats_to_bits(k * est.stderr_nats());
          } else {
            r.stderr_bits = nats_to_bits(k * est.genie_stderr);
          }
          if (log && est.degenerate_fraction > 0.0)
            *log << "  " << scheme << " alpha_fb=" << alpha << ": degenerate CSIT on "
                 << est.degenerate_fraction * 100.0 << "% of subcarriers\n";
        }
        if (log) {
          *log << scheme << " alpha_fb=" << alpha << " snr_db=" << snr_db;
          if (r.clusters > 0) *log << " J=" << r.clusters;
          *log << " " << r.status << "\n";
        }
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string csv_header() {
  return "scheme,alpha_fb,snr_db,J,B_tot_bits,rate_lower_bits,rate_genie_upper_bits,analytic_gap_bits,"
         "rate_csit_bits,n_trials,stderr_bits,seed,status";
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error("csv: bad number '" + s + "'");
  return v;
}

}  // namespace

void write_csv(const std::vector<SweepRecord>& records, std::ostream& out) {
  out << csv_header() << '\n';
  for (const SweepRecord& r : records) {
    out << r.scheme << ',' << fmt(r.alpha_fb) << ',' << fmt(r.snr_db) << ',' << r.clusters << ','
        << fmt(r.b_tot_bits) << ',' << fmt(r.rate_lower_bits) << ',' << fmt(r.rate_genie_upper_bits) << ','
        << fmt(r.analytic_gap_bits) << ',' << fmt(r.rate_csit_bits) << ',' << r.n_trials << ','
        << fmt(r.stderr_bits) << ',' << r.seed << ',' << r.status << '\n';
  }
}

void emit_csv(const std::vector<SweepRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(records, out);
  out.flush();
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

std::vector<SweepRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw std::runtime_error("csv: missing or unexpected header");
  std::vector<SweepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 13) throw std::runtime_error("csv: expected 13 fields, got " + std::to_string(f.size()));
    SweepRecord r;
    r.scheme = f[0];
    r.alpha_fb = parse_double(f[1]);
    r.snr_db = parse_double(f[2]);
    r.clusters = std::stoi(f[3]);
    r.b_tot_bits = parse_double(f[4]);
    r.rate_lower_bits = parse_double(f[5]);
    r.rate_genie_upper_bits = parse_double(f[6]);
    r.analytic_gap_bits = parse_double(f[7]);
    r.rate_csit_bits = parse_double(f[8]);
    r.n_trials = std::stoull(f[9]);
    r.stderr_bits = parse_double(f[10]);
    r.seed = std::stoull(f[11]);
    r.status = f[12];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace csifb
