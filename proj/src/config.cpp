#include "csifb/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace csifb {

namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, [](char c) { return c == ','; });
  std::vector<std::string> out;
  for (std::string& p : parts) {
    boost::algorithm::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) throw ConfigError("config: cannot parse '" + text + "' for key " + key);
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const std::string& item : split_list(text)) out.push_back(parse_value<T>(key, item));
  return out;
}

bool parse_bool(const std::string& key, std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError("config: expected a boolean for key " + key + ", got '" + text + "'");
}

// Strips trailing "# ..." / "; ..." comments, which the ini reader keeps.
std::string value_of(const pt::ptree& node) {
  std::string v = node.get_value<std::string>();
  const auto cut = v.find_first_of("#;");
  if (cut != std::string::npos) v.erase(cut);
  boost::algorithm::trim(v);
  return v;
}

void read_experiment(const pt::ptree& sec, ExperimentConfig& cfg) {
  for (const auto& [key, node] : sec) {
    const std::string v = value_of(node);
    if (key == "preset") cfg.channel_preset = v;
    else if (key == "M") cfg.antennas = parse_value<int>(key, v);
    else if (key == "K") cfg.users = parse_value<int>(key, v);
    else if (key == "N") cfg.subcarriers = parse_value<int>(key, v);
    else if (key == "snr_db") cfg.snr_db_grid = parse_list<double>(key, v);
    else if (key == "alpha_fb") cfg.alpha_fb_grid = parse_list<double>(key, v);
    else if (key == "schemes") cfg.schemes = split_list(v);
    else if (key == "trials") cfg.n_trials = parse_value<std::size_t>(key, v);
    else if (key == "seed") cfg.master_seed = parse_value<std::uint64_t>(key, v);
    else if (key == "jobs") cfg.jobs = parse_value<int>(key, v);
    else if (key == "psi_known") cfg.psi_known = parse_bool(key, v);
    else throw ConfigError("config: unknown key [experiment] " + key);
  }
}

void read_channel(const pt::ptree& sec, ExperimentConfig& cfg) {
  ChannelSpec spec;
  for (const auto& [key, node] : sec) {
    const std::string v = value_of(node);
    if (key == "dip") spec.dip = parse_list<double>(key, v);
    else if (key == "delays_us") spec.delays_us = parse_list<double>(key, v);
    else if (key == "path_variances") spec.path_variances = parse_list<double>(key, v);
    else if (key == "sample_rate_hz") spec.sample_rate_hz = parse_value<double>(key, v);
    else if (key == "taps") spec.taps = parse_value<int>(key, v);
    else throw ConfigError("config: unknown key [channel] " + key);
  }
  cfg.channel = spec;
}

void read_clusters(const pt::ptree& sec, const std::string& name, std::vector<int>& clusters, int* cap) {
  for (const auto& [key, node] : sec) {
    const std::string v = value_of(node);
    if (key == "J_grid") clusters = parse_list<int>(key, v);
    else if (key == "bit_cap" && cap) *cap = parse_value<int>(key, v);
    else throw ConfigError("config: unknown key [" + name + "] " + key);
  }
}

}  // namespace

ChannelStats ExperimentConfig::build_stats() const {
  if (!channel) return preset_stats(channel_preset, subcarriers);
  const ChannelSpec& c = *channel;
  if (!c.dip.empty()) return build_dip_stats(c.dip, subcarriers);
  std::vector<double> delays_s(c.delays_us.size());
  std::transform(c.delays_us.begin(), c.delays_us.end(), delays_s.begin(), [](double us) { return us * 1e-6; });
  return build_physical_stats(delays_s, c.path_variances, TriangularPulse{2.0 / c.sample_rate_hz}, c.sample_rate_hz,
                              c.taps, subcarriers);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.antennas < 2) throw ConfigError("config: M must be at least 2");
  if (cfg.users != cfg.antennas) throw ConfigError("config: K must equal M");
  if (cfg.subcarriers <= 0) throw ConfigError("config: N must be positive");
  if (cfg.snr_db_grid.empty()) throw ConfigError("config: snr_db grid is empty");
  if (cfg.alpha_fb_grid.empty()) throw ConfigError("config: alpha_fb grid is empty");
  if (cfg.schemes.empty()) throw ConfigError("config: no schemes selected");
  for (const std::string& s : cfg.schemes)
    if (std::find(known_schemes().begin(), known_schemes().end(), s) == known_schemes().end())
      throw ConfigError("config: unknown scheme '" + s + "'");
  for (double a : cfg.alpha_fb_grid)
    if (!(a >= 0.0)) throw ConfigError("config: alpha_fb must be nonnegative");
  if (cfg.n_trials < 2) throw ConfigError("config: need at least two trials");
  if (cfg.jobs < 1) throw ConfigError("config: jobs must be positive");
  if (cfg.rvq_bit_cap < 0) throw ConfigError("config: negative RVQ bit cap");
  for (const auto* grid : {&cfg.rvq_clusters, &cfg.analog_clusters})
    for (int j : *grid)
      if (j <= 0 || cfg.subcarriers % j != 0)
        throw ConfigError("config: J = " + std::to_string(j) + " does not divide N = " +
                          std::to_string(cfg.subcarriers));
  if (cfg.channel) {
    const ChannelSpec& c = *cfg.channel;
    if (c.dip.empty() == c.delays_us.empty())
      throw ConfigError("config: [channel] needs exactly one of dip or delays_us");
    if (!c.delays_us.empty() && c.delays_us.size() != c.path_variances.size())
      throw ConfigError("config: delays_us and path_variances differ in length");
  } else {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), cfg.channel_preset) == names.end())
      throw ConfigError("config: unknown preset '" + cfg.channel_preset + "'");
  }
  try {
    (void)cfg.build_stats();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: bad channel: ") + e.what());
  }
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [name, sec] : tree) {
    if (sec.empty() && !sec.data().empty()) throw ConfigError("config: key '" + name + "' outside a section");
    if (name == "experiment") read_experiment(sec, cfg);
    else if (name == "channel") read_channel(sec, cfg);
    else if (name == "rvq") read_clusters(sec, name, cfg.rvq_clusters, &cfg.rvq_bit_cap);
    else if (name == "analog") read_clusters(sec, name, cfg.analog_clusters, nullptr);
    else throw ConfigError("config: unknown section [" + name + "]");
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace csifb
