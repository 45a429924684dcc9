#include "nls/lab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nls/error.hpp"
#include "nls/virial.hpp"

namespace nls::lab {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw ConfigError("key '" + key + "': expected a finite number, got '" + v + "'");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::GroundOrbit: return "ground_orbit";
    case Scenario::ThresholdKneg: return "threshold_kneg";
    case Scenario::ThresholdKpos: return "threshold_kpos";
    case Scenario::Subcritical: return "subcritical";
    case Scenario::Supercritical: return "supercritical";
    case Scenario::Custom: return "custom";
  }
  return "?";
}

Scenario parse_scenario(std::string_view s) {
  std::string k;
  for (char c : s)
    if (c != '_' && c != '-') k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (k == "groundorbit") return Scenario::GroundOrbit;
  if (k == "thresholdkneg") return Scenario::ThresholdKneg;
  if (k == "thresholdkpos") return Scenario::ThresholdKpos;
  if (k == "subcritical") return Scenario::Subcritical;
  if (k == "supercritical") return Scenario::Supercritical;
  if (k == "custom") return Scenario::Custom;
  throw ConfigError("unknown scenario '" + std::string(s) + "'");
}

PhysParams ExperimentConfig::params() const { return PhysParams::make(d, p); }
GridSpec ExperimentConfig::grid() const { return GridSpec::make(L, n); }

double ExperimentConfig::effective_amplitude() const {
  if (amplitude) return *amplitude;
  return scenario == Scenario::Supercritical ? 1.1 : 0.5;
}

std::vector<double> ExperimentConfig::radii() const {
  if (!probe_radii.empty()) {
    auto r = probe_radii;
    std::sort(r.begin(), r.end());
    return r;
  }
  return default_probe_radii(GridSpec{L, n});
}

void ExperimentConfig::validate() const {
  params();
  grid();
  integrator.validate();
  for (double r : radii())
    if (!(r > 0.0 && 3.0 * r <= L)) throw ConfigError("probe radius " + fmt(r) + " needs 0 < R and 3R <= L");
  for (double e : eps)
    if (!(e > 0.0)) throw ConfigError("eps values must be positive");
  if (!(mu0_fraction > 0.0)) throw ConfigError("mu0_fraction must be positive");
  if (phase_sign != 1 && phase_sign != -1) throw ConfigError("phase_sign must be +1 or -1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  switch (scenario) {
    case Scenario::ThresholdKneg:
      if (!(b > 1.0)) throw ConfigError("threshold_kneg needs b > 1");
      break;
    case Scenario::ThresholdKpos:
      if (!(b > 0.0 && b < 1.0)) throw ConfigError("threshold_kpos needs 0 < b < 1");
      break;
    case Scenario::Subcritical:
      if (!(effective_amplitude() > 0.0 && effective_amplitude() < 1.0))
        throw ConfigError("subcritical needs 0 < amplitude < 1");
      break;
    case Scenario::Supercritical:
      if (!(effective_amplitude() > 1.0)) throw ConfigError("supercritical needs amplitude > 1");
      break;
    case Scenario::Custom:
      if (seed_file.empty()) throw ConfigError("custom scenario needs seed_file");
      break;
    case Scenario::GroundOrbit: break;
  }
}

KeyValues parse_key_values(std::string_view text, const std::string& source) {
  KeyValues kv;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "d",          "p",           "L",           "n",
      "scenario",   "b",           "phase_sign",  "amplitude",
      "boost",      "seed_file",   "dt0",         "dt_min",
      "cfl_c",      "t_end",       "sample_every", "blowup_grad_factor",
      "tail_fraction_max", "sponge_strength", "sponge_width", "max_steps",
      "probe_radii", "eps",        "mu0_fraction", "output_dir",
      "backward",   "modulation",  "checkpoint_every"};
  return keys;
}

ExperimentConfig apply(ExperimentConfig c, const KeyValues& kv) {
  for (const auto& [key, v] : kv) {
    if (key == "d") c.d = static_cast<int>(to_long(key, v));
    else if (key == "p") c.p = to_double(key, v);
    else if (key == "L") c.L = to_double(key, v);
    else if (key == "n") c.n = static_cast<int>(to_long(key, v));
    else if (key == "scenario") c.scenario = parse_scenario(v);
    else if (key == "b") c.b = to_double(key, v);
    else if (key == "phase_sign") c.phase_sign = static_cast<int>(to_long(key, v));
    else if (key == "amplitude") {
      if (v.empty() || v == "default") c.amplitude.reset();
      else c.amplitude = to_double(key, v);
    } else if (key == "boost") c.boost = to_double(key, v);
    else if (key == "seed_file") c.seed_file = v;
    else if (key == "dt0") c.integrator.dt0 = to_double(key, v);
    else if (key == "dt_min") c.integrator.dt_min = to_double(key, v);
    else if (key == "cfl_c") c.integrator.cfl_c = to_double(key, v);
    else if (key == "t_end") c.integrator.t_end = to_double(key, v);
    else if (key == "sample_every") c.integrator.sample_every = to_double(key, v);
    else if (key == "blowup_grad_factor") c.integrator.blowup_grad_factor = to_double(key, v);
    else if (key == "tail_fraction_max") c.integrator.tail_fraction_max = to_double(key, v);
    else if (key == "sponge_strength") c.integrator.sponge_strength = to_double(key, v);
    else if (key == "sponge_width") c.integrator.sponge_width = to_double(key, v);
    else if (key == "max_steps") c.integrator.max_steps = to_long(key, v);
    else if (key == "probe_radii") c.probe_radii = to_list(key, v);
    else if (key == "eps") c.eps = to_list(key, v);
    else if (key == "mu0_fraction") c.mu0_fraction = to_double(key, v);
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "backward") c.backward = to_bool(key, v);
    else if (key == "modulation") c.modulation = to_bool(key, v);
    else if (key == "checkpoint_every") c.checkpoint_every = static_cast<int>(to_long(key, v));
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

KeyValues to_key_values(const ExperimentConfig& c) {
  const auto& ic = c.integrator;
  return {
      {"d", std::to_string(c.d)},
      {"p", fmt(c.p)},
      {"L", fmt(c.L)},
      {"n", std::to_string(c.n)},
      {"scenario", to_string(c.scenario)},
      {"b", fmt(c.b)},
      {"phase_sign", std::to_string(c.phase_sign)},
      {"amplitude", fmt(c.effective_amplitude())},
      {"boost", fmt(c.boost)},
      {"seed_file", c.seed_file},
      {"dt0", fmt(ic.dt0)},
      {"dt_min", fmt(ic.dt_min)},
      {"cfl_c", fmt(ic.cfl_c)},
      {"t_end", fmt(ic.t_end)},
      {"sample_every", fmt(ic.sample_every)},
      {"blowup_grad_factor", fmt(ic.blowup_grad_factor)},
      {"tail_fraction_max", fmt(ic.tail_fraction_max)},
      {"sponge_strength", fmt(ic.sponge_strength)},
      {"sponge_width", fmt(ic.sponge_width)},
      {"max_steps", std::to_string(ic.max_steps)},
      {"probe_radii", join(c.radii())},
      {"eps", join(c.eps)},
      {"mu0_fraction", fmt(c.mu0_fraction)},
      {"output_dir", c.output_dir},
      {"backward", c.backward ? "true" : "false"},
      {"modulation", c.modulation ? "true" : "false"},
      {"checkpoint_every", std::to_string(c.checkpoint_every)},
  };
}

std::string render(const ExperimentConfig& cfg) {
  const auto kv = to_key_values(cfg);
  std::string out;
  for (const auto& key : config_keys()) out += key + " = " + kv.at(key) + "\n";
  return out;
}

std::filesystem::path output_root() {
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return std::filesystem::current_path();
}

}  // namespace nls::lab
