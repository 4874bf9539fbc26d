#include "cavpa/config.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

#include "cavpa/units.hpp"

namespace cavpa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(int line, std::string_view key, const std::string& what) {
  throw ConfigError(fmt::format("line {}: key '{}': {}", line, key, what));
}

double parse_number(int line, std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    fail(line, key, fmt::format("cannot parse '{}' as a number", text));
  if (!std::isfinite(v)) fail(line, key, "value must be finite");
  return v;
}

std::vector<double> parse_list(int line, std::string_view key, std::string_view text) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = trim(text.substr(pos, comma - pos));
    if (item.empty()) fail(line, key, "empty list element");
    out.push_back(parse_number(line, key, item));
    pos = comma + 1;
  }
  if (out.empty()) fail(line, key, "list must not be empty");
  return out;
}

void check(bool ok, int line, std::string_view key, const std::string& what) {
  if (!ok) fail(line, key, what);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string> seen;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;

    if (const size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
    const std::string key{trim(line.substr(0, eq))};
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", line_no));
    if (value.empty()) fail(line_no, key, "empty value");
    if (!seen.insert(key).second) fail(line_no, key, "duplicate key");

    auto num = [&] { return parse_number(line_no, key, value); };

    if (key == "cavity_length_um") {
      cfg.cavity_length_um = num();
      check(cfg.cavity_length_um > 0, line_no, key, "must be > 0");
    } else if (key == "waist_um") {
      cfg.waist_um = num();
      check(cfg.waist_um > 0, line_no, key, "must be > 0");
    } else if (key == "finesse") {
      cfg.finesse = num();
      check(cfg.finesse > 1, line_no, key, "must be > 1");
    } else if (key == "d_el_cm") {
      cfg.d_el_cm = num();
      check(cfg.d_el_cm > 0, line_no, key, "must be > 0");
    } else if (key == "wavelength_nm") {
      cfg.wavelength_nm = num();
      check(cfg.wavelength_nm > 0, line_no, key, "must be > 0");
    } else if (key == "gmax_mhz") {
      cfg.gmax_mhz = num();
      check(cfg.gmax_mhz >= 0, line_no, key, "must be >= 0");
    } else if (key == "kappa_mhz") {
      cfg.kappa_mhz = num();
      check(cfg.kappa_mhz >= 0, line_no, key, "must be >= 0");
    } else if (key == "gamma_mhz") {
      cfg.gamma_mhz = num();
      check(cfg.gamma_mhz > 0, line_no, key, "must be > 0");
    } else if (key == "f_fc") {
      cfg.f_fc = num();
      check(cfg.f_fc >= 0 && cfg.f_fc <= 1, line_no, key, "must lie in [0,1]");
    } else if (key == "g_mhz") {
      cfg.g_mhz = num();
      check(*cfg.g_mhz >= 0, line_no, key, "must be >= 0");
    } else if (key == "omega_mhz") {
      cfg.omega_mhz = num();
      check(*cfg.omega_mhz >= 0, line_no, key, "must be >= 0");
    } else if (key == "delta1_mhz") {
      cfg.delta1_mhz = num();
    } else if (key == "delta2_mhz") {
      cfg.delta2_mhz = num();
    } else if (key == "t_p_us") {
      cfg.t_p_us = num();
      check(*cfg.t_p_us > 0, line_no, key, "must be > 0");
    } else if (key == "epsilon") {
      cfg.epsilon = num();
      check(cfg.epsilon > 0, line_no, key, "must be > 0");
    } else if (key == "n_molecules") {
      const double v = num();
      check(v == std::floor(v) && v >= 1 && v <= 3, line_no, key, "must be an integer in 1..3");
      cfg.n_molecules = static_cast<int>(v);
    } else if (key == "scan_kappa_mhz") {
      cfg.scan_kappa_mhz = parse_list(line_no, key, value);
      for (double v : cfg.scan_kappa_mhz) check(v > 0, line_no, key, "entries must be > 0");
    } else if (key == "scan_f_fc") {
      cfg.scan_f_fc = parse_list(line_no, key, value);
      for (double v : cfg.scan_f_fc)
        check(v > 0 && v <= 1, line_no, key, "entries must lie in (0,1]");
    } else if (key == "rel_tol") {
      cfg.rel_tol = num();
      check(cfg.rel_tol > 0, line_no, key, "must be > 0");
    } else if (key == "abs_tol") {
      cfg.abs_tol = num();
      check(cfg.abs_tol > 0, line_no, key, "must be > 0");
    } else if (key == "max_step_us") {
      cfg.max_step_us = num();
      check(*cfg.max_step_us > 0, line_no, key, "must be > 0");
    } else if (key == "sample_count") {
      const double v = num();
      check(v == std::floor(v) && v >= 16 && v <= 2e7, line_no, key,
            "must be an integer in [16, 2e7]");
      cfg.sample_count = static_cast<long>(v);
    } else if (key == "trajectory_csv") {
      cfg.trajectory_csv = std::string(value);
    } else if (key == "summary_json") {
      cfg.summary_json = std::string(value);
    } else if (key == "scan_csv") {
      cfg.scan_csv = std::string(value);
    } else if (key == "collective_csv") {
      cfg.collective_csv = std::string(value);
    } else {
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
    }
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

SystemParams make_system_params(const RunConfig& cfg) {
  SystemParams p;
  const double g_mhz = cfg.g_mhz ? *cfg.g_mhz : cfg.gmax_mhz * std::sqrt(cfg.f_fc);
  p.g = units::mhz_to_angular(g_mhz);
  p.kappa = units::mhz_to_angular(cfg.kappa_mhz);
  p.gamma_g = units::mhz_to_angular(cfg.f_fc * cfg.gamma_mhz);
  p.gamma_h = units::mhz_to_angular((1.0 - cfg.f_fc) * cfg.gamma_mhz);
  p.omega = resolved_omega(cfg);
  p.delta1 = units::mhz_to_angular(cfg.delta1_mhz);
  p.delta2 = units::mhz_to_angular(cfg.delta2_mhz);
  p.validate();
  return p;
}

CavityGeometry make_geometry(const RunConfig& cfg) {
  CavityGeometry g;
  g.length = cfg.cavity_length_um * 1e-6;
  g.waist = cfg.waist_um * 1e-6;
  g.finesse = cfg.finesse;
  g.validate();
  return g;
}

TransitionSpec make_transition(const RunConfig& cfg) {
  TransitionSpec t;
  t.d_el = cfg.d_el_cm;
  t.wavelength = cfg.wavelength_nm * 1e-9;
  t.gamma = units::mhz_to_angular(cfg.gamma_mhz);
  t.f_fc = cfg.f_fc;
  t.validate();
  return t;
}

IntegratorConfig make_integrator(const RunConfig& cfg) {
  IntegratorConfig ic;
  ic.rel_tol = cfg.rel_tol;
  ic.abs_tol = cfg.abs_tol;
  if (cfg.max_step_us) ic.max_step = units::us_to_s(*cfg.max_step_us);
  return ic;
}

double resolved_omega(const RunConfig& cfg) {
  const double omega_mhz = cfg.omega_mhz ? *cfg.omega_mhz : cfg.kappa_mhz / 2.0;
  return units::mhz_to_angular(omega_mhz);
}

}  // namespace cavpa
