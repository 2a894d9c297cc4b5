#include "core/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "core/error.hpp"

namespace sdt {

namespace {

using Errors = std::vector<std::string>;

std::string join(const Errors& errs) {
  std::string s;
  for (const auto& e : errs) {
    if (!s.empty()) s += '\n';
    s += e;
  }
  return s;
}

void check_keys(const toml::table& t, const std::string& prefix,
                const std::set<std::string>& allowed, Errors& errs) {
  for (const auto& [key, node] : t) {
    if (!allowed.contains(std::string(key.str()))) {
      errs.push_back("unknown key '" + prefix + std::string(key.str()) + "'");
    }
  }
}

void read(const toml::table& t, const std::string& prefix, const char* key, double& out, Errors& errs) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_number()) {
    errs.push_back("'" + prefix + key + "' must be a number");
    return;
  }
  out = n->value<double>().value();
}

void read(const toml::table& t, const std::string& prefix, const char* key, std::optional<double>& out,
          Errors& errs) {
  if (!t.get(key)) return;
  double v = 0.0;
  const auto before = errs.size();
  read(t, prefix, key, v, errs);
  if (errs.size() == before) out = v;
}

template <class Int>
void read_int(const toml::table& t, const std::string& prefix, const char* key, Int& out, Errors& errs) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_integer()) {
    errs.push_back("'" + prefix + key + "' must be an integer");
    return;
  }
  out = static_cast<Int>(n->as_integer()->get());
}

void read(const toml::table& t, const std::string& prefix, const char* key, bool& out, Errors& errs) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_boolean()) {
    errs.push_back("'" + prefix + key + "' must be a boolean");
    return;
  }
  out = n->as_boolean()->get();
}

void read(const toml::table& t, const std::string& prefix, const char* key, std::string& out, Errors& errs) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_string()) {
    errs.push_back("'" + prefix + key + "' must be a string");
    return;
  }
  out = n->as_string()->get();
}

template <class T>
void read_array(const toml::table& t, const std::string& prefix, const char* key, std::vector<T>& out,
                Errors& errs) {
  const toml::node* n = t.get(key);
  if (!n) return;
  const toml::array* arr = n->as_array();
  std::vector<T> values;
  bool ok = arr != nullptr;
  if (ok) {
    for (const auto& el : *arr) {
      if constexpr (std::is_integral_v<T>) {
        if (!el.is_integer()) { ok = false; break; }
        values.push_back(static_cast<T>(el.as_integer()->get()));
      } else {
        if (!el.is_number()) { ok = false; break; }
        values.push_back(el.value<double>().value());
      }
    }
  }
  if (!ok) {
    errs.push_back("'" + prefix + key + "' must be an array of " +
                   (std::is_integral_v<T> ? "integers" : "numbers"));
    return;
  }
  out = std::move(values);
}

const toml::table* section(const toml::table& root, const char* name, Errors& errs) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) {
    errs.push_back("'" + std::string(name) + "' must be a table");
    return nullptr;
  }
  return n->as_table();
}

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
toml::array to_array(const std::vector<T>& v) {
  toml::array a;
  for (const auto& x : v) {
    if constexpr (std::is_integral_v<T>) a.push_back(static_cast<std::int64_t>(x));
    else a.push_back(x);
  }
  return a;
}

}  // namespace

LatticeConfig LatticeSection::to_model() const {
  LatticeConfig c;
  c.wavelength = wavelength_nm * units::nm;
  c.depth = units::micro_kelvin_to_joule(depth_uK);
  c.atom_mass = atom_mass_amu * units::amu;
  c.axial_freq = units::khz_to_rad_per_s(axial_freq_kHz);
  c.radial_freq = units::khz_to_rad_per_s(radial_freq_kHz);
  c.temperature = temperature_uK * 1e-6;
  c.down_weights = {down_weights[0], down_weights[1]};
  return c;
}

PulseSpec PulseSection::to_pulse() const { return to_pulse(parse_pulse_kind(kind)); }

PulseSpec PulseSection::to_pulse(PulseKind k) const {
  return make_pulse(k, units::khz_to_rad_per_s(rabi_kHz));
}

RelaxationParams PulseSection::relaxation() const {
  RelaxationParams r;
  if (T1_ms) r.t1 = *T1_ms * units::ms;
  if (T2_us) r.t2 = *T2_us * units::us;
  return r;
}

RobustnessOptions RobustnessSection::to_options() const {
  RobustnessOptions o;
  o.threshold = threshold;
  o.area_error_max = area_error_max;
  if (mode == "envelope") o.mode = AreaErrorMode::envelope;
  else if (mode == "worst_case") o.mode = AreaErrorMode::worst_case;
  else fail(ErrorKind::config, "robustness.mode must be 'envelope' or 'worst_case'");
  return o;
}

RampSpec RunConfig::ramp_spec() const {
  RampSpec r;
  r.ramp_time = transport.ramp_time_us * units::us;
  return r;
}

double RunConfig::derived_leak_probability() const {
  const double duration = transport.ramp_time_us * units::us + pulse.to_pulse().duration();
  return (errors.raman_rate_Hz + errors.rayleigh_rate_Hz) * duration;
}

ErrorModel RunConfig::error_model() const {
  ErrorModel m;
  m.p_ini = errors.p_ini;
  m.p_flip = errors.p_flip;
  m.p_flip_spread = errors.p_flip_spread;
  m.p_leak_step = errors.p_leak_step ? *errors.p_leak_step : derived_leak_probability();
  m.leak_loss = errors.leak_loss;
  m.theta_offset = errors.theta_offset;
  return m;
}

std::vector<std::string> validate_config(const RunConfig& c) {
  Errors e;
  const auto& l = c.lattice;
  if (!(l.wavelength_nm > 0.0)) e.push_back("lattice.wavelength_nm must be > 0");
  if (!(l.depth_uK > 0.0)) e.push_back("lattice.depth_uK must be > 0");
  if (!(l.axial_freq_kHz > 0.0)) e.push_back("lattice.axial_freq_kHz must be > 0");
  if (!(l.radial_freq_kHz > 0.0)) e.push_back("lattice.radial_freq_kHz must be > 0");
  if (!(l.temperature_uK >= 0.0)) e.push_back("lattice.temperature_uK must be >= 0");
  if (!(l.atom_mass_amu > 0.0)) e.push_back("lattice.atom_mass_amu must be > 0");
  if (!in_unit(l.down_weights[0]) || !in_unit(l.down_weights[1]) ||
      std::abs(l.down_weights[0] + l.down_weights[1] - 1.0) > 1e-12) {
    e.push_back("lattice.down_weights must be two fractions in [0, 1] summing to 1");
  }

  const auto& p = c.pulse;
  if (!(p.rabi_kHz > 0.0)) e.push_back("pulse.rabi_kHz must be > 0");
  try {
    parse_pulse_kind(p.kind);
  } catch (const Error&) {
    e.push_back("pulse.kind must be 'rectangular_pi' or 'composite_90_225_315' (got '" + p.kind + "')");
  }
  if (p.T1_ms && !(*p.T1_ms > 0.0)) e.push_back("pulse.T1_ms must be > 0");
  if (p.T2_us && !(*p.T2_us > 0.0)) e.push_back("pulse.T2_us must be > 0");
  if (p.T1_ms && p.T2_us && *p.T1_ms > 0.0 && *p.T2_us * units::us > 2.0 * *p.T1_ms * units::ms) {
    e.push_back("pulse.T2_us must not exceed 2 T1");
  }

  const auto& r = c.errors;
  if (!in_unit(r.p_ini)) e.push_back("errors.p_ini must lie in [0, 1]");
  if (!in_unit(r.p_flip)) e.push_back("errors.p_flip must lie in [0, 1]");
  if (!in_unit(r.p_flip_spread)) e.push_back("errors.p_flip_spread must lie in [0, 1]");
  if (r.p_leak_step && !in_unit(*r.p_leak_step)) e.push_back("errors.p_leak_step must lie in [0, 1]");
  if (!in_unit(r.leak_loss)) e.push_back("errors.leak_loss must lie in [0, 1]");
  if (!std::isfinite(r.theta_offset)) e.push_back("errors.theta_offset must be finite");
  if (!(r.raman_rate_Hz >= 0.0)) e.push_back("errors.raman_rate_Hz must be >= 0");
  if (!(r.rayleigh_rate_Hz >= 0.0)) e.push_back("errors.rayleigh_rate_Hz must be >= 0");

  const auto& t = c.transport;
  if (t.L_list.empty()) e.push_back("transport.L_list must not be empty");
  for (int L : t.L_list) {
    if (L < 1 || L > 100000) {
      e.push_back("transport.L_list entries must lie in [1, 100000] (got " + std::to_string(L) + ")");
      break;
    }
  }
  if (t.atoms_per_L < 1) e.push_back("transport.atoms_per_L must be >= 1");
  if (!(t.ramp_time_us > 0.0)) e.push_back("transport.ramp_time_us must be > 0");

  if (!r.p_leak_step && e.empty() && !in_unit(c.derived_leak_probability())) {
    e.push_back("derived scattering probability per step exceeds 1; set errors.p_leak_step");
  }

  const auto& a = c.analysis;
  if (!(a.detection_sigma_lambda >= 0.0)) e.push_back("analysis.detection_sigma_lambda must be >= 0");
  if (!(a.p_ini_fit > 0.0 && a.p_ini_fit <= 1.0)) e.push_back("analysis.p_ini_fit must lie in (0, 1]");
  for (int L : a.histogram_L) {
    if (L < 0) {
      e.push_back("analysis.histogram_L entries must be >= 0");
      break;
    }
  }

  const auto& m = c.pulse_map;
  if (!(m.delta_max_kHz > 0.0)) e.push_back("pulse_map.delta_max_kHz must be > 0");
  if (!(m.delta_step_kHz > 0.0)) e.push_back("pulse_map.delta_step_kHz must be > 0");
  else if (m.delta_max_kHz / m.delta_step_kHz > 1e6) e.push_back("pulse_map grid exceeds 2e6 points");
  if (m.area_errors.empty()) e.push_back("pulse_map.area_errors must not be empty");
  for (double x : m.area_errors) {
    if (!(x > -1.0 && x < 10.0)) {
      e.push_back("pulse_map.area_errors entries must lie in (-1, 10)");
      break;
    }
  }

  const auto& b = c.robustness;
  if (!(b.threshold > 0.0 && b.threshold < 1.0)) e.push_back("robustness.threshold must lie in (0, 1)");
  if (!(b.area_error_max >= 0.0 && b.area_error_max < 1.0)) {
    e.push_back("robustness.area_error_max must lie in [0, 1)");
  }
  if (b.mode != "envelope" && b.mode != "worst_case") {
    e.push_back("robustness.mode must be 'envelope' or 'worst_case'");
  }

  if (!(c.ramp.budget > 0.0 && c.ramp.budget < 1.0)) e.push_back("ramp.budget must lie in (0, 1)");
  if (!(c.ramp.tau_min_us > 0.0)) e.push_back("ramp.tau_min_us must be > 0");

  if (c.bands.n_bands < 0) e.push_back("bands.n_bands must be >= 0");
  if (c.bands.plane_waves < 0) e.push_back("bands.plane_waves must be >= 0");
  if (c.bands.plane_waves > 0 && c.bands.n_bands > 0 && c.bands.plane_waves < 2 * c.bands.n_bands + 1) {
    e.push_back("bands.plane_waves must be >= 2 n_bands + 1");
  }
  if (c.bands.q_points < 2) e.push_back("bands.q_points must be >= 2");

  if (c.format != "csv" && c.format != "json") e.push_back("format must be 'csv' or 'json'");
  if (c.output_dir.empty()) e.push_back("output_dir must not be empty");
  return e;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& err) {
    std::ostringstream msg;
    msg << source << ": TOML syntax error at line " << err.source().begin.line << ": "
        << err.description();
    fail(ErrorKind::config, msg.str());
  }

  RunConfig c;
  Errors errs;
  check_keys(root, "",
             {"lattice", "pulse", "errors", "transport", "analysis", "pulse_map", "robustness", "ramp",
              "bands", "seed", "output_dir", "format"},
             errs);

  if (const auto* t = section(root, "lattice", errs)) {
    const std::string p = "lattice.";
    check_keys(*t, p,
               {"wavelength_nm", "depth_uK", "axial_freq_kHz", "radial_freq_kHz", "temperature_uK",
                "atom_mass_amu", "down_weights"},
               errs);
    auto& s = c.lattice;
    read(*t, p, "wavelength_nm", s.wavelength_nm, errs);
    read(*t, p, "depth_uK", s.depth_uK, errs);
    read(*t, p, "axial_freq_kHz", s.axial_freq_kHz, errs);
    read(*t, p, "radial_freq_kHz", s.radial_freq_kHz, errs);
    read(*t, p, "temperature_uK", s.temperature_uK, errs);
    read(*t, p, "atom_mass_amu", s.atom_mass_amu, errs);
    if (t->get("down_weights")) {
      std::vector<double> w;
      const auto before = errs.size();
      read_array(*t, p, "down_weights", w, errs);
      if (errs.size() == before) {
        if (w.size() == 2) s.down_weights = {w[0], w[1]};
        else errs.push_back("'lattice.down_weights' must have exactly 2 entries");
      }
    }
  }

  if (const auto* t = section(root, "pulse", errs)) {
    const std::string p = "pulse.";
    check_keys(*t, p, {"rabi_kHz", "kind", "T1_ms", "T2_us"}, errs);
    read(*t, p, "rabi_kHz", c.pulse.rabi_kHz, errs);
    read(*t, p, "kind", c.pulse.kind, errs);
    read(*t, p, "T1_ms", c.pulse.T1_ms, errs);
    read(*t, p, "T2_us", c.pulse.T2_us, errs);
  }

  if (const auto* t = section(root, "errors", errs)) {
    const std::string p = "errors.";
    check_keys(*t, p,
               {"p_ini", "p_flip", "p_flip_spread", "p_leak_step", "leak_loss", "theta_offset",
                "raman_rate_Hz", "rayleigh_rate_Hz"},
               errs);
    auto& s = c.errors;
    read(*t, p, "p_ini", s.p_ini, errs);
    read(*t, p, "p_flip", s.p_flip, errs);
    read(*t, p, "p_flip_spread", s.p_flip_spread, errs);
    read(*t, p, "p_leak_step", s.p_leak_step, errs);
    read(*t, p, "leak_loss", s.leak_loss, errs);
    read(*t, p, "theta_offset", s.theta_offset, errs);
    read(*t, p, "raman_rate_Hz", s.raman_rate_Hz, errs);
    read(*t, p, "rayleigh_rate_Hz", s.rayleigh_rate_Hz, errs);
  }

  if (const auto* t = section(root, "transport", errs)) {
    const std::string p = "transport.";
    check_keys(*t, p, {"L_list", "atoms_per_L", "ramp_time_us"}, errs);
    read_array(*t, p, "L_list", c.transport.L_list, errs);
    read_int(*t, p, "atoms_per_L", c.transport.atoms_per_L, errs);
    read(*t, p, "ramp_time_us", c.transport.ramp_time_us, errs);
  }

  if (const auto* t = section(root, "analysis", errs)) {
    const std::string p = "analysis.";
    check_keys(*t, p, {"detection_sigma_lambda", "p_ini_fit", "free_p_ini", "histogram_L"}, errs);
    read(*t, p, "detection_sigma_lambda", c.analysis.detection_sigma_lambda, errs);
    read(*t, p, "p_ini_fit", c.analysis.p_ini_fit, errs);
    read(*t, p, "free_p_ini", c.analysis.free_p_ini, errs);
    read_array(*t, p, "histogram_L", c.analysis.histogram_L, errs);
  }

  if (const auto* t = section(root, "pulse_map", errs)) {
    const std::string p = "pulse_map.";
    check_keys(*t, p, {"delta_max_kHz", "delta_step_kHz", "area_errors"}, errs);
    read(*t, p, "delta_max_kHz", c.pulse_map.delta_max_kHz, errs);
    read(*t, p, "delta_step_kHz", c.pulse_map.delta_step_kHz, errs);
    read_array(*t, p, "area_errors", c.pulse_map.area_errors, errs);
  }

  if (const auto* t = section(root, "robustness", errs)) {
    const std::string p = "robustness.";
    check_keys(*t, p, {"threshold", "area_error_max", "mode"}, errs);
    read(*t, p, "threshold", c.robustness.threshold, errs);
    read(*t, p, "area_error_max", c.robustness.area_error_max, errs);
    read(*t, p, "mode", c.robustness.mode, errs);
  }

  if (const auto* t = section(root, "ramp", errs)) {
    const std::string p = "ramp.";
    check_keys(*t, p, {"budget", "tau_min_us"}, errs);
    read(*t, p, "budget", c.ramp.budget, errs);
    read(*t, p, "tau_min_us", c.ramp.tau_min_us, errs);
  }

  if (const auto* t = section(root, "bands", errs)) {
    const std::string p = "bands.";
    check_keys(*t, p, {"n_bands", "plane_waves", "q_points"}, errs);
    read_int(*t, p, "n_bands", c.bands.n_bands, errs);
    read_int(*t, p, "plane_waves", c.bands.plane_waves, errs);
    read_int(*t, p, "q_points", c.bands.q_points, errs);
  }

  if (const toml::node* n = root.get("seed")) {
    if (!n->is_integer() || n->as_integer()->get() < 0) {
      errs.push_back("'seed' must be a non-negative integer");
    } else {
      c.seed = static_cast<std::uint64_t>(n->as_integer()->get());
    }
  }
  read(root, "", "output_dir", c.output_dir, errs);
  read(root, "", "format", c.format, errs);

  for (auto& e : validate_config(c)) errs.push_back(std::move(e));
  if (!errs.empty()) fail(ErrorKind::config, source + ": invalid configuration\n" + join(errs));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string to_toml(const RunConfig& c) {
  toml::table root;
  if (c.seed) root.insert("seed", static_cast<std::int64_t>(*c.seed));
  root.insert("output_dir", c.output_dir);
  root.insert("format", c.format);

  const auto& l = c.lattice;
  root.insert("lattice", toml::table{{"wavelength_nm", l.wavelength_nm},
                                     {"depth_uK", l.depth_uK},
                                     {"axial_freq_kHz", l.axial_freq_kHz},
                                     {"radial_freq_kHz", l.radial_freq_kHz},
                                     {"temperature_uK", l.temperature_uK},
                                     {"atom_mass_amu", l.atom_mass_amu},
                                     {"down_weights", toml::array{l.down_weights[0], l.down_weights[1]}}});

  toml::table pulse{{"rabi_kHz", c.pulse.rabi_kHz}, {"kind", c.pulse.kind}};
  if (c.pulse.T1_ms) pulse.insert("T1_ms", *c.pulse.T1_ms);
  if (c.pulse.T2_us) pulse.insert("T2_us", *c.pulse.T2_us);
  root.insert("pulse", std::move(pulse));

  const auto& r = c.errors;
  toml::table errors{{"p_ini", r.p_ini},
                     {"p_flip", r.p_flip},
                     {"p_flip_spread", r.p_flip_spread},
                     {"leak_loss", r.leak_loss},
                     {"theta_offset", r.theta_offset},
                     {"raman_rate_Hz", r.raman_rate_Hz},
                     {"rayleigh_rate_Hz", r.rayleigh_rate_Hz}};
  if (r.p_leak_step) errors.insert("p_leak_step", *r.p_leak_step);
  root.insert("errors", std::move(errors));

  root.insert("transport", toml::table{{"L_list", to_array(c.transport.L_list)},
                                       {"atoms_per_L", c.transport.atoms_per_L},
                                       {"ramp_time_us", c.transport.ramp_time_us}});
  root.insert("analysis", toml::table{{"detection_sigma_lambda", c.analysis.detection_sigma_lambda},
                                      {"p_ini_fit", c.analysis.p_ini_fit},
                                      {"free_p_ini", c.analysis.free_p_ini},
                                      {"histogram_L", to_array(c.analysis.histogram_L)}});
  root.insert("pulse_map", toml::table{{"delta_max_kHz", c.pulse_map.delta_max_kHz},
                                       {"delta_step_kHz", c.pulse_map.delta_step_kHz},
                                       {"area_errors", to_array(c.pulse_map.area_errors)}});
  root.insert("robustness", toml::table{{"threshold", c.robustness.threshold},
                                        {"area_error_max", c.robustness.area_error_max},
                                        {"mode", c.robustness.mode}});
  root.insert("ramp", toml::table{{"budget", c.ramp.budget}, {"tau_min_us", c.ramp.tau_min_us}});
  root.insert("bands", toml::table{{"n_bands", c.bands.n_bands},
                                   {"plane_waves", c.bands.plane_waves},
                                   {"q_points", c.bands.q_points}});
  std::ostringstream out;
  out << root << '\n';
  return out.str();
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write config file '" + path + "'");
  out << to_toml(cfg);
  if (!out) fail(ErrorKind::io, "failed writing config file '" + path + "'");
}

std::string canonical_json(const RunConfig& c) {
  nlohmann::json j;
  const auto& l = c.lattice;
  j["lattice"] = {{"wavelength_nm", l.wavelength_nm},     {"depth_uK", l.depth_uK},
                  {"axial_freq_kHz", l.axial_freq_kHz},   {"radial_freq_kHz", l.radial_freq_kHz},
                  {"temperature_uK", l.temperature_uK},   {"atom_mass_amu", l.atom_mass_amu},
                  {"down_weights", l.down_weights}};
  j["pulse"] = {{"rabi_kHz", c.pulse.rabi_kHz},
                {"kind", c.pulse.kind},
                {"T1_ms", opt(c.pulse.T1_ms)},
                {"T2_us", opt(c.pulse.T2_us)}};
  const auto& r = c.errors;
  j["errors"] = {{"p_ini", r.p_ini},
                 {"p_flip", r.p_flip},
                 {"p_flip_spread", r.p_flip_spread},
                 {"p_leak_step", opt(r.p_leak_step)},
                 {"leak_loss", r.leak_loss},
                 {"theta_offset", r.theta_offset},
                 {"raman_rate_Hz", r.raman_rate_Hz},
                 {"rayleigh_rate_Hz", r.rayleigh_rate_Hz}};
  j["transport"] = {{"L_list", c.transport.L_list},
                    {"atoms_per_L", c.transport.atoms_per_L},
                    {"ramp_time_us", c.transport.ramp_time_us}};
  j["analysis"] = {{"detection_sigma_lambda", c.analysis.detection_sigma_lambda},
                   {"p_ini_fit", c.analysis.p_ini_fit},
                   {"free_p_ini", c.analysis.free_p_ini},
                   {"histogram_L", c.analysis.histogram_L}};
  j["pulse_map"] = {{"delta_max_kHz", c.pulse_map.delta_max_kHz},
                    {"delta_step_kHz", c.pulse_map.delta_step_kHz},
                    {"area_errors", c.pulse_map.area_errors}};
  j["robustness"] = {{"threshold", c.robustness.threshold},
                     {"area_error_max", c.robustness.area_error_max},
                     {"mode", c.robustness.mode}};
  j["ramp"] = {{"budget", c.ramp.budget}, {"tau_min_us", c.ramp.tau_min_us}};
  j["bands"] = {{"n_bands", c.bands.n_bands},
                {"plane_waves", c.bands.plane_waves},
                {"q_points", c.bands.q_points}};
  j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr);
  j["output_dir"] = c.output_dir;
  j["format"] = c.format;
  return j.dump();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = digits[h & 0xF];
  return s;
}

}  // namespace sdt
