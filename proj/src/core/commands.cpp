#include "core/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <regex>

#include "core/analysis.hpp"
#include "core/bands.hpp"
#include "core/ensemble.hpp"
#include "core/error.hpp"
#include "core/output.hpp"
#include "core/pulse.hpp"
#include "core/ramp.hpp"

namespace sdt {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Context {
  const RunConfig& cfg;
  std::string name;
  std::optional<std::uint64_t> seed;
  std::string format;
  int workers;
  std::vector<std::string> inputs;
  ArtifactWriter writer;
};

std::uint64_t require_seed(const Context& ctx) {
  if (!ctx.seed) {
    fail(ErrorKind::config, ctx.name + " needs a seed: pass --seed or set 'seed' in the config");
  }
  return *ctx.seed;
}

const char* spin_name(FinalSpin s) {
  switch (s) {
    case FinalSpin::up: return "up";
    case FinalSpin::down: return "down";
    case FinalSpin::leaked: return "leaked";
  }
  return "";
}

json interval_json(const std::optional<Interval>& iv) {
  if (!iv) return nullptr;
  return {{"lower", iv->lower}, {"upper", iv->upper}};
}

struct NominalCount {
  int L;
  std::uint64_t analyzed;
  std::uint64_t nominal;

  double probability() const { return analyzed ? static_cast<double>(nominal) / analyzed : 0.0; }
  std::optional<Interval> wilson() const {
    if (!analyzed) return std::nullopt;
    return wilson_interval(nominal, analyzed);
  }
};

NominalCount nominal_of(const EnsembleResult& r) {
  const auto it = r.counts.find(r.nominal_displacement());
  return {r.cycles, r.analyzed(), it == r.counts.end() ? 0 : it->second};
}

Table points_table(const std::vector<NominalCount>& pts) {
  Table t{{"steps", "L", "P_2L", "atoms", "wilson_lower", "wilson_upper"}, {}};
  for (const auto& p : pts) {
    const auto iv = p.wilson();
    t.add({std::int64_t{2 * p.L}, std::int64_t{p.L}, p.probability(), static_cast<std::int64_t>(p.analyzed),
           iv ? iv->lower : 0.0, iv ? iv->upper : 0.0});
  }
  return t;
}

json fit_json(const EfficiencyFit& fit, const std::vector<NominalCount>& pts) {
  json points = json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    points.push_back({{"steps", 2 * pts[i].L},
                      {"L", pts[i].L},
                      {"P_2L", pts[i].probability()},
                      {"atoms", pts[i].analyzed},
                      {"wilson_lower", fit.wilson[i].lower},
                      {"wilson_upper", fit.wilson[i].upper},
                      {"residual", fit.residuals[i]}});
  }
  return {{"p_flip_hat", fit.p_flip},
          {"sigma", fit.p_flip_sigma},
          {"chi2", fit.chi2},
          {"dof", fit.dof},
          {"p_ini_used", fit.p_ini},
          {"p_ini_free", fit.p_ini_free},
          {"p_ini_sigma", fit.p_ini_sigma},
          {"points", points}};
}

EfficiencyFit fit_points(const RunConfig& cfg, const std::vector<NominalCount>& pts) {
  std::vector<EfficiencyPoint> ep;
  for (const auto& p : pts) {
    if (p.analyzed) ep.push_back({2 * p.L, p.probability(), p.analyzed});
  }
  if (ep.size() != pts.size()) fail(ErrorKind::numerical, "a transport point has no analyzed atoms");
  return fit_transport_efficiency(ep, cfg.analysis.p_ini_fit, cfg.analysis.free_p_ini);
}

json transport_entry(const EnsembleResult& r) {
  json hist = json::array();
  for (const auto& [d, count] : r.counts) {
    hist.push_back({{"displacement_quarterwave", d}, {"count", count}, {"probability", r.probability(d)}});
  }
  const auto nc = nominal_of(r);
  return {{"L", r.cycles},
          {"steps", 2 * r.cycles},
          {"atoms", r.atoms},
          {"analyzed", r.analyzed()},
          {"lost", r.lost},
          {"histogram", hist},
          {"P_at_nominal", nc.probability()},
          {"wilson", interval_json(nc.wilson())}};
}

Table outcomes_table(const EnsembleResult& r) {
  Table t{{"atom_index", "final_displacement_quarterwave", "leaked", "leak_step", "lost", "spin_final"}, {}};
  t.rows.reserve(r.outcomes.size());
  for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
    const auto& o = r.outcomes[i];
    t.rows.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(o.final_displacement),
                      std::int64_t{o.leaked}, std::int64_t{o.leak_step}, std::int64_t{o.lost},
                      std::string(spin_name(o.spin_final))});
  }
  return t;
}

// Histogram tables cover every bin between the lowest and highest occupied one.
Table histogram_table(const Histogram& h, double wavelength) {
  Table t{{"bin_center_lambda", "probability"}, {}};
  if (h.counts.empty()) return t;
  for (long i = h.counts.begin()->first; i <= h.counts.rbegin()->first; ++i) {
    t.add({h.bin_center(i) / wavelength, h.probability(i)});
  }
  return t;
}

// Detection-noise substream, disjoint from the transport substreams (= L).
std::uint32_t detection_substream(int L) { return 0x10000u + static_cast<std::uint32_t>(L); }

json analyze_histograms(Context& ctx, int L, std::span<const TransportOutcome> outcomes, std::uint64_t seed,
                        const std::string& prefix) {
  const double lambda = ctx.cfg.lattice.wavelength_nm * units::nm;
  const double sigma = ctx.cfg.analysis.detection_sigma_lambda * lambda;
  const auto samples = detect_displacements(outcomes, lambda, sigma, seed, detection_substream(L));
  json j = {{"L", L}, {"samples", samples.size()}};
  if (samples.empty()) {
    j["warning"] = "no analyzed atoms";
    return j;
  }
  const auto h = make_histograms(samples, lambda);
  const std::string stem = prefix + "hist_L" + std::to_string(L);
  ctx.writer.add_table(stem + "_digitized", histogram_table(h.digitized, lambda), ctx.format);
  ctx.writer.add_table(stem + "_dense", histogram_table(h.dense, lambda), ctx.format);

  std::uint64_t correct = 0, n = 0;
  for (std::size_t i = 0, k = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].lost) continue;
    const long truth = outcomes[i].final_displacement;
    if (truth % 2 == 0) {
      ++n;
      if (classify_site(samples[k], lambda) == truth / 2) ++correct;
    }
    ++k;
  }
  j["classification_rate"] = n ? static_cast<double>(correct) / n : 0.0;
  j["reliability_analytic"] = sigma > 0.0 ? classification_reliability(sigma, lambda) : 1.0;
  try {
    const auto fit = fit_gaussian_peaks(h.dense, lambda);
    json peaks = json::array();
    for (const auto& p : fit.peaks) {
      peaks.push_back({{"site", p.site},
                       {"center_lambda", p.center / lambda},
                       {"center_error_lambda", p.center_error / lambda},
                       {"sigma_lambda", p.sigma / lambda},
                       {"sigma_error_lambda", p.sigma_error / lambda},
                       {"amplitude", p.amplitude},
                       {"degenerate", p.degenerate}});
    }
    j["peaks"] = peaks;
    j["drift_lambda"] = fit.drift / lambda;
    j["drift_error_lambda"] = fit.drift_error / lambda;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::invalid_argument) throw;
    j["peaks"] = json::array();
    j["warning"] = e.what();
  }
  return j;
}

std::vector<EnsembleResult> simulate_all(const Context& ctx, const ErrorModel& model, std::uint64_t seed,
                                         bool keep) {
  std::vector<EnsembleResult> out;
  for (int L : ctx.cfg.transport.L_list) {
    out.push_back(run_ensemble(static_cast<std::uint64_t>(ctx.cfg.transport.atoms_per_L), L, model, seed,
                               {ctx.workers, keep}));
  }
  return out;
}

json cmd_simulate_transport(Context& ctx) {
  const auto seed = require_seed(ctx);
  const auto model = ctx.cfg.error_model();
  const auto results = simulate_all(ctx, model, seed, true);
  json per_L = json::array();
  std::vector<NominalCount> pts;
  for (const auto& r : results) {
    ctx.writer.add_table("transport_L" + std::to_string(r.cycles), outcomes_table(r), ctx.format);
    per_L.push_back(transport_entry(r));
    pts.push_back(nominal_of(r));
  }
  ctx.writer.add_table("transport_points", points_table(pts), ctx.format);
  json summary = {{"p_leak_step", model.p_leak_step}, {"L", per_L}};
  ctx.writer.add_json("transport_summary.json", summary);
  return {{"p_leak_step", model.p_leak_step}, {"L_count", results.size()}};
}

json cmd_pulse_map(Context& ctx) {
  const auto& m = ctx.cfg.pulse_map;
  const auto pulse = ctx.cfg.pulse.to_pulse();
  const auto relax = ctx.cfg.pulse.relaxation();
  const long n = std::lround(m.delta_max_kHz / m.delta_step_kHz);
  std::vector<double> detunings;
  for (long i = -n; i <= n; ++i) detunings.push_back(units::khz_to_rad_per_s(i * m.delta_step_kHz));

  Table t{{"delta_kHz", "area_error", "flip_probability"}, {}};
  for (double eps : m.area_errors) {
    for (const auto& p : spectrum(pulse, detunings, eps, relax, ctx.workers)) {
      t.add({units::rad_per_s_to_khz(p.detuning), eps, p.flip_probability});
    }
  }
  ctx.writer.add_table("pulse_map", t, ctx.format);
  return {{"kind", ctx.cfg.pulse.kind}, {"points", t.rows.size()}};
}

json robustness_json(const RunConfig& cfg) {
  const auto opts = cfg.robustness.to_options();
  json pulses = json::array();
  for (PulseKind k : {PulseKind::rectangular_pi, PulseKind::composite_90_225_315}) {
    const auto pulse = cfg.pulse.to_pulse(k);
    pulses.push_back({{"kind", to_string(k)},
                      {"duration_us", pulse.duration() / units::us},
                      {"halfwidth_kHz", units::rad_per_s_to_khz(robustness_halfwidth(pulse, opts))}});
  }
  return {{"rabi_kHz", cfg.pulse.rabi_kHz},
          {"threshold", cfg.robustness.threshold},
          {"area_error_max", cfg.robustness.area_error_max},
          {"mode", cfg.robustness.mode},
          {"pulses", pulses}};
}

json cmd_robustness(Context& ctx) {
  const auto j = robustness_json(ctx.cfg);
  ctx.writer.add_json("robustness.json", j);
  return j;
}

void add_budget_rows(Table& t, double tau, const char* spin, const ShiftExcitationBudget& b) {
  t.add({tau / units::us, std::string(spin), b.p_axial_displacement, b.p_axial_parametric,
         b.p_radial_parametric, b.total});
}

json budget_json(const ShiftExcitationBudget& b) {
  return {{"p_displacement", b.p_axial_displacement},
          {"p_parametric_ax", b.p_axial_parametric},
          {"p_parametric_rad", b.p_radial_parametric},
          {"total", b.total},
          {"warnings", b.warnings}};
}

json cmd_ramp_optimize(Context& ctx) {
  const auto lattice = ctx.cfg.lattice.to_model();
  const auto opt = optimize_ramp_time(ctx.cfg.ramp.budget, ctx.cfg.ramp.tau_min_us * units::us, lattice);
  Table t{{"tau_us", "spin", "p_displacement", "p_parametric_ax", "p_parametric_rad", "total"}, {}};
  for (const auto& p : opt.scan) {
    add_budget_rows(t, p.tau, "up", p.up);
    add_budget_rows(t, p.tau, "down", p.down);
  }
  ctx.writer.add_table("ramp_scan", t, ctx.format);
  const auto up = shift_budget(Spin::up, opt.tau, lattice);
  const auto down = shift_budget(Spin::down, opt.tau, lattice);
  json j = {{"tau_star_us", opt.tau / units::us},
            {"budget", ctx.cfg.ramp.budget},
            {"up", budget_json(up)},
            {"down", budget_json(down)}};
  ctx.writer.add_json("ramp_optimum.json", j);
  return j;
}

BandStructure bands_for(const RunConfig& cfg) {
  const auto lattice = cfg.lattice.to_model();
  const double s = lattice.depth_in_recoils();
  const int n = cfg.bands.n_bands > 0 ? cfg.bands.n_bands : thermal_band_count(lattice);
  const int pw = cfg.bands.plane_waves > 0 ? cfg.bands.plane_waves : default_plane_waves(s, n);
  return band_structure(s, n, pw, cfg.bands.q_points);
}

json cmd_band_structure(Context& ctx) {
  const auto bs = bands_for(ctx.cfg);
  Table t{{"band", "q_index", "energy_Er"}, {}};
  json edges = json::array();
  for (std::size_t n = 0; n < bs.energies.size(); ++n) {
    for (std::size_t i = 0; i < bs.energies[n].size(); ++i) {
      t.add({static_cast<std::int64_t>(n), static_cast<std::int64_t>(i), bs.energies[n][i]});
    }
    const auto& b = bs.bands[n];
    edges.push_back({{"band", b.index}, {"min_Er", b.min_energy}, {"max_Er", b.max_energy}, {"width_Er", b.width()}});
  }
  ctx.writer.add_table("bands", t, ctx.format);
  json j = {{"depth_in_recoils", bs.depth_in_recoils},
            {"plane_waves", bs.plane_waves},
            {"quasi_momentum_points", bs.quasi_momentum_points},
            {"converged", bs.converged},
            {"convergence_change_Er", bs.convergence_change},
            {"bands", edges}};
  try {
    j["tunneling_per_shift"] = shift_tunneling_probability(ctx.cfg.lattice.to_model(), ctx.cfg.ramp_spec(), bs);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::numerical) throw;
    j["tunneling_per_shift"] = nullptr;
    j["warning"] = e.what();
  }
  ctx.writer.add_json("bands_summary.json", j);
  return {{"bands", bs.bands.size()}, {"converged", bs.converged}, {"tunneling_per_shift", j["tunneling_per_shift"]}};
}

// transport_L<n>.csv files under the given paths (files or directories).
std::vector<std::pair<int, std::string>> transport_files(const std::vector<std::string>& inputs) {
  static const std::regex pattern(R"(transport_L(\d+)\.csv)");
  std::vector<std::pair<int, std::string>> found;
  auto consider = [&](const fs::path& p, bool strict) {
    std::smatch m;
    const std::string name = p.filename().string();
    if (std::regex_match(name, m, pattern)) found.emplace_back(std::stoi(m[1]), p.string());
    else if (strict) fail(ErrorKind::config, "'" + p.string() + "' is not a transport_L<n>.csv file");
  };
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::directory_iterator(in)) consider(e.path(), false);
    } else if (fs::exists(in)) {
      consider(in, true);
    } else {
      fail(ErrorKind::config, "input '" + in + "' does not exist");
    }
  }
  if (found.empty()) fail(ErrorKind::config, "no transport_L<n>.csv files among the inputs");
  std::sort(found.begin(), found.end());
  return found;
}

std::vector<TransportOutcome> read_outcomes(const std::string& path) {
  const auto csv = read_csv(path);
  const auto c_disp = csv.column("final_displacement_quarterwave");
  const auto c_leaked = csv.column("leaked");
  const auto c_step = csv.column("leak_step");
  const auto c_lost = csv.column("lost");
  const auto c_spin = csv.column("spin_final");
  std::vector<TransportOutcome> out;
  out.reserve(csv.rows.size());
  try {
    for (const auto& row : csv.rows) {
      TransportOutcome o;
      o.final_displacement = std::stol(row[c_disp]);
      o.leaked = std::stoi(row[c_leaked]) != 0;
      o.leak_step = std::stoi(row[c_step]);
      o.lost = std::stoi(row[c_lost]) != 0;
      const auto& s = row[c_spin];
      o.spin_final = s == "up" ? FinalSpin::up : s == "down" ? FinalSpin::down : FinalSpin::leaked;
      out.push_back(o);
    }
  } catch (const std::logic_error&) {
    fail(ErrorKind::config, "'" + path + "' has a malformed numeric field");
  }
  return out;
}

json cmd_fit_efficiency(Context& ctx) {
  if (ctx.inputs.empty()) fail(ErrorKind::config, "fit-efficiency needs --in <dir or transport CSVs>");
  std::vector<NominalCount> pts;
  for (const auto& [L, path] : transport_files(ctx.inputs)) {
    NominalCount nc{L, 0, 0};
    for (const auto& o : read_outcomes(path)) {
      if (o.lost) continue;
      ++nc.analyzed;
      if (o.final_displacement == 2L * L) ++nc.nominal;
    }
    pts.push_back(nc);
  }
  const auto fit = fit_points(ctx.cfg, pts);
  const auto j = fit_json(fit, pts);
  ctx.writer.add_json("fit_efficiency.json", j);
  return {{"p_flip_hat", fit.p_flip}, {"sigma", fit.p_flip_sigma}, {"chi2", fit.chi2}};
}

json cmd_analyze_histogram(Context& ctx) {
  const auto seed = require_seed(ctx);
  if (ctx.inputs.empty()) fail(ErrorKind::config, "analyze-histogram needs --in <dir or transport CSVs>");
  json per_L = json::array();
  for (const auto& [L, path] : transport_files(ctx.inputs)) {
    const auto outcomes = read_outcomes(path);
    per_L.push_back(analyze_histograms(ctx, L, outcomes, seed, ""));
  }
  ctx.writer.add_json("histogram_summary.json", {{"L", per_L}});
  return {{"L_count", per_L.size()}};
}

json cmd_paper_report(Context& ctx) {
  const auto seed = require_seed(ctx);
  const auto& cfg = ctx.cfg;
  const auto lattice = cfg.lattice.to_model();
  const auto model = cfg.error_model();
  const double lambda = lattice.wavelength;
  const double tau = cfg.transport.ramp_time_us * units::us;

  // Efficiency datasets: rectangular uses the seed, composite seed + 1.
  json fits;
  std::map<int, EnsembleResult> rect_by_L;
  for (const auto& [label, s] : {std::pair{"rectangular", seed}, std::pair{"composite", seed + 1}}) {
    const bool keep = std::string(label) == "rectangular";
    auto results = simulate_all(ctx, model, s, keep);
    std::vector<NominalCount> pts;
    for (const auto& r : results) pts.push_back(nominal_of(r));
    ctx.writer.add_table(std::string("points_") + label, points_table(pts), ctx.format);
    const auto fit = fit_points(cfg, pts);
    const auto j = fit_json(fit, pts);
    ctx.writer.add_json(std::string("fit_") + label + ".json", j);
    fits[label] = {{"p_flip_hat", fit.p_flip}, {"sigma", fit.p_flip_sigma}, {"chi2", fit.chi2}};
    if (keep) {
      for (auto& r : results) rect_by_L.emplace(r.cycles, std::move(r));
    }
  }

  json hist = json::array();
  for (int L : cfg.analysis.histogram_L) {
    auto it = rect_by_L.find(L);
    if (it == rect_by_L.end()) {
      it = rect_by_L.emplace(L, run_ensemble(static_cast<std::uint64_t>(cfg.transport.atoms_per_L), L, model,
                                             seed, {ctx.workers, true})).first;
    }
    hist.push_back(analyze_histograms(ctx, L, it->second.outcomes, seed, ""));
  }

  const auto up = shift_budget(Spin::up, tau, lattice);
  const auto down = shift_budget(Spin::down, tau, lattice);
  const double vib = std::max(up.total, down.total);

  json tunneling = nullptr;
  try {
    tunneling = shift_tunneling_probability(lattice, cfg.ramp_spec(), bands_for(cfg));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::numerical) throw;
  }

  const double sigma = cfg.analysis.detection_sigma_lambda * lambda;
  const double detection = sigma > 0.0 ? 1.0 - classification_reliability(sigma, lambda) : 0.0;

  json t2prime = nullptr;
  const double t1 = cfg.pulse.T1_ms ? *cfg.pulse.T1_ms * units::ms : 100.0 * units::ms;
  try {
    t2prime = infer_t2prime(cfg.errors.p_flip, cfg.pulse.to_pulse(PulseKind::rectangular_pi), t1) / units::us;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::invalid_argument && e.kind() != ErrorKind::numerical) throw;
  }

  Table table1{{"category", "source", "probability"}, {}};
  table1.add({std::string("one_time"), std::string("transport_distance_detection"), detection});
  table1.add({std::string("one_time"), std::string("state_initialization"), 1.0 - model.p_ini});
  if (!tunneling.is_null()) {
    table1.add({std::string("per_step"), std::string("tunneling"), tunneling.get<double>()});
  }
  table1.add({std::string("per_step"), std::string("photon_scattering"), model.p_leak_step});
  table1.add({std::string("per_step"), std::string("pulse_rectangular"),
              1.0 - fits["rectangular"]["p_flip_hat"].get<double>()});
  table1.add({std::string("per_step"), std::string("pulse_composite"),
              1.0 - fits["composite"]["p_flip_hat"].get<double>()});
  table1.add({std::string("per_step"), std::string("vibrational_excitation"), vib});
  ctx.writer.add_table("table1_error_budget", table1, ctx.format);

  json report = {{"L_list", cfg.transport.L_list},
                 {"atoms_per_L", cfg.transport.atoms_per_L},
                 {"ramp_time_us", cfg.transport.ramp_time_us},
                 {"fits", fits},
                 {"histograms", hist},
                 {"shift_budget", {{"up", budget_json(up)}, {"down", budget_json(down)}}},
                 {"tunneling_per_shift", tunneling},
                 {"scattering_per_step", model.p_leak_step},
                 {"detection_error", detection},
                 {"t2prime_us", t2prime},
                 {"robustness", robustness_json(cfg)}};
  ctx.writer.add_json("paper_report.json", report);
  return {{"fits", fits}, {"t2prime_us", t2prime}, {"tunneling_per_shift", tunneling}};
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate-transport", "pulse-map",       "robustness",
                                              "ramp-optimize",      "band-structure",  "fit-efficiency",
                                              "analyze-histogram",  "paper-report"};
  return names;
}

bool command_needs_seed(const std::string& name) {
  return name == "simulate-transport" || name == "analyze-histogram" || name == "paper-report";
}

CommandResult run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opts) {
  const auto errs = validate_config(cfg);
  if (!errs.empty()) {
    std::string msg = "invalid configuration";
    for (const auto& e : errs) msg += "\n" + e;
    fail(ErrorKind::config, msg);
  }
  const std::string format = opts.format.empty() ? cfg.format : opts.format;
  if (format != "csv" && format != "json") fail(ErrorKind::config, "format must be 'csv' or 'json'");
  if (opts.workers < 1) fail(ErrorKind::config, "workers must be >= 1");

  const auto seed = opts.seed ? opts.seed : cfg.seed;
  Context ctx{cfg,
              name,
              seed,
              format,
              opts.workers,
              opts.inputs,
              ArtifactWriter(opts.out_dir.empty() ? cfg.output_dir : opts.out_dir,
                             {name, config_hash(cfg), command_needs_seed(name) ? seed : std::nullopt})};

  json summary;
  if (name == "simulate-transport") summary = cmd_simulate_transport(ctx);
  else if (name == "pulse-map") summary = cmd_pulse_map(ctx);
  else if (name == "robustness") summary = cmd_robustness(ctx);
  else if (name == "ramp-optimize") summary = cmd_ramp_optimize(ctx);
  else if (name == "band-structure") summary = cmd_band_structure(ctx);
  else if (name == "fit-efficiency") summary = cmd_fit_efficiency(ctx);
  else if (name == "analyze-histogram") summary = cmd_analyze_histogram(ctx);
  else if (name == "paper-report") summary = cmd_paper_report(ctx);
  else fail(ErrorKind::config, "unknown command '" + name + "'");

  CommandResult r;
  r.artifacts = ctx.writer.commit();
  r.summary = std::move(summary);
  return r;
}

}  // namespace sdt
