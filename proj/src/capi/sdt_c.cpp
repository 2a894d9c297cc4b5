#include "sdt/sdt.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "core/analysis.hpp"
#include "core/commands.hpp"
#include "core/config.hpp"
#include "core/ensemble.hpp"
#include "core/error.hpp"
#include "core/lattice.hpp"
#include "core/pulse.hpp"

struct sdt_config {
  sdt::RunConfig cfg;
};

struct sdt_ensemble {
  sdt::EnsembleResult result;
};

namespace {

thread_local std::string last_error;

sdt_status status_of(sdt::ErrorKind k) {
  switch (k) {
    case sdt::ErrorKind::invalid_argument: return SDT_ERR_INVALID_ARGUMENT;
    case sdt::ErrorKind::config: return SDT_ERR_CONFIG;
    case sdt::ErrorKind::numerical: return SDT_ERR_NUMERICAL;
    case sdt::ErrorKind::infeasible: return SDT_ERR_INFEASIBLE;
    case sdt::ErrorKind::io: return SDT_ERR_IO;
  }
  return SDT_ERR_INTERNAL;
}

template <class F>
sdt_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return SDT_OK;
  } catch (const sdt::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SDT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SDT_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return SDT_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) sdt::fail(sdt::ErrorKind::invalid_argument, std::string(what) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sdt::Spin spin_of(sdt_spin s) {
  if (s != SDT_SPIN_UP && s != SDT_SPIN_DOWN) sdt::fail(sdt::ErrorKind::invalid_argument, "invalid spin");
  return s == SDT_SPIN_UP ? sdt::Spin::up : sdt::Spin::down;
}

sdt::PulseKind kind_of(sdt_pulse_kind k) {
  switch (k) {
    case SDT_PULSE_RECTANGULAR_PI: return sdt::PulseKind::rectangular_pi;
    case SDT_PULSE_COMPOSITE_90_225_315: return sdt::PulseKind::composite_90_225_315;
  }
  sdt::fail(sdt::ErrorKind::invalid_argument, "invalid pulse kind");
}

sdt::ErrorModel model_of(const sdt_error_model* m) {
  need(m, "model");
  sdt::ErrorModel e;
  e.p_ini = m->p_ini;
  e.p_flip = m->p_flip;
  e.p_flip_spread = m->p_flip_spread;
  e.p_leak_step = m->p_leak_step;
  e.leak_loss = m->leak_loss;
  e.validate();
  return e;
}

}  // namespace

extern "C" {

const char* sdt_version(void) { return SDT_VERSION_STRING; }

const char* sdt_last_error(void) { return last_error.c_str(); }

void sdt_string_free(char* s) { std::free(s); }

sdt_status sdt_config_default(sdt_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sdt_config{};
  });
}

sdt_status sdt_config_load(const char* path, sdt_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new sdt_config{sdt::load_config(path)};
  });
}

sdt_status sdt_config_parse(const char* text, sdt_config** out) {
  return guarded([&] {
    need(text, "toml_text");
    need(out, "out");
    *out = new sdt_config{sdt::parse_config(text)};
  });
}

sdt_status sdt_config_save(const sdt_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "cfg");
    need(path, "path");
    sdt::save_config(cfg->cfg, path);
  });
}

sdt_status sdt_config_to_toml(const sdt_config* cfg, char** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = copy_string(sdt::to_toml(cfg->cfg));
  });
}

sdt_status sdt_config_hash(const sdt_config* cfg, uint64_t* out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = sdt::config_hash(cfg->cfg);
  });
}

sdt_status sdt_config_equal(const sdt_config* a, const sdt_config* b, int* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = a->cfg == b->cfg ? 1 : 0;
  });
}

sdt_status sdt_config_set_seed(sdt_config* cfg, uint64_t seed) {
  return guarded([&] {
    need(cfg, "cfg");
    cfg->cfg.seed = seed;
  });
}

sdt_status sdt_config_leak_probability(const sdt_config* cfg, double* out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = cfg->cfg.error_model().p_leak_step;
  });
}

void sdt_config_free(sdt_config* cfg) { delete cfg; }

const char* const* sdt_command_names(void) {
  static const char* const names[] = {"simulate-transport", "pulse-map",         "robustness",
                                      "ramp-optimize",      "band-structure",    "fit-efficiency",
                                      "analyze-histogram",  "paper-report",      nullptr};
  return names;
}

sdt_status sdt_run_command(const char* name, const sdt_config* cfg, const sdt_run_options* opts,
                           char** summary_json) {
  return guarded([&] {
    need(name, "name");
    need(cfg, "cfg");
    sdt::CommandOptions o;
    if (opts) {
      if (opts->out_dir) o.out_dir = opts->out_dir;
      if (opts->format) o.format = opts->format;
      o.workers = opts->workers > 0 ? opts->workers : 1;
      if (opts->has_seed) o.seed = opts->seed;
      if (opts->n_inputs) need(opts->inputs, "inputs");
      for (size_t i = 0; i < opts->n_inputs; ++i) {
        need(opts->inputs[i], "input path");
        o.inputs.emplace_back(opts->inputs[i]);
      }
    }
    const auto r = sdt::run_command(name, cfg->cfg, o);
    if (summary_json) {
      nlohmann::json j = {{"command", name}, {"artifacts", r.artifacts}, {"summary", r.summary}};
      *summary_json = copy_string(j.dump());
    }
  });
}

sdt_status sdt_spin_potential(const sdt_config* cfg, sdt_spin spin, double z_nm, double theta, double* out_uK) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out_uK, "out");
    const auto lattice = cfg->cfg.lattice.to_model();
    *out_uK = sdt::units::joule_to_micro_kelvin(
        sdt::spin_potential(z_nm * sdt::units::nm, theta, spin_of(spin), lattice));
  });
}

sdt_status sdt_well_geometry_at(const sdt_config* cfg, sdt_spin spin, double theta, sdt_well_geometry* out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    const auto g = sdt::well_geometry(spin_of(spin), theta, cfg->cfg.lattice.to_model());
    out->z_min_nm = g.z_min / sdt::units::nm;
    out->depth_uK = sdt::units::joule_to_micro_kelvin(g.depth);
    out->axial_freq_kHz = sdt::units::rad_per_s_to_khz(g.axial_freq);
    out->radial_freq_kHz = sdt::units::rad_per_s_to_khz(g.radial_freq);
    out->contrast = g.contrast;
  });
}

sdt_status sdt_flip_probability(const sdt_pulse_params* p, sdt_spin initial, double* out) {
  return guarded([&] {
    need(p, "params");
    need(out, "out");
    sdt::PerturbedPulse pp;
    pp.base = sdt::make_pulse(kind_of(p->kind), sdt::units::khz_to_rad_per_s(p->rabi_kHz));
    pp.detuning = sdt::units::khz_to_rad_per_s(p->detuning_kHz);
    pp.area_error = p->area_error;
    if (p->t1_ms > 0.0) pp.relaxation.t1 = p->t1_ms * sdt::units::ms;
    if (p->t2_us > 0.0) pp.relaxation.t2 = p->t2_us * sdt::units::us;
    *out = sdt::flip_probability(pp, spin_of(initial));
  });
}

sdt_status sdt_robustness_halfwidth(sdt_pulse_kind kind, double rabi_kHz, double threshold, double area_error_max,
                                    sdt_area_error_mode mode, double* out_kHz) {
  return guarded([&] {
    need(out_kHz, "out");
    sdt::RobustnessOptions o;
    o.threshold = threshold;
    o.area_error_max = area_error_max;
    o.mode = mode == SDT_AREA_WORST_CASE ? sdt::AreaErrorMode::worst_case : sdt::AreaErrorMode::envelope;
    const auto pulse = sdt::make_pulse(kind_of(kind), sdt::units::khz_to_rad_per_s(rabi_kHz));
    *out_kHz = sdt::units::rad_per_s_to_khz(sdt::robustness_halfwidth(pulse, o));
  });
}

sdt_status sdt_infer_t2prime(double target_flip, double rabi_kHz, double t1_ms, double* out_us) {
  return guarded([&] {
    need(out_us, "out");
    const auto pulse = sdt::make_pulse(sdt::PulseKind::rectangular_pi, sdt::units::khz_to_rad_per_s(rabi_kHz));
    *out_us = sdt::infer_t2prime(target_flip, pulse, t1_ms * sdt::units::ms) / sdt::units::us;
  });
}

sdt_status sdt_error_model_default(sdt_error_model* out) {
  return guarded([&] {
    need(out, "out");
    const sdt::ErrorModel m;
    *out = {m.p_ini, m.p_flip, m.p_flip_spread, m.p_leak_step, m.leak_loss};
  });
}

sdt_status sdt_ensemble_run(uint64_t atoms, int cycles, const sdt_error_model* model, uint64_t seed, int workers,
                            sdt_ensemble** out) {
  return guarded([&] {
    need(out, "out");
    const auto m = model_of(model);
    sdt::EnsembleOptions o;
    o.workers = workers > 0 ? workers : 1;
    *out = new sdt_ensemble{sdt::run_ensemble(atoms, cycles, m, seed, o)};
  });
}

sdt_status sdt_ensemble_size(const sdt_ensemble* e, uint64_t* atoms, uint64_t* lost) {
  return guarded([&] {
    need(e, "ensemble");
    if (atoms) *atoms = e->result.atoms;
    if (lost) *lost = e->result.lost;
  });
}

sdt_status sdt_ensemble_outcome(const sdt_ensemble* e, uint64_t index, sdt_outcome* out) {
  return guarded([&] {
    need(e, "ensemble");
    need(out, "out");
    if (index >= e->result.outcomes.size()) sdt::fail(sdt::ErrorKind::invalid_argument, "atom index out of range");
    const auto& o = e->result.outcomes[index];
    out->final_displacement_quarterwave = o.final_displacement;
    out->leaked = o.leaked;
    out->leak_step = o.leak_step;
    out->lost = o.lost;
    out->spin_final = static_cast<int>(o.spin_final);
  });
}

sdt_status sdt_ensemble_probability(const sdt_ensemble* e, long displacement, double* out) {
  return guarded([&] {
    need(e, "ensemble");
    need(out, "out");
    *out = e->result.probability(displacement);
  });
}

void sdt_ensemble_free(sdt_ensemble* e) { delete e; }

sdt_status sdt_exact_probability(int cycles, const sdt_error_model* model, long displacement, double* out) {
  return guarded([&] {
    need(out, "out");
    const auto d = sdt::exact_distribution(cycles, model_of(model));
    const auto it = d.probability.find(displacement);
    *out = it == d.probability.end() ? 0.0 : it->second;
  });
}

sdt_status sdt_fit_efficiency(const sdt_efficiency_point* points, size_t n, double p_ini, int free_p_ini,
                              sdt_efficiency_fit* out) {
  return guarded([&] {
    need(points, "points");
    need(out, "out");
    std::vector<sdt::EfficiencyPoint> pts;
    for (size_t i = 0; i < n; ++i) pts.push_back({points[i].steps, points[i].probability, points[i].atoms});
    const auto fit = sdt::fit_transport_efficiency(pts, p_ini, free_p_ini != 0);
    *out = {fit.p_flip, fit.p_flip_sigma, fit.p_ini, fit.chi2, fit.dof};
  });
}

sdt_status sdt_classify_site(double x_nm, double wavelength_nm, long* out) {
  return guarded([&] {
    need(out, "out");
    if (!(wavelength_nm > 0.0)) sdt::fail(sdt::ErrorKind::invalid_argument, "wavelength must be positive");
    *out = sdt::classify_site(x_nm, wavelength_nm);
  });
}

sdt_status sdt_classification_reliability(double sigma_nm, double wavelength_nm, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = sdt::classification_reliability(sigma_nm, wavelength_nm);
  });
}

}  // extern "C"
