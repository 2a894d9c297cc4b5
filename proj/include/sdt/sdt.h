#ifndef SDT_SDT_H
#define SDT_SDT_H

/* C interface of the spin-dependent transport toolkit.
 *
 * Every call returns an sdt_status. On failure the message of the most
 * recent error on the calling thread is available from sdt_last_error().
 * Handles are opaque and must be released with their _free function.
 * Units follow the config file: nm, uK, kHz, us unless stated otherwise. */

#include <stddef.h>
#include <stdint.h>

#if defined(SDT_BUILDING_LIBRARY)
#define SDT_API __attribute__((visibility("default")))
#else
#define SDT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sdt_status {
  SDT_OK = 0,
  SDT_ERR_INVALID_ARGUMENT = 1,
  SDT_ERR_CONFIG = 2,
  SDT_ERR_NUMERICAL = 3,
  SDT_ERR_INFEASIBLE = 4,
  SDT_ERR_IO = 5,
  SDT_ERR_INTERNAL = 6
} sdt_status;

typedef enum sdt_spin { SDT_SPIN_UP = 0, SDT_SPIN_DOWN = 1 } sdt_spin;

typedef enum sdt_pulse_kind {
  SDT_PULSE_RECTANGULAR_PI = 0,
  SDT_PULSE_COMPOSITE_90_225_315 = 1
} sdt_pulse_kind;

typedef enum sdt_area_error_mode { SDT_AREA_ENVELOPE = 0, SDT_AREA_WORST_CASE = 1 } sdt_area_error_mode;

SDT_API const char* sdt_version(void);
SDT_API const char* sdt_last_error(void);
/* Frees strings returned through char** out-parameters. */
SDT_API void sdt_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

typedef struct sdt_config sdt_config;

SDT_API sdt_status sdt_config_default(sdt_config** out);
SDT_API sdt_status sdt_config_load(const char* path, sdt_config** out);
SDT_API sdt_status sdt_config_parse(const char* toml_text, sdt_config** out);
SDT_API sdt_status sdt_config_save(const sdt_config* cfg, const char* path);
SDT_API sdt_status sdt_config_to_toml(const sdt_config* cfg, char** out);
SDT_API sdt_status sdt_config_hash(const sdt_config* cfg, uint64_t* out);
SDT_API sdt_status sdt_config_equal(const sdt_config* a, const sdt_config* b, int* out);
SDT_API sdt_status sdt_config_set_seed(sdt_config* cfg, uint64_t seed);
/* Scattering probability per step used by simulations (explicit or derived). */
SDT_API sdt_status sdt_config_leak_probability(const sdt_config* cfg, double* out);
SDT_API void sdt_config_free(sdt_config* cfg);

/* ---- batch commands --------------------------------------------------- */

typedef struct sdt_run_options {
  const char* out_dir;       /* NULL: config output_dir */
  const char* format;        /* NULL: config format ("csv" | "json") */
  int workers;               /* <= 0 selects 1 */
  int has_seed;              /* non-zero: seed overrides the config seed */
  uint64_t seed;
  const char* const* inputs; /* files or directories, may be NULL */
  size_t n_inputs;
} sdt_run_options;

/* Names usable with sdt_run_command, NULL-terminated. */
SDT_API const char* const* sdt_command_names(void);

/* Runs a command and writes its artifacts. `summary_json` (optional)
 * receives a JSON object with the artifact paths and a short summary. */
SDT_API sdt_status sdt_run_command(const char* name, const sdt_config* cfg, const sdt_run_options* opts,
                                   char** summary_json);

/* ---- lattice ---------------------------------------------------------- */

typedef struct sdt_well_geometry {
  double z_min_nm;
  double depth_uK;
  double axial_freq_kHz;
  double radial_freq_kHz;
  double contrast;
} sdt_well_geometry;

/* Potential (uK) seen by `spin` at position z (nm) and polarization angle theta (rad). */
SDT_API sdt_status sdt_spin_potential(const sdt_config* cfg, sdt_spin spin, double z_nm, double theta,
                                      double* out_uK);
SDT_API sdt_status sdt_well_geometry_at(const sdt_config* cfg, sdt_spin spin, double theta,
                                        sdt_well_geometry* out);

/* ---- pulses ----------------------------------------------------------- */

typedef struct sdt_pulse_params {
  sdt_pulse_kind kind;
  double rabi_kHz;
  double detuning_kHz;
  double area_error;
  double t1_ms; /* <= 0: no T1 relaxation */
  double t2_us; /* <= 0: no T2 dephasing */
} sdt_pulse_params;

SDT_API sdt_status sdt_flip_probability(const sdt_pulse_params* p, sdt_spin initial, double* out);
SDT_API sdt_status sdt_robustness_halfwidth(sdt_pulse_kind kind, double rabi_kHz, double threshold,
                                            double area_error_max, sdt_area_error_mode mode,
                                            double* out_kHz);
SDT_API sdt_status sdt_infer_t2prime(double target_flip, double rabi_kHz, double t1_ms, double* out_us);

/* ---- transport ensembles ---------------------------------------------- */

typedef struct sdt_error_model {
  double p_ini;
  double p_flip;
  double p_flip_spread;
  double p_leak_step;
  double leak_loss;
} sdt_error_model;

typedef struct sdt_outcome {
  long final_displacement_quarterwave;
  int leaked;
  int leak_step;
  int lost;
  int spin_final; /* 0 up, 1 down, 2 leaked */
} sdt_outcome;

typedef struct sdt_ensemble sdt_ensemble;

SDT_API sdt_status sdt_error_model_default(sdt_error_model* out);
SDT_API sdt_status sdt_ensemble_run(uint64_t atoms, int cycles, const sdt_error_model* model, uint64_t seed,
                                    int workers, sdt_ensemble** out);
SDT_API sdt_status sdt_ensemble_size(const sdt_ensemble* e, uint64_t* atoms, uint64_t* lost);
SDT_API sdt_status sdt_ensemble_outcome(const sdt_ensemble* e, uint64_t index, sdt_outcome* out);
/* Probability of a final displacement, normalized over non-lost atoms. */
SDT_API sdt_status sdt_ensemble_probability(const sdt_ensemble* e, long displacement, double* out);
SDT_API void sdt_ensemble_free(sdt_ensemble* e);

SDT_API sdt_status sdt_exact_probability(int cycles, const sdt_error_model* model, long displacement,
                                         double* out);

/* ---- analysis --------------------------------------------------------- */

typedef struct sdt_efficiency_point {
  int steps;
  double probability;
  uint64_t atoms;
} sdt_efficiency_point;

typedef struct sdt_efficiency_fit {
  double p_flip_hat;
  double sigma;
  double p_ini_used;
  double chi2;
  int dof;
} sdt_efficiency_fit;

SDT_API sdt_status sdt_fit_efficiency(const sdt_efficiency_point* points, size_t n, double p_ini,
                                      int free_p_ini, sdt_efficiency_fit* out);
SDT_API sdt_status sdt_classify_site(double x_nm, double wavelength_nm, long* out);
SDT_API sdt_status sdt_classification_reliability(double sigma_nm, double wavelength_nm, double* out);

#ifdef __cplusplus
}
#endif

#endif
