/* relubias - shallow ReLU gradient-descent implicit-bias laboratory.
 *
 * C interface to the core library: opaque handles, status codes, and
 * JSON/CSV artifacts. All functions returning rb_status leave an error
 * message retrievable via rb_last_error() on failure. Strings returned
 * through char** out parameters are heap-allocated; release them with
 * rb_string_free().
 */
#ifndef RELUBIAS_H
#define RELUBIAS_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rb_status {
    RB_OK = 0,
    RB_CHECK_FAILED = 1,  /* a verification check failed (artifacts are fine) */
    RB_ERROR_INPUT = 2,   /* bad arguments, malformed files, schema mismatch  */
    RB_ERROR_NUMERIC = 3, /* rank deficiency, divergence, non-convergence     */
    RB_ERROR_INTERNAL = 4
} rb_status;

typedef struct rb_dataset_s rb_dataset;
typedef struct rb_trajectory_s rb_trajectory;
typedef struct rb_minnorm_s rb_minnorm;

const char* rb_version(void);
/* Last error message for the calling thread; empty string if none. */
const char* rb_last_error(void);
void rb_string_free(char* s);

/* ---- datasets -----------------------------------------------------------
 * params_json: {"n": int, "d": int, "seed": int,
 *               "spectrum_kind": "isotropic"|"geometric"|"explicit",
 *               "spectrum_ratio": double, "spectrum_lambda": [..],
 *               "z_dist": "gaussian"|"rademacher"|"uniform_unit_var",
 *               "y_min": double, "y_max": double, "frac_positive": double,
 *               "require_both_signs": bool, "rotate": bool}
 */
rb_status rb_dataset_generate(const char* params_json, rb_dataset** out);
rb_status rb_dataset_load_json(const char* path, rb_dataset** out);
rb_status rb_dataset_save_json(const rb_dataset* ds, const char* path);
rb_status rb_dataset_save_csv(const rb_dataset* ds, const char* path);
/* n, d, label split, effective dimensions, Gram diagnostics, assumptions. */
rb_status rb_dataset_info(const rb_dataset* ds, char** json_out);
void rb_dataset_free(rb_dataset* ds);

/* ---- gradient descent ---------------------------------------------------
 * run_json: {"init": {"kind": "single_eps"|"two_eps"|"multi_disjoint"|"random",
 *                     ... kind-specific fields ...},
 *            "eta": double (optional), "max_iters": int, "grad_tol": double}
 * Kind fields: single_eps/two_eps: "eps" scalar or per-example array(s)
 *              ("eps_plus"/"eps_minus" for two_eps);
 *              multi_disjoint: "assignment" [..], "signs" [..], "cg_hat",
 *              "eps" scalar; random: "m", "signs", "scale", "seed".
 */
rb_status rb_gd_run(const rb_dataset* ds, const char* run_json, rb_trajectory** out);
rb_status rb_trajectory_write_csv(const rb_trajectory* t, const char* path);
rb_status rb_trajectory_summary_json(const rb_trajectory* t, char** json_out);
void rb_trajectory_free(rb_trajectory* t);

/* ---- minimum-norm solvers ---------------------------------------------- */
rb_status rb_minnorm_single(const rb_dataset* ds, double tol, rb_minnorm** out);
rb_status rb_minnorm_single_pg(const rb_dataset* ds, double tol, rb_minnorm** out);
rb_status rb_minnorm_two(const rb_dataset* ds, double tol, rb_minnorm** out);
rb_status rb_minnorm_to_json(const rb_minnorm* sol, char** json_out);
rb_status rb_minnorm_upper_bound_multi(const rb_dataset* ds, int m, const int* signs,
                                       double* out);
void rb_minnorm_free(rb_minnorm* sol);

/* ---- experiments --------------------------------------------------------
 * config_json follows the experiment config schema (scenario, seeds, out_dir,
 * parameter overrides). Writes per-seed artifacts plus manifest.json and
 * returns the manifest. Per-seed failures are recorded in the manifest and
 * do not abort the remaining seeds.
 */
rb_status rb_experiment_run(const char* config_json, char** manifest_json_out);

/* Renders the sweep aggregate CSV as a self-contained SVG. */
rb_status rb_emit_plot(const char* aggregate_csv_path, const char* svg_path, const char* style);

/* Re-runs the monitor checks on persisted artifacts. Returns RB_OK when all
 * selected checks pass, RB_CHECK_FAILED when a check fails, RB_ERROR_INPUT
 * on schema mismatch. report_json_out receives the machine-readable report.
 */
rb_status rb_verify_files(const char* trajectory_csv, const char* dataset_json,
                          const char* config_json, char** report_json_out);

#ifdef __cplusplus
}
#endif

#endif /* RELUBIAS_H */
