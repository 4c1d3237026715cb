#ifndef ALM_ALM_H
#define ALM_ALM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(ALM_BUILDING_LIBRARY)
#define ALM_API __attribute__((visibility("default")))
#else
#define ALM_API
#endif

typedef enum alm_status {
    ALM_OK = 0,
    ALM_ERR_ARGUMENT = 1,
    ALM_ERR_DOMAIN = 2,
    ALM_ERR_FIT = 3,
    ALM_ERR_UNSUPPORTED = 4,
    ALM_ERR_DEGENERATE = 5,
    ALM_ERR_IO = 6,
    ALM_ERR_COMPARISON = 7,
    ALM_ERR_INTERNAL = 8
} alm_status;

typedef enum alm_stage {
    ALM_STAGE_FIT = 0,
    ALM_STAGE_INTERPOLATE = 1,
    ALM_STAGE_SIMULATE = 2,
    ALM_STAGE_PRICE = 3,
    ALM_STAGE_TVA = 4,
    ALM_STAGE_RUN = 5
} alm_stage;

/* Library version, e.g. "0.1.0". */
ALM_API const char* alm_version(void);
/* Message of the last failed call on this thread ("" when none). */
ALM_API const char* alm_last_error(void);
ALM_API const char* alm_status_name(alm_status status);

/*
 * Strings are returned by copying into a caller buffer. `needed` receives
 * the size including the terminating zero; when `capacity` is too small
 * the call fails with ALM_ERR_ARGUMENT and writes nothing.
 */

typedef struct alm_session alm_session;

/* Opens a scenario file; NULL selects the built-in synthetic scenario. */
ALM_API alm_status alm_session_open(const char* scenario_path, alm_session** out);
ALM_API void alm_session_close(alm_session* session);

ALM_API alm_status alm_session_set_seed(alm_session* session, uint64_t seed);
ALM_API alm_status alm_session_set_paths(alm_session* session, size_t paths);
ALM_API alm_status alm_session_set_steps(alm_session* session, size_t steps);
ALM_API alm_status alm_session_set_output(alm_session* session, const char* directory);
/* Comma-separated kinds, e.g. "if1,if2,if3". */
ALM_API alm_status alm_session_set_interpolators(alm_session* session, const char* kinds);
/* Removes every CSA (prices only). */
ALM_API alm_status alm_session_clear_csas(alm_session* session);

ALM_API alm_status alm_session_output(const alm_session* session, char* buffer, size_t capacity,
                                      size_t* needed);
ALM_API alm_status alm_session_scenario_json(const alm_session* session, char* buffer, size_t capacity,
                                             size_t* needed);

/* Runs the pipeline up to `stage` and writes the report bundle. */
ALM_API alm_status alm_session_run(alm_session* session, alm_stage stage);
/* JSON digest of the last run: directory, files, spreads, Theta_0 per kind and CSA. */
ALM_API alm_status alm_session_report_json(const alm_session* session, char* buffer, size_t capacity,
                                           size_t* needed);

/* Fair spread of the scenario swap at its start date. */
ALM_API alm_status alm_session_fair_spread(alm_session* session, double* out);
/* B(t, T) and r_t in state x (dimension entries) under interpolator `kind`. */
ALM_API alm_status alm_session_bond_price(alm_session* session, const char* kind, double t, double T,
                                          const double* x, size_t dimension, double* out);
ALM_API alm_status alm_session_short_rate(alm_session* session, const char* kind, double t, const double* x,
                                          size_t dimension, double* out);

/* Reads a bundle written by a full run, writes compare.csv and returns the
 * number of (pair, CSA, interval) cells flagged as price ~ 0, TVA != 0. */
ALM_API alm_status alm_compare_bundle(const char* directory, size_t* flagged);
/* Schema check of a bundle; problems are reported through alm_last_error. */
ALM_API alm_status alm_validate_bundle(const char* directory, size_t* problems);

/* Square-root factor dX = speed (level - X) dt + vol sqrt(X) dW. */
typedef struct alm_cir {
    double speed;
    double level;
    double vol;
} alm_cir;

/* phi_t(u) and psi_t(u) for independent square-root factors. */
ALM_API alm_status alm_cir_flow(const alm_cir* components, size_t dimension, double t, const double* u,
                                double* phi, double* psi);

typedef enum alm_valuation { ALM_VALUATION_CLEAN = 0, ALM_VALUATION_PREDEFAULT = 1 } alm_valuation;
typedef enum alm_collateral { ALM_COLLATERAL_NONE = 0, ALM_COLLATERAL_FULL = 1 } alm_collateral;

typedef struct alm_csa {
    double recovery_funder;
    double recovery_bank;
    double recovery_investor;
    alm_valuation valuation;
    alm_collateral collateral;
    double gamma_bank;
    double gamma_investor;
    double gamma;
    double b;
    double b_bar;
    double lambda;
    double lambda_bar;
} alm_csa;

ALM_API alm_status alm_csa_preset(int index, alm_csa* out);
/* g(r, P, Theta). */
ALM_API alm_status alm_tva_coefficient(const alm_csa* csa, double r, double price, double theta, double* out);

#ifdef __cplusplus
}
#endif

#endif
