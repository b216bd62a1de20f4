#ifndef LEVYBG_H
#define LEVYBG_H

/* C interface to the jump-activity / volatility estimation library.
 * All functions return lbg_status (0 on success); lbg_last_error() holds a
 * thread-local description of the most recent failure. Handles are opaque
 * and freed with the matching *_free call. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lbg_status {
    LBG_OK = 0,
    LBG_ERR_ARGUMENT = 1,       /* invalid parameter or model */
    LBG_ERR_NUMERIC = 2,        /* quadrature / inversion failure */
    LBG_ERR_SINGULAR = 3,       /* identifiability (condition number) failure */
    LBG_ERR_NOT_IDENTIFIED = 4, /* scalar estimating equation has no root */
    LBG_ERR_IO = 5,             /* file read/write failure */
    LBG_ERR_INTERNAL = 6
} lbg_status;

const char* lbg_last_error(void);

typedef struct lbg_model lbg_model;
typedef struct lbg_batch lbg_batch;
typedef struct lbg_result lbg_result;

/* ---- model ------------------------------------------------------------- */

lbg_model* lbg_model_new(double mu, double sigma);
lbg_status lbg_model_add_component(lbg_model* m, double alpha, double beta, double scale);
lbg_status lbg_model_set_nuisance(lbg_model* m, double alpha, double beta, double scale);
void lbg_model_free(lbg_model* m);

/* ---- sampling and simulation ------------------------------------------- */

/* n draws of the standardized stable law into out (length n). */
lbg_status lbg_sample_stable(double alpha, double beta, size_t n, uint64_t seed, double* out);

lbg_status lbg_simulate(const lbg_model* m, size_t n, double h, uint64_t seed,
                        lbg_batch** out);
lbg_status lbg_batch_read_csv(const char* path, double h, lbg_batch** out);
lbg_status lbg_batch_write_csv(const lbg_batch* b, const char* path);
size_t lbg_batch_n(const lbg_batch* b);
double lbg_batch_h(const lbg_batch* b);
const double* lbg_batch_values(const lbg_batch* b);
void lbg_batch_free(lbg_batch* b);

/* ---- scaling ------------------------------------------------------------ */

double lbg_practical_u(double h);
double lbg_theory_u(size_t n, double tau);

/* ---- estimation (built-in 4-function moment set, M = 1) ----------------- */

/* u <= 0 selects the practical rule 1/sqrt(h |log h|). */
lbg_status lbg_estimate(const lbg_batch* b, double u, lbg_result** out);
lbg_status lbg_result_write_json(const lbg_result* r, const char* path);
size_t lbg_result_dim(const lbg_result* r);
lbg_status lbg_result_theta(const lbg_result* r, double* out /* dim */);
lbg_status lbg_result_cov(const lbg_result* r, double* out /* dim*dim, row major */);
lbg_status lbg_result_ci(const lbg_result* r, double* lo, double* hi /* dim each */);
int lbg_result_converged(const lbg_result* r);
int lbg_result_boundary_flag(const lbg_result* r);
int lbg_result_singular_flag(const lbg_result* r);
void lbg_result_free(lbg_result* r);

/* ---- Fisher block ------------------------------------------------------- */

/* out_block = {m_rr, m_ra, m_ra, m_aa} of the rescaled 2x2 block at step h. */
lbg_status lbg_fisher_block(double sigma_sq, double r, double alpha, double h,
                            double out_block[4]);
lbg_status lbg_fisher_trajectory_csv(double sigma_sq, double r, double alpha,
                                     const double* h_list, size_t n_h, const char* path);

/* ---- Monte Carlo harness ------------------------------------------------ */

/* config_json: {"model": {"mu":, "sigma":, "components": [{"alpha":, "beta":,
 * "scale":}], "nuisance": {...}?}, "n":, "h":, "replications":, "seed":,
 * "workers":, "u_mode": "practical"|"theory", "tau":, "estimators":
 * ["gmm","single","aj","trv"]}. Writes records.csv and summary.json. */
lbg_status lbg_run_mc_json(const char* config_json, const char* out_dir);

lbg_status lbg_table1(const char* out_dir, int replications, int workers, uint64_t seed,
                      int include_fine);

#ifdef __cplusplus
}
#endif
#endif /* LEVYBG_H */
