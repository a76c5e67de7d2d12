/* C interface to the binscreen library.
 *
 * All objects are opaque handles created by a *_create / bs_run_* call and
 * released with the matching *_destroy. Functions return a bs_status; on
 * failure bs_last_error() describes the problem (per calling thread).
 * Matrices cross the boundary in row-major order. Predictor indices are
 * 0-based.
 */
#ifndef BINSCREEN_H
#define BINSCREEN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(BINSCREEN_BUILDING)
#define BINSCREEN_API __declspec(dllexport)
#else
#define BINSCREEN_API __declspec(dllimport)
#endif
#else
#define BINSCREEN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bs_status {
    BS_OK = 0,
    BS_ERR_INVALID_ARGUMENT = 1,
    BS_ERR_DOMAIN = 2,
    BS_ERR_SINGULAR = 3,
    BS_ERR_NO_CONVERGENCE = 4,
    BS_ERR_INVARIANT = 5, /* internal consistency check failed */
    BS_ERR_INTERNAL = 6
} bs_status;

typedef enum bs_link { BS_LINK_PROBIT = 0, BS_LINK_LOGIT = 1 } bs_link;
typedef enum bs_cov_kind { BS_COV_AR1 = 0, BS_COV_CS = 1, BS_COV_DENSE = 2 } bs_cov_kind;
typedef enum bs_method { BS_METHOD_LESS = 0, BS_METHOD_SISL = 1, BS_METHOD_SISP = 2 } bs_method;
typedef enum bs_flag {
    BS_FLAG_OK = 0,
    BS_FLAG_ZERO_VARIANCE = 1,
    BS_FLAG_SEPARATION = 2,
    BS_FLAG_NONCONVERGENCE = 3
} bs_flag;

BINSCREEN_API const char* bs_version(void);
BINSCREEN_API const char* bs_last_error(void);
BINSCREEN_API const char* bs_status_string(bs_status status);

/* ---- link functions ---------------------------------------------------- */

BINSCREEN_API bs_status bs_link_cdf(bs_link link, double t, double* out);
/* E[h(beta0 + W)], W ~ N(0, v); quadrature_nodes <= 0 selects 128. */
BINSCREEN_API bs_status bs_mixture_integral(bs_link link, int quadrature_nodes, double beta0, double v, double* out);
/* E[H(beta0 + W)], W ~ N(0, v). */
BINSCREEN_API bs_status bs_population_mean(bs_link link, int quadrature_nodes, double beta0, double v, double* out);
BINSCREEN_API bs_status bs_selection_size(int n, int* out);

/* ---- true model ------------------------------------------------------- */

typedef struct bs_model bs_model;

/* dense: p*p row-major covariance when kind == BS_COV_DENSE, else NULL. */
BINSCREEN_API bs_status bs_model_create(double gamma0, const double* gamma, size_t p, bs_link link,
                                        bs_cov_kind kind, double rho, const double* dense, bs_model** out);
BINSCREEN_API void bs_model_destroy(bs_model* model);
BINSCREEN_API size_t bs_model_p(const bs_model* model);

/* ---- datasets --------------------------------------------------------- */

typedef struct bs_dataset bs_dataset;

BINSCREEN_API bs_status bs_dataset_create(const double* x, const double* y, size_t n, size_t p, bs_dataset** out);
/* Normal predictors from the model covariance, Bernoulli responses. */
BINSCREEN_API bs_status bs_dataset_generate(const bs_model* model, size_t n, uint64_t seed, bs_dataset** out);
/* Correlated Binomial(2, q) predictors with responses from the model's
 * coefficients and link; the model covariance is ignored. */
BINSCREEN_API bs_status bs_dataset_generate_binomial(const bs_model* model, size_t n, uint64_t seed,
                                                     bs_dataset** out);
BINSCREEN_API void bs_dataset_destroy(bs_dataset* data);
BINSCREEN_API size_t bs_dataset_n(const bs_dataset* data);
BINSCREEN_API size_t bs_dataset_p(const bs_dataset* data);
BINSCREEN_API bs_status bs_dataset_copy_x(const bs_dataset* data, double* out);
BINSCREEN_API bs_status bs_dataset_copy_y(const bs_dataset* data, double* out);

/* ---- screening -------------------------------------------------------- */

typedef struct bs_screen_options {
    int d;           /* 0: floor(n / ln n) */
    int standardize; /* nonzero: centre and scale columns first */
    int threads;     /* 0: hardware concurrency */
    int quadrature_nodes;
} bs_screen_options;

typedef struct bs_report bs_report;

BINSCREEN_API void bs_screen_options_default(bs_screen_options* options);
/* options may be NULL for defaults. */
BINSCREEN_API bs_status bs_screen(const bs_dataset* data, bs_method method, const bs_screen_options* options,
                                  bs_report** out);
BINSCREEN_API void bs_report_destroy(bs_report* report);
BINSCREEN_API bs_method bs_report_method(const bs_report* report);
BINSCREEN_API size_t bs_report_p(const bs_report* report);
BINSCREEN_API size_t bs_report_d(const bs_report* report);
BINSCREEN_API double bs_report_timing(const bs_report* report);
BINSCREEN_API bs_status bs_report_stats(const bs_report* report, double* out);   /* p values */
BINSCREEN_API bs_status bs_report_rank(const bs_report* report, int* out);       /* p indices */
BINSCREEN_API bs_status bs_report_selected(const bs_report* report, int* out);   /* d indices */
BINSCREEN_API bs_status bs_report_flags(const bs_report* report, int* out);      /* p bs_flag */

/* ---- GLM fitting ------------------------------------------------------ */

typedef struct bs_glm_fit bs_glm_fit;

/* columns == NULL uses every predictor. */
BINSCREEN_API bs_status bs_glm_fit_create(const bs_dataset* data, const int* columns, size_t ncolumns, bs_link link,
                                          bs_glm_fit** out);
BINSCREEN_API void bs_glm_fit_destroy(bs_glm_fit* fit);
BINSCREEN_API size_t bs_glm_fit_size(const bs_glm_fit* fit); /* intercept + slopes */
BINSCREEN_API bs_status bs_glm_fit_coefficients(const bs_glm_fit* fit, double* out);
BINSCREEN_API int bs_glm_fit_converged(const bs_glm_fit* fit);
BINSCREEN_API int bs_glm_fit_separation(const bs_glm_fit* fit);
BINSCREEN_API double bs_glm_fit_log_likelihood(const bs_glm_fit* fit);
BINSCREEN_API int bs_glm_fit_iterations(const bs_glm_fit* fit);
/* rows == NULL evaluates every row of data; columns as for the fit. */
BINSCREEN_API bs_status bs_glm_misclassification(const bs_glm_fit* fit, const bs_dataset* data, const int* columns,
                                                 size_t ncolumns, const size_t* rows, size_t nrows, double* out);

/* ---- population limits ------------------------------------------------ */

typedef struct bs_population bs_population;

BINSCREEN_API bs_status bs_contamination(const bs_model* model, size_t j, double* out);
/* subset == NULL uses every predictor. */
BINSCREEN_API bs_status bs_population_compute(const bs_model* model, bs_link working_link, const int* subset,
                                              size_t k, bs_population** out);
BINSCREEN_API void bs_population_destroy(bs_population* pop);
BINSCREEN_API size_t bs_population_size(const bs_population* pop);
BINSCREEN_API double bs_population_c1(const bs_population* pop);
BINSCREEN_API double bs_population_c2(const bs_population* pop);
BINSCREEN_API double bs_population_beta0_ml(const bs_population* pop);
BINSCREEN_API bs_status bs_population_beta_ls(const bs_population* pop, double* out);
BINSCREEN_API bs_status bs_population_beta_ml(const bs_population* pop, double* out);
/* Each output holds p values: single-predictor limits for every j. */
BINSCREEN_API bs_status bs_population_curve(const bs_model* model, bs_link working_link, int threads,
                                            double* beta_ls, double* beta_ml, double* contamination);

/* ---- experiments ------------------------------------------------------ */

typedef struct bs_experiment_config {
    int replicates;
    const int* n_values; /* NULL: scenario default grid */
    size_t n_count;
    uint64_t seed;
    double rho;
    int p; /* Table 2 only */
    int threads;
    int quadrature_nodes;
    bs_link binomial_link; /* Table 2 correlated-binomial truth */
} bs_experiment_config;

typedef struct bs_experiment bs_experiment;

BINSCREEN_API void bs_experiment_config_default(bs_experiment_config* config);
BINSCREEN_API bs_status bs_run_table1(const bs_experiment_config* config, bs_experiment** out);
BINSCREEN_API bs_status bs_run_table2(const bs_experiment_config* config, bs_experiment** out);
BINSCREEN_API bs_status bs_run_figure1(const bs_experiment_config* config, bs_experiment** out);
BINSCREEN_API void bs_experiment_destroy(bs_experiment* experiment);
/* Owned by the handle; valid until it is destroyed. */
BINSCREEN_API const char* bs_experiment_csv(const bs_experiment* experiment);
BINSCREEN_API const char* bs_experiment_json(const bs_experiment* experiment);

#ifdef __cplusplus
}
#endif

#endif /* BINSCREEN_H */
