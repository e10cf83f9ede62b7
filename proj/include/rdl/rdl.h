#ifndef RDL_H
#define RDL_H

/* C interface to the risk-dynamics library.
 *
 * Conventions:
 *   - Functions returning rdl_status report failures through the code and
 *     leave a message in rdl_last_error() (thread-local, overwritten by the
 *     next failing call on the same thread).
 *   - Handles returned through out-parameters are owned by the caller and
 *     released with the matching _free function. Pointers returned by
 *     accessors stay valid until their handle is freed.
 *   - Accessors taking an index return NULL / 0 on range errors and set
 *     rdl_last_error().
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rdl_status {
  RDL_OK = 0,
  RDL_ERR_VALIDATION = 1, /* invalid parameters or malformed input */
  RDL_ERR_NUMERIC = 2,    /* rank deficiency, non-convergence, overflow */
  RDL_ERR_IO = 3          /* reserved for callers layering file I/O on top */
} rdl_status;

const char* rdl_version(void);
const char* rdl_last_error(void);

/* ------------------------------------------------------------------ */
/* Process parameters                                                  */

/* Urn masses: b0/r0 are the initial high-/low-risk masses, k the mass
 * added per decision. All must be positive. */
typedef struct rdl_urn_params {
  double b0;
  double r0;
  double k;
} rdl_urn_params;

/* Additive per-step bias. rho in [0, 1); group_indicator selects the
 * direction the bias pushes (1 toward high risk). clamp_to_unit != 0
 * keeps probabilities inside [0, 1] after each biased update. */
typedef struct rdl_bias_spec {
  double rho;
  int group_indicator;
  int clamp_to_unit;
} rdl_bias_spec;

/* Deterministic per-trajectory seed: member `member` of group `group`
 * under a master seed. */
uint64_t rdl_derive_seed(uint64_t master_seed, uint64_t group, uint64_t member);

/* Memory weight gamma_i for decision i >= 2. */
rdl_status rdl_gamma_at(const rdl_urn_params* urn, uint64_t step_index, double* out);

/* Probability after `decisions` decisions, `successes` of them high
 * risk: (b0 + k*successes) / (b0 + r0 + k*decisions). */
rdl_status rdl_closed_form_p(const rdl_urn_params* urn, uint64_t successes,
                             uint64_t decisions, double* out);

/* Probability of an exact outcome sequence (entries 0 or 1) under the
 * unbiased process. Enumeration-scale only; length is capped. */
rdl_status rdl_sequence_probability(const rdl_urn_params* urn, const uint8_t* outcomes,
                                    size_t length, double* out);

/* ------------------------------------------------------------------ */
/* Single trajectories                                                 */

typedef struct rdl_trajectory rdl_trajectory;

/* Simulates p_1..p_N (N = n_steps) and the N-1 decisions between them. */
rdl_status rdl_simulate(const rdl_urn_params* urn, const rdl_bias_spec* bias,
                        uint64_t n_steps, uint64_t seed, rdl_trajectory** out);
uint64_t rdl_trajectory_steps(const rdl_trajectory* t);
const double* rdl_trajectory_probabilities(const rdl_trajectory* t);
/* N-1 bytes, 0 = low risk, 1 = high risk. NULL when N == 1. */
const uint8_t* rdl_trajectory_outcomes(const rdl_trajectory* t);
/* Nonzero if any biased update left the convex-combination regime. */
int rdl_trajectory_out_of_regime(const rdl_trajectory* t);
void rdl_trajectory_free(rdl_trajectory* t);

/* Sum of per-decision sentence contributions over the first
 * window_steps decisions of each trajectory (0 = all decisions).
 * `out` receives `count` totals. */
rdl_status rdl_cumulative_outcomes(const rdl_trajectory* const* trajectories, size_t count,
                                   double high_risk_contribution,
                                   double low_risk_contribution, uint64_t window_steps,
                                   double* out);

/* ------------------------------------------------------------------ */
/* Limit-law analysis                                                  */

/* Long-run law parameters: a = b0/k, b = r0/k. */
rdl_status rdl_limit_beta_params(const rdl_urn_params* urn, double* a, double* b);

/* Regularized incomplete beta I_x(a, b); the Beta(a, b) CDF. */
rdl_status rdl_beta_cdf(double a, double b, double x, double* out);

/* One-sample two-sided Kolmogorov-Smirnov distance between `samples`
 * (values in [0, 1], any order) and Beta(a, b). Beta(1, 1) is the
 * uniform law. */
rdl_status rdl_ks_beta(const double* samples, size_t count, double a, double b, double* out);

/* Mean and unbiased variance; needs count >= 2. */
rdl_status rdl_sample_moments(const double* samples, size_t count, double* mean,
                              double* variance);

/* z-score of mean(endpoints) against the starting probability p1. */
rdl_status rdl_martingale_z(const double* endpoints, size_t count, double p1, double* out);

/* Fractions of endpoints below epsilon / above 1 - epsilon. */
rdl_status rdl_extreme_mass(const double* endpoints, size_t count, double epsilon,
                            double* low, double* high);

/* Normalized equal-width histogram over [0, 1]; `masses` receives
 * `bins` values summing to 1. */
rdl_status rdl_endpoint_histogram(const double* endpoints, size_t count, size_t bins,
                                  double* masses);

/* ------------------------------------------------------------------ */
/* Cohorts                                                             */

typedef struct rdl_cohort_spec rdl_cohort_spec;
typedef struct rdl_cohort_result rdl_cohort_result;
typedef struct rdl_disparity_report rdl_disparity_report;

/* NULL only on allocation failure. Validation happens at run time. */
rdl_cohort_spec* rdl_cohort_spec_new(uint64_t n_steps, uint64_t master_seed);
rdl_status rdl_cohort_spec_add_group(rdl_cohort_spec* spec, const char* name, uint64_t size,
                                     const rdl_urn_params* urn, const rdl_bias_spec* bias);
void rdl_cohort_spec_free(rdl_cohort_spec* spec);

/* Runs one trajectory per member; the result is a pure function of the
 * spec regardless of n_threads (<= 0 means hardware concurrency). */
rdl_status rdl_cohort_run(const rdl_cohort_spec* spec, int n_threads,
                          rdl_cohort_result** out);

size_t rdl_cohort_n_groups(const rdl_cohort_result* r);
size_t rdl_cohort_n_checkpoints(const rdl_cohort_result* r);
/* Ascending decision indices at which means were recorded; ends at N. */
const uint64_t* rdl_cohort_checkpoints(const rdl_cohort_result* r);
const char* rdl_cohort_group_name(const rdl_cohort_result* r, size_t group);
uint64_t rdl_cohort_group_size(const rdl_cohort_result* r, size_t group);
/* One endpoint p_N per member, in member order. */
const double* rdl_cohort_group_endpoints(const rdl_cohort_result* r, size_t group);
/* Per-checkpoint mean / standard error of p_i across the group. */
const double* rdl_cohort_group_mean(const rdl_cohort_result* r, size_t group);
const double* rdl_cohort_group_se(const rdl_cohort_result* r, size_t group);
uint64_t rdl_cohort_group_out_of_regime(const rdl_cohort_result* r, size_t group);
void rdl_cohort_result_free(rdl_cohort_result* r);

/* Disparity summary: per-group series, pairwise gaps, extreme mass at
 * `epsilon`, endpoint histograms with `histogram_bins` bins. */
rdl_status rdl_disparity_metrics(const rdl_cohort_result* r, double epsilon,
                                 size_t histogram_bins, rdl_disparity_report** out);
size_t rdl_disparity_n_groups(const rdl_disparity_report* d);
size_t rdl_disparity_n_checkpoints(const rdl_disparity_report* d);
const uint64_t* rdl_disparity_checkpoints(const rdl_disparity_report* d);
const char* rdl_disparity_group_name(const rdl_disparity_report* d, size_t group);
const double* rdl_disparity_group_mean(const rdl_disparity_report* d, size_t group);
const double* rdl_disparity_group_se(const rdl_disparity_report* d, size_t group);
rdl_status rdl_disparity_group_extremes(const rdl_disparity_report* d, size_t group,
                                        double* low, double* high);
size_t rdl_disparity_histogram_bins(const rdl_disparity_report* d);
const double* rdl_disparity_group_histogram(const rdl_disparity_report* d, size_t group);
/* Gaps cover unordered group pairs (a < b), difference = mean_a - mean_b. */
size_t rdl_disparity_n_gaps(const rdl_disparity_report* d);
rdl_status rdl_disparity_gap(const rdl_disparity_report* d, size_t gap, size_t* group_a,
                             size_t* group_b, const double** difference,
                             const double** combined_se);
void rdl_disparity_report_free(rdl_disparity_report* d);

/* ------------------------------------------------------------------ */
/* Risk scoring                                                        */

typedef struct rdl_score_table rdl_score_table;

/* The nine scorer inputs. Flags are 0/1. */
typedef struct rdl_defendant_record {
  int32_t age_at_arrest;
  int32_t current_violent_offense;
  int32_t pending_charge_at_offense;
  int32_t prior_misdemeanor;
  int32_t prior_felony;
  int32_t prior_violent_conviction_count;
  int32_t fta_within_2yr_count;
  int32_t fta_older_2yr_count;
  int32_t prior_incarceration;
} rdl_defendant_record;

/* Parses and validates a score-table JSON document; the error message
 * lists every violation found. */
rdl_status rdl_score_table_parse(const char* json_text, rdl_score_table** out);
void rdl_score_table_free(rdl_score_table* table);

/* Tallies factors from a JSON Lines event stream (one
 * {"kind", "date", optional "severity"} object per line) dated strictly
 * before as_of ("YYYY-MM-DD"), merged with the current-charge inputs. */
rdl_status rdl_derive_factors(const char* events_jsonl, int32_t age,
                              int32_t violent_offense, int32_t pending_charge,
                              const char* as_of, rdl_defendant_record* out);

rdl_status rdl_score(const rdl_defendant_record* record, const rdl_score_table* table,
                     int32_t* fta, int32_t* nca, int32_t* nvca);

/* ------------------------------------------------------------------ */
/* Regression                                                          */

typedef struct rdl_regression_result rdl_regression_result;
typedef struct rdl_synth_spec rdl_synth_spec;
typedef struct rdl_synth_data rdl_synth_data;

/* Least squares of y on x (row-major, n_rows x n_cols). Rank-deficient
 * designs fail with RDL_ERR_NUMERIC naming the dependent columns. */
rdl_status rdl_ols_fit(const double* x, size_t n_rows, size_t n_cols,
                       const char* const* column_names, const double* y,
                       rdl_regression_result** out);
size_t rdl_regression_n_columns(const rdl_regression_result* r);
const char* rdl_regression_column(const rdl_regression_result* r, size_t column);
rdl_status rdl_regression_coef(const rdl_regression_result* r, size_t column, double* beta,
                               double* se, double* t_stat);
double rdl_regression_r_squared(const rdl_regression_result* r);
uint64_t rdl_regression_n(const rdl_regression_result* r);
void rdl_regression_result_free(rdl_regression_result* r);

/* Synthetic study population: intercept plus the added covariates, with
 * outcome y = x * beta + noise. NULL only on allocation failure. */
rdl_synth_spec* rdl_synth_spec_new(uint64_t n, double noise_sd, uint64_t seed);
rdl_status rdl_synth_spec_add_binary(rdl_synth_spec* spec, const char* name, double p);
rdl_status rdl_synth_spec_add_uniform(rdl_synth_spec* spec, const char* name, double lo,
                                      double hi);
rdl_status rdl_synth_spec_add_normal(rdl_synth_spec* spec, const char* name, double mean,
                                     double sd);
/* Coefficients in column order, intercept first; count must equal the
 * number of added covariates plus one. */
rdl_status rdl_synth_spec_set_beta(rdl_synth_spec* spec, const double* beta, size_t count);
void rdl_synth_spec_free(rdl_synth_spec* spec);

rdl_status rdl_synth_generate(const rdl_synth_spec* spec, rdl_synth_data** out);
uint64_t rdl_synth_n_rows(const rdl_synth_data* d);
size_t rdl_synth_n_columns(const rdl_synth_data* d);
const char* rdl_synth_column(const rdl_synth_data* d, size_t column);
/* Row-major design values, n_rows x n_columns. */
const double* rdl_synth_x(const rdl_synth_data* d);
const double* rdl_synth_y(const rdl_synth_data* d);
void rdl_synth_data_free(rdl_synth_data* d);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RDL_H */
