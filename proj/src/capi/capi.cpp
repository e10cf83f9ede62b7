#include "rdl/rdl.h"

#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "core/cohort.hpp"
#include "core/limit.hpp"
#include "core/process.hpp"
#include "core/regression.hpp"
#include "core/rng.hpp"
#include "core/scoring.hpp"

#ifndef RDL_VERSION_STRING
#define RDL_VERSION_STRING "0.0.0"
#endif

namespace {

thread_local std::string g_last_error;

void require_arg(bool ok, const char* message) {
  if (!ok) throw rdl::ValidationError(message);
}

// Maps the library's exception taxonomy onto status codes; never lets
// an exception escape the C boundary.
template <typename F>
rdl_status guarded(F&& body) noexcept {
  try {
    body();
    return RDL_OK;
  } catch (const rdl::ValidationError& err) {
    g_last_error = err.what();
    return RDL_ERR_VALIDATION;
  } catch (const rdl::NumericError& err) {
    g_last_error = err.what();
    return RDL_ERR_NUMERIC;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RDL_ERR_NUMERIC;
  } catch (const std::exception& err) {
    g_last_error = err.what();
    return RDL_ERR_NUMERIC;
  }
}

rdl::process::UrnParams to_urn(const rdl_urn_params* urn) {
  require_arg(urn != nullptr, "urn must not be NULL");
  return rdl::process::UrnParams{urn->b0, urn->r0, urn->k};
}

rdl::process::BiasSpec to_bias(const rdl_bias_spec* bias) {
  if (bias == nullptr) return rdl::process::BiasSpec{};
  return rdl::process::BiasSpec{
      bias->rho, bias->group_indicator != 0,
      bias->clamp_to_unit != 0 ? rdl::process::ClampPolicy::kClampUnitInterval
                               : rdl::process::ClampPolicy::kUnclamped};
}

// Accessor guard: records a message and signals the caller to return a
// sentinel instead of throwing across the boundary.
bool check(bool ok, const char* message) noexcept {
  if (!ok) g_last_error = message;
  return ok;
}

}  // namespace

struct rdl_trajectory {
  std::vector<double> probabilities;
  std::vector<uint8_t> outcomes;
  bool out_of_regime = false;
};

struct rdl_cohort_spec {
  rdl::cohort::CohortSpec impl;
};

struct rdl_cohort_result {
  rdl::cohort::CohortResult impl;
};

struct rdl_disparity_report {
  rdl::cohort::DisparityReport impl;
};

struct rdl_score_table {
  rdl::scoring::ScoreTable impl;
};

struct rdl_regression_result {
  rdl::regression::RegressionResult impl;
};

struct rdl_synth_spec {
  rdl::regression::SynthCohortSpec impl;
};

struct rdl_synth_data {
  std::vector<std::string> columns;
  std::vector<double> x_row_major;
  std::vector<double> y;
  uint64_t n_rows = 0;
};

extern "C" {

const char* rdl_version(void) { return RDL_VERSION_STRING; }

const char* rdl_last_error(void) { return g_last_error.c_str(); }

uint64_t rdl_derive_seed(uint64_t master_seed, uint64_t group, uint64_t member) {
  return rdl::derive_seed(master_seed, group, member);
}

rdl_status rdl_gamma_at(const rdl_urn_params* urn, uint64_t step_index, double* out) {
  return guarded([&] {
    require_arg(out != nullptr, "out must not be NULL");
    *out = rdl::process::gamma_at(to_urn(urn), step_index);
  });
}

rdl_status rdl_closed_form_p(const rdl_urn_params* urn, uint64_t successes,
                             uint64_t decisions, double* out) {
  return guarded([&] {
    require_arg(out != nullptr, "out must not be NULL");
    *out = rdl::process::closed_form_p(to_urn(urn), successes, decisions);
  });
}

rdl_status rdl_sequence_probability(const rdl_urn_params* urn, const uint8_t* outcomes,
                                    size_t length, double* out) {
  return guarded([&] {
    require_arg(out != nullptr, "out must not be NULL");
    require_arg(outcomes != nullptr || length == 0, "outcomes must not be NULL");
    std::vector<rdl::process::DecisionOutcome> seq;
    seq.reserve(length);
    for (size_t i = 0; i < length; ++i) {
      require_arg(outcomes[i] <= 1, "outcomes must contain only 0 or 1");
      seq.push_back(static_cast<rdl::process::DecisionOutcome>(outcomes[i]));
    }
    *out = rdl::process::sequence_probability(to_urn(urn), seq);
  });
}

rdl_status rdl_simulate(const rdl_urn_params* urn, const rdl_bias_spec* bias,
                        uint64_t n_steps, uint64_t seed, rdl_trajectory** out) {
  return guarded([&] {
    require_arg(out != nullptr, "out must not be NULL");
    rdl::process::TrajectoryParams params{to_urn(urn), to_bias(bias), n_steps, seed};
    const auto path = rdl::process::simulate_trajectory(params);
    auto handle = std::make_unique<rdl_trajectory>();
    handle->probabilities = path.probabilities;
    handle->outcomes.reserve(path.outcomes.size());
    for (const auto x : path.outcomes) {
      handle->outcomes.push_back(static_cast<uint8_t>(x));
    }
    handle->out_of_regime = path.out_of_regime;
    *out = handle.release();
  });
}

uint64_t rdl_trajectory_steps(const rdl_trajectory* t) {
  if (!check(t != nullptr, "trajectory must not be NULL")) return 0;
  return t->probabilities.size();
}

const double* rdl_trajectory_probabilities(const rdl_trajectory* t) {
  if (!check(t != nullptr, "trajectory must not be NULL")) return nullptr;
  return t->probabilities.data();
}

const uint8_t* rdl_trajectory_outcomes(const rdl_trajectory* t) {
  if (!check(t != nullptr, "trajectory must not be NULL")) return nullptr;
  return t->outcomes.empty() ? nullptr : t->outcomes.data();
}

int rdl_trajectory_out_of_regime(const rdl_trajectory* t) {
  if (!check(t != nullptr, "trajectory must not be NULL")) return 0;
  return t->out_of_regime ? 1 : 0;
}

void rdl_trajectory_free(rdl_trajectory* t) { delete t; }

rdl_status rdl_cumulative_outcomes(const rdl_trajectory* const* trajectories, size_t count,
                                   double high_risk_contribution,
                                   double low_risk_contribution, uint64_t window_steps,
                                   double* out) {
  return guarded([&] {
    require_arg(out != nullptr, "out must not be NULL");
    require_arg(trajectories != nullptr || count == 0, "trajectories must not be NULL");
    rdl::regression::SentenceRule rule{high_risk_contribution, low_risk_contribution,
                                       window_steps};
    for (size_t i = 0; i < count; ++i) {
      require_arg(trajectories[i] != nullptr, "trajectories must not contain NULL");
      rdl::process::Trajectory path;
      path.probabilities = trajectories[i]->probabilities;
      path.outcomes.reserve(trajectories[i]->outcomes.size());
      for (const auto x : trajectories[i]->outcomes) {
        path.outcomes.push_back(static_cast<rdl::process::DecisionOutcome>(x));
      }
      out[i] = rdl::regression::cumulative_outcomes({&path, 1}, rule).front();
    }
  });
}

rdl_status rdl_limit_beta_params(const rdl_urn_params* urn, double* a, double* b) {
  return guarded([&] {
    require_arg(a != nullptr && b != nullptr, "a and b must not be NULL");
    const auto params = rdl::limit::limit_beta_params(to_urn(urn));
    *a = params.a;
    *b = params.b;
  });
}

rdl_status rdl_beta_cdf(double a, double b, double x, double* out) {
  return guarded([&] {
    require_arg(out != nullptr, "out must not be NULL");
    *out = rdl::limit::beta_cdf(rdl::limit::BetaParams{a, b}, x);
  });
}

rdl_status rdl_ks_beta(const double* samples, size_t count, double a, double b, double* out) {
  return guarded([&] {
    require_arg(out != nullptr, "out must not be NULL");
    require_arg(samples != nullptr || count == 0, "samples must not be NULL");
    const auto dist = rdl::limit::EmpiricalDistribution::from_samples(
        std::vector<double>(samples, samples + count));
    const rdl::limit::BetaParams params{a, b};
    params.validate();
    *out = rdl::limit::ks_statistic(
        dist, [&](double x) { return rdl::limit::beta_cdf(params, x); });
  });
}

rdl_status rdl_sample_moments(const double* samples, size_t count, double* mean,
                              double* variance) {
  return guarded([&] {
    require_arg(mean != nullptr && variance != nullptr, "outputs must not be NULL");
    require_arg(samples != nullptr || count == 0, "samples must not be NULL");
    const auto dist = rdl::limit::EmpiricalDistribution::from_samples(
        std::vector<double>(samples, samples + count));
    const auto moments = rdl::limit::sample_moments(dist);
    *mean = moments.mean;
    *variance = moments.variance;
  });
}

rdl_status rdl_martingale_z(const double* endpoints, size_t count, double p1, double* out) {
  return guarded([&] {
    require_arg(out != nullptr, "out must not be NULL");
    require_arg(endpoints != nullptr || count == 0, "endpoints must not be NULL");
    *out = rdl::limit::martingale_z({endpoints, count}, p1);
  });
}

rdl_status rdl_extreme_mass(const double* endpoints, size_t count, double epsilon,
                            double* low, double* high) {
  return guarded([&] {
    require_arg(low != nullptr && high != nullptr, "outputs must not be NULL");
    require_arg(endpoints != nullptr || count == 0, "endpoints must not be NULL");
    const auto mass = rdl::cohort::extreme_mass_of({endpoints, count}, epsilon);
    *low = mass.low;
    *high = mass.high;
  });
}

rdl_status rdl_endpoint_histogram(const double* endpoints, size_t count, size_t bins,
                                  double* masses) {
  return guarded([&] {
    require_arg(masses != nullptr, "masses must not be NULL");
    require_arg(endpoints != nullptr || count == 0, "endpoints must not be NULL");
    const auto histogram = rdl::cohort::endpoint_histogram({endpoints, count}, bins);
    for (size_t i = 0; i < histogram.size(); ++i) masses[i] = histogram[i];
  });
}

rdl_cohort_spec* rdl_cohort_spec_new(uint64_t n_steps, uint64_t master_seed) {
  auto* spec = new (std::nothrow) rdl_cohort_spec;
  if (spec != nullptr) {
    spec->impl.n_steps = n_steps;
    spec->impl.master_seed = master_seed;
  }
  return spec;
}

rdl_status rdl_cohort_spec_add_group(rdl_cohort_spec* spec, const char* name, uint64_t size,
                                     const rdl_urn_params* urn, const rdl_bias_spec* bias) {
  return guarded([&] {
    require_arg(spec != nullptr, "spec must not be NULL");
    require_arg(name != nullptr, "name must not be NULL");
    spec->impl.groups.push_back(
        rdl::cohort::GroupSpec{name, size, to_urn(urn), to_bias(bias)});
  });
}

void rdl_cohort_spec_free(rdl_cohort_spec* spec) { delete spec; }

rdl_status rdl_cohort_run(const rdl_cohort_spec* spec, int n_threads,
                          rdl_cohort_result** out) {
  return guarded([&] {
    require_arg(spec != nullptr, "spec must not be NULL");
    require_arg(out != nullptr, "out must not be NULL");
    auto handle = std::make_unique<rdl_cohort_result>();
    handle->impl = rdl::cohort::run_cohort(spec->impl, n_threads);
    *out = handle.release();
  });
}

size_t rdl_cohort_n_groups(const rdl_cohort_result* r) {
  if (!check(r != nullptr, "result must not be NULL")) return 0;
  return r->impl.groups.size();
}

size_t rdl_cohort_n_checkpoints(const rdl_cohort_result* r) {
  if (!check(r != nullptr, "result must not be NULL")) return 0;
  return r->impl.checkpoints.size();
}

const uint64_t* rdl_cohort_checkpoints(const rdl_cohort_result* r) {
  if (!check(r != nullptr, "result must not be NULL")) return nullptr;
  return r->impl.checkpoints.data();
}

namespace {

const rdl::cohort::GroupResult* group_at(const rdl_cohort_result* r, size_t group) {
  if (!check(r != nullptr, "result must not be NULL")) return nullptr;
  if (!check(group < r->impl.groups.size(), "group index out of range")) return nullptr;
  return &r->impl.groups[group];
}

}  // namespace

const char* rdl_cohort_group_name(const rdl_cohort_result* r, size_t group) {
  const auto* g = group_at(r, group);
  return g != nullptr ? g->name.c_str() : nullptr;
}

uint64_t rdl_cohort_group_size(const rdl_cohort_result* r, size_t group) {
  const auto* g = group_at(r, group);
  return g != nullptr ? g->endpoints.size() : 0;
}

const double* rdl_cohort_group_endpoints(const rdl_cohort_result* r, size_t group) {
  const auto* g = group_at(r, group);
  return g != nullptr ? g->endpoints.data() : nullptr;
}

const double* rdl_cohort_group_mean(const rdl_cohort_result* r, size_t group) {
  const auto* g = group_at(r, group);
  return g != nullptr ? g->checkpoint_mean.data() : nullptr;
}

const double* rdl_cohort_group_se(const rdl_cohort_result* r, size_t group) {
  const auto* g = group_at(r, group);
  return g != nullptr ? g->checkpoint_se.data() : nullptr;
}

uint64_t rdl_cohort_group_out_of_regime(const rdl_cohort_result* r, size_t group) {
  const auto* g = group_at(r, group);
  return g != nullptr ? g->out_of_regime_count : 0;
}

void rdl_cohort_result_free(rdl_cohort_result* r) { delete r; }

rdl_status rdl_disparity_metrics(const rdl_cohort_result* r, double epsilon,
                                 size_t histogram_bins, rdl_disparity_report** out) {
  return guarded([&] {
    require_arg(r != nullptr, "result must not be NULL");
    require_arg(out != nullptr, "out must not be NULL");
    auto handle = std::make_unique<rdl_disparity_report>();
    handle->impl = rdl::cohort::disparity_metrics(r->impl, epsilon, histogram_bins);
    *out = handle.release();
  });
}

namespace {

const rdl::cohort::DisparityReport::Group* report_group_at(const rdl_disparity_report* d,
                                                           size_t group) {
  if (!check(d != nullptr, "report must not be NULL")) return nullptr;
  if (!check(group < d->impl.groups.size(), "group index out of range")) return nullptr;
  return &d->impl.groups[group];
}

}  // namespace

size_t rdl_disparity_n_groups(const rdl_disparity_report* d) {
  if (!check(d != nullptr, "report must not be NULL")) return 0;
  return d->impl.groups.size();
}

size_t rdl_disparity_n_checkpoints(const rdl_disparity_report* d) {
  if (!check(d != nullptr, "report must not be NULL")) return 0;
  return d->impl.checkpoints.size();
}

const uint64_t* rdl_disparity_checkpoints(const rdl_disparity_report* d) {
  if (!check(d != nullptr, "report must not be NULL")) return nullptr;
  return d->impl.checkpoints.data();
}

const char* rdl_disparity_group_name(const rdl_disparity_report* d, size_t group) {
  const auto* g = report_group_at(d, group);
  return g != nullptr ? g->name.c_str() : nullptr;
}

const double* rdl_disparity_group_mean(const rdl_disparity_report* d, size_t group) {
  const auto* g = report_group_at(d, group);
  return g != nullptr ? g->mean.data() : nullptr;
}

const double* rdl_disparity_group_se(const rdl_disparity_report* d, size_t group) {
  const auto* g = report_group_at(d, group);
  return g != nullptr ? g->se.data() : nullptr;
}

rdl_status rdl_disparity_group_extremes(const rdl_disparity_report* d, size_t group,
                                        double* low, double* high) {
  return guarded([&] {
    require_arg(low != nullptr && high != nullptr, "outputs must not be NULL");
    require_arg(d != nullptr, "report must not be NULL");
    require_arg(group < d->impl.groups.size(), "group index out of range");
    *low = d->impl.groups[group].extremes.low;
    *high = d->impl.groups[group].extremes.high;
  });
}

size_t rdl_disparity_histogram_bins(const rdl_disparity_report* d) {
  if (!check(d != nullptr, "report must not be NULL")) return 0;
  return d->impl.histogram_bins;
}

const double* rdl_disparity_group_histogram(const rdl_disparity_report* d, size_t group) {
  const auto* g = report_group_at(d, group);
  return g != nullptr ? g->histogram.data() : nullptr;
}

size_t rdl_disparity_n_gaps(const rdl_disparity_report* d) {
  if (!check(d != nullptr, "report must not be NULL")) return 0;
  return d->impl.gaps.size();
}

rdl_status rdl_disparity_gap(const rdl_disparity_report* d, size_t gap, size_t* group_a,
                             size_t* group_b, const double** difference,
                             const double** combined_se) {
  return guarded([&] {
    require_arg(d != nullptr, "report must not be NULL");
    require_arg(group_a != nullptr && group_b != nullptr && difference != nullptr &&
                    combined_se != nullptr,
                "outputs must not be NULL");
    require_arg(gap < d->impl.gaps.size(), "gap index out of range");
    const auto& g = d->impl.gaps[gap];
    *group_a = g.group_a;
    *group_b = g.group_b;
    *difference = g.difference.data();
    *combined_se = g.combined_se.data();
  });
}

void rdl_disparity_report_free(rdl_disparity_report* d) { delete d; }

rdl_status rdl_score_table_parse(const char* json_text, rdl_score_table** out) {
  return guarded([&] {
    require_arg(json_text != nullptr, "json_text must not be NULL");
    require_arg(out != nullptr, "out must not be NULL");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& err) {
      throw rdl::ValidationError(std::string("score table: ") + err.what());
    }
    auto handle = std::make_unique<rdl_score_table>();
    handle->impl = rdl::scoring::table_from_json(doc);
    *out = handle.release();
  });
}

void rdl_score_table_free(rdl_score_table* table) { delete table; }

rdl_status rdl_derive_factors(const char* events_jsonl, int32_t age,
                              int32_t violent_offense, int32_t pending_charge,
                              const char* as_of, rdl_defendant_record* out) {
  return guarded([&] {
    require_arg(events_jsonl != nullptr, "events_jsonl must not be NULL");
    require_arg(as_of != nullptr, "as_of must not be NULL");
    require_arg(out != nullptr, "out must not be NULL");
    std::istringstream stream{std::string(events_jsonl)};
    const auto events = rdl::scoring::parse_events_jsonl(stream);
    const rdl::scoring::CurrentCharge current{age, violent_offense != 0,
                                              pending_charge != 0};
    const auto record =
        rdl::scoring::derive_factors(events, current, rdl::scoring::Date::parse(as_of));
    out->age_at_arrest = record.age_at_arrest;
    out->current_violent_offense = record.current_violent_offense ? 1 : 0;
    out->pending_charge_at_offense = record.pending_charge_at_offense ? 1 : 0;
    out->prior_misdemeanor = record.prior_misdemeanor ? 1 : 0;
    out->prior_felony = record.prior_felony ? 1 : 0;
    out->prior_violent_conviction_count = record.prior_violent_conviction_count;
    out->fta_within_2yr_count = record.fta_within_2yr_count;
    out->fta_older_2yr_count = record.fta_older_2yr_count;
    out->prior_incarceration = record.prior_incarceration ? 1 : 0;
  });
}

rdl_status rdl_score(const rdl_defendant_record* record, const rdl_score_table* table,
                     int32_t* fta, int32_t* nca, int32_t* nvca) {
  return guarded([&] {
    require_arg(record != nullptr, "record must not be NULL");
    require_arg(table != nullptr, "table must not be NULL");
    require_arg(fta != nullptr && nca != nullptr && nvca != nullptr,
                "outputs must not be NULL");
    rdl::scoring::DefendantRecord rec;
    rec.age_at_arrest = record->age_at_arrest;
    rec.current_violent_offense = record->current_violent_offense != 0;
    rec.pending_charge_at_offense = record->pending_charge_at_offense != 0;
    rec.prior_misdemeanor = record->prior_misdemeanor != 0;
    rec.prior_felony = record->prior_felony != 0;
    rec.prior_violent_conviction_count = record->prior_violent_conviction_count;
    rec.fta_within_2yr_count = record->fta_within_2yr_count;
    rec.fta_older_2yr_count = record->fta_older_2yr_count;
    rec.prior_incarceration = record->prior_incarceration != 0;
    const auto scores = rdl::scoring::score(rec, table->impl);
    *fta = scores.fta;
    *nca = scores.nca;
    *nvca = scores.nvca;
  });
}

rdl_status rdl_ols_fit(const double* x, size_t n_rows, size_t n_cols,
                       const char* const* column_names, const double* y,
                       rdl_regression_result** out) {
  return guarded([&] {
    require_arg(x != nullptr, "x must not be NULL");
    require_arg(y != nullptr, "y must not be NULL");
    require_arg(column_names != nullptr, "column_names must not be NULL");
    require_arg(out != nullptr, "out must not be NULL");
    rdl::regression::DesignMatrix design;
    design.columns.reserve(n_cols);
    for (size_t j = 0; j < n_cols; ++j) {
      require_arg(column_names[j] != nullptr, "column_names must not contain NULL");
      design.columns.emplace_back(column_names[j]);
    }
    design.values.resize(static_cast<Eigen::Index>(n_rows),
                         static_cast<Eigen::Index>(n_cols));
    for (size_t i = 0; i < n_rows; ++i) {
      for (size_t j = 0; j < n_cols; ++j) {
        design.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            x[i * n_cols + j];
      }
    }
    auto handle = std::make_unique<rdl_regression_result>();
    handle->impl = rdl::regression::ols_fit(design, {y, n_rows});
    *out = handle.release();
  });
}

size_t rdl_regression_n_columns(const rdl_regression_result* r) {
  if (!check(r != nullptr, "result must not be NULL")) return 0;
  return r->impl.columns.size();
}

const char* rdl_regression_column(const rdl_regression_result* r, size_t column) {
  if (!check(r != nullptr, "result must not be NULL")) return nullptr;
  if (!check(column < r->impl.columns.size(), "column index out of range")) return nullptr;
  return r->impl.columns[column].c_str();
}

rdl_status rdl_regression_coef(const rdl_regression_result* r, size_t column, double* beta,
                               double* se, double* t_stat) {
  return guarded([&] {
    require_arg(r != nullptr, "result must not be NULL");
    require_arg(column < r->impl.columns.size(), "column index out of range");
    if (beta != nullptr) *beta = r->impl.beta[column];
    if (se != nullptr) *se = r->impl.se[column];
    if (t_stat != nullptr) *t_stat = r->impl.t_stat[column];
  });
}

double rdl_regression_r_squared(const rdl_regression_result* r) {
  if (!check(r != nullptr, "result must not be NULL")) return 0.0;
  return r->impl.r_squared;
}

uint64_t rdl_regression_n(const rdl_regression_result* r) {
  if (!check(r != nullptr, "result must not be NULL")) return 0;
  return r->impl.n;
}

void rdl_regression_result_free(rdl_regression_result* r) { delete r; }

rdl_synth_spec* rdl_synth_spec_new(uint64_t n, double noise_sd, uint64_t seed) {
  auto* spec = new (std::nothrow) rdl_synth_spec;
  if (spec != nullptr) {
    spec->impl.n = n;
    spec->impl.noise_sd = noise_sd;
    spec->impl.seed = seed;
  }
  return spec;
}

namespace {

rdl_status add_covariate(rdl_synth_spec* spec, const char* name,
                         rdl::regression::CovariateSpec cov) {
  return guarded([&] {
    require_arg(spec != nullptr, "spec must not be NULL");
    require_arg(name != nullptr, "name must not be NULL");
    cov.name = name;
    cov.validate();
    spec->impl.covariates.push_back(std::move(cov));
  });
}

}  // namespace

rdl_status rdl_synth_spec_add_binary(rdl_synth_spec* spec, const char* name, double p) {
  rdl::regression::CovariateSpec cov;
  cov.kind = rdl::regression::CovariateSpec::Kind::kBinary;
  cov.p = p;
  return add_covariate(spec, name, std::move(cov));
}

rdl_status rdl_synth_spec_add_uniform(rdl_synth_spec* spec, const char* name, double lo,
                                      double hi) {
  rdl::regression::CovariateSpec cov;
  cov.kind = rdl::regression::CovariateSpec::Kind::kUniform;
  cov.lo = lo;
  cov.hi = hi;
  return add_covariate(spec, name, std::move(cov));
}

rdl_status rdl_synth_spec_add_normal(rdl_synth_spec* spec, const char* name, double mean,
                                     double sd) {
  rdl::regression::CovariateSpec cov;
  cov.kind = rdl::regression::CovariateSpec::Kind::kNormal;
  cov.mean = mean;
  cov.sd = sd;
  return add_covariate(spec, name, std::move(cov));
}

rdl_status rdl_synth_spec_set_beta(rdl_synth_spec* spec, const double* beta, size_t count) {
  return guarded([&] {
    require_arg(spec != nullptr, "spec must not be NULL");
    require_arg(beta != nullptr || count == 0, "beta must not be NULL");
    spec->impl.true_beta.assign(beta, beta + count);
  });
}

void rdl_synth_spec_free(rdl_synth_spec* spec) { delete spec; }

rdl_status rdl_synth_generate(const rdl_synth_spec* spec, rdl_synth_data** out) {
  return guarded([&] {
    require_arg(spec != nullptr, "spec must not be NULL");
    require_arg(out != nullptr, "out must not be NULL");
    const auto cohort = rdl::regression::generate_synth_cohort(spec->impl);
    auto handle = std::make_unique<rdl_synth_data>();
    handle->columns = cohort.x.columns;
    handle->n_rows = static_cast<uint64_t>(cohort.x.values.rows());
    const auto p = cohort.x.values.cols();
    handle->x_row_major.reserve(static_cast<size_t>(cohort.x.values.size()));
    for (Eigen::Index i = 0; i < cohort.x.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        handle->x_row_major.push_back(cohort.x.values(i, j));
      }
    }
    handle->y = cohort.y;
    *out = handle.release();
  });
}

uint64_t rdl_synth_n_rows(const rdl_synth_data* d) {
  if (!check(d != nullptr, "data must not be NULL")) return 0;
  return d->n_rows;
}

size_t rdl_synth_n_columns(const rdl_synth_data* d) {
  if (!check(d != nullptr, "data must not be NULL")) return 0;
  return d->columns.size();
}

const char* rdl_synth_column(const rdl_synth_data* d, size_t column) {
  if (!check(d != nullptr, "data must not be NULL")) return nullptr;
  if (!check(column < d->columns.size(), "column index out of range")) return nullptr;
  return d->columns[column].c_str();
}

const double* rdl_synth_x(const rdl_synth_data* d) {
  if (!check(d != nullptr, "data must not be NULL")) return nullptr;
  return d->x_row_major.data();
}

const double* rdl_synth_y(const rdl_synth_data* d) {
  if (!check(d != nullptr, "data must not be NULL")) return nullptr;
  return d->y.data();
}

void rdl_synth_data_free(rdl_synth_data* d) { delete d; }

}  // extern "C"
