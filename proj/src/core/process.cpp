#include "core/process.hpp"

#include <cmath>
#include <string>

namespace rdl::process {

namespace {

constexpr std::size_t kSequenceEnumerationCap = 25;

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

void UrnParams::validate() const {
  require(std::isfinite(b0) && b0 > 0.0, "urn: b0 must be a positive real");
  require(std::isfinite(r0) && r0 > 0.0, "urn: r0 must be a positive real");
  require(std::isfinite(k) && k > 0.0, "urn: k must be a positive real");
}

void BiasSpec::validate() const {
  require(std::isfinite(rho) && rho >= 0.0 && rho < 1.0, "bias: rho must lie in [0, 1)");
}

void TrajectoryParams::validate() const {
  urn.validate();
  bias.validate();
  require(n_steps >= 1, "trajectory: n_steps must be >= 1");
}

ProcessState initial_state(const UrnParams& urn) {
  urn.validate();
  return ProcessState{1, urn.initial_p(), 0, urn.initial_mass(), false};
}

double gamma_at(const UrnParams& urn, std::uint64_t i) {
  urn.validate();
  require(i >= 2, "gamma_at: recurrence weight defined for i >= 2");
  const double mass = urn.initial_mass() + static_cast<double>(i - 2) * urn.k;
  return mass / (mass + urn.k);
}

ProcessState step(const ProcessState& state, DecisionOutcome outcome, const UrnParams& urn) {
  const double gamma = state.total_mass / (state.total_mass + urn.k);
  ProcessState next = state;
  next.step_index = state.step_index + 1;
  next.p = state.p * gamma + to_unit(outcome) * (1.0 - gamma);
  next.successes = state.successes + (outcome == DecisionOutcome::kHighRisk ? 1 : 0);
  next.total_mass = state.total_mass + urn.k;
  return next;
}

ProcessState biased_step(const ProcessState& state, DecisionOutcome outcome,
                         const UrnParams& urn, const BiasSpec& bias) {
  const double gamma = state.total_mass / (state.total_mass + urn.k);
  // p*gamma + R*rho + X*(1 - gamma - rho) == [p*gamma + X*(1 - gamma)] + rho*(R - X).
  // The right-hand form keeps the R == X and rho == 0 reductions exact.
  const double group = bias.group_indicator ? 1.0 : 0.0;
  ProcessState next = state;
  next.step_index = state.step_index + 1;
  next.p = state.p * gamma + to_unit(outcome) * (1.0 - gamma) +
           bias.rho * (group - to_unit(outcome));
  if (bias.clamp == ClampPolicy::kClampUnitInterval) {
    next.p = next.p < 0.0 ? 0.0 : (next.p > 1.0 ? 1.0 : next.p);
  }
  next.successes = state.successes + (outcome == DecisionOutcome::kHighRisk ? 1 : 0);
  next.total_mass = state.total_mass + urn.k;
  next.out_of_regime = state.out_of_regime || 1.0 - gamma - bias.rho < 0.0;
  return next;
}

DecisionOutcome sample_outcome(double p, CounterRng& rng) {
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "sample_outcome: p must lie in [0, 1]");
  return rng.next_unit() < p ? DecisionOutcome::kHighRisk : DecisionOutcome::kLowRisk;
}

double closed_form_p(const UrnParams& urn, std::uint64_t successes, std::uint64_t decisions) {
  urn.validate();
  require(successes <= decisions, "closed_form_p: successes must not exceed decisions");
  return (urn.b0 + urn.k * static_cast<double>(successes)) /
         (urn.initial_mass() + urn.k * static_cast<double>(decisions));
}

double sequence_probability(const UrnParams& urn, std::span<const DecisionOutcome> outcomes) {
  urn.validate();
  require(outcomes.size() <= kSequenceEnumerationCap,
          "sequence_probability: sequence exceeds the enumeration cap of 25");
  ProcessState state = initial_state(urn);
  double probability = 1.0;
  for (const DecisionOutcome x : outcomes) {
    probability *= x == DecisionOutcome::kHighRisk ? state.p : 1.0 - state.p;
    state = step(state, x, urn);
  }
  return probability;
}

namespace {

struct TrajectoryRecorder {
  Trajectory out;

  void on_start(double p1) { out.probabilities.push_back(p1); }
  void on_decision(std::uint64_t, DecisionOutcome x, double p) {
    out.outcomes.push_back(x);
    out.probabilities.push_back(p);
  }
  void on_finish(bool flagged) { out.out_of_regime = flagged; }
};

}  // namespace

Trajectory simulate_trajectory(const TrajectoryParams& params) {
  params.validate();
  TrajectoryRecorder recorder;
  recorder.out.probabilities.reserve(params.n_steps);
  recorder.out.outcomes.reserve(params.n_steps - 1);
  walk_trajectory(params, recorder);
  return std::move(recorder.out);
}

}  // namespace rdl::process
