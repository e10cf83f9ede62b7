#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace rdl::process {

// Binary classification outcome of one assessment.
enum class DecisionOutcome : std::uint8_t { kLowRisk = 0, kHighRisk = 1 };

constexpr double to_unit(DecisionOutcome x) noexcept {
  return x == DecisionOutcome::kHighRisk ? 1.0 : 0.0;
}

// Urn masses: b0/r0 are the initial high-/low-risk masses, k the mass added
// per decision. Masses are reals, not ball counts.
struct UrnParams {
  double b0 = 1.0;
  double r0 = 1.0;
  double k = 1.0;

  void validate() const;

  double initial_p() const noexcept { return b0 / (b0 + r0); }
  double initial_mass() const noexcept { return b0 + r0; }
};

enum class ClampPolicy : std::uint8_t { kClampUnitInterval = 0, kUnclamped = 1 };

// Per-step additive bias applied to the flagged group.
struct BiasSpec {
  double rho = 0.0;
  bool group_indicator = false;
  ClampPolicy clamp = ClampPolicy::kClampUnitInterval;

  void validate() const;
};

// State before decision `step_index`. For the unbiased process,
// p == (b0 + k*successes) / total_mass exactly.
struct ProcessState {
  std::uint64_t step_index = 1;
  double p = 0.5;
  std::uint64_t successes = 0;
  double total_mass = 2.0;
  // Set when a biased update ran with 1 - gamma - rho < 0, i.e. outside
  // the regime where the biased recurrence is a convex combination.
  bool out_of_regime = false;
};

ProcessState initial_state(const UrnParams& urn);

// Weight gamma_i = n_{i-2} / (n_{i-2} + k) with n_j = b0 + r0 + j*k.
// Defined for i >= 2; equals i/(i+1) when b0 = r0 = k = 1.
double gamma_at(const UrnParams& urn, std::uint64_t i);

// One unbiased update: p' = p*gamma + X*(1 - gamma), mass grows by k.
ProcessState step(const ProcessState& state, DecisionOutcome outcome, const UrnParams& urn);

// Biased update: p' = p*gamma + R*rho + X*(1 - gamma - rho), clamped to
// [0, 1] under kClampUnitInterval. rho = 0 reproduces step() exactly.
ProcessState biased_step(const ProcessState& state, DecisionOutcome outcome,
                         const UrnParams& urn, const BiasSpec& bias);

// Bernoulli(p) draw from the counter generator. Rejects p outside [0, 1].
DecisionOutcome sample_outcome(double p, CounterRng& rng);

// O(1) state probability after `decisions` decisions with `successes`
// high-risk outcomes: (b0 + k*s) / (b0 + r0 + k*d).
double closed_form_p(const UrnParams& urn, std::uint64_t successes, std::uint64_t decisions);

// Probability of observing an exact outcome sequence under the unbiased
// recurrence. Exchangeable: depends only on (length, success count).
// Enumeration-scale only; sequences longer than 25 are rejected.
double sequence_probability(const UrnParams& urn, std::span<const DecisionOutcome> outcomes);

struct TrajectoryParams {
  UrnParams urn;
  BiasSpec bias;
  std::uint64_t n_steps = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Realized sample path: p_1..p_N and X_1..X_{N-1}.
struct Trajectory {
  std::vector<double> probabilities;
  std::vector<DecisionOutcome> outcomes;
  bool out_of_regime = false;
};

// Streams one trajectory through a visitor without materializing it.
// Visitor contract:
//   on_start(p1)
//   on_decision(i, outcome, p_next)   for i = 1..N-1 (outcome X_i, p_{i+1})
//   on_finish(out_of_regime)
// The same walk backs simulate_trajectory and the cohort runner, so both
// produce identical paths for identical seeds.
template <typename Visitor>
void walk_trajectory(const TrajectoryParams& params, Visitor&& visitor) {
  CounterRng rng(params.seed);
  const UrnParams& urn = params.urn;
  const BiasSpec& bias = params.bias;
  const double k = urn.k;
  const bool biased = bias.rho > 0.0;
  const bool clamp = bias.clamp == ClampPolicy::kClampUnitInterval;
  const double group = bias.group_indicator ? 1.0 : 0.0;

  double p = urn.initial_p();
  double mass = urn.initial_mass();
  bool flagged = false;
  visitor.on_start(p);

  for (std::uint64_t i = 1; i < params.n_steps; ++i) {
    const auto x = rng.next_unit() < p ? DecisionOutcome::kHighRisk : DecisionOutcome::kLowRisk;
    const double gamma = mass / (mass + k);
    if (biased) {
      flagged |= 1.0 - gamma - bias.rho < 0.0;
      p = p * gamma + to_unit(x) * (1.0 - gamma) + bias.rho * (group - to_unit(x));
      if (clamp) p = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
    } else {
      p = p * gamma + to_unit(x) * (1.0 - gamma);
    }
    mass += k;
    visitor.on_decision(i, x, p);
  }
  visitor.on_finish(flagged);
}

// Simulates p_1..p_N with seeded sampling; bit-for-bit reproducible.
Trajectory simulate_trajectory(const TrajectoryParams& params);

}  // namespace rdl::process
