#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "core/process.hpp"
#include "oracles.hpp"

using rdl::CounterRng;
using rdl::derive_seed;
using rdl::ValidationError;
using namespace rdl::process;

namespace {

std::vector<DecisionOutcome> sequence_from_bits(std::uint32_t bits, int length) {
  std::vector<DecisionOutcome> seq(length);
  for (int i = 0; i < length; ++i) {
    seq[i] = (bits >> i) & 1u ? DecisionOutcome::kHighRisk : DecisionOutcome::kLowRisk;
  }
  return seq;
}

int popcount(std::uint32_t bits) {
  int count = 0;
  for (; bits != 0; bits &= bits - 1) ++count;
  return count;
}

}  // namespace

TEST_CASE("urn parameters reject non-positive masses") {
  CHECK_THROWS_AS((UrnParams{0.0, 1.0, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((UrnParams{1.0, -2.0, 1.0}.validate()), ValidationError);
  CHECK_THROWS_AS((UrnParams{1.0, 1.0, 0.0}.validate()), ValidationError);
  CHECK_NOTHROW(UrnParams{0.5, 2.0, 0.1}.validate());
}

TEST_CASE("bias spec accepts [0,1) only") {
  CHECK_NOTHROW(BiasSpec{0.0, false, ClampPolicy::kClampUnitInterval}.validate());
  CHECK_NOTHROW(BiasSpec{0.99, true, ClampPolicy::kUnclamped}.validate());
  CHECK_THROWS_AS((BiasSpec{1.0, true, ClampPolicy::kClampUnitInterval}.validate()),
                  ValidationError);
  CHECK_THROWS_AS((BiasSpec{-0.01, true, ClampPolicy::kClampUnitInterval}.validate()),
                  ValidationError);
}

TEST_CASE("initial state carries p1 = b0/(b0+r0) and the starting mass") {
  const UrnParams urn{2.0, 3.0, 0.5};
  const ProcessState state = initial_state(urn);
  CHECK(state.step_index == 1);
  CHECK(state.successes == 0);
  CHECK(state.p == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(state.total_mass == doctest::Approx(5.0));
  CHECK_FALSE(state.out_of_regime);
}

TEST_CASE("recurrence weight equals i/(i+1) for the unit urn") {
  const UrnParams urn{1.0, 1.0, 1.0};
  for (std::uint64_t i = 2; i <= 40; ++i) {
    CHECK(gamma_at(urn, i) ==
          doctest::Approx(static_cast<double>(i) / static_cast<double>(i + 1))
              .epsilon(1e-15));
  }
  CHECK_THROWS_AS(gamma_at(urn, 1), ValidationError);
}

TEST_CASE("one unbiased step matches the hand calculation") {
  const UrnParams urn{1.0, 1.0, 1.0};
  const ProcessState start = initial_state(urn);

  const ProcessState high = step(start, DecisionOutcome::kHighRisk, urn);
  CHECK(high.p == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(high.successes == 1);
  CHECK(high.total_mass == doctest::Approx(3.0));
  CHECK(high.step_index == 2);

  const ProcessState low = step(start, DecisionOutcome::kLowRisk, urn);
  CHECK(low.p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(low.successes == 0);
}

TEST_CASE("iterated updates reproduce the closed-form count identity") {
  const UrnParams configs[] = {{1.0, 1.0, 1.0}, {2.0, 3.0, 0.5}, {0.2, 0.7, 10.0}};
  for (const UrnParams& urn : configs) {
    CounterRng rng(99);
    ProcessState state = initial_state(urn);
    for (int i = 0; i < 400; ++i) {
      const auto x = sample_outcome(state.p, rng);
      state = step(state, x, urn);
      const double closed = closed_form_p(urn, state.successes, state.step_index - 1);
      CHECK(state.p == doctest::Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("biased step with rho = 0 is bitwise identical to the unbiased step") {
  const UrnParams urn{2.0, 1.0, 0.25};
  const BiasSpec bias{0.0, true, ClampPolicy::kClampUnitInterval};
  ProcessState a = initial_state(urn);
  ProcessState b = initial_state(urn);
  CounterRng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto x = sample_outcome(a.p, rng);
    a = step(a, x, urn);
    b = biased_step(b, x, urn, bias);
    CHECK(a.p == b.p);  // exact, not approximate
    CHECK_FALSE(b.out_of_regime);
  }
}

TEST_CASE("bias cancels exactly when the outcome already matches the group value") {
  const UrnParams urn{1.0, 1.0, 1.0};
  const BiasSpec bias{0.3, true, ClampPolicy::kClampUnitInterval};
  const ProcessState start = initial_state(urn);
  const ProcessState plain = step(start, DecisionOutcome::kHighRisk, urn);
  const ProcessState biased = biased_step(start, DecisionOutcome::kHighRisk, urn, bias);
  CHECK(plain.p == biased.p);
}

TEST_CASE("biased updates push toward the group indicator and clamp at the boundary") {
  const UrnParams urn{1.0, 1.0, 1.0};
  const ProcessState start = initial_state(urn);

  const BiasSpec up{0.2, true, ClampPolicy::kClampUnitInterval};
  const ProcessState nudged = biased_step(start, DecisionOutcome::kLowRisk, urn, up);
  // p*gamma + 0 + rho*(1 - 0) with gamma = 2/3.
  CHECK(nudged.p == doctest::Approx(0.5 * (2.0 / 3.0) + 0.2).epsilon(1e-15));

  // Drive p to the upper boundary, then check the clamp holds.
  ProcessState state = start;
  const BiasSpec strong{0.9, true, ClampPolicy::kClampUnitInterval};
  for (int i = 0; i < 50; ++i) state = biased_step(state, DecisionOutcome::kLowRisk, urn, strong);
  CHECK(state.p <= 1.0);
  CHECK(state.p >= 0.0);

  const BiasSpec down{0.9, false, ClampPolicy::kUnclamped};
  ProcessState free = start;
  for (int i = 0; i < 50; ++i) free = biased_step(free, DecisionOutcome::kHighRisk, urn, down);
  CHECK(free.p < 0.0);  // unclamped leaves the unit interval
}

TEST_CASE("out_of_regime flags 1 - gamma - rho < 0 and stays set") {
  const UrnParams urn{1.0, 1.0, 1.0};
  // gamma_2 = 2/3, so rho > 1/3 leaves the convex-combination regime.
  const BiasSpec wide{0.4, true, ClampPolicy::kClampUnitInterval};
  ProcessState state = initial_state(urn);
  state = biased_step(state, DecisionOutcome::kLowRisk, urn, wide);
  CHECK(state.out_of_regime);
  // gamma grows (weights shrink), but the flag is sticky.
  const BiasSpec narrow{0.01, true, ClampPolicy::kClampUnitInterval};
  state = biased_step(state, DecisionOutcome::kLowRisk, urn, narrow);
  CHECK(state.out_of_regime);

  ProcessState ok = initial_state(urn);
  ok = biased_step(ok, DecisionOutcome::kLowRisk, urn, narrow);
  CHECK_FALSE(ok.out_of_regime);
}

TEST_CASE("sample_outcome thresholds the counter stream against p") {
  CounterRng rng(1234);
  CounterRng expected_stream(1234);
  for (int i = 0; i < 100; ++i) {
    const double p = (i % 10) / 10.0;
    const double u = expected_stream.next_unit();
    const auto x = sample_outcome(p, rng);
    CHECK((x == DecisionOutcome::kHighRisk) == (u < p));
  }
  CHECK_THROWS_AS(sample_outcome(1.5, rng), ValidationError);
  CHECK_THROWS_AS(sample_outcome(-0.1, rng), ValidationError);
}

TEST_CASE("unit-urn sequence probabilities match the exact factorial ratio") {
  const UrnParams urn{1.0, 1.0, 1.0};
  for (int length = 1; length <= 6; ++length) {
    for (std::uint32_t bits = 0; bits < (1u << length); ++bits) {
      const auto seq = sequence_from_bits(bits, length);
      const double expected = oracle::unit_urn_sequence_probability(length, popcount(bits));
      CHECK(sequence_probability(urn, seq) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
}

TEST_CASE("sequence probabilities are exchangeable and sum to one") {
  const UrnParams urn{2.0, 3.0, 0.5};
  const int length = 8;
  long double total = 0.0L;
  for (std::uint32_t bits = 0; bits < (1u << length); ++bits) {
    const auto seq = sequence_from_bits(bits, length);
    const double p = sequence_probability(urn, seq);
    const double grouped =
        oracle::urn_sequence_probability(urn.b0, urn.r0, urn.k, length, popcount(bits));
    CHECK(p == doctest::Approx(grouped).epsilon(1e-12));
    total += p;
  }
  CHECK(static_cast<double>(total) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sequence enumeration is capped") {
  const UrnParams urn{1.0, 1.0, 1.0};
  const std::vector<DecisionOutcome> too_long(26, DecisionOutcome::kLowRisk);
  CHECK_THROWS_AS(sequence_probability(urn, too_long), ValidationError);
  const std::vector<DecisionOutcome> at_cap(25, DecisionOutcome::kLowRisk);
  CHECK_NOTHROW(sequence_probability(urn, at_cap));
}

TEST_CASE("simulate_trajectory emits p_1..p_N and X_1..X_{N-1}") {
  TrajectoryParams params;
  params.urn = UrnParams{1.0, 1.0, 1.0};
  params.n_steps = 64;
  params.seed = 17;
  const Trajectory t = simulate_trajectory(params);
  REQUIRE(t.probabilities.size() == 64);
  REQUIRE(t.outcomes.size() == 63);
  CHECK(t.probabilities.front() == doctest::Approx(0.5));
  CHECK_FALSE(t.out_of_regime);

  // Every recorded p obeys the count identity.
  std::uint64_t successes = 0;
  for (std::size_t i = 0; i < t.outcomes.size(); ++i) {
    successes += t.outcomes[i] == DecisionOutcome::kHighRisk ? 1 : 0;
    CHECK(t.probabilities[i + 1] ==
          doctest::Approx(closed_form_p(params.urn, successes, i + 1)).epsilon(1e-12));
  }
}

TEST_CASE("trajectories are reproducible by seed and distinct across seeds") {
  TrajectoryParams params;
  params.n_steps = 200;
  params.seed = 7;
  const Trajectory a = simulate_trajectory(params);
  const Trajectory b = simulate_trajectory(params);
  CHECK(a.probabilities == b.probabilities);
  CHECK(a.outcomes == b.outcomes);

  params.seed = 8;
  const Trajectory c = simulate_trajectory(params);
  CHECK(a.probabilities != c.probabilities);
}

TEST_CASE("a single-step trajectory is just p1") {
  TrajectoryParams params;
  params.n_steps = 1;
  const Trajectory t = simulate_trajectory(params);
  CHECK(t.probabilities == std::vector<double>{0.5});
  CHECK(t.outcomes.empty());

  params.n_steps = 0;
  CHECK_THROWS_AS(simulate_trajectory(params), ValidationError);
}

TEST_CASE("walk_trajectory visitor sees the same path simulate_trajectory records") {
  TrajectoryParams params;
  params.urn = UrnParams{0.5, 1.5, 2.0};
  params.bias = BiasSpec{0.05, true, ClampPolicy::kClampUnitInterval};
  params.n_steps = 100;
  params.seed = 321;

  struct Collector {
    std::vector<double> p;
    std::vector<DecisionOutcome> x;
    bool flagged = false;
    void on_start(double p1) { p.push_back(p1); }
    void on_decision(std::uint64_t, DecisionOutcome outcome, double next) {
      x.push_back(outcome);
      p.push_back(next);
    }
    void on_finish(bool out_of_regime) { flagged = out_of_regime; }
  } collector;

  walk_trajectory(params, collector);
  const Trajectory t = simulate_trajectory(params);
  CHECK(collector.p == t.probabilities);
  CHECK(collector.x == t.outcomes);
  CHECK(collector.flagged == t.out_of_regime);
}

TEST_CASE("seed derivation separates groups and members") {
  const std::uint64_t master = 42;
  CHECK(derive_seed(master, 0, 0) != derive_seed(master, 0, 1));
  CHECK(derive_seed(master, 0, 0) != derive_seed(master, 1, 0));
  CHECK(derive_seed(master, 1, 0) != derive_seed(master, 0, 1));
  CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
  // Stateless: same inputs, same seed.
  CHECK(derive_seed(master, 3, 9) == derive_seed(master, 3, 9));
}
