#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/process.hpp"

namespace rdl::cohort {

struct GroupSpec {
  std::string name;
  std::uint64_t size = 1;
  process::UrnParams urn;
  process::BiasSpec bias;

  void validate() const;
};

struct CohortSpec {
  std::vector<GroupSpec> groups;
  std::uint64_t n_steps = 1;
  std::uint64_t master_seed = 0;
  bool record_full_paths = false;

  void validate() const;
};

// Recording grid: powers of two {1, 2, 4, ...} capped by and joined with N.
std::vector<std::uint64_t> checkpoint_grid(std::uint64_t n_steps);

struct GroupResult {
  std::string name;
  std::vector<double> endpoints;         // p_N per member
  std::vector<double> checkpoint_mean;   // mean of p_i at each checkpoint
  std::vector<double> checkpoint_se;     // standard error of that mean
  std::uint64_t out_of_regime_count = 0;
  std::vector<process::Trajectory> paths;  // populated only when recording full paths
};

struct CohortResult {
  std::uint64_t n_steps = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<GroupResult> groups;
};

// Runs one trajectory per member. Member j of group g is seeded by
// derive_seed(master_seed, g, j); work is partitioned into fixed-size
// member blocks and reduced in block order, so the result is a pure
// function of the spec regardless of thread count. n_threads <= 0 uses
// the hardware concurrency.
CohortResult run_cohort(const CohortSpec& spec, int n_threads = 0);

struct ExtremeMass {
  double low = 0.0;   // fraction of endpoints with p < epsilon
  double high = 0.0;  // fraction of endpoints with p > 1 - epsilon

  double total() const noexcept { return low + high; }
};

// Endpoint mass near 0 and 1. epsilon must lie in (0, 0.5).
ExtremeMass extreme_mass_of(std::span<const double> endpoints, double epsilon);

// Same, per group of a cohort result.
std::vector<ExtremeMass> extreme_mass(const CohortResult& result, double epsilon);

// Normalized endpoint histogram over [0, 1] with equal-width bins;
// values outside the interval land in the edge bins. Masses sum to 1
// for non-empty input.
std::vector<double> endpoint_histogram(std::span<const double> endpoints, std::size_t bins);

struct DisparityReport {
  struct Group {
    std::string name;
    std::vector<double> mean;       // per checkpoint
    std::vector<double> se;         // per checkpoint
    ExtremeMass extremes;
    std::vector<double> histogram;  // endpoint mass per bin, sums to 1
  };
  struct Gap {
    std::size_t group_a = 0;
    std::size_t group_b = 0;
    std::vector<double> difference;   // mean_a - mean_b per checkpoint
    std::vector<double> combined_se;  // sqrt(se_a^2 + se_b^2)
  };

  std::vector<std::uint64_t> checkpoints;
  std::vector<Group> groups;
  std::vector<Gap> gaps;
  double epsilon = 0.05;
  std::size_t histogram_bins = 20;
};

DisparityReport disparity_metrics(const CohortResult& result, double epsilon,
                                  std::size_t histogram_bins);

}  // namespace rdl::cohort
