#include "core/cohort.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace rdl::cohort {

namespace {

constexpr std::uint64_t kBlockSize = 4096;

// Accumulates one member's path into per-block sums at the checkpoints.
struct CheckpointAccumulator {
  const std::vector<std::uint64_t>* checkpoints = nullptr;
  double* sum = nullptr;    // per checkpoint
  double* sumsq = nullptr;  // per checkpoint
  double endpoint = 0.0;
  bool flagged = false;
  std::size_t cursor = 0;

  void record(std::uint64_t step_index, double p) {
    if (cursor < checkpoints->size() && (*checkpoints)[cursor] == step_index) {
      sum[cursor] += p;
      sumsq[cursor] += p * p;
      ++cursor;
    }
  }

  void on_start(double p1) {
    cursor = 0;
    endpoint = p1;
    record(1, p1);
  }
  void on_decision(std::uint64_t i, process::DecisionOutcome, double p) {
    endpoint = p;
    record(i + 1, p);
  }
  void on_finish(bool out_of_regime) { flagged = out_of_regime; }
};

struct BlockTotals {
  std::vector<double> sum;
  std::vector<double> sumsq;
  std::uint64_t flagged = 0;
};

struct BlockJob {
  std::size_t group = 0;
  std::uint64_t member_begin = 0;
  std::uint64_t member_end = 0;
  std::size_t slot = 0;  // index into the per-group block totals
};

}  // namespace

void GroupSpec::validate() const {
  urn.validate();
  bias.validate();
  if (size < 1) throw ValidationError("cohort: group '" + name + "' must have size >= 1");
}

void CohortSpec::validate() const {
  if (groups.empty()) throw ValidationError("cohort: at least one group is required");
  if (n_steps < 1) throw ValidationError("cohort: n_steps must be >= 1");
  for (const auto& g : groups) g.validate();
}

std::vector<std::uint64_t> checkpoint_grid(std::uint64_t n_steps) {
  std::vector<std::uint64_t> grid;
  for (std::uint64_t step = 1; step < n_steps; step *= 2) grid.push_back(step);
  grid.push_back(n_steps);
  return grid;
}

CohortResult run_cohort(const CohortSpec& spec, int n_threads) {
  spec.validate();

  CohortResult result;
  result.n_steps = spec.n_steps;
  result.master_seed = spec.master_seed;
  result.checkpoints = checkpoint_grid(spec.n_steps);
  const std::size_t n_checkpoints = result.checkpoints.size();

  result.groups.resize(spec.groups.size());
  std::vector<std::vector<BlockTotals>> totals(spec.groups.size());
  std::vector<BlockJob> jobs;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const auto& gspec = spec.groups[g];
    auto& gres = result.groups[g];
    gres.name = gspec.name;
    gres.endpoints.resize(gspec.size);
    if (spec.record_full_paths) gres.paths.resize(gspec.size);
    const std::size_t n_blocks = (gspec.size + kBlockSize - 1) / kBlockSize;
    totals[g].resize(n_blocks);
    for (auto& t : totals[g]) {
      t.sum.assign(n_checkpoints, 0.0);
      t.sumsq.assign(n_checkpoints, 0.0);
    }
    for (std::size_t blk = 0; blk < n_blocks; ++blk) {
      const std::uint64_t begin = blk * kBlockSize;
      jobs.push_back({g, begin, std::min<std::uint64_t>(begin + kBlockSize, gspec.size), blk});
    }
  }

  const auto run_block = [&](const BlockJob& job) {
    const auto& gspec = spec.groups[job.group];
    auto& gres = result.groups[job.group];
    auto& block = totals[job.group][job.slot];
    CheckpointAccumulator acc;
    acc.checkpoints = &result.checkpoints;
    acc.sum = block.sum.data();
    acc.sumsq = block.sumsq.data();
    process::TrajectoryParams params{gspec.urn, gspec.bias, spec.n_steps, 0};
    for (std::uint64_t j = job.member_begin; j < job.member_end; ++j) {
      params.seed = derive_seed(spec.master_seed, job.group, j);
      if (spec.record_full_paths) {
        gres.paths[j] = process::simulate_trajectory(params);
        const auto& path = gres.paths[j];
        acc.on_start(path.probabilities.front());
        for (std::size_t i = 0; i + 1 < path.probabilities.size(); ++i) {
          acc.on_decision(i + 1, path.outcomes[i], path.probabilities[i + 1]);
        }
        acc.on_finish(path.out_of_regime);
      } else {
        process::walk_trajectory(params, acc);
      }
      gres.endpoints[j] = acc.endpoint;
      if (acc.flagged) ++block.flagged;
    }
  };

  unsigned thread_count = n_threads > 0 ? static_cast<unsigned>(n_threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  thread_count = std::min<std::size_t>(thread_count, jobs.size());
  if (thread_count <= 1) {
    for (const auto& job : jobs) run_block(job);
  } else {
    std::atomic<std::size_t> next_job{0};
    std::vector<std::thread> workers;
    workers.reserve(thread_count);
    for (unsigned t = 0; t < thread_count; ++t) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t idx = next_job.fetch_add(1, std::memory_order_relaxed);
          if (idx >= jobs.size()) return;
          run_block(jobs[idx]);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  // Ordered reduction over blocks, then moment finishing.
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    auto& gres = result.groups[g];
    const double m = static_cast<double>(spec.groups[g].size);
    std::vector<double> sum(n_checkpoints, 0.0);
    std::vector<double> sumsq(n_checkpoints, 0.0);
    for (const auto& block : totals[g]) {
      gres.out_of_regime_count += block.flagged;
      for (std::size_t c = 0; c < n_checkpoints; ++c) {
        sum[c] += block.sum[c];
        sumsq[c] += block.sumsq[c];
      }
    }
    gres.checkpoint_mean.resize(n_checkpoints);
    gres.checkpoint_se.resize(n_checkpoints);
    for (std::size_t c = 0; c < n_checkpoints; ++c) {
      const double mean = sum[c] / m;
      gres.checkpoint_mean[c] = mean;
      if (spec.groups[g].size >= 2) {
        const double var = std::max(0.0, (sumsq[c] - m * mean * mean) / (m - 1.0));
        gres.checkpoint_se[c] = std::sqrt(var / m);
      } else {
        gres.checkpoint_se[c] = 0.0;
      }
    }
  }
  return result;
}

ExtremeMass extreme_mass_of(std::span<const double> endpoints, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ValidationError("extreme_mass: epsilon must lie in (0, 0.5)");
  }
  if (endpoints.empty()) throw ValidationError("extreme_mass: no endpoints");
  ExtremeMass em;
  for (const double p : endpoints) {
    if (p < epsilon) em.low += 1.0;
    if (p > 1.0 - epsilon) em.high += 1.0;
  }
  const double m = static_cast<double>(endpoints.size());
  em.low /= m;
  em.high /= m;
  return em;
}

std::vector<ExtremeMass> extreme_mass(const CohortResult& result, double epsilon) {
  std::vector<ExtremeMass> out;
  out.reserve(result.groups.size());
  for (const auto& g : result.groups) out.push_back(extreme_mass_of(g.endpoints, epsilon));
  return out;
}

std::vector<double> endpoint_histogram(std::span<const double> endpoints, std::size_t bins) {
  if (bins < 1) throw ValidationError("histogram: needs at least one bin");
  if (endpoints.empty()) throw ValidationError("histogram: no endpoints");
  std::vector<double> masses(bins, 0.0);
  for (const double p : endpoints) {
    const double clamped = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
    std::size_t bin = static_cast<std::size_t>(clamped * static_cast<double>(bins));
    if (bin >= bins) bin = bins - 1;
    masses[bin] += 1.0;
  }
  for (double& mass : masses) mass /= static_cast<double>(endpoints.size());
  return masses;
}

DisparityReport disparity_metrics(const CohortResult& result, double epsilon,
                                  std::size_t histogram_bins) {
  if (result.groups.empty()) throw ValidationError("disparity_metrics: empty cohort result");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ValidationError("disparity_metrics: epsilon must lie in (0, 0.5)");
  }
  if (histogram_bins < 1) {
    throw ValidationError("disparity_metrics: histogram needs at least one bin");
  }

  DisparityReport report;
  report.checkpoints = result.checkpoints;
  report.epsilon = epsilon;
  report.histogram_bins = histogram_bins;

  const auto extremes = extreme_mass(result, epsilon);
  for (std::size_t g = 0; g < result.groups.size(); ++g) {
    const auto& gres = result.groups[g];
    DisparityReport::Group group;
    group.name = gres.name;
    group.mean = gres.checkpoint_mean;
    group.se = gres.checkpoint_se;
    group.extremes = extremes[g];
    group.histogram = endpoint_histogram(gres.endpoints, histogram_bins);
    report.groups.push_back(std::move(group));
  }

  for (std::size_t a = 0; a < result.groups.size(); ++a) {
    for (std::size_t b = a + 1; b < result.groups.size(); ++b) {
      DisparityReport::Gap gap;
      gap.group_a = a;
      gap.group_b = b;
      const std::size_t n_checkpoints = result.checkpoints.size();
      gap.difference.resize(n_checkpoints);
      gap.combined_se.resize(n_checkpoints);
      for (std::size_t c = 0; c < n_checkpoints; ++c) {
        gap.difference[c] =
            result.groups[a].checkpoint_mean[c] - result.groups[b].checkpoint_mean[c];
        gap.combined_se[c] =
            std::hypot(result.groups[a].checkpoint_se[c], result.groups[b].checkpoint_se[c]);
      }
      report.gaps.push_back(std::move(gap));
    }
  }
  return report;
}

}  // namespace rdl::cohort
