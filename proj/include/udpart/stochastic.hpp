#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "udpart/fraction.hpp"
#include "udpart/partition.hpp"

namespace udpart {

/// Reproducible random stream identified by (seed, stream id).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Its 64-bit seed is derived as
///   splitmix64(splitmix64(seed) ^ (stream * 0x9E3779B97F4A7C15 + 0xD1B54A32D192ED03)).
/// Bounded draws use rejection sampling rather than std::uniform_int_distribution,
/// whose algorithm is implementation-defined, so draws match across platforms.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream() const { return stream_; }

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, bound); bound >= 1.
  std::uint64_t below(std::uint64_t bound);

  static std::uint64_t splitmix64(std::uint64_t x);
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// Uniform shuffle of k slots (Fisher-Yates).
IndexPermutation random_permutation(std::size_t k, SeededRng& rng);

/// Uniform draw from p!: a uniform slot shuffle induces the uniform law on the
/// distinct arrangements, since each one arises from the same number of slot
/// permutations.
Partition random_arrangement(const Partition& p, SeededRng& rng);

struct TrialTrajectory {
  std::size_t trial = 0;
  /// deviations[n-1][s-1] = ud_deviation(sigma_n, s).
  std::vector<std::vector<Fraction>> deviations;
};

TrialTrajectory conjecture_trial(std::span<const Partition> stream, SeededRng& rng, unsigned s_max,
                                 std::size_t trial_id = 0);

struct ExperimentConfig {
  std::size_t trials = 1;
  std::size_t horizon = 1;
  unsigned s_max = 1;
  std::uint64_t seed = 0;
  RefinementRule rule = RefinementRule::alpha(Fraction(1, 3));
  Fraction threshold = Fraction(1, 10);

  static ExperimentConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

struct LevelAggregate {
  Fraction median;
  Fraction max;
  double fraction_below = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialTrajectory> trajectories;
  /// summary[n-1][s-1].
  std::vector<std::vector<LevelAggregate>> summary;

  /// trial,n,s,deviation
  void write_trajectory_csv(std::ostream& os) const;
  [[nodiscard]] nlohmann::json aggregate_json() const;
};

/// Trial i draws from SeededRng(config.seed, i). Deterministic given the seed.
ExperimentReport conjecture_experiment(const ExperimentConfig& config);
/// Same, over a caller-supplied stream (first `horizon` partitions).
ExperimentReport conjecture_experiment(const ExperimentConfig& config, std::span<const Partition> stream);

inline constexpr unsigned kDefaultArakiBits = 64;

/// Next point of the random largest-gap splitting: uniform among the multiples
/// of 2^-bits strictly inside a largest gap of {0} u points u {1}; tied largest
/// gaps are chosen uniformly (left to right order). `points` sorted, distinct,
/// inside ]0,1[.
Fraction araki_step(std::span<const Fraction> points, SeededRng& rng, unsigned bits = kDefaultArakiBits);

struct ArakiResult {
  /// In insertion order.
  std::vector<Fraction> points;
  /// discrepancy[i] = star discrepancy of the first i+1 points.
  std::vector<Fraction> discrepancy;
};

/// n iterations of araki_step (same draws), with the star discrepancy after
/// every step. Runs on integer grid coordinates internally.
ArakiResult araki_process(std::size_t n, SeededRng& rng, unsigned bits = kDefaultArakiBits);

}  // namespace udpart
