#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "udpart/fraction.hpp"

namespace udpart {

class RefinementEngine;

/// Raised when a value violates a documented precondition (bad breakpoints,
/// alpha outside ]0,1[, mismatched permutation length, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an algorithmic invariant fails. Always a bug or a misread edge
/// case; never swallowed.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Partition of [0,1] by breakpoints 0 = t_0 < t_1 < ... < t_k = 1.
class Partition {
 public:
  /// The trivial partition {[0,1]}.
  Partition();
  /// Validates the breakpoints; throws PreconditionError.
  explicit Partition(std::vector<Fraction> breakpoints);

  [[nodiscard]] static Partition trivial() { return {}; }
  /// k equal intervals.
  [[nodiscard]] static Partition equal(std::size_t k);
  /// Builds the partition whose interval lengths are `lengths` in order.
  /// Lengths must be positive and sum to exactly one.
  [[nodiscard]] static Partition from_lengths(std::span<const Fraction> lengths);

  [[nodiscard]] const std::vector<Fraction>& breakpoints() const { return breakpoints_; }
  [[nodiscard]] std::size_t interval_count() const { return breakpoints_.size() - 1; }
  /// Right endpoints t_1..t_k, the points carried by the partition's measure.
  [[nodiscard]] std::span<const Fraction> endpoints() const {
    return std::span<const Fraction>(breakpoints_).subspan(1);
  }
  [[nodiscard]] Fraction length(std::size_t i) const { return breakpoints_[i + 1] - breakpoints_[i]; }
  [[nodiscard]] std::vector<Fraction> lengths() const;
  [[nodiscard]] std::size_t max_denominator_bits() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  friend class RefinementEngine;
  struct Trusted {};
  Partition(std::vector<Fraction> breakpoints, Trusted) : breakpoints_(std::move(breakpoints)) {}

  std::vector<Fraction> breakpoints_;
};

Partition make_partition(std::vector<Fraction> breakpoints);

/// Maximal interval length.
Fraction diameter(const Partition& p);

/// Bijection on interval slots, stored 0-based: images()[h] is the source
/// interval placed at slot h.
class IndexPermutation {
 public:
  explicit IndexPermutation(std::vector<std::size_t> images);
  [[nodiscard]] static IndexPermutation identity(std::size_t k);
  /// Builds from 1-based images, as written in the literature.
  [[nodiscard]] static IndexPermutation from_one_based(std::span<const std::size_t> images);

  [[nodiscard]] std::size_t size() const { return images_.size(); }
  [[nodiscard]] std::size_t operator[](std::size_t h) const { return images_[h]; }
  [[nodiscard]] const std::vector<std::size_t>& images() const { return images_; }
  [[nodiscard]] IndexPermutation inverse() const;

  friend bool operator==(const IndexPermutation&, const IndexPermutation&) = default;

 private:
  std::vector<std::size_t> images_;
};

/// The h-th interval of the result has the length of p's images[h]-th interval.
Partition apply_permutation(const Partition& p, const IndexPermutation& perm);

/// |p!|: k! over the product of factorials of length multiplicities.
BigInt count_distinct_arrangements(const Partition& p);

struct AlphaRule {
  Fraction alpha;
};

struct RhoRule {
  Partition templ;
};

/// Refinement rule: Alpha(alpha) with 0 < alpha < 1, or Rho(template) with at
/// least two template intervals.
class RefinementRule {
 public:
  [[nodiscard]] static RefinementRule alpha(Fraction alpha);
  [[nodiscard]] static RefinementRule rho(Partition templ);

  [[nodiscard]] bool is_alpha() const { return std::holds_alternative<AlphaRule>(variant_); }
  [[nodiscard]] const std::variant<AlphaRule, RhoRule>& variant() const { return variant_; }
  /// Relative lengths each maximal interval is cut into, left to right.
  [[nodiscard]] const std::vector<Fraction>& split_ratios() const { return ratios_; }
  [[nodiscard]] std::string describe() const;

 private:
  explicit RefinementRule(std::variant<AlphaRule, RhoRule> v);

  std::variant<AlphaRule, RhoRule> variant_;
  std::vector<Fraction> ratios_;
};

/// Splits every maximal interval in proportion alpha : (1 - alpha). Ties are
/// decided exactly, so all tied maxima split together.
Partition alpha_refine(const Partition& p, const Fraction& alpha);

/// Splits every maximal interval by the affinely rescaled template.
Partition rho_refine(const Partition& p, const Partition& templ);

Partition refine(const Partition& p, const RefinementRule& rule);

/// rule^1 omega, ..., rule^steps omega.
std::vector<Partition> refine_sequence(const RefinementRule& rule, std::size_t steps);

}  // namespace udpart
