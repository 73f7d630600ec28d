#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "udpart/fraction.hpp"
#include "udpart/partition.hpp"

namespace udpart {

// Constructive rearrangement of a dense sequence of partitions into a
// uniformly distributed one.
//
// For a partition with diameter <= 4^{-s}, stage 1 sorts all intervals by
// increasing length and rotates the leftmost interval to the right end until
// the number of right endpoints in ]0,1/2] is within one unit of k/2. Stage t
// (2 <= t <= s) freezes the intervals straddling the odd dyadic points of level
// t-1 and repeats the sort-and-rotate balance independently inside every gap
// between frozen intervals, targeting the gap's share of the level-t cell on
// its left. Nothing ever crosses a cell boundary of a coarser level, so counts
// established by earlier stages survive.

/// Thrown when a stream is not dense enough to compute any depth threshold.
class NonDenseError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Working state: interval lengths in slot order, the source index of every
/// slot, and the frozen (straddler) slots.
struct Arrangement {
  std::vector<Fraction> layout;
  std::vector<std::size_t> origin;
  std::vector<bool> frozen;
  unsigned stage = 0;

  static Arrangement from_partition(const Partition& p);
  [[nodiscard]] std::size_t size() const { return layout.size(); }
  /// Prefix sums: positions()[i] is the left end of slot i, positions()[k] = 1.
  [[nodiscard]] std::vector<Fraction> positions() const;
  [[nodiscard]] Partition partition() const;
  [[nodiscard]] IndexPermutation permutation() const { return IndexPermutation(origin); }
};

/// Contiguous run of non-frozen slots [begin, end) covering [lower, upper],
/// balanced around `split` with target ratio alpha = (split - lower) / (upper - lower).
struct Region {
  Fraction lower;
  Fraction upper;
  std::size_t begin = 0;
  std::size_t end = 0;
  Fraction split;
  Fraction alpha;

  /// Whole-interval region used by stage 1: [0,1] split at 1/2.
  static Region full(const Arrangement& a);
  /// Builds a region over slots [begin, end) of `a` with the given split point.
  static Region over(const Arrangement& a, std::size_t begin, std::size_t end, Fraction split);
  [[nodiscard]] std::size_t members() const { return end - begin; }
};

enum class Direction { right, left };

/// Sorts the region's members by non-decreasing length, ties by origin index.
Arrangement sort_ascending(Arrangement a, const Region& region);
void sort_ascending_in_place(Arrangement& a, const Region& region);

/// Right: the region's first member moves to its right end and the rest of the
/// block slides left. Left is the mirror image.
Arrangement shift_first_to_end(Arrangement a, const Region& region, Direction direction);

/// Member right endpoints lying in ]lower, split].
std::size_t left_count(const Arrangement& a, const Region& region);

struct BalanceRecord {
  std::size_t members = 0;
  std::size_t initial_count = 0;
  std::size_t final_count = 0;
  std::size_t moves = 0;
  Direction direction = Direction::right;
  /// Count change of every move, in order.
  std::vector<int> deltas;
};

/// Rotates sorted members until the left count lies in [m*alpha - 1, m*alpha + 1].
/// At most m - 1 moves; failing that throws InvariantViolation.
Arrangement balance_region(Arrangement a, const Region& region, BalanceRecord* record = nullptr);
BalanceRecord balance_region_in_place(Arrangement& a, const Region& region);

struct StraddlerRecord {
  Fraction point;
  std::size_t slot = 0;
  Fraction delta;        // point - left end
  Fraction delta_tilde;  // right end - point, > 0
};

struct RegionRecord {
  std::uint64_t cell = 0;  // parent cell h at level t-1 (1 for stage 1)
  Fraction lower;
  Fraction upper;
  Fraction split;
  Fraction alpha;        // share of the left child cell
  Fraction alpha_right;  // share of the right child cell
  BalanceRecord balance;
  bool skipped = false;  // no non-frozen members
};

struct StageRecord {
  unsigned t = 0;
  std::vector<StraddlerRecord> straddlers;
  std::vector<RegionRecord> regions;
  /// Endpoint counts per level-t cell after this stage.
  std::vector<std::size_t> counts;
  /// Closed interval every realized coefficient must lie in.
  Fraction coefficient_lower;
  Fraction coefficient_upper;
  bool coefficients_ok = true;
  bool count_bounds_ok = true;
  bool levels_preserved = true;
};

struct StageTrace {
  unsigned s = 0;
  std::size_t k = 0;
  std::vector<StageRecord> stages;
  /// final_deviation[t-1] = max_h |sigma(I_h^t) - 2^{-t}|.
  std::vector<Fraction> final_deviation;
  std::vector<Fraction> bounds;
  bool stage_one_ok = true;
  bool bounds_ok = true;

  [[nodiscard]] bool all_ok() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Stage 1 on the whole arrangement (sorted internally, idempotent on sorted input).
Arrangement stage_one(Arrangement a, std::size_t k, StageRecord* record = nullptr);

/// Stage t >= 2; requires stages 1..t-1 done and k >= 4^s.
Arrangement stage_t(Arrangement a, unsigned t, unsigned s, StageRecord* record = nullptr);

struct RearrangeResult {
  Partition sigma;
  IndexPermutation permutation;
  StageTrace trace;
};

/// sigma in p! with every level t <= s dyadic deviation within theoretical_bound(s, t).
/// Requires diameter(p) <= 4^{-s}.
RearrangeResult rearrange_one(const Partition& p, unsigned s);

/// n_s (1-based) for s = 1, 2, ...: least n with every diameter from n to the
/// horizon <= 4^{-s}, bumped to keep the list strictly increasing.
std::vector<std::size_t> select_thresholds(std::span<const Fraction> diams, std::size_t horizon);

struct RearrangedItem {
  std::size_t n = 0;
  unsigned depth = 0;  // 0: passthrough (n < n_1)
  Partition sigma;
  StageTrace trace;
};

struct RearrangedSequence {
  std::vector<std::size_t> thresholds;
  std::vector<RearrangedItem> items;
  [[nodiscard]] bool all_ok() const;
};

RearrangedSequence rearrange_sequence(std::span<const Partition> stream, std::size_t horizon);

/// B(s,t) = (2s-2)/4^s * Lbar_s + 4^{-s} + 2^{-t}[(4^s/(4^s-2^s))^s - 1],
/// Lbar_s = 2^{-s}(4^s/(4^s-2^s))^s. Exact.
Fraction theoretical_bound_exact(unsigned s, unsigned t);
double theoretical_bound(unsigned s, unsigned t);

/// Closed interval for the level-t proportionality coefficients at depth s.
std::pair<Fraction, Fraction> coefficient_interval(unsigned s, unsigned t);

}  // namespace udpart
