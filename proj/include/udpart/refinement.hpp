#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "udpart/fraction.hpp"
#include "udpart/partition.hpp"

namespace udpart {

// Incremental refinement engine.
//
// Intervals live in a singly linked list (positional order) and are grouped by
// exact length in an ordered map, so one step touches only the maximal group:
// cost is O(#split intervals * |template|) plus a logarithmic lookup. Kakutani
// sequences have few distinct lengths, which keeps the map small.
class RefinementEngine {
 public:
  explicit RefinementEngine(RefinementRule rule, const Partition& start = Partition::trivial());

  /// Applies one refinement step; returns the number of intervals split.
  std::size_t step();

  [[nodiscard]] std::size_t interval_count() const { return nodes_.size(); }
  [[nodiscard]] std::size_t steps_taken() const { return steps_; }
  [[nodiscard]] const Fraction& diameter() const { return by_length_.rbegin()->first; }
  [[nodiscard]] std::size_t distinct_lengths() const { return by_length_.size(); }
  [[nodiscard]] const RefinementRule& rule() const { return rule_; }

  /// Reconstructs the current partition, O(k).
  [[nodiscard]] Partition partition() const;

 private:
  static constexpr std::uint32_t kNone = UINT32_MAX;

  struct Node {
    Fraction left;
    Fraction length;
    std::uint32_t next = kNone;
  };

  RefinementRule rule_;
  std::vector<Node> nodes_;
  std::uint32_t head_ = 0;
  std::map<Fraction, std::vector<std::uint32_t>> by_length_;
  std::size_t steps_ = 0;
};

}  // namespace udpart
