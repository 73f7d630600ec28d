#include "udpart/refinement.hpp"

namespace udpart {

RefinementEngine::RefinementEngine(RefinementRule rule, const Partition& start) : rule_(std::move(rule)) {
  const std::size_t k = start.interval_count();
  nodes_.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto id = static_cast<std::uint32_t>(i);
    nodes_.push_back(Node{start.breakpoints()[i], start.length(i), i + 1 < k ? id + 1 : kNone});
    by_length_[nodes_.back().length].push_back(id);
  }
}

std::size_t RefinementEngine::step() {
  auto top = std::prev(by_length_.end());
  const Fraction len = top->first;
  std::vector<std::uint32_t> ids = std::move(top->second);
  by_length_.erase(top);

  const auto& ratios = rule_.split_ratios();
  std::vector<Fraction> pieces;
  pieces.reserve(ratios.size());
  for (const auto& r : ratios) pieces.push_back(r * len);

  for (std::uint32_t id : ids) {
    // The node keeps the first piece; the rest are spliced in after it.
    Fraction left = nodes_[id].left + pieces[0];
    std::uint32_t prev = id;
    const std::uint32_t tail = nodes_[id].next;
    nodes_[id].length = pieces[0];
    by_length_[pieces[0]].push_back(id);
    for (std::size_t j = 1; j < pieces.size(); ++j) {
      const auto fresh = static_cast<std::uint32_t>(nodes_.size());
      nodes_.push_back(Node{left, pieces[j], tail});
      nodes_[prev].next = fresh;
      by_length_[pieces[j]].push_back(fresh);
      left += pieces[j];
      prev = fresh;
    }
  }
  ++steps_;
  return ids.size();
}

Partition RefinementEngine::partition() const {
  std::vector<Fraction> breakpoints;
  breakpoints.reserve(nodes_.size() + 1);
  for (std::uint32_t id = head_; id != kNone; id = nodes_[id].next) breakpoints.push_back(nodes_[id].left);
  breakpoints.emplace_back(1);
  return Partition(std::move(breakpoints), Partition::Trusted{});
}

}  // namespace udpart
