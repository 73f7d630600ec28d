#pragma once

#include <initializer_list>
#include <string_view>
#include <vector>

#include "udpart/fraction.hpp"
#include "udpart/partition.hpp"

namespace testing {

inline udpart::Fraction F(std::string_view s) { return udpart::Fraction::parse(s); }

inline std::vector<udpart::Fraction> Fs(std::initializer_list<std::string_view> xs) {
  std::vector<udpart::Fraction> out;
  for (auto x : xs) out.push_back(F(x));
  return out;
}

inline udpart::Partition P(std::initializer_list<std::string_view> breakpoints) {
  return udpart::Partition(Fs(breakpoints));
}

inline udpart::Partition L(std::initializer_list<std::string_view> lengths) {
  auto ls = Fs(lengths);
  return udpart::Partition::from_lengths(ls);
}

}  // namespace testing
