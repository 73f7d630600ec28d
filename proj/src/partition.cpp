#include "udpart/partition.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "udpart/refinement.hpp"

namespace udpart {

namespace {

void validate_breakpoints(const std::vector<Fraction>& b) {
  if (b.size() < 2) throw PreconditionError("partition needs at least two breakpoints");
  if (!b.front().is_zero()) throw PreconditionError("first breakpoint must be 0, got " + b.front().str());
  if (b.back() != Fraction(1)) throw PreconditionError("last breakpoint must be 1, got " + b.back().str());
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (!(b[i - 1] < b[i])) {
      throw PreconditionError("breakpoints must be strictly increasing: " + b[i - 1].str() + " then " +
                              b[i].str());
    }
  }
}

}  // namespace

Partition::Partition() : breakpoints_{Fraction(0), Fraction(1)} {}

Partition::Partition(std::vector<Fraction> breakpoints) : breakpoints_(std::move(breakpoints)) {
  validate_breakpoints(breakpoints_);
}

Partition Partition::equal(std::size_t k) {
  if (k == 0) throw PreconditionError("equal partition needs k >= 1");
  std::vector<Fraction> b;
  b.reserve(k + 1);
  for (std::size_t i = 0; i <= k; ++i) b.emplace_back(BigInt(static_cast<unsigned long>(i)), BigInt(static_cast<unsigned long>(k)));
  return Partition(std::move(b), Trusted{});
}

Partition Partition::from_lengths(std::span<const Fraction> lengths) {
  std::vector<Fraction> b;
  b.reserve(lengths.size() + 1);
  b.emplace_back(0);
  Fraction acc;
  for (const auto& l : lengths) {
    if (l.sign() <= 0) throw PreconditionError("interval length must be positive, got " + l.str());
    acc += l;
    b.push_back(acc);
  }
  if (acc != Fraction(1)) throw PreconditionError("lengths must sum to 1, got " + acc.str());
  return Partition(std::move(b), Trusted{});
}

std::vector<Fraction> Partition::lengths() const {
  std::vector<Fraction> out;
  out.reserve(interval_count());
  for (std::size_t i = 0; i < interval_count(); ++i) out.push_back(length(i));
  return out;
}

std::size_t Partition::max_denominator_bits() const {
  std::size_t bits = 0;
  for (const auto& t : breakpoints_) bits = std::max(bits, t.denominator_bits());
  return bits;
}

Partition make_partition(std::vector<Fraction> breakpoints) { return Partition(std::move(breakpoints)); }

Fraction diameter(const Partition& p) {
  Fraction best = p.length(0);
  for (std::size_t i = 1; i < p.interval_count(); ++i) {
    Fraction l = p.length(i);
    if (l > best) best = std::move(l);
  }
  return best;
}

IndexPermutation::IndexPermutation(std::vector<std::size_t> images) : images_(std::move(images)) {
  std::vector<bool> seen(images_.size(), false);
  for (std::size_t i : images_) {
    if (i >= images_.size() || seen[i]) throw PreconditionError("not a permutation of 0..k-1");
    seen[i] = true;
  }
}

IndexPermutation IndexPermutation::identity(std::size_t k) {
  std::vector<std::size_t> v(k);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return IndexPermutation(std::move(v));
}

IndexPermutation IndexPermutation::from_one_based(std::span<const std::size_t> images) {
  std::vector<std::size_t> v;
  v.reserve(images.size());
  for (std::size_t i : images) {
    if (i == 0) throw PreconditionError("one-based permutation contains 0");
    v.push_back(i - 1);
  }
  return IndexPermutation(std::move(v));
}

IndexPermutation IndexPermutation::inverse() const {
  std::vector<std::size_t> inv(images_.size());
  for (std::size_t h = 0; h < images_.size(); ++h) inv[images_[h]] = h;
  return IndexPermutation(std::move(inv));
}

Partition apply_permutation(const Partition& p, const IndexPermutation& perm) {
  if (perm.size() != p.interval_count()) {
    throw PreconditionError("permutation has " + std::to_string(perm.size()) + " entries, partition has " +
                            std::to_string(p.interval_count()) + " intervals");
  }
  std::vector<Fraction> lengths;
  lengths.reserve(perm.size());
  for (std::size_t h = 0; h < perm.size(); ++h) lengths.push_back(p.length(perm[h]));
  return Partition::from_lengths(lengths);
}

BigInt count_distinct_arrangements(const Partition& p) {
  std::map<Fraction, unsigned long> multiplicity;
  for (std::size_t i = 0; i < p.interval_count(); ++i) ++multiplicity[p.length(i)];
  BigInt result;
  mpz_fac_ui(result.get_mpz_t(), p.interval_count());
  for (const auto& [len, m] : multiplicity) {
    BigInt f;
    mpz_fac_ui(f.get_mpz_t(), m);
    result /= f;
  }
  return result;
}

RefinementRule::RefinementRule(std::variant<AlphaRule, RhoRule> v) : variant_(std::move(v)) {
  if (const auto* a = std::get_if<AlphaRule>(&variant_)) {
    ratios_ = {a->alpha, Fraction(1) - a->alpha};
  } else {
    ratios_ = std::get<RhoRule>(variant_).templ.lengths();
  }
}

RefinementRule RefinementRule::alpha(Fraction alpha) {
  if (alpha.sign() <= 0 || alpha >= Fraction(1)) {
    throw PreconditionError("alpha must lie in ]0,1[, got " + alpha.str());
  }
  return RefinementRule(AlphaRule{std::move(alpha)});
}

RefinementRule RefinementRule::rho(Partition templ) {
  if (templ.interval_count() < 2) throw PreconditionError("rho template needs at least two intervals");
  return RefinementRule(RhoRule{std::move(templ)});
}

std::string RefinementRule::describe() const {
  if (const auto* a = std::get_if<AlphaRule>(&variant_)) return "alpha(" + a->alpha.str() + ")";
  std::string out = "rho(";
  const auto& b = std::get<RhoRule>(variant_).templ.breakpoints();
  for (std::size_t i = 0; i < b.size(); ++i) out += (i ? "," : "") + b[i].str();
  return out + ")";
}

Partition refine(const Partition& p, const RefinementRule& rule) {
  const Fraction diam = diameter(p);
  const auto& ratios = rule.split_ratios();
  std::vector<Fraction> out;
  out.reserve(p.breakpoints().size() * 2);
  out.push_back(p.breakpoints().front());
  for (std::size_t i = 0; i < p.interval_count(); ++i) {
    const Fraction& left = p.breakpoints()[i];
    const Fraction len = p.length(i);
    if (len == diam) {
      Fraction cut = left;
      for (std::size_t j = 0; j + 1 < ratios.size(); ++j) {
        cut += ratios[j] * len;
        out.push_back(cut);
      }
    }
    out.push_back(p.breakpoints()[i + 1]);
  }
  return Partition(std::move(out));
}

Partition alpha_refine(const Partition& p, const Fraction& alpha) {
  return refine(p, RefinementRule::alpha(alpha));
}

Partition rho_refine(const Partition& p, const Partition& templ) {
  return refine(p, RefinementRule::rho(templ));
}

std::vector<Partition> refine_sequence(const RefinementRule& rule, std::size_t steps) {
  std::vector<Partition> out;
  out.reserve(steps);
  RefinementEngine engine(rule);
  for (std::size_t n = 0; n < steps; ++n) {
    engine.step();
    out.push_back(engine.partition());
  }
  return out;
}

}  // namespace udpart
