#include "udpart/rearrange.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "udpart/diagnostics.hpp"
#include "udpart/parallel.hpp"

namespace udpart {

namespace {

Fraction four_pow_neg(unsigned s) { return Fraction::inverse_power_of_two(2 * s); }

Fraction dyadic_point(std::uint64_t numerator, unsigned level) {
  return Fraction(BigInt(static_cast<unsigned long>(numerator)), BigInt(1) << level);
}

std::string where(const Region& r) { return "region [" + r.lower.str() + ", " + r.upper.str() + "]"; }

}  // namespace

Arrangement Arrangement::from_partition(const Partition& p) {
  Arrangement a;
  a.layout = p.lengths();
  a.origin.resize(a.layout.size());
  std::iota(a.origin.begin(), a.origin.end(), std::size_t{0});
  a.frozen.assign(a.layout.size(), false);
  return a;
}

std::vector<Fraction> Arrangement::positions() const {
  std::vector<Fraction> pos;
  pos.reserve(layout.size() + 1);
  pos.emplace_back(0);
  for (const auto& l : layout) pos.push_back(pos.back() + l);
  return pos;
}

Partition Arrangement::partition() const { return Partition::from_lengths(layout); }

Region Region::full(const Arrangement& a) { return over(a, 0, a.size(), Fraction(1, 2)); }

Region Region::over(const Arrangement& a, std::size_t begin, std::size_t end, Fraction split) {
  if (begin >= end || end > a.size()) throw PreconditionError("region needs a non-empty slot range");
  Region r;
  r.begin = begin;
  r.end = end;
  for (std::size_t i = 0; i < begin; ++i) r.lower += a.layout[i];
  r.upper = r.lower;
  for (std::size_t i = begin; i < end; ++i) {
    if (a.frozen[i]) throw PreconditionError("region contains a frozen slot");
    r.upper += a.layout[i];
  }
  if (!(r.lower < split && split < r.upper)) {
    throw PreconditionError("split point " + split.str() + " outside " + where(r));
  }
  r.alpha = (split - r.lower) / (r.upper - r.lower);
  r.split = std::move(split);
  return r;
}

void sort_ascending_in_place(Arrangement& a, const Region& region) {
  std::vector<std::size_t> idx(region.members());
  std::iota(idx.begin(), idx.end(), region.begin);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    const auto c = a.layout[x] <=> a.layout[y];
    if (c != 0) return c < 0;
    return a.origin[x] < a.origin[y];
  });
  std::vector<Fraction> layout;
  std::vector<std::size_t> origin;
  layout.reserve(idx.size());
  origin.reserve(idx.size());
  for (std::size_t i : idx) {
    layout.push_back(std::move(a.layout[i]));
    origin.push_back(a.origin[i]);
  }
  std::move(layout.begin(), layout.end(), a.layout.begin() + static_cast<std::ptrdiff_t>(region.begin));
  std::copy(origin.begin(), origin.end(), a.origin.begin() + static_cast<std::ptrdiff_t>(region.begin));
}

Arrangement sort_ascending(Arrangement a, const Region& region) {
  sort_ascending_in_place(a, region);
  return a;
}

namespace {

void rotate_slots(Arrangement& a, const Region& region, std::size_t new_first) {
  const auto b = static_cast<std::ptrdiff_t>(region.begin);
  const auto e = static_cast<std::ptrdiff_t>(region.end);
  const auto q = static_cast<std::ptrdiff_t>(new_first);
  std::rotate(a.layout.begin() + b, a.layout.begin() + b + q, a.layout.begin() + e);
  std::rotate(a.origin.begin() + b, a.origin.begin() + b + q, a.origin.begin() + e);
}

// Left counts of every rotation of a region, from prefix sums of its members.
// Rotation q puts member q first: members q..m-1 then 0..q-1.
class RotationCounter {
 public:
  RotationCounter(const Arrangement& a, const Region& region) {
    prefix_.reserve(region.members() + 1);
    prefix_.emplace_back(0);
    for (std::size_t i = region.begin; i < region.end; ++i) prefix_.push_back(prefix_.back() + a.layout[i]);
    cut_ = region.split - region.lower;
  }

  [[nodiscard]] std::size_t count(std::size_t q) const {
    const std::size_t m = prefix_.size() - 1;
    // Unmoved members end at prefix_[j] - prefix_[q], j in (q, m].
    const auto first = prefix_.begin() + static_cast<std::ptrdiff_t>(q + 1);
    const Fraction bound = prefix_[q] + cut_;
    std::size_t c = static_cast<std::size_t>(std::upper_bound(first, prefix_.end(), bound) - first);
    if (q > 0) {
      // Moved members end at (prefix_[m] - prefix_[q]) + prefix_[j], j in [1, q].
      const Fraction rest = cut_ - (prefix_[m] - prefix_[q]);
      const auto lo = prefix_.begin() + 1;
      const auto hi = prefix_.begin() + static_cast<std::ptrdiff_t>(q + 1);
      c += static_cast<std::size_t>(std::upper_bound(lo, hi, rest) - lo);
    }
    return c;
  }

 private:
  std::vector<Fraction> prefix_;
  Fraction cut_;
};

}  // namespace

Arrangement shift_first_to_end(Arrangement a, const Region& region, Direction direction) {
  if (region.members() < 2) throw PreconditionError("shift needs at least two members in " + where(region));
  for (std::size_t i = region.begin; i < region.end; ++i) {
    if (a.frozen[i]) throw PreconditionError("shift over a frozen slot in " + where(region));
  }
  rotate_slots(a, region, direction == Direction::right ? 1 : region.members() - 1);
  return a;
}

std::size_t left_count(const Arrangement& a, const Region& region) {
  Fraction end = region.lower;
  std::size_t c = 0;
  for (std::size_t i = region.begin; i < region.end; ++i) {
    end += a.layout[i];
    if (end <= region.split) ++c;
  }
  return c;
}

BalanceRecord balance_region_in_place(Arrangement& a, const Region& region) {
  const std::size_t m = region.members();
  for (std::size_t i = region.begin; i + 1 < region.end; ++i) {
    if (a.layout[i + 1] < a.layout[i]) throw PreconditionError("balance needs ascending members in " + where(region));
  }
  const Fraction target = Fraction(static_cast<long>(m)) * region.alpha;
  const Fraction band_lo = target - Fraction(1);
  const Fraction band_hi = target + Fraction(1);
  auto in_band = [&](std::size_t c) {
    const Fraction cf(static_cast<long>(c));
    return band_lo <= cf && cf <= band_hi;
  };

  BalanceRecord rec;
  rec.members = m;
  const RotationCounter counter(a, region);
  std::size_t count = counter.count(0);
  rec.initial_count = count;
  if (in_band(count) || m == 1) {
    rec.final_count = count;
    return rec;
  }
  rec.direction = Fraction(static_cast<long>(count)) > band_hi ? Direction::right : Direction::left;
  const int allowed = rec.direction == Direction::right ? -1 : 1;
  std::size_t q = 0;
  while (!in_band(count)) {
    if (rec.moves + 1 >= m) {
      throw InvariantViolation("balance did not reach the band within " + std::to_string(m - 1) + " moves in " +
                               where(region));
    }
    q = rec.direction == Direction::right ? q + 1 : (q == 0 ? m - 1 : q - 1);
    const std::size_t next = counter.count(q);
    const int delta = static_cast<int>(next) - static_cast<int>(count);
    if (delta != 0 && delta != allowed) {
      throw InvariantViolation("move changed the left count by " + std::to_string(delta) + " in " + where(region));
    }
    rec.deltas.push_back(delta);
    ++rec.moves;
    count = next;
  }
  rotate_slots(a, region, q);
  rec.final_count = count;
  return rec;
}

Arrangement balance_region(Arrangement a, const Region& region, BalanceRecord* record) {
  BalanceRecord rec = balance_region_in_place(a, region);
  if (record) *record = std::move(rec);
  return a;
}

std::pair<Fraction, Fraction> coefficient_interval(unsigned s, unsigned t) {
  if (t < 1 || t > s) throw PreconditionError("coefficient interval needs 1 <= t <= s");
  const Fraction q = four_pow_neg(s);
  const Fraction cell = Fraction::inverse_power_of_two(t);
  const Fraction parent = Fraction::inverse_power_of_two(t - 1);
  return {(cell - q) / parent, cell / (parent - Fraction(2) * q)};
}

namespace {

void check_coefficients(StageRecord& rec, unsigned s) {
  auto [lo, hi] = coefficient_interval(s, rec.t);
  rec.coefficient_lower = lo;
  rec.coefficient_upper = hi;
  for (const auto& r : rec.regions) {
    if (r.skipped) continue;
    for (const Fraction* c : {&r.alpha, &r.alpha_right}) {
      if (*c < lo || *c > hi) rec.coefficients_ok = false;
    }
  }
}

}  // namespace

Arrangement stage_one(Arrangement a, std::size_t k, StageRecord* record) {
  if (a.stage != 0) throw PreconditionError("stage 1 needs a fresh arrangement");
  if (k != a.size()) throw PreconditionError("stage 1: k does not match the arrangement");
  const Region region = Region::full(a);
  sort_ascending_in_place(a, region);
  StageRecord rec;
  rec.t = 1;
  RegionRecord rr;
  rr.cell = 1;
  rr.lower = region.lower;
  rr.upper = region.upper;
  rr.split = region.split;
  rr.alpha = region.alpha;
  rr.alpha_right = Fraction(1) - region.alpha;
  rr.balance = balance_region_in_place(a, region);
  rec.regions.push_back(std::move(rr));
  rec.counts = dyadic_counts(a.partition(), 1);
  // Band on the left half: k/2 - 1 <= c <= k/2 + 1.
  const auto c2 = static_cast<long long>(2 * rec.counts[0]);
  const auto kk = static_cast<long long>(k);
  rec.count_bounds_ok = kk - 2 <= c2 && c2 <= kk + 2;
  a.stage = 1;
  if (record) *record = std::move(rec);
  return a;
}

namespace {

// Slot whose half-open interval [left, right[ contains x.
std::size_t containing_slot(const std::vector<Fraction>& pos, const Fraction& x) {
  const auto it = std::upper_bound(pos.begin() + 1, pos.end(), x);
  return static_cast<std::size_t>(it - pos.begin()) - 1;
}

}  // namespace

Arrangement stage_t(Arrangement a, unsigned t, unsigned s, StageRecord* record) {
  if (t < 2 || t > s) throw PreconditionError("stage t needs 2 <= t <= s");
  if (a.stage != t - 1) throw PreconditionError("stage " + std::to_string(t) + " needs stage " + std::to_string(t - 1));
  if (s >= 32 || a.size() < (std::size_t{1} << (2 * s))) {
    throw PreconditionError("stage t needs k >= 4^s");
  }
  const std::size_t k = a.size();
  const Fraction max_straddler = four_pow_neg(s);
  StageRecord rec;
  rec.t = t;

  const unsigned parent_level = t - 1;
  const std::uint64_t parents = std::uint64_t{1} << parent_level;
  const auto before = dyadic_counts(a.partition(), parent_level);

  std::vector<Fraction> pos = a.positions();
  // Freeze the intervals straddling the odd points of level t-1.
  for (std::uint64_t j = 1; j < parents; j += 2) {
    Fraction x = dyadic_point(j, parent_level);
    const std::size_t slot = containing_slot(pos, x);
    if (a.frozen[slot]) throw InvariantViolation("straddler at " + x.str() + " is already frozen");
    if (a.layout[slot] > max_straddler) throw InvariantViolation("straddler at " + x.str() + " longer than 4^-s");
    a.frozen[slot] = true;
    StraddlerRecord sr;
    sr.slot = slot;
    sr.delta = x - pos[slot];
    sr.delta_tilde = pos[slot + 1] - x;
    sr.point = std::move(x);
    rec.straddlers.push_back(std::move(sr));
  }

  // Every parent cell is bounded by the straddlers of its two endpoints.
  for (std::uint64_t h = 1; h <= parents; ++h) {
    const std::size_t begin = h == 1 ? 0 : containing_slot(pos, dyadic_point(h - 1, parent_level)) + 1;
    const std::size_t end = h == parents ? k : containing_slot(pos, dyadic_point(h, parent_level));
    RegionRecord rr;
    rr.cell = h;
    rr.split = dyadic_point(2 * h - 1, t);
    if (begin >= end) {
      rr.skipped = true;
      rr.lower = rr.upper = pos[begin];
      rec.regions.push_back(std::move(rr));
      continue;
    }
    const Region region = Region::over(a, begin, end, rr.split);
    sort_ascending_in_place(a, region);
    rr.lower = region.lower;
    rr.upper = region.upper;
    rr.alpha = region.alpha;
    rr.alpha_right = Fraction(1) - region.alpha;
    rr.balance = balance_region_in_place(a, region);
    rec.regions.push_back(std::move(rr));
  }

  const Partition now = a.partition();
  rec.counts = dyadic_counts(now, t);
  // Level t-1 counts and all coarser ones follow from this one.
  rec.levels_preserved = dyadic_counts(now, parent_level) == before;

  // Per child cell: (N - 1) rho - 1 <= count <= N rho + 1, plus one unit of
  // (1 - alpha) on a left child whose parent carries a straddler endpoint.
  for (std::uint64_t h = 1; h <= parents; ++h) {
    const auto& rr = rec.regions[h - 1];
    if (rr.skipped) continue;
    const Fraction n_parent(static_cast<long>(before[h - 1]));
    const Fraction one(1);
    for (int side = 0; side < 2; ++side) {
      const Fraction& rho = side == 0 ? rr.alpha : rr.alpha_right;
      const Fraction c(static_cast<long>(rec.counts[2 * (h - 1) + side]));
      Fraction upper = n_parent * rho + one;
      if (side == 0 && h > 1) upper += one - rr.alpha;
      if (c < (n_parent - one) * rho - one || c > upper) rec.count_bounds_ok = false;
    }
  }
  check_coefficients(rec, s);
  a.stage = t;
  if (record) *record = std::move(rec);
  return a;
}

Fraction theoretical_bound_exact(unsigned s, unsigned t) {
  if (s < 1 || t < 1 || t > s) throw PreconditionError("theoretical bound needs 1 <= t <= s");
  const Fraction four_s = Fraction(BigInt(1) << (2 * s), BigInt(1));
  const Fraction two_s = Fraction(BigInt(1) << s, BigInt(1));
  const Fraction growth = pow(four_s / (four_s - two_s), s);
  const Fraction l_bar = growth / two_s;
  const Fraction r_term = Fraction(static_cast<long>(2 * s - 2)) / four_s * l_bar + Fraction(1) / four_s;
  return r_term + Fraction::inverse_power_of_two(t) * (growth - Fraction(1));
}

double theoretical_bound(unsigned s, unsigned t) { return theoretical_bound_exact(s, t).to_double(); }

bool StageTrace::all_ok() const {
  if (!stage_one_ok || !bounds_ok) return false;
  return std::all_of(stages.begin(), stages.end(), [](const StageRecord& r) {
    return r.coefficients_ok && r.count_bounds_ok && r.levels_preserved;
  });
}

RearrangeResult rearrange_one(const Partition& p, unsigned s) {
  if (s < 1 || s >= 32) throw PreconditionError("rearrange depth must lie in 1..31");
  const std::size_t k = p.interval_count();
  if (diameter(p) > four_pow_neg(s)) {
    throw PreconditionError("rearrange at depth " + std::to_string(s) + " needs diameter <= 4^-" + std::to_string(s) +
                            ", got " + diameter(p).str());
  }
  StageTrace trace;
  trace.s = s;
  trace.k = k;

  Arrangement a = Arrangement::from_partition(p);
  StageRecord first;
  a = stage_one(std::move(a), k, &first);
  check_coefficients(first, s);
  trace.stage_one_ok = first.count_bounds_ok;
  trace.stages.push_back(std::move(first));
  for (unsigned t = 2; t <= s; ++t) {
    StageRecord rec;
    a = stage_t(std::move(a), t, s, &rec);
    trace.stages.push_back(std::move(rec));
  }

  Partition sigma = a.partition();
  for (unsigned t = 1; t <= s; ++t) {
    const auto counts = dyadic_counts(sigma, t);
    // Every later stage must have left this level untouched.
    if (counts != trace.stages[t - 1].counts) trace.stages[t - 1].levels_preserved = false;
    trace.final_deviation.push_back(ud_deviation_from_counts(counts, k));
    trace.bounds.push_back(theoretical_bound_exact(s, t));
    if (trace.final_deviation.back() > trace.bounds.back()) trace.bounds_ok = false;
  }
  return RearrangeResult{std::move(sigma), a.permutation(), std::move(trace)};
}

std::vector<std::size_t> select_thresholds(std::span<const Fraction> diams, std::size_t horizon) {
  if (diams.empty() || horizon == 0) throw PreconditionError("threshold selection needs a non-empty horizon");
  if (horizon > diams.size()) throw PreconditionError("diameters do not cover the horizon");
  std::vector<Fraction> suffix_max(horizon);
  suffix_max[horizon - 1] = diams[horizon - 1];
  for (std::size_t i = horizon - 1; i-- > 0;) suffix_max[i] = std::max(diams[i], suffix_max[i + 1]);

  std::vector<std::size_t> out;
  for (unsigned s = 1; s < 32; ++s) {
    const Fraction bound = four_pow_neg(s);
    // suffix_max is non-increasing: binary search the first index at or below bound.
    const auto it = std::partition_point(suffix_max.begin(), suffix_max.end(),
                                         [&](const Fraction& d) { return d > bound; });
    if (it == suffix_max.end()) break;
    std::size_t n = static_cast<std::size_t>(it - suffix_max.begin()) + 1;
    if (!out.empty() && n <= out.back()) n = out.back() + 1;
    if (n > horizon) break;
    out.push_back(n);
  }
  return out;
}

bool RearrangedSequence::all_ok() const {
  return std::all_of(items.begin(), items.end(),
                     [](const RearrangedItem& i) { return i.depth == 0 || i.trace.all_ok(); });
}

RearrangedSequence rearrange_sequence(std::span<const Partition> stream, std::size_t horizon) {
  if (horizon == 0 || horizon > stream.size()) throw PreconditionError("horizon must lie in 1..stream length");
  std::vector<Fraction> diams;
  diams.reserve(horizon);
  for (std::size_t i = 0; i < horizon; ++i) diams.push_back(diameter(stream[i]));
  RearrangedSequence out;
  out.thresholds = select_thresholds(diams, horizon);
  if (out.thresholds.empty()) {
    throw NonDenseError("stream is not dense over the horizon: no diameter stays below 1/4");
  }
  const auto& th = out.thresholds;
  out.items = parallel_map(horizon, [&](std::size_t i) {
    const std::size_t n = i + 1;
    const auto depth = static_cast<unsigned>(std::upper_bound(th.begin(), th.end(), n) - th.begin());
    if (depth == 0) return RearrangedItem{n, 0, stream[i], StageTrace{}};
    RearrangeResult r = rearrange_one(stream[i], depth);
    return RearrangedItem{n, depth, std::move(r.sigma), std::move(r.trace)};
  });
  return out;
}

nlohmann::json StageTrace::to_json() const {
  nlohmann::json stages_json = nlohmann::json::array();
  for (const auto& st : stages) {
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : st.regions) {
      regions.push_back({{"cell", r.cell},
                         {"region_bounds", {r.lower.str(), r.upper.str()}},
                         {"split", r.split.str()},
                         {"alpha", r.skipped ? nlohmann::json(nullptr) : nlohmann::json(r.alpha.str())},
                         {"alpha_right", r.skipped ? nlohmann::json(nullptr) : nlohmann::json(r.alpha_right.str())},
                         {"members", r.balance.members},
                         {"initial_count", r.balance.initial_count},
                         {"final_count", r.balance.final_count},
                         {"moves", r.balance.moves},
                         {"direction", r.balance.direction == Direction::right ? "right" : "left"},
                         {"skipped", r.skipped}});
    }
    nlohmann::json straddlers = nlohmann::json::array();
    for (const auto& sr : st.straddlers) {
      straddlers.push_back({{"point", sr.point.str()},
                            {"slot", sr.slot},
                            {"delta", sr.delta.str()},
                            {"delta_tilde", sr.delta_tilde.str()}});
    }
    stages_json.push_back({{"t", st.t},
                           {"straddlers", straddlers},
                           {"regions", regions},
                           {"counts", st.counts},
                           {"coefficient_interval", {st.coefficient_lower.str(), st.coefficient_upper.str()}},
                           {"coefficients_ok", st.coefficients_ok},
                           {"count_bounds_ok", st.count_bounds_ok},
                           {"levels_preserved", st.levels_preserved}});
  }
  nlohmann::json dev = nlohmann::json::array();
  for (std::size_t t = 0; t < final_deviation.size(); ++t) {
    dev.push_back({{"t", t + 1},
                   {"deviation", final_deviation[t].str()},
                   {"deviation_decimal", final_deviation[t].to_double()},
                   {"bound", bounds[t].str()},
                   {"bound_decimal", bounds[t].to_double()}});
  }
  return {{"s", s},          {"k", k},           {"stages", stages_json}, {"final", dev},
          {"stage_one_ok", stage_one_ok}, {"bounds_ok", bounds_ok}, {"ok", all_ok()}};
}

}  // namespace udpart
