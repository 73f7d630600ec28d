#include "udpart/stochastic.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "udpart/diagnostics.hpp"
#include "udpart/io.hpp"
#include "udpart/parallel.hpp"

namespace udpart {

std::uint64_t SeededRng::splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t SeededRng::derive(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(derive(seed, stream)) {}

std::uint64_t SeededRng::below(std::uint64_t bound) {
  if (bound == 0) throw PreconditionError("below(0)");
  // Reject the low 2^64 mod bound values so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % bound;
  }
}

IndexPermutation random_permutation(std::size_t k, SeededRng& rng) {
  std::vector<std::size_t> v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = i;
  for (std::size_t i = k; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
  return IndexPermutation(std::move(v));
}

Partition random_arrangement(const Partition& p, SeededRng& rng) {
  return apply_permutation(p, random_permutation(p.interval_count(), rng));
}

TrialTrajectory conjecture_trial(std::span<const Partition> stream, SeededRng& rng, unsigned s_max,
                                 std::size_t trial_id) {
  TrialTrajectory out;
  out.trial = trial_id;
  out.deviations.reserve(stream.size());
  for (const auto& p : stream) {
    const Partition sigma = random_arrangement(p, rng);
    std::vector<Fraction> row;
    row.reserve(s_max);
    for (unsigned s = 1; s <= s_max; ++s) row.push_back(ud_deviation(sigma, s));
    out.deviations.push_back(std::move(row));
  }
  return out;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("trials")) c.trials = j.at("trials").get<std::size_t>();
  if (j.contains("horizon")) c.horizon = j.at("horizon").get<std::size_t>();
  if (j.contains("s_max")) c.s_max = j.at("s_max").get<unsigned>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("threshold")) {
    const auto& t = j.at("threshold");
    c.threshold = t.is_number_float() ? Fraction(mpq_class(t.get<double>())) : io::fraction_from_json(t);
  }
  if (j.contains("rule")) {
    const auto& r = j.at("rule");
    const std::string kind = r.value("kind", r.contains("template") ? "rho" : "alpha");
    if (kind == "alpha") {
      c.rule = RefinementRule::alpha(io::fraction_from_json(r.at("alpha")));
    } else if (kind == "rho") {
      std::vector<Fraction> b;
      for (const auto& v : r.at("template")) b.push_back(io::fraction_from_json(v));
      c.rule = RefinementRule::rho(Partition(std::move(b)));
    } else {
      throw PreconditionError("unknown rule kind '" + kind + "'");
    }
  }
  if (c.trials < 1) throw PreconditionError("trials must be >= 1");
  if (c.horizon < 1) throw PreconditionError("horizon must be >= 1");
  if (c.s_max < 1) throw PreconditionError("s_max must be >= 1");
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json rule_json;
  if (const auto* a = std::get_if<AlphaRule>(&rule.variant())) {
    rule_json = {{"kind", "alpha"}, {"alpha", a->alpha.str()}};
  } else {
    rule_json = {{"kind", "rho"}, {"template", io::to_json(std::get<RhoRule>(rule.variant()).templ)["breakpoints"]}};
  }
  return {{"trials", trials}, {"horizon", horizon},         {"s_max", s_max},
          {"seed", seed},     {"threshold", threshold.str()}, {"rule", rule_json}};
}

namespace {

Fraction median_of(std::vector<Fraction> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2) return v[m];
  return (v[m - 1] + v[m]) / Fraction(2);
}

}  // namespace

ExperimentReport conjecture_experiment(const ExperimentConfig& config, std::span<const Partition> stream) {
  if (config.trials < 1) throw PreconditionError("trials must be >= 1");
  if (config.horizon < 1 || config.horizon > stream.size()) throw PreconditionError("horizon exceeds the stream");
  if (config.s_max < 1) throw PreconditionError("s_max must be >= 1");
  const auto prefix = stream.first(config.horizon);

  ExperimentReport report;
  report.config = config;
  report.trajectories = parallel_map(config.trials, [&](std::size_t i) {
    SeededRng rng(config.seed, i);
    return conjecture_trial(prefix, rng, config.s_max, i);
  });

  report.summary.resize(config.horizon);
  for (std::size_t n = 0; n < config.horizon; ++n) {
    for (unsigned s = 0; s < config.s_max; ++s) {
      std::vector<Fraction> column;
      column.reserve(config.trials);
      std::size_t below = 0;
      for (const auto& tr : report.trajectories) {
        column.push_back(tr.deviations[n][s]);
        if (column.back() < config.threshold) ++below;
      }
      LevelAggregate agg;
      agg.max = *std::max_element(column.begin(), column.end());
      agg.median = median_of(std::move(column));
      agg.fraction_below = static_cast<double>(below) / static_cast<double>(config.trials);
      report.summary[n].push_back(std::move(agg));
    }
  }
  return report;
}

ExperimentReport conjecture_experiment(const ExperimentConfig& config) {
  const auto stream = refine_sequence(config.rule, config.horizon);
  return conjecture_experiment(config, stream);
}

void ExperimentReport::write_trajectory_csv(std::ostream& os) const {
  os << "trial,n,s,deviation\r\n";
  for (const auto& tr : trajectories) {
    for (std::size_t n = 0; n < tr.deviations.size(); ++n) {
      for (std::size_t s = 0; s < tr.deviations[n].size(); ++s) {
        os << tr.trial << ',' << n + 1 << ',' << s + 1 << ',' << tr.deviations[n][s].str() << "\r\n";
      }
    }
  }
}

nlohmann::json ExperimentReport::aggregate_json() const {
  nlohmann::json levels = nlohmann::json::array();
  for (unsigned s = 0; s < config.s_max; ++s) {
    nlohmann::json median = nlohmann::json::array();
    nlohmann::json max = nlohmann::json::array();
    nlohmann::json below = nlohmann::json::array();
    for (const auto& row : summary) {
      median.push_back(row[s].median.to_double());
      max.push_back(row[s].max.to_double());
      below.push_back(row[s].fraction_below);
    }
    nlohmann::json final_row = nlohmann::json::object();
    if (!summary.empty()) {
      const auto& last = summary.back()[s];
      final_row = {{"median", last.median.str()}, {"max", last.max.str()}, {"fraction_below", last.fraction_below}};
    }
    levels.push_back({{"s", s + 1}, {"median", median}, {"max", max}, {"fraction_below", below}, {"final", final_row}});
  }
  return {{"config", config.to_json()}, {"levels", levels}};
}

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

BigInt to_bigint(u128 v) {
  BigInt hi(static_cast<unsigned long>(static_cast<std::uint64_t>(v >> 64)));
  BigInt lo(static_cast<unsigned long>(static_cast<std::uint64_t>(v)));
  return (hi << 64) + lo;
}

BigInt to_bigint(i128 v) { return v < 0 ? BigInt(-to_bigint(static_cast<u128>(-v))) : to_bigint(static_cast<u128>(v)); }

void check_bits(unsigned bits) {
  if (bits < 1 || bits > 64) throw PreconditionError("araki resolution must lie in 1..64 bits");
}

}  // namespace

Fraction araki_step(std::span<const Fraction> points, SeededRng& rng, unsigned bits) {
  check_bits(bits);
  std::vector<const Fraction*> ends;
  const Fraction zero(0), one(1);
  ends.reserve(points.size() + 2);
  ends.push_back(&zero);
  for (const auto& p : points) ends.push_back(&p);
  ends.push_back(&one);
  Fraction widest(-1);
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i + 1 < ends.size(); ++i) {
    const Fraction gap = *ends[i + 1] - *ends[i];
    if (gap.sign() <= 0) throw PreconditionError("araki points must be sorted, distinct and inside ]0,1[");
    if (gap > widest) {
      widest = gap;
      tied.assign(1, i);
    } else if (gap == widest) {
      tied.push_back(i);
    }
  }
  const std::size_t pick = tied.size() > 1 ? tied[rng.below(tied.size())] : tied.front();
  const BigInt lo = floor_scaled(*ends[pick], bits) + 1;
  const BigInt hi = ceil_scaled(*ends[pick + 1], bits) - 1;
  if (hi < lo) throw PreconditionError("largest gap holds no grid point at 2^-" + std::to_string(bits));
  const BigInt span = hi - lo + 1;
  BigInt offset;
  if (span.fits_ulong_p() && span.get_ui() != 0) {
    offset = BigInt(static_cast<unsigned long>(rng.below(span.get_ui())));
  } else {
    throw PreconditionError("gap grid exceeds 64-bit draws");
  }
  return Fraction(lo + offset, BigInt(1) << bits);
}

ArakiResult araki_process(std::size_t n, SeededRng& rng, unsigned bits) {
  check_bits(bits);
  if (n < 1) throw PreconditionError("araki process needs n >= 1");
  const u128 unit = u128{1} << bits;
  std::vector<u128> sorted;
  sorted.reserve(n);
  // gap length -> left ends, ordered left to right
  std::map<u128, std::set<u128>> gaps;
  gaps[unit].insert(0);

  ArakiResult out;
  out.points.reserve(n);
  out.discrepancy.reserve(n);
  const BigInt den_unit = to_bigint(unit);
  for (std::size_t step = 0; step < n; ++step) {
    auto top = std::prev(gaps.end());
    const u128 len = top->first;
    auto& lefts = top->second;
    auto it = lefts.begin();
    if (lefts.size() > 1) std::advance(it, static_cast<std::ptrdiff_t>(rng.below(lefts.size())));
    const u128 a = *it;
    const u128 b = a + len;
    if (len < 2) throw PreconditionError("largest gap holds no grid point at 2^-" + std::to_string(bits));
    const u128 span = len - 1;
    if (span > u128{UINT64_MAX}) throw PreconditionError("gap grid exceeds 64-bit draws");
    const u128 x = a + 1 + rng.below(static_cast<std::uint64_t>(span));
    lefts.erase(it);
    if (lefts.empty()) gaps.erase(top);
    gaps[x - a].insert(a);
    gaps[b - x].insert(x);
    sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), x), x);
    out.points.emplace_back(to_bigint(x), den_unit);

    // D* numerator over k * unit: max(i*unit - k*x_i, k*x_i - (i-1)*unit).
    const auto k = static_cast<i128>(sorted.size());
    i128 best = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const i128 kx = k * static_cast<i128>(sorted[i]);
      const i128 up = static_cast<i128>(i + 1) * static_cast<i128>(unit) - kx;
      const i128 down = kx - static_cast<i128>(i) * static_cast<i128>(unit);
      best = std::max({best, up, down});
    }
    out.discrepancy.emplace_back(to_bigint(best), to_bigint(static_cast<i128>(unit) * k));
  }
  return out;
}

}  // namespace udpart
