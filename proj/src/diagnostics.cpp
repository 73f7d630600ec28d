#include "udpart/diagnostics.hpp"

#include <algorithm>
#include <ostream>

#include "udpart/io.hpp"
#include "udpart/parallel.hpp"

namespace udpart {

namespace {

void check_level(unsigned s) {
  if (s < 1 || s > kMaxDyadicLevel) {
    throw PreconditionError("dyadic level must lie in 1.." + std::to_string(kMaxDyadicLevel));
  }
}

Fraction dyadic(std::uint64_t h, unsigned s) {
  return Fraction(BigInt(static_cast<unsigned long>(h)), BigInt(1) << s);
}

}  // namespace

DyadicIndex::DyadicIndex(unsigned level, std::uint64_t cell) : s(level), h(cell) {
  check_level(s);
  if (h < 1 || h > (std::uint64_t{1} << s)) {
    throw PreconditionError("dyadic cell index out of range 1..2^" + std::to_string(s));
  }
}

Fraction DyadicIndex::lower() const { return dyadic(h - 1, s); }
Fraction DyadicIndex::upper() const { return dyadic(h, s); }

std::vector<std::size_t> dyadic_counts(std::span<const Fraction> sorted_points, unsigned s) {
  check_level(s);
  const std::uint64_t cells = std::uint64_t{1} << s;
  std::vector<std::size_t> counts(cells, 0);
  if (sorted_points.empty()) return counts;
  if (sorted_points.front().sign() <= 0 || sorted_points.back() > Fraction(1)) {
    throw PreconditionError("dyadic counts need points in ]0,1]");
  }
  if (cells <= sorted_points.size()) {
    // One binary search per cell boundary.
    std::size_t below = 0;
    for (std::uint64_t h = 1; h <= cells; ++h) {
      const Fraction upper = dyadic(h, s);
      const auto it = std::upper_bound(sorted_points.begin(), sorted_points.end(), upper);
      const auto upto = static_cast<std::size_t>(it - sorted_points.begin());
      counts[h - 1] = upto - below;
      below = upto;
    }
  } else {
    for (const auto& t : sorted_points) {
      const BigInt h = ceil_scaled(t, s);
      ++counts[h.get_ui() - 1];
    }
  }
  return counts;
}

std::vector<std::size_t> dyadic_counts(const Partition& p, unsigned s) { return dyadic_counts(p.endpoints(), s); }

Fraction dyadic_measure(const Partition& p, const DyadicIndex& idx) {
  const auto pts = p.endpoints();
  const auto hi = std::upper_bound(pts.begin(), pts.end(), idx.upper());
  const auto lo = std::upper_bound(pts.begin(), pts.end(), idx.lower());
  return Fraction(static_cast<long>(hi - lo), static_cast<long>(p.interval_count()));
}

Fraction ud_deviation_from_counts(std::span<const std::size_t> counts, std::size_t k) {
  // |c/k - 1/2^s| = |c * 2^s - k| / (k * 2^s); maximize the integer numerator.
  const BigInt cells(static_cast<unsigned long>(counts.size()));
  const BigInt kk(static_cast<unsigned long>(k));
  BigInt worst = 0;
  for (std::size_t c : counts) {
    BigInt d = BigInt(static_cast<unsigned long>(c)) * cells - kk;
    if (d < 0) d = -d;
    if (d > worst) worst = d;
  }
  return Fraction(worst, kk * cells);
}

Fraction ud_deviation(const Partition& p, unsigned s) {
  return ud_deviation_from_counts(dyadic_counts(p, s), p.interval_count());
}

double functional_mean(const Partition& p, const std::function<double(double)>& f) {
  return functional_mean(p, [&](const Fraction& t) { return f(t.to_double()); });
}

double integrate_simpson(const std::function<double(double)>& f, std::size_t panels) {
  if (panels < 2) panels = 2;
  if (panels % 2) ++panels;
  const double h = 1.0 / static_cast<double>(panels);
  double acc = f(0.0) + f(1.0);
  for (std::size_t i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(static_cast<double>(i) * h);
  return acc * h / 3.0;
}

FunctionalGap functional_gap(const Partition& p, const std::function<double(double)>& f,
                             const std::function<double(const std::function<double(double)>&)>& quadrature) {
  return FunctionalGap{functional_mean(p, f), quadrature(f)};
}

namespace {

Fraction sorted_star_discrepancy(std::span<const Fraction> x) {
  const std::size_t k = x.size();
  if (k == 0) throw PreconditionError("star discrepancy of an empty point set");
  // Compare scaled numerators i - k*x_i and k*x_i - (i-1) to avoid building
  // k separate fractions.
  const mpq_class kq(static_cast<unsigned long>(k));
  mpq_class best = 0;
  mpq_class kx;
  for (std::size_t i = 1; i <= k; ++i) {
    kx = kq * x[i - 1].raw();
    mpq_class a = mpq_class(static_cast<unsigned long>(i)) - kx;
    if (a > best) best = a;
    mpq_class b = kx - mpq_class(static_cast<unsigned long>(i - 1));
    if (b > best) best = b;
  }
  return Fraction(best) / Fraction(static_cast<long>(k));
}

}  // namespace

Fraction star_discrepancy(const Partition& p) { return sorted_star_discrepancy(p.endpoints()); }

Fraction star_discrepancy(std::span<const Fraction> points) {
  std::vector<Fraction> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_star_discrepancy(sorted);
}

DensityReport density_check(std::span<const Fraction> diams, const Fraction& epsilon) {
  if (epsilon.sign() <= 0) throw PreconditionError("density check needs epsilon > 0");
  DensityReport r;
  for (std::size_t i = 0; i < diams.size(); ++i) {
    if (diams[i] >= epsilon) r.crossing_index = i + 1;
  }
  for (std::size_t i = r.crossing_index + 1; i < diams.size(); ++i) {
    if (diams[i] > diams[i - 1]) r.tail_nonincreasing = false;
  }
  r.consistent = r.crossing_index < diams.size() && r.tail_nonincreasing;
  return r;
}

UDReport convergence_report(std::span<const Partition> stream, unsigned s_max) {
  check_level(s_max);
  struct PerPartition {
    std::vector<UDRow> rows;
    std::vector<Fraction> deviations;
  };
  auto one = [&](std::size_t i) {
    const Partition& p = stream[i];
    const std::size_t k = p.interval_count();
    PerPartition out;
    for (unsigned s = 1; s <= s_max; ++s) {
      const auto counts = dyadic_counts(p, s);
      const Fraction target = Fraction::inverse_power_of_two(s);
      Fraction worst;
      for (std::size_t h = 0; h < counts.size(); ++h) {
        Fraction measure(static_cast<long>(counts[h]), static_cast<long>(k));
        Fraction dev = measure - target;
        if (abs(dev) > worst) worst = abs(dev);
        out.rows.push_back(UDRow{i + 1, k, s, h + 1, std::move(measure), std::move(dev)});
      }
      out.deviations.push_back(std::move(worst));
    }
    return out;
  };
  auto parts = parallel_map(stream.size(), one);

  UDReport report;
  report.s_max = s_max;
  for (unsigned s = 1; s <= s_max; ++s) report.levels.push_back(LevelSummary{s, Fraction(0), 0});
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (unsigned s = 1; s <= s_max; ++s) {
      auto& lvl = report.levels[s - 1];
      if (lvl.worst_n == 0 || parts[i].deviations[s - 1] > lvl.max_deviation) {
        lvl.max_deviation = parts[i].deviations[s - 1];
        lvl.worst_n = i + 1;
      }
    }
    std::move(parts[i].rows.begin(), parts[i].rows.end(), std::back_inserter(report.rows));
    report.per_n.push_back(std::move(parts[i].deviations));
  }
  return report;
}

void UDReport::write_csv(std::ostream& os, const std::vector<std::vector<std::optional<double>>>* bounds) const {
  os << "n,k,s,h,measure,deviation,deviation_decimal";
  if (bounds) os << ",bound";
  os << "\r\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.n << ',' << r.k << ',' << r.s << ',' << r.h << ',' << r.measure.str() << ',' << r.deviation.str()
       << ',' << r.deviation.decimal(12);
    if (bounds) {
      os << ',';
      if (r.n - 1 < bounds->size() && r.s - 1 < (*bounds)[r.n - 1].size() && (*bounds)[r.n - 1][r.s - 1]) {
        std::snprintf(buf, sizeof buf, "%.12g", *(*bounds)[r.n - 1][r.s - 1]);
        os << buf;
      }
    }
    os << "\r\n";
  }
}

nlohmann::json UDReport::summary_json() const {
  nlohmann::json levels_json = nlohmann::json::array();
  for (const auto& l : levels) {
    levels_json.push_back({{"s", l.s},
                           {"max_deviation", l.max_deviation.str()},
                           {"max_deviation_decimal", l.max_deviation.to_double()},
                           {"worst_n", l.worst_n}});
  }
  nlohmann::json terminal = nlohmann::json::array();
  if (!per_n.empty()) {
    for (const auto& d : per_n.back()) terminal.push_back(d.str());
  }
  return {{"partitions", per_n.size()}, {"s_max", s_max}, {"levels", levels_json}, {"terminal_deviation", terminal}};
}

void UDReport::write_plot_csv(std::ostream& os) const {
  os << "n,s,deviation_decimal\r\n";
  for (std::size_t i = 0; i < per_n.size(); ++i) {
    for (std::size_t s = 0; s < per_n[i].size(); ++s) {
      os << i + 1 << ',' << s + 1 << ',' << per_n[i][s].decimal(12) << "\r\n";
    }
  }
}

}  // namespace udpart
