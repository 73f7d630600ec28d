#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "udpart/fraction.hpp"
#include "udpart/partition.hpp"

namespace udpart {

/// Names the dyadic cell ](h-1)/2^s, h/2^s], 1 <= h <= 2^s.
///
/// Cells are left-open and right-closed so that level-s cells tile ]0,1]
/// exactly. That is where the counted endpoints t_1..t_k live (t_0 = 0 never
/// counts), so the measures at one level always sum to one.
struct DyadicIndex {
  unsigned s = 1;
  std::uint64_t h = 1;

  DyadicIndex(unsigned level, std::uint64_t cell);
  [[nodiscard]] Fraction lower() const;
  [[nodiscard]] Fraction upper() const;
};

inline constexpr unsigned kMaxDyadicLevel = 62;

/// Number of endpoints t_1..t_k in each level-s cell (index h-1).
std::vector<std::size_t> dyadic_counts(const Partition& p, unsigned s);
/// Same, over an arbitrary sorted point set in ]0,1].
std::vector<std::size_t> dyadic_counts(std::span<const Fraction> sorted_points, unsigned s);

Fraction dyadic_measure(const Partition& p, const DyadicIndex& idx);

/// max_h |measure(s,h) - 2^{-s}|.
Fraction ud_deviation(const Partition& p, unsigned s);
Fraction ud_deviation_from_counts(std::span<const std::size_t> counts, std::size_t k);

/// (1/k) sum_i f(t_i). With a Fraction-valued f the mean is exact.
template <class F>
  requires std::invocable<F&, const Fraction&>
auto functional_mean(const Partition& p, F&& f) {
  using R = std::decay_t<decltype(f(p.endpoints().front()))>;
  R acc{};
  for (const auto& t : p.endpoints()) acc += f(t);
  if constexpr (std::is_same_v<R, Fraction>) {
    return acc / Fraction(static_cast<long>(p.interval_count()));
  } else {
    return acc / static_cast<R>(p.interval_count());
  }
}

/// Real-valued convenience overload evaluating f at the decimal endpoints.
double functional_mean(const Partition& p, const std::function<double(double)>& f);

/// Composite Simpson on [0,1] with `panels` (even) subintervals.
double integrate_simpson(const std::function<double(double)>& f, std::size_t panels = 2048);

struct FunctionalGap {
  double mean = 0.0;
  double integral = 0.0;
  [[nodiscard]] double gap() const { return mean - integral; }
};

/// Endpoint average vs. integral, the finite-n gap behind weak convergence.
FunctionalGap functional_gap(const Partition& p, const std::function<double(double)>& f,
                             const std::function<double(const std::function<double(double)>&)>& quadrature =
                                 [](const std::function<double(double)>& g) { return integrate_simpson(g); });

/// D* = max_i max(i/k - x_i, x_i - (i-1)/k) over the sorted right endpoints.
Fraction star_discrepancy(const Partition& p);
/// Same statistic for an arbitrary point multiset (sorted internally).
Fraction star_discrepancy(std::span<const Fraction> points);

struct DensityReport {
  /// 1-based index of the last diameter >= epsilon; 0 when none.
  std::size_t crossing_index = 0;
  bool tail_nonincreasing = true;
  /// A non-empty tail below epsilon exists and it is non-increasing.
  bool consistent = false;
};

DensityReport density_check(std::span<const Fraction> diams, const Fraction& epsilon);

struct UDRow {
  std::size_t n = 0;
  std::size_t k = 0;
  unsigned s = 0;
  std::uint64_t h = 0;
  Fraction measure;
  /// measure - 2^{-s}, signed.
  Fraction deviation;
};

struct LevelSummary {
  unsigned s = 0;
  Fraction max_deviation;
  std::size_t worst_n = 0;
};

class UDReport {
 public:
  std::vector<UDRow> rows;
  std::vector<LevelSummary> levels;
  /// per_n[n-1][s-1] = ud_deviation(pi_n, s).
  std::vector<std::vector<Fraction>> per_n;
  unsigned s_max = 0;

  /// Header n,k,s,h,measure,deviation,deviation_decimal. When `bounds` is
  /// given (bounds[n-1][s-1], empty optional = not applicable) a trailing
  /// bound column is added.
  void write_csv(std::ostream& os,
                 const std::vector<std::vector<std::optional<double>>>* bounds = nullptr) const;
  [[nodiscard]] nlohmann::json summary_json() const;
  /// n,s,deviation_decimal for external plotting.
  void write_plot_csv(std::ostream& os) const;
};

UDReport convergence_report(std::span<const Partition> stream, unsigned s_max);

}  // namespace udpart
