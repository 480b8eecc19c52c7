#pragma once

// Fourier multiplier symbols m(xi) of order s, with two-sided power bounds
//   A1 (2 pi |xi|)^s <= m(xi) <= A2 (2 pi |xi|)^s   for |xi| >= 1.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "solwave/error.hpp"

namespace solwave {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Ordered disjoint closed intervals on [0, inf).
struct IntervalSet {
  std::vector<std::pair<double, double>> intervals;

  double measure() const {
    double total = 0.0;
    for (auto [a, b] : intervals) total += b - a;
    return total;
  }

  /// Closed membership: endpoints belong to the set.
  bool contains(double x) const {
    auto it = std::upper_bound(intervals.begin(), intervals.end(), x,
                               [](double v, const auto& iv) { return v < iv.first; });
    if (it == intervals.begin()) return false;
    --it;
    return x >= it->first && x <= it->second;
  }

  /// True when every interval of *this lies inside some interval of other.
  bool subset_of(const IntervalSet& other) const {
    for (auto [a, b] : intervals) {
      bool inside = false;
      for (auto [c, d] : other.intervals) {
        if (a >= c && b <= d) {
          inside = true;
          break;
        }
      }
      if (!inside) return false;
    }
    return true;
  }
};

/// Fat Cantor set approximation on [0,1] (step n removes middle open intervals of
/// length alpha / 2^(2n-1)), tiled by unit translates over [0, extent].
inline IntervalSet build_cantor_set(double alpha, int depth, double extent) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("cantor: alpha must lie in (0,1)");
  if (depth < 0) throw ConfigError("cantor: depth must be nonnegative");
  if (!(extent > 0.0)) throw ConfigError("cantor: extent must be positive");

  std::vector<std::pair<double, double>> unit{{0.0, 1.0}};
  for (int n = 1; n <= depth; ++n) {
    const double gap = alpha / std::ldexp(1.0, 2 * n - 1);
    std::vector<std::pair<double, double>> next;
    next.reserve(unit.size() * 2);
    for (auto [a, b] : unit) {
      if (gap >= b - a) {
        std::ostringstream msg;
        msg << "cantor: removal length " << gap << " at step " << n << " exceeds interval length "
            << (b - a);
        throw ConstructionError(msg.str());
      }
      const double mid = 0.5 * (a + b);
      next.emplace_back(a, mid - 0.5 * gap);
      next.emplace_back(mid + 0.5 * gap, b);
    }
    unit = std::move(next);
  }

  IntervalSet out;
  const int tiles = static_cast<int>(std::ceil(extent));
  for (int t = 0; t < tiles; ++t) {
    for (auto [a, b] : unit) {
      double lo = a + t, hi = std::min(b + t, extent);
      if (lo > extent) break;
      if (!out.intervals.empty() && lo <= out.intervals.back().second) {
        out.intervals.back().second = std::max(out.intervals.back().second, hi);
      } else {
        out.intervals.emplace_back(lo, hi);
      }
    }
  }
  return out;
}

enum class SymbolKind { Fractional, NegSecondDerivative, CapillaryWhitham, FatCantor, Tabulated };

inline const char* to_string(SymbolKind k) {
  switch (k) {
    case SymbolKind::Fractional: return "Fractional";
    case SymbolKind::NegSecondDerivative: return "NegSecondDerivative";
    case SymbolKind::CapillaryWhitham: return "CapillaryWhitham";
    case SymbolKind::FatCantor: return "FatCantor";
    case SymbolKind::Tabulated: return "Tabulated";
  }
  return "?";
}

struct SymbolSpec {
  SymbolKind kind = SymbolKind::Fractional;
  double s = 1.0;
  double A1 = 1.0;
  double A2 = 1.0;

  double T = 0.0;  // CapillaryWhitham surface tension

  double alpha = 0.5;  // FatCantor
  int depth = 0;
  double extent = 1.0;
  std::shared_ptr<const IntervalSet> E;

  std::vector<std::pair<double, double>> table;  // Tabulated (xi, m), xi >= 0 increasing

  double power = 1.0;  // 0.5 after sqrt_symbol

  /// A1 (2 pi)^s, the bound constant against plain |xi|^s.
  double A1_eff() const { return A1 * std::pow(two_pi, s); }
  double A2_eff() const { return A2 * std::pow(two_pi, s); }
};

inline void check_spec(const SymbolSpec& spec) {
  if (!(spec.s > 0.0)) throw ConfigError("symbol: order s must be positive");
  if (!(spec.A1 > 0.0)) throw ConfigError("symbol: A1 must be positive");
  if (!(spec.A1 <= spec.A2)) throw ConfigError("symbol: A1 must not exceed A2");
  if (spec.kind == SymbolKind::CapillaryWhitham && !(spec.T > 0.0))
    throw ConfigError("symbol: CapillaryWhitham needs T > 0");
  if (spec.kind == SymbolKind::FatCantor && !spec.E) throw ConfigError("symbol: FatCantor set not built");
  if (spec.kind == SymbolKind::Tabulated && spec.table.size() < 2)
    throw ConfigError("symbol: Tabulated needs at least two samples");
}

inline SymbolSpec fractional(double s) {
  SymbolSpec spec;
  spec.kind = SymbolKind::Fractional;
  spec.s = s;
  check_spec(spec);
  return spec;
}

inline SymbolSpec neg_second_derivative() {
  SymbolSpec spec;
  spec.kind = SymbolKind::NegSecondDerivative;
  spec.s = 2.0;
  return spec;
}

inline SymbolSpec capillary_whitham(double T) {
  SymbolSpec spec;
  spec.kind = SymbolKind::CapillaryWhitham;
  spec.s = 0.5;
  spec.T = T;
  if (!(T > 0.0)) throw ConfigError("symbol: CapillaryWhitham needs T > 0");
  const double root = std::sqrt(two_pi);
  spec.A1 = std::sqrt(two_pi * T * std::tanh(two_pi)) / root;
  spec.A2 = std::max(1.0, std::sqrt((1.0 + two_pi * two_pi * T) / two_pi)) / root;
  return spec;
}

inline SymbolSpec fat_cantor(double s, double A1, double A2, double alpha, int depth, double extent) {
  SymbolSpec spec;
  spec.kind = SymbolKind::FatCantor;
  spec.s = s;
  spec.A1 = A1;
  spec.A2 = A2;
  spec.alpha = alpha;
  spec.depth = depth;
  spec.extent = extent;
  spec.E = std::make_shared<const IntervalSet>(build_cantor_set(alpha, depth, extent));
  check_spec(spec);
  return spec;
}

inline SymbolSpec tabulated(std::vector<std::pair<double, double>> table, double s, double A1, double A2) {
  std::sort(table.begin(), table.end());
  SymbolSpec spec;
  spec.kind = SymbolKind::Tabulated;
  spec.s = s;
  spec.A1 = A1;
  spec.A2 = A2;
  spec.table = std::move(table);
  check_spec(spec);
  for (auto [xi, m] : spec.table)
    if (xi < 0.0 || m < 0.0) throw ConfigError("symbol: Tabulated samples must be nonnegative");
  return spec;
}

/// m(xi) = m0 on [0, xi_max]; used as a commuting reference operator.
inline SymbolSpec constant_symbol(double m0, double xi_max) {
  return tabulated({{0.0, m0}, {xi_max, m0}}, 1.0, 1e-300, 1e300);
}

inline SymbolSpec load_tabulated(const std::string& path, double s, double A1, double A2) {
  std::ifstream in(path);
  if (!in) throw ConfigError("symbol: cannot open table " + path);
  std::vector<std::pair<double, double>> table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double xi, m;
    if (!(row >> xi)) continue;
    if (!(row >> m)) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected two columns");
    table.emplace_back(xi, m);
  }
  return tabulated(std::move(table), s, A1, A2);
}

namespace detail {

inline double tabulated_value(const SymbolSpec& spec, double a) {
  const auto& t = spec.table;
  if (a <= t.front().first) return t.front().second;
  if (a >= t.back().first) {
    auto [x1, m1] = t.back();
    if (x1 <= 0.0) return m1;
    return m1 * std::pow(a / x1, spec.power == 1.0 ? spec.s : 2.0 * spec.s);
  }
  auto it = std::upper_bound(t.begin(), t.end(), a, [](double v, const auto& p) { return v < p.first; });
  auto [x1, m1] = *it;
  auto [x0, m0] = *(it - 1);
  return m0 + (m1 - m0) * (a - x0) / (x1 - x0);
}

inline double base_value(const SymbolSpec& spec, double a) {
  switch (spec.kind) {
    case SymbolKind::Fractional:
      return std::pow(two_pi * a, spec.power == 1.0 ? spec.s : 2.0 * spec.s);
    case SymbolKind::NegSecondDerivative:
      return two_pi * two_pi * a * a;
    case SymbolKind::CapillaryWhitham: {
      const double z = two_pi * a;
      const double th = z < 1e-8 ? 1.0 - z * z / 3.0 : std::tanh(z) / z;
      return std::sqrt((1.0 + z * z * spec.T) * th);
    }
    case SymbolKind::FatCantor: {
      const double order = spec.power == 1.0 ? spec.s : 2.0 * spec.s;
      const double A1 = spec.power == 1.0 ? spec.A1 : spec.A1 * spec.A1;
      const double A2 = spec.power == 1.0 ? spec.A2 : spec.A2 * spec.A2;
      return (spec.E->contains(a) ? A1 : A2) * std::pow(two_pi * a, order);
    }
    case SymbolKind::Tabulated:
      return tabulated_value(spec, a);
  }
  return 0.0;
}

}  // namespace detail

/// m(|xi|); evaluation is even in xi.
inline double eval_symbol(const SymbolSpec& spec, double xi) {
  check_spec(spec);
  const double v = detail::base_value(spec, std::abs(xi));
  return spec.power == 1.0 ? v : std::sqrt(v);
}

/// Symbol of L^{1/2}.
inline SymbolSpec sqrt_symbol(const SymbolSpec& spec) {
  check_spec(spec);
  if (spec.power != 1.0) throw ConfigError("symbol: sqrt_symbol applied twice");
  SymbolSpec out = spec;
  out.power = 0.5;
  out.s = spec.s / 2.0;
  out.A1 = std::sqrt(spec.A1);
  out.A2 = std::sqrt(spec.A2);
  return out;
}

struct ValidationReport {
  double min_ratio = 0.0;  // min of m / (2 pi |xi|)^s over |xi| >= 1
  double max_ratio = 0.0;
  double min_ratio_raw = 0.0;  // same against plain |xi|^s
  double max_ratio_raw = 0.0;
  double max_low = 0.0;    // max of m over |xi| <= 1
  double min_low = 0.0;
  std::size_t high_samples = 0;
  std::size_t low_samples = 0;
  bool lower_ok = true;
  bool upper_ok = true;
  bool low_ok = true;
  bool ratio_decays = false;
  bool passed = true;
  std::vector<std::string> messages;
};

inline ValidationReport validate_symbol(const SymbolSpec& spec, const std::vector<double>& xi_samples) {
  ValidationReport rep;
  const double tol = 1e-12;
  double first_ratio = 0.0, last_ratio = 0.0, first_xi = 0.0, last_xi = 0.0;
  rep.min_ratio = INFINITY;
  rep.max_ratio = 0.0;
  rep.min_low = INFINITY;
  for (double xi : xi_samples) {
    const double a = std::abs(xi);
    const double m = eval_symbol(spec, xi);
    if (a >= 1.0) {
      const double ratio = m / std::pow(two_pi * a, spec.s);
      rep.min_ratio = std::min(rep.min_ratio, ratio);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      if (rep.high_samples == 0 || a < first_xi) first_xi = a, first_ratio = ratio;
      if (rep.high_samples == 0 || a > last_xi) last_xi = a, last_ratio = ratio;
      ++rep.high_samples;
    } else {
      rep.max_low = std::max(rep.max_low, m);
      rep.min_low = std::min(rep.min_low, m);
      ++rep.low_samples;
    }
  }
  if (rep.high_samples) {
    rep.lower_ok = rep.min_ratio >= spec.A1 * (1.0 - tol);
    rep.upper_ok = rep.max_ratio <= spec.A2 * (1.0 + tol);
    if (!rep.lower_ok) rep.messages.push_back("lower bound A1 violated");
    if (!rep.upper_ok) rep.messages.push_back("upper bound A2 violated");
    if (last_xi > 2.0 * first_xi && last_ratio < 0.5 * first_ratio) {
      rep.ratio_decays = true;
      rep.messages.push_back("ratio m/|xi|^s decays; no positive-order lower bound");
    }
  } else {
    rep.min_ratio = rep.max_ratio = 0.0;
  }
  rep.min_ratio_raw = rep.min_ratio * std::pow(two_pi, spec.s);
  rep.max_ratio_raw = rep.max_ratio * std::pow(two_pi, spec.s);
  if (rep.low_samples) {
    rep.low_ok = rep.min_low >= 0.0 && rep.max_low <= spec.A2_eff() * (1.0 + tol);
    if (!rep.low_ok) rep.messages.push_back("symbol outside [0, A2] on |xi| <= 1");
  } else {
    rep.min_low = 0.0;
  }
  rep.passed = rep.lower_ok && rep.upper_ok && rep.low_ok;
  return rep;
}

}  // namespace solwave
