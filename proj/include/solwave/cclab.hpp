#pragma once

// Cutoff commutators, their behaviour as r grows, the Cantor-symbol counter-example
// and sliding-window concentration of the energy density.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "solwave/error.hpp"
#include "solwave/spectral.hpp"
#include "solwave/symbols.hpp"

namespace solwave {

namespace detail {
/// C-infinity step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t).
inline double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}
}  // namespace detail

struct CutoffPair {
  double r = 1.0;
  Field phi;
  Field psi;
  bool pythagorean = true;
};

/// phi = 1 on |x| <= r, 0 on |x| >= 2r. psi = sqrt(1 - phi^2) or the mirrored step.
/// psi is left at 1 out to the torus edge: it is constant there, so still periodic and smooth.
inline CutoffPair make_cutoffs(double r, const Grid& grid, bool pythagorean = true) {
  if (!(r > 0.0)) throw ConfigError("make_cutoffs: r must be positive");
  if (!(2.0 * r < 0.5 * grid.length)) throw GeometryError("make_cutoffs: 2r must be below l/2");
  CutoffPair c{r, Field(grid), Field(grid), pythagorean};
  for (int j = 0; j < grid.n; ++j) {
    const double ax = std::abs(grid.x(j));
    const double ph = detail::smoothstep((2.0 * r - ax) / r);
    c.phi[j] = ph;
    c.psi[j] = pythagorean ? std::sqrt(std::max(0.0, 1.0 - ph * ph)) : detail::smoothstep((ax - r) / r);
  }
  return c;
}

enum class CutoffBranch { phi, psi };

inline const char* to_string(CutoffBranch b) { return b == CutoffBranch::phi ? "phi" : "psi"; }

/// int chi u (L(chi u) - chi L u) dx.
inline double commutator_value(const Multiplier& L, const Field& u, const CutoffPair& cut, CutoffBranch which) {
  const Field& chi = which == CutoffBranch::phi ? cut.phi : cut.psi;
  require_same_grid(u, chi);
  Field cu(u.grid);
  for (int j = 0; j < u.size(); ++j) cu[j] = chi[j] * u[j];
  Field Lcu = L.apply(cu);
  Field Lu = L.apply(u);
  double s = 0.0;
  for (int j = 0; j < u.size(); ++j) s += cu[j] * (Lcu[j] - chi[j] * Lu[j]);
  return s * u.grid.dx();
}

inline double commutator_value(const SymbolSpec& sym, const Field& u, const CutoffPair& cut, CutoffBranch which) {
  return commutator_value(Multiplier(sym, u.grid), u, cut, which);
}

enum class DecayClass { decays, non_decaying, inconclusive };

inline const char* to_string(DecayClass c) {
  switch (c) {
    case DecayClass::decays: return "decays";
    case DecayClass::non_decaying: return "non_decaying";
    case DecayClass::inconclusive: return "inconclusive";
  }
  return "?";
}

struct DecayThresholds {
  double decay_ratio = 0.05;      // last <= this * first
  double wobble = 0.10;           // tail may rise by this fraction step to step
  double non_decay_ratio = 0.5;   // last >= this * running max
  double floor_rel = 1e-12;       // values below floor_rel * int|u L u| count as zero
};

struct DecaySeries {
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> ratios;  // |value| / |value(radii[0])|
  DecayClass classification = DecayClass::inconclusive;
  double floor = 0.0;
  double scale = 0.0;  // int |u L u|
  double min_ratio = 0.0;
  double final_ratio = 0.0;
  DecayThresholds thresholds;
  CutoffBranch which = CutoffBranch::phi;
};

/// Classification on magnitudes; a series entirely under the floor decays.
inline DecayClass classify_decay(const std::vector<double>& values, double floor, const DecayThresholds& th) {
  if (values.empty()) return DecayClass::inconclusive;
  std::vector<double> a(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) a[i] = std::abs(values[i]);
  if (*std::max_element(a.begin(), a.end()) <= floor) return DecayClass::decays;
  const double last = a.back();
  bool monotone = true;
  for (std::size_t i = 1; i < a.size(); ++i)
    if (a[i] > (1.0 + th.wobble) * a[i - 1] + floor) monotone = false;
  if ((last <= th.decay_ratio * a.front() || last <= floor) && monotone) return DecayClass::decays;
  if (last >= th.non_decay_ratio * *std::max_element(a.begin(), a.end())) return DecayClass::non_decaying;
  return DecayClass::inconclusive;
}

inline DecaySeries decay_scan(const SymbolSpec& sym, const Field& u, const std::vector<double>& radii,
                              CutoffBranch which = CutoffBranch::phi, bool pythagorean = true,
                              const DecayThresholds& th = {}) {
  if (radii.empty()) throw ConfigError("decay_scan: no radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw ConfigError("decay_scan: radii must increase");
  Multiplier L(sym, u.grid);
  Field Lu = L.apply(u);
  DecaySeries out;
  out.radii = radii;
  out.thresholds = th;
  out.which = which;
  for (int j = 0; j < u.size(); ++j) out.scale += std::abs(u[j] * Lu[j]);
  out.scale *= u.grid.dx();
  out.floor = std::max(th.floor_rel * out.scale, 1e-300);
  for (double r : radii) out.values.push_back(commutator_value(L, u, make_cutoffs(r, u.grid, pythagorean), which));
  const double first = std::abs(out.values.front());
  out.min_ratio = 1.0;
  for (double v : out.values) {
    const double q = first > out.floor ? std::abs(v) / first : 0.0;
    out.ratios.push_back(q);
    out.min_ratio = std::min(out.min_ratio, q);
  }
  out.final_ratio = out.ratios.back();
  out.classification = classify_decay(out.values, out.floor, th);
  return out;
}

// ---- Cantor counter-example ----------------------------------------------------

enum class URecipe {
  CantorBand,  // u^ = bump * 1_E: all the mass sits where the symbol jumps
  Bump,        // u^ = bump on [0, extent]
};

inline const char* to_string(URecipe r) { return r == URecipe::CantorBand ? "CantorBand" : "Bump"; }

/// Frequency bump cos^2(pi|xi| / (2 extent)) on |xi| < extent, optionally masked by E.
inline Field band_limited_profile(const Grid& grid, double extent, const IntervalSet* E) {
  Spectrum sp{grid, std::vector<cplx>(grid.n, 0.0)};
  for (int i = 0; i < grid.n; ++i) {
    if (i == grid.n / 2) continue;
    const double a = std::abs(grid.xi(i));
    if (a >= extent) continue;
    if (E && !E->contains(a)) continue;
    const double c = std::cos(0.5 * std::numbers::pi * a / extent);
    sp.coeffs[i] = c * c;
  }
  return inverse(sp);  // real and even, centred at x = 0
}

struct CantorOptions {
  double alpha = 0.5;
  double s = 1.0;
  double A1 = 1.0;
  double A2 = 2.0;
  int depth = 6;
  double extent = 1.0;
  URecipe recipe = URecipe::CantorBand;
  std::vector<double> radii{4, 8, 16, 32};
  double length = 16384.0;  // fine xi spacing resolves the small gaps of E
  int n = 65536;
};

struct CantorReport {
  DecaySeries series;
  double measure_E = 0.0;    // per unit tile
  double band_mass_on_E = 0.0;  // fraction of |u^|^2 on E
  double min_ratio = 0.0;
};

inline CantorReport cantor_counterexample(const CantorOptions& o) {
  if (!(o.A2 >= o.A1)) throw ConfigError("cantor_counterexample: need A2 >= A1");
  SymbolSpec sym = fat_cantor(o.s, o.A1, o.A2, o.alpha, o.depth, o.extent);
  Grid g(o.length, o.n);
  Field u = band_limited_profile(g, o.extent, o.recipe == URecipe::CantorBand ? sym.E.get() : nullptr);
  CantorReport rep;
  rep.series = decay_scan(sym, u, o.radii, CutoffBranch::phi);
  rep.min_ratio = rep.series.min_ratio;
  rep.measure_E = build_cantor_set(o.alpha, o.depth, 1.0).measure();
  const double total = weighted_energy(u, [](double) { return 1.0; });
  const IntervalSet& E = *sym.E;
  const double on = weighted_energy(u, [&E](double xi) { return E.contains(std::abs(xi)) ? 1.0 : 0.0; });
  rep.band_mass_on_E = total > 0.0 ? on / total : 0.0;
  return rep;
}

// ---- concentration -------------------------------------------------------------

struct ConcentrationProfile {
  Field rho;
  double sup_window_mass = 0.0;
  double argmax_center = 0.0;
  double total_mass = 0.0;
};

/// rho = kappa u^2 + (L^{1/2} u)^2 and the largest mass in a window [y - r, y + r].
inline ConcentrationProfile concentration_profile(const Field& u, const SymbolSpec& sym, double kappa, double r) {
  const Grid& g = u.grid;
  if (!(r > 0.0) || !(r < 0.5 * g.length)) throw GeometryError("concentration_profile: need 0 < r < l/2");
  Field h = Multiplier(sqrt_symbol(sym), g).apply(u);
  ConcentrationProfile cp;
  cp.rho = Field(g);
  for (int j = 0; j < g.n; ++j) cp.rho[j] = kappa * u[j] * u[j] + h[j] * h[j];
  cp.total_mass = integral(cp.rho);
  const int w = std::min(g.n / 2 - 1, static_cast<int>(std::floor(r / g.dx() + 1e-9)));
  double s = 0.0;
  for (int k = -w; k <= w; ++k) s += cp.rho[((k % g.n) + g.n) % g.n];
  double best = s;
  int best_j = 0;
  for (int j = 1; j < g.n; ++j) {
    s += cp.rho[(j + w) % g.n] - cp.rho[((j - w - 1) % g.n + g.n) % g.n];
    if (s > best) { best = s; best_j = j; }
  }
  cp.sup_window_mass = best * g.dx();
  cp.argmax_center = g.x(best_j);
  return cp;
}

}  // namespace solwave
