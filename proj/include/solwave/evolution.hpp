#pragma once

// Pseudospectral time stepping for the three evolution equations
//   Eq1:      u_t + (f(u))_x - (Lu)_x = 0
//   Eq2:      u_t + (f(u))_x + (Lu)_t = 0
//   Eq2Inhom: u_t + u_x + (f(u))_x + (Lu)_t = 0
// with invariant monitoring and an orbital-distance stability experiment.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "solwave/error.hpp"
#include "solwave/fft.hpp"
#include "solwave/models.hpp"
#include "solwave/solver.hpp"
#include "solwave/spectral.hpp"

namespace solwave {

enum class EvolutionEquation { Eq1, Eq2, Eq2Inhom };

inline const char* to_string(EvolutionEquation e) {
  switch (e) {
    case EvolutionEquation::Eq1: return "Eq1";
    case EvolutionEquation::Eq2: return "Eq2";
    case EvolutionEquation::Eq2Inhom: return "Eq2Inhom";
  }
  return "?";
}

/// Equation whose traveling waves solve the given profile equation.
inline EvolutionEquation evolution_for(EquationKind k) {
  switch (k) {
    case EquationKind::TravelingEq1: return EvolutionEquation::Eq1;
    case EquationKind::TravelingEq2: return EvolutionEquation::Eq2;
    case EquationKind::TravelingEq2Inhom: return EvolutionEquation::Eq2Inhom;
  }
  return EvolutionEquation::Eq1;
}

struct EvolutionSpec {
  EvolutionEquation equation = EvolutionEquation::Eq1;
  SymbolSpec sym;
  Nonlinearity nl;
  double dt = 0.01;
  double t_end = 1.0;
  int snapshot_stride = 0;  // 0: initial and final snapshots only
  int record_stride = 1;    // invariants (and distance) every this many steps
  double cfl = 2.8;
  bool dealias = true;
  bool nonlinear = true;  // false: linear flow only
  bool backward = false;  // integrate the time-reversed flow
};

struct EvolutionTrace {
  std::array<std::string, 2> names;
  std::vector<double> times;
  std::vector<std::array<double, 2>> invariants;
  std::vector<double> distance;  // filled when a reference profile is given
  std::vector<double> snapshot_times;
  std::vector<Field> snapshots;
  std::array<double, 2> max_drift{0.0, 0.0};
  double max_distance = 0.0;
  double max_imag_residue = 0.0;
  double band_growth = 1.0;  // growth of the upper resolved band relative to its initial level
  double dt_used = 0.0;
  int steps = 0;
  bool blow_up = false;
  double last_valid_time = 0.0;
  Field final_state;
};

/// Min over translations y of |u(. + y) - w|_{H^{s/2}}, Nyquist mode excluded.
inline double orbital_distance(const Field& u, const Field& w, double s, double* best_shift = nullptr) {
  require_same_grid(u, w);
  const Grid& g = u.grid;
  const int n = g.n;
  auto uh = fft::rdft(u.values);
  auto wh = fft::rdft(w.values);
  std::vector<double> weight(n / 2 + 1);
  for (int i = 0; i <= n / 2; ++i) weight[i] = std::pow(1.0 + g.xi_half(i) * g.xi_half(i), s / 2.0);
  weight[n / 2] = 0.0;

  // C_j = sum_k W_k u_k conj(w_k) e^{2 pi i k j / n}: correlation at shifts y = j dx.
  std::vector<fft::cplx> prod(n / 2 + 1);
  for (int i = 0; i <= n / 2; ++i) prod[i] = weight[i] * uh[i] * std::conj(wh[i]);
  auto corr = fft::irdft(std::move(prod), n);
  int jbest = static_cast<int>(std::max_element(corr.begin(), corr.end()) - corr.begin());
  const double a = corr[(jbest - 1 + n) % n], b = corr[jbest], c = corr[(jbest + 1) % n];
  const double den = a - 2.0 * b + c;
  const double delta = den < 0.0 ? std::clamp(0.5 * (a - c) / den, -0.5, 0.5) : 0.0;

  const double scale = g.dx() * g.dx() * g.dxi();
  auto distance_at = [&](double y) {
    double sum = 0.0;
    for (int i = 0; i < n / 2; ++i) {
      const fft::cplx d = uh[i] * std::polar(1.0, two_pi * g.xi_half(i) * y) - wh[i];
      sum += (i == 0 ? 1.0 : 2.0) * weight[i] * std::norm(d);
    }
    return std::sqrt(sum * scale);
  };
  const int jsigned = jbest <= n / 2 ? jbest : jbest - n;
  // parabolic guess, then Newton on the smooth correlation derivative
  const double y0 = (jsigned + delta) * g.dx();
  double y1 = y0;
  for (int it = 0; it < 20; ++it) {
    double c1 = 0.0, c2 = 0.0;
    for (int i = 1; i < n / 2; ++i) {
      const double th = two_pi * g.xi_half(i);
      const fft::cplx p = weight[i] * uh[i] * std::conj(wh[i]) * std::polar(1.0, th * y1);
      c1 -= th * p.imag();
      c2 -= th * th * p.real();
    }
    if (!(c2 < 0.0)) break;
    const double step = -c1 / c2;
    y1 = std::clamp(y1 + step, y0 - g.dx(), y0 + g.dx());
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(y1))) break;
  }
  const double d0 = distance_at(y0), d1 = distance_at(y1);
  if (best_shift) *best_shift = d1 < d0 ? y1 : y0;
  return std::min(d0, d1);
}

namespace detail {

class SpectralRhs {
 public:
  SpectralRhs(const EvolutionSpec& spec, const Grid& g)
      : spec_(spec), g_(g), model_(spec.sym, spec.nl, g), half_(g.n / 2 + 1) {
    ik_.resize(half_);
    lin_.resize(half_);
    keep_.resize(half_);
    const int cutoff = g.n / 3;
    for (int i = 0; i < half_; ++i) {
      const double xi = g.xi_half(i);
      const double m = model_.L()[i];
      ik_[i] = fft::cplx(0.0, two_pi * xi);
      keep_[i] = (i < g.n / 2) && (!spec.dealias || i <= cutoff);
      switch (spec.equation) {
        case EvolutionEquation::Eq1: lin_[i] = 1.0; omega_.push_back(two_pi * xi * m); break;
        case EvolutionEquation::Eq2:
        case EvolutionEquation::Eq2Inhom: lin_[i] = 1.0 / (1.0 + m); break;
      }
    }
    if (spec.equation != EvolutionEquation::Eq1) omega_.assign(half_, 0.0);
    omega_[g.n / 2] = 0.0;
  }

  const std::vector<double>& omega() const { return omega_; }
  int half() const { return half_; }

  std::vector<double> to_physical(const std::vector<fft::cplx>& uh) const {
    auto v = fft::irdft(uh, g_.n);
    for (double& x : v) x /= g_.n;
    return v;
  }

  /// Nonlinear (Eq1) or full (Eq2, Eq2Inhom) right-hand side in the unnormalized half spectrum.
  std::vector<fft::cplx> operator()(const std::vector<fft::cplx>& uh) const {
    const double sign = spec_.backward ? -1.0 : 1.0;
    std::vector<fft::cplx> out(half_, 0.0);
    std::vector<fft::cplx> fh(half_, 0.0);
    if (spec_.nonlinear) {
      Field u(g_, to_physical(uh));
      Field f = model_.f(u);
      fh = fft::rdft(f.values);
    }
    for (int i = 0; i < half_; ++i) {
      if (!keep_[i]) {
        if (spec_.equation == EvolutionEquation::Eq2Inhom && i < g_.n / 2)
          out[i] = -sign * ik_[i] * uh[i] * lin_[i];
        continue;
      }
      fft::cplx src = fh[i];
      if (spec_.equation == EvolutionEquation::Eq2Inhom) src += uh[i];
      out[i] = -sign * ik_[i] * src * lin_[i];
    }
    out[g_.n / 2] = 0.0;
    return out;
  }

  /// Advective stability bound: max over resolved modes of the stage eigenvalue magnitude.
  double stiffness(const Field& u0) const {
    double fmax = 0.0;
    if (spec_.nonlinear)
      for (double v : u0.values) fmax = std::max(fmax, std::abs(fprime_scalar(spec_.nl.homogeneous(), v)));
    if (spec_.equation == EvolutionEquation::Eq2Inhom) fmax += 1.0;
    double lam = 0.0;
    for (int i = 0; i < half_; ++i) {
      const bool resolved = i < g_.n / 2 && (!spec_.dealias || i <= g_.n / 3 ||
                                            spec_.equation == EvolutionEquation::Eq2Inhom);
      if (!resolved) continue;
      lam = std::max(lam, std::abs(ik_[i]) * lin_[i] * fmax);
    }
    return lam;
  }

 private:
  EvolutionSpec spec_;
  Grid g_;
  Model model_;
  int half_;
  std::vector<fft::cplx> ik_;
  std::vector<double> lin_;
  std::vector<bool> keep_;
  std::vector<double> omega_;
};

inline std::array<double, 2> invariants_of(EvolutionEquation eq, const Model& model, const Field& u) {
  switch (eq) {
    case EvolutionEquation::Eq1: return {model.E(u), model.Q(u)};
    case EvolutionEquation::Eq2: return {model.J(u, 1.0), model.U(u)};
    case EvolutionEquation::Eq2Inhom: return {model.J(u, 1.0), model.Utilde(u)};
  }
  return {0.0, 0.0};
}

inline std::array<std::string, 2> invariant_names(EvolutionEquation eq) {
  switch (eq) {
    case EvolutionEquation::Eq1: return {"E", "Q"};
    case EvolutionEquation::Eq2: return {"J", "U"};
    case EvolutionEquation::Eq2Inhom: return {"J", "Utilde"};
  }
  return {"", ""};
}

}  // namespace detail

/// Largest stable dt for the explicit part under the configured CFL number.
inline double max_stable_dt(const EvolutionSpec& spec, const Field& u0) {
  detail::SpectralRhs rhs(spec, u0.grid);
  const double lam = rhs.stiffness(u0);
  return lam > 0.0 ? spec.cfl / lam : INFINITY;
}

inline EvolutionTrace evolve(const EvolutionSpec& spec, const Field& u0, const Field* reference = nullptr) {
  check_spec(spec.sym);
  check_nonlinearity(spec.nl);
  if (!(spec.dt > 0.0) || !(spec.t_end > 0.0)) throw ConfigError("evolve: dt and t_end must be positive");
  if (spec.record_stride < 1) throw ConfigError("evolve: record_stride must be at least 1");
  if (!all_finite(u0)) throw ConfigError("evolve: initial field is not finite");
  if (reference) require_same_grid(u0, *reference);

  const Grid& g = u0.grid;
  detail::SpectralRhs rhs(spec, g);
  Model model(spec.sym, spec.nl, g);

  const double bound = spec.cfl / std::max(rhs.stiffness(u0), 1e-300);
  if (spec.dt > bound) {
    std::ostringstream msg;
    msg << "evolve: dt = " << spec.dt << " exceeds the stability bound " << bound;
    throw ConfigError(msg.str());
  }
  const int steps = static_cast<int>(std::ceil(spec.t_end / spec.dt - 1e-9));
  const double h = spec.t_end / steps;

  EvolutionTrace tr;
  tr.names = detail::invariant_names(spec.equation);
  tr.dt_used = h;
  tr.steps = steps;
  const double sdist = spec.sym.s;

  auto uh = fft::rdft(u0.values);
  uh[g.n / 2] = 0.0;
  const double u0max = std::max(max_abs(u0), 1e-300);

  // Integrating factors e^{i omega h/2} and e^{i omega h} (identity for Eq2 forms).
  const double sign = spec.backward ? -1.0 : 1.0;
  std::vector<fft::cplx> E1(rhs.half()), E2(rhs.half());
  for (int i = 0; i < rhs.half(); ++i) {
    E1[i] = std::polar(1.0, sign * rhs.omega()[i] * h * 0.5);
    E2[i] = E1[i] * E1[i];
  }

  auto record = [&](double t, const Field& u) {
    tr.times.push_back(t);
    tr.invariants.push_back(detail::invariants_of(spec.equation, model, u));
    if (reference) tr.distance.push_back(orbital_distance(u, *reference, sdist));
  };
  Field u(g, rhs.to_physical(uh));
  record(0.0, u);
  tr.snapshots.push_back(u);
  tr.snapshot_times.push_back(0.0);

  const int n2 = rhs.half();
  std::vector<fft::cplx> tmp(n2);
  // Upper part of the resolved band; growth there signals a step size beyond the scheme's reach.
  const int band_lo = g.n / 4, band_hi = g.n / 3;
  auto band_level = [&](const std::vector<fft::cplx>& c) {
    double top = 0.0, peak = 0.0;
    for (int i = 0; i < n2; ++i) {
      const double a = std::abs(c[i]);
      peak = std::max(peak, a);
      if (i >= band_lo && i <= band_hi) top = std::max(top, a);
    }
    return peak > 0.0 ? std::max(top / peak, 1e-15) : 1e-15;
  };
  const double band0 = band_level(uh);
  for (int step = 1; step <= steps; ++step) {
    const double t = step * h;
    std::vector<fft::cplx> next(n2);
    if (spec.equation == EvolutionEquation::Eq1) {
      auto k1 = rhs(uh);
      for (int i = 0; i < n2; ++i) tmp[i] = E1[i] * (uh[i] + 0.5 * h * k1[i]);
      auto k2 = rhs(tmp);
      for (int i = 0; i < n2; ++i) tmp[i] = E1[i] * uh[i] + 0.5 * h * k2[i];
      auto k3 = rhs(tmp);
      for (int i = 0; i < n2; ++i) tmp[i] = E2[i] * uh[i] + h * E1[i] * k3[i];
      auto k4 = rhs(tmp);
      for (int i = 0; i < n2; ++i)
        next[i] = E2[i] * uh[i] + h / 6.0 * (E2[i] * k1[i] + 2.0 * E1[i] * (k2[i] + k3[i]) + k4[i]);
    } else {
      auto k1 = rhs(uh);
      for (int i = 0; i < n2; ++i) tmp[i] = uh[i] + 0.5 * h * k1[i];
      auto k2 = rhs(tmp);
      for (int i = 0; i < n2; ++i) tmp[i] = uh[i] + 0.5 * h * k2[i];
      auto k3 = rhs(tmp);
      for (int i = 0; i < n2; ++i) tmp[i] = uh[i] + h * k3[i];
      auto k4 = rhs(tmp);
      for (int i = 0; i < n2; ++i) next[i] = uh[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
    // Realness: the mean and Nyquist coefficients of a real field are real.
    const double norm0 = std::abs(next[0]) + 1e-300;
    tr.max_imag_residue = std::max(tr.max_imag_residue, std::abs(next[0].imag()) / norm0);
    next[0] = next[0].real();
    next[g.n / 2] = 0.0;

    Field unext(g, rhs.to_physical(next));
    if (!all_finite(unext) || max_abs(unext) > 1e6 * u0max) {
      tr.blow_up = true;
      break;
    }
    tr.band_growth = std::max(tr.band_growth, band_level(next) / band0);
    uh = std::move(next);
    u = std::move(unext);
    tr.last_valid_time = t;
    if (step % spec.record_stride == 0 || step == steps) record(t, u);
    if ((spec.snapshot_stride > 0 && step % spec.snapshot_stride == 0) || step == steps) {
      if (tr.snapshot_times.empty() || tr.snapshot_times.back() != t) {
        tr.snapshots.push_back(u);
        tr.snapshot_times.push_back(t);
      }
    }
  }
  if (tr.band_growth > 1e4) {
    std::ostringstream msg;
    msg << "evolve: high-frequency content grew by " << tr.band_growth << "; reduce dt";
    warn(msg.str());
  }
  if (tr.blow_up) {
    std::ostringstream msg;
    msg << "evolve: blow-up detected after t = " << tr.last_valid_time;
    warn(msg.str());
  }

  for (int k = 0; k < 2; ++k) {
    const double ref = tr.invariants.front()[k];
    double drift = 0.0;
    for (const auto& rec : tr.invariants) {
      const double diff = std::abs(rec[k] - ref);
      drift = std::max(drift, ref != 0.0 ? diff / std::abs(ref) : diff);
    }
    tr.max_drift[k] = drift;
  }
  for (double d : tr.distance) tr.max_distance = std::max(tr.max_distance, d);
  tr.final_state = u;
  return tr;
}

/// Band-limited Gaussian noise (|xi| <= band, mean mode excluded) with unit H^{s/2} norm.
inline Field band_limited_noise(const Grid& g, double s, double band, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<fft::cplx> half(g.n / 2 + 1, 0.0);
  const int imax = std::min(g.n / 2 - 1, static_cast<int>(std::floor(band * g.length)));
  if (imax < 1) throw ConfigError("noise: band contains no nonzero frequency on this grid");
  for (int i = 1; i <= imax; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    half[i] = fft::cplx(re, im);
  }
  auto v = fft::irdft(std::move(half), g.n);
  Field noise(g, std::move(v));
  const double nrm = sobolev_norm(noise, s / 2.0);
  return (1.0 / nrm) * noise;
}

struct StabilityReport {
  double perturbation_size = 0.0;
  double max_distance = 0.0;
  std::vector<double> times;
  std::vector<double> distance_series;
  bool blow_up = false;
  EvolutionTrace trace;
};

struct StabilityOptions {
  double noise_band = 1.0;
  std::uint64_t seed = 12345;
};

inline StabilityReport stability_experiment(const SolveResult& res, double perturbation_size,
                                            const EvolutionSpec& spec, const StabilityOptions& opts = {}) {
  if (!res.converged) throw ConfigError("stability_experiment: needs a converged solve");
  if (evolution_for(res.equation) != spec.equation)
    throw ConfigError("stability_experiment: evolution equation does not match the solved problem");
  if (perturbation_size < 0.0) throw ConfigError("stability_experiment: perturbation size must be nonnegative");
  const Field& w = res.u;
  const double s = spec.sym.s;
  Field u0 = w;
  if (perturbation_size > 0.0) axpy(u0, perturbation_size, band_limited_noise(w.grid, s, opts.noise_band, opts.seed));
  StabilityReport rep;
  rep.perturbation_size = perturbation_size;
  rep.trace = evolve(spec, u0, &w);
  rep.times = rep.trace.times;
  rep.distance_series = rep.trace.distance;
  rep.max_distance = rep.trace.max_distance;
  rep.blow_up = rep.trace.blow_up;
  return rep;
}

}  // namespace solwave
