#pragma once

// Constrained minimization for solitary-wave profiles, multiplier extraction,
// speed scalings and a Petviashvili fixed-point cross-check.

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "solwave/error.hpp"
#include "solwave/models.hpp"
#include "solwave/spectral.hpp"
#include "solwave/symbols.hpp"

namespace solwave {

enum class ProblemKind { Iq, Gamma, GammaTilde };

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Iq: return "Iq";
    case ProblemKind::Gamma: return "Gamma";
    case ProblemKind::GammaTilde: return "GammaTilde";
  }
  return "?";
}

enum class EquationKind { TravelingEq1, TravelingEq2, TravelingEq2Inhom };

inline const char* to_string(EquationKind k) {
  switch (k) {
    case EquationKind::TravelingEq1: return "TravelingEq1";
    case EquationKind::TravelingEq2: return "TravelingEq2";
    case EquationKind::TravelingEq2Inhom: return "TravelingEq2Inhom";
  }
  return "?";
}

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Iq;
  double q = 1.0;        // Iq
  double lambda = 1.0;   // Gamma, GammaTilde
  double kappa = 1.0;    // Gamma
  double lambda0 = 0.0;  // GammaTilde admissibility threshold
  SymbolSpec sym;
  Nonlinearity nl;
  Grid grid;

  static ProblemSpec Iq(double q, const SymbolSpec& sym, const Nonlinearity& nl, const Grid& g) {
    ProblemSpec ps;
    ps.kind = ProblemKind::Iq;
    ps.q = q;
    ps.sym = sym;
    ps.nl = nl;
    ps.grid = g;
    return ps;
  }
  static ProblemSpec Gamma(double lambda, double kappa, const SymbolSpec& sym, const Nonlinearity& nl,
                           const Grid& g) {
    ProblemSpec ps;
    ps.kind = ProblemKind::Gamma;
    ps.lambda = lambda;
    ps.kappa = kappa;
    ps.sym = sym;
    ps.nl = nl;
    ps.grid = g;
    return ps;
  }
  static ProblemSpec GammaTilde(double lambda, const SymbolSpec& sym, const Nonlinearity& nl, const Grid& g,
                                double lambda0 = 0.0) {
    ProblemSpec ps;
    ps.kind = ProblemKind::GammaTilde;
    ps.lambda = lambda;
    ps.lambda0 = lambda0;
    ps.sym = sym;
    ps.nl = nl;
    ps.grid = g;
    return ps;
  }
};

inline void check_problem(const ProblemSpec& ps) {
  check_spec(ps.sym);
  check_nonlinearity(ps.nl);
  ps.grid.validate();
  switch (ps.kind) {
    case ProblemKind::Iq:
      if (!(ps.q > 0.0)) throw ConfigError("problem: q must be positive");
      break;
    case ProblemKind::Gamma:
      if (!(ps.kappa > 0.0)) throw ConfigError("problem: kappa must be positive");
      if (ps.lambda == 0.0 || !std::isfinite(ps.lambda)) throw ConfigError("problem: lambda must be nonzero");
      if (ps.lambda < 0.0 && ps.nl.odd())
        throw ConfigError("problem: lambda must be positive for B1 (U is nonnegative)");
      break;
    case ProblemKind::GammaTilde:
      if (!(ps.lambda > ps.lambda0)) throw ConfigError("problem: lambda must exceed lambda0");
      break;
  }
}

enum class InitKind { Gaussian, Sech2 };

struct SolverOptions {
  double tol = 1e-8;              // residual <= tol (|u|_{H^{s/2}} + 1)
  double objective_rtol = 1e-12;  // relative objective change over `window` iterations
  int window = 20;
  int max_iter = 20000;
  double armijo = 1e-4;
  double step_growth = 1.5;
  double min_step = 1e-14;
  double precond_shift = 1.0;  // (L + shift)^{-1} for Iq
  bool normalize = true;
  InitKind init = InitKind::Gaussian;
  bool record_history = true;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct SolveResult {
  Field u;
  double multiplier = 0.0;  // c for Iq, gamma for Gamma/GammaTilde
  double wave_speed = 0.0;
  double objective = 0.0;
  double constraint_value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double center = 0.0;
  double multiplier_check = 0.0;  // 2 Gamma / ((p+1) lambda) for Gamma
  std::string method;
  std::string status;
  EquationKind equation = EquationKind::TravelingEq1;
  ProblemSpec problem;
  std::vector<IterationRecord> history;
  std::vector<std::string> warnings;
};

namespace detail {

/// L2 norm with the unpaired Nyquist mode excluded.
inline double resolved_l2(const Field& r) {
  return std::sqrt(weighted_energy(r, [](double) { return 1.0; }, false));
}

inline void note(SolveResult& res, const std::string& msg) {
  res.warnings.push_back(msg);
  warn(msg);
}

class StopMonitor {
 public:
  StopMonitor(int window, double rtol) : window_(window), rtol_(rtol) {}
  void push(double obj) {
    hist_.push_back(obj);
    if (static_cast<int>(hist_.size()) > window_ + 1) hist_.pop_front();
  }
  bool settled() const {
    if (static_cast<int>(hist_.size()) < window_ + 1) return false;
    const double scale = std::max(std::abs(hist_.back()), 1e-300);
    return std::abs(hist_.back() - hist_.front()) <= rtol_ * scale;
  }

 private:
  int window_;
  double rtol_;
  std::deque<double> hist_;
};


/// Backtracking search. Armijo decrease is required while it is resolvable in floating
/// point; once tau*slope drops below roundoff of the objective, a step is accepted when
/// the objective does not rise beyond roundoff and the residual, measured in the
/// preconditioner norm, strictly falls.
template <class Candidate, class Residual>
bool line_search(Field& u, double& e, double& tau, double slope, const SolverOptions& opts, Candidate&& candidate,
                 Residual&& residual_of) {
  const double floor = 1e-12 * std::max(std::abs(e), 1e-300);
  double residual_u = -1.0;
  while (tau >= opts.min_step) {
    std::optional<std::pair<Field, double>> c = candidate(tau);
    if (c) {
      auto& [v, ev] = *c;
      if (tau * slope > floor) {
        if (ev <= e - opts.armijo * tau * slope) {
          u = std::move(v);
          e = ev;
          return true;
        }
      } else if (ev <= e + 1e-13 * std::abs(e)) {
        if (residual_u < 0.0) residual_u = residual_of(u);
        if (!(residual_of(v) < residual_u)) {
          tau *= 0.5;
          continue;
        }
        u = std::move(v);
        e = std::min(e, ev);
        return true;
      }
    }
    tau *= 0.5;
  }
  return false;
}

}  // namespace detail

/// Peak location of |u| with parabolic sub-grid refinement.
inline double locate_peak(const Field& u) {
  const int n = u.size();
  int jmax = 0;
  for (int j = 1; j < n; ++j)
    if (std::abs(u[j]) > std::abs(u[jmax])) jmax = j;
  const double a = std::abs(u[(jmax - 1 + n) % n]), b = std::abs(u[jmax]), c = std::abs(u[(jmax + 1) % n]);
  const double den = a - 2.0 * b + c;
  const double delta = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
  return u.grid.x(jmax) + std::clamp(delta, -0.5, 0.5) * u.grid.dx();
}

/// Shifts u so its peak sits at x = 0; returns the removed offset.
inline double center_profile(Field& u) {
  const double c = locate_peak(u);
  u = translate(u, -c);
  return c;
}

inline Field default_init(const Grid& g, InitKind kind) {
  if (kind == InitKind::Sech2)
    return make_field(g, [](double x) {
      const double s = 1.0 / std::cosh(0.5 * x);
      return s * s;
    });
  return make_field(g, [](double x) { return std::exp(-0.25 * x * x); });
}

inline double residual_norm(const Field& u, double c, EquationKind eq, const SymbolSpec& sym,
                            const Nonlinearity& nl) {
  Model model(sym, nl, u.grid);
  Field Lu = model.Lu(u);
  Field f = model.f(u);
  Field r(u.grid);
  for (int j = 0; j < u.size(); ++j) {
    switch (eq) {
      case EquationKind::TravelingEq1: r[j] = Lu[j] + c * u[j] - f[j]; break;
      case EquationKind::TravelingEq2: r[j] = c * (Lu[j] + u[j]) - f[j]; break;
      case EquationKind::TravelingEq2Inhom: r[j] = c * Lu[j] + (c - 1.0) * u[j] - f[j]; break;
    }
  }
  return detail::resolved_l2(r);
}

// ---- I_q: minimize E on {Q = q} -------------------------------------------------

inline SolveResult minimize_Iq(const ProblemSpec& ps, const Field& init, const SolverOptions& opts = {}) {
  if (ps.kind != ProblemKind::Iq) throw ConfigError("minimize_Iq: wrong problem kind");
  check_problem(ps);
  if (init.grid != ps.grid) throw GeometryError("minimize_Iq: init grid mismatch");

  SolveResult res;
  res.method = "Iq";
  res.problem = ps;
  res.equation = EquationKind::TravelingEq1;

  auto cls = classify_exponent(ps.sym.s, ps.nl.p);
  if (cls.status != ExponentStatus::stable_existence) {
    std::ostringstream msg;
    msg << "Iq: p = " << ps.nl.p << " is not below 2s+1 = " << cls.stability_hi
        << "; the energy is unbounded below on the constraint set";
    detail::note(res, msg.str());
  }

  Model model(ps.sym, ps.nl, ps.grid);
  const double q = ps.q;
  const double shift = opts.precond_shift;
  Multiplier pre = model.L().transformed([shift](double m) { return 1.0 / (m + shift); });
  auto project = [&](Field v) {
    const double Qv = model.Q(v);
    if (!(Qv > 0.0)) return v;
    return std::sqrt(q / Qv) * v;
  };

  Field u = project(drop_nyquist(init));
  if (!(model.Q(u) > 0.0)) throw ConfigError("minimize_Iq: initial guess is zero");
  double e = model.E(u);
  double tau = 1.0;
  detail::StopMonitor monitor(opts.window, opts.objective_rtol);
  double c = 0.0, residual = INFINITY;
  bool done = false;

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    Field Lu = model.Lu(u);
    Field f = model.f(u);
    Field g = Lu - f;
    c = (inner(f, u) - inner(Lu, u)) / (2.0 * q);
    Field r = g;
    axpy(r, c, u);
    residual = detail::resolved_l2(r);
    const double threshold = opts.tol * (sobolev_norm(u, ps.sym.s / 2.0) + 1.0);
    monitor.push(e);
    if (opts.record_history) res.history.push_back({it, e, residual, tau});
    if (residual <= threshold && monitor.settled()) {
      done = true;
      res.status = "converged";
      break;
    }

    // d is unchanged by adding multiples of u to g; using the residual r = g + c u
    // avoids cancellation in the slope near convergence.
    Field G = pre.apply(r);
    Field N = pre.apply(u);
    const double coef = inner(r, N) / inner(u, N);
    Field d = G;
    axpy(d, -coef, N);
    const double slope = inner(r, d);
    if (!(slope > 0.0)) {
      done = residual <= threshold;
      res.status = done ? "converged" : "stalled";
      break;
    }
    auto candidate = [&](double step) -> std::optional<std::pair<Field, double>> {
      Field v = u;
      axpy(v, -step, d);
      v = project(std::move(v));
      const double ev = model.E(v);
      return std::make_pair(std::move(v), ev);
    };
    auto residual_of = [&](const Field& v) {
      Field Lv = model.Lu(v);
      Field fv = model.f(v);
      Field gv = Lv - fv;
      axpy(gv, (inner(fv, v) - inner(Lv, v)) / (2.0 * q), v);
      Field Nv = pre.apply(v);
      Field dv = pre.apply(gv);
      axpy(dv, -inner(gv, Nv) / inner(v, Nv), Nv);
      return inner(gv, dv);
    };
    const bool accepted = detail::line_search(u, e, tau, slope, opts, candidate, residual_of);
    if (!accepted) {
      done = residual <= threshold;
      res.status = done ? "converged" : "stalled";
      break;
    }
    tau *= opts.step_growth;
  }
  if (it == opts.max_iter) res.status = "max_iter";

  if (opts.normalize) res.center = center_profile(u);
  res.u = u;
  res.iterations = it;
  res.objective = model.E(u);
  res.constraint_value = model.Q(u);
  Field Lu = model.Lu(u);
  res.multiplier = (inner(model.f(u), u) - inner(Lu, u)) / (2.0 * q);
  res.wave_speed = res.multiplier;
  res.residual = residual_norm(u, res.multiplier, EquationKind::TravelingEq1, ps.sym, ps.nl);
  res.converged = done;
  if (res.multiplier <= 0.0) detail::note(res, "Iq: extracted wave speed is not positive; grid may be under-resolved");
  if (boundary_tail(u) > 1e-10)
    detail::note(res, "Iq: profile tail at the domain boundary exceeds 1e-10 of the peak");
  return res;
}

// ---- Gamma_lambda(kappa): minimize J_kappa on {U = lambda} -------------------------

namespace detail {

inline SolveResult minimize_Gamma_positive(const ProblemSpec& ps, Field u, const SolverOptions& opts) {
  SolveResult res;
  res.method = "Gamma";
  res.problem = ps;
  res.equation = ps.kappa == 1.0 ? EquationKind::TravelingEq2 : EquationKind::TravelingEq1;

  Model model(ps.sym, ps.nl, ps.grid);
  const double p = ps.nl.p, lambda = ps.lambda, kappa = ps.kappa;
  const double expo = 2.0 / (p + 1.0);
  Multiplier pre = model.L().transformed([kappa](double m) { return 1.0 / (m + kappa); });

  auto rescale = [&](const Field& v) -> std::optional<Field> {
    const double Uv = model.U(v);
    if (!(Uv > 0.0) || !std::isfinite(Uv)) return std::nullopt;
    return std::pow(lambda / Uv, 1.0 / (p + 1.0)) * v;
  };
  auto quotient = [&](const Field& v) { return model.J(v, kappa) / std::pow(model.U(v), expo); };

  u = drop_nyquist(u);
  if (!(model.U(u) > 0.0)) {
    if (!ps.nl.odd() && model.U(-u) > 0.0) {
      u = -u;
      note(res, "Gamma: initial guess had the wrong sign of U; using its negative");
    } else {
      throw ConfigError("minimize_Gamma: U(init) must be nonzero with the sign of lambda");
    }
  }
  u = *rescale(u);
  double e = quotient(u);
  double tau = 1.0;
  StopMonitor monitor(opts.window, opts.objective_rtol);
  double gamma = 0.0, residual = INFINITY;
  bool done = false;

  auto extract = [&](const Field& v, double& gam, bool precond = false) {
    Field A = model.Lu(v);
    axpy(A, kappa, v);
    Field f = drop_nyquist(model.f(v));
    gam = inner(A, f) / inner(f, f);
    axpy(A, -gam, f);
    return precond ? std::sqrt(inner(A, pre.apply(A))) : resolved_l2(A);
  };

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    residual = extract(u, gamma);
    const double threshold = opts.tol * (sobolev_norm(u, ps.sym.s / 2.0) + 1.0);
    monitor.push(e);
    if (opts.record_history) res.history.push_back({it, model.J(u, kappa), residual, tau});
    if (residual <= threshold && monitor.settled()) {
      done = true;
      res.status = "converged";
      break;
    }

    const double Ju = model.J(u, kappa), Uu = model.U(u);
    Field g = model.Lu(u);
    axpy(g, kappa, u);
    axpy(g, -2.0 * Ju / ((p + 1.0) * Uu), model.f(u));
    g = std::pow(Uu, -expo) * g;
    Field d = pre.apply(g);
    const double slope = inner(g, d);
    if (!(slope > 0.0)) {
      done = residual <= threshold;
      res.status = done ? "converged" : "stalled";
      break;
    }
    auto candidate = [&](double step) -> std::optional<std::pair<Field, double>> {
      Field v = u;
      axpy(v, -step, d);
      auto w = rescale(v);
      if (!w) return std::nullopt;
      const double ev = quotient(*w);
      return std::make_pair(std::move(*w), ev);
    };
    auto residual_of = [&](const Field& v) {
      double gv;
      return extract(v, gv, true);
    };
    const bool accepted = line_search(u, e, tau, slope, opts, candidate, residual_of);
    if (!accepted) {
      done = residual <= threshold;
      res.status = done ? "converged" : "stalled";
      break;
    }
    tau *= opts.step_growth;
  }
  if (it == opts.max_iter) res.status = "max_iter";

  if (opts.normalize) res.center = center_profile(u);
  res.u = u;
  res.iterations = it;
  res.objective = model.J(u, kappa);
  res.constraint_value = model.U(u);
  res.residual = extract(u, gamma);
  res.multiplier = gamma;
  res.multiplier_check = 2.0 * res.objective / ((p + 1.0) * lambda);
  res.wave_speed = kappa == 1.0 ? 1.0 / gamma : kappa;
  res.converged = done;
  return res;
}

}  // namespace detail

inline SolveResult minimize_Gamma(const ProblemSpec& ps, const Field& init, const SolverOptions& opts = {}) {
  if (ps.kind != ProblemKind::Gamma) throw ConfigError("minimize_Gamma: wrong problem kind");
  check_problem(ps);
  if (init.grid != ps.grid) throw GeometryError("minimize_Gamma: init grid mismatch");
  auto cls = classify_exponent(ps.sym.s, ps.nl.p);
  std::vector<std::string> pre_warnings;
  if (cls.status == ExponentStatus::out_of_range) {
    std::ostringstream msg;
    msg << "Gamma: p = " << ps.nl.p << " is outside the existence range (1, " << cls.existence_hi << ")";
    pre_warnings.push_back(msg.str());
    warn(msg.str());
  }

  SolveResult res;
  if (ps.lambda > 0.0) {
    res = detail::minimize_Gamma_positive(ps, init, opts);
  } else {
    // U(-u) = -U(u) for the even nonlinearity: solve the mirrored problem.
    ProblemSpec mirrored = ps;
    mirrored.lambda = -ps.lambda;
    res = detail::minimize_Gamma_positive(mirrored, -init, opts);
    res.problem = ps;
    res.u = -res.u;
    res.multiplier = -res.multiplier;
    res.constraint_value = -res.constraint_value;
    res.multiplier_check = 2.0 * res.objective / ((ps.nl.p + 1.0) * ps.lambda);
    res.wave_speed = ps.kappa == 1.0 ? 1.0 / res.multiplier : ps.kappa;
  }
  res.warnings.insert(res.warnings.begin(), pre_warnings.begin(), pre_warnings.end());
  return res;
}

// ---- tilde Gamma_lambda: minimize J_1 on {Utilde = lambda} ---------------------------

namespace detail {

/// Positive amplitude a with Q(v) a^2 + U(v) a^{p+1} = lambda, if one exists.
inline std::optional<double> amplitude_root(double Qv, double Uv, double p, double lambda) {
  auto h = [&](double a) { return Qv * a * a + Uv * std::pow(a, p + 1.0) - lambda; };
  if (!(Qv > 0.0)) return std::nullopt;
  double hi = 1.0;
  int guard = 0;
  while (h(hi) < 0.0) {
    const double prev = h(hi);
    hi *= 2.0;
    if (++guard > 200 || h(hi) < prev) return std::nullopt;  // past the maximum, no root on this ray
  }
  double lo = 0.0;
  if (h(hi) == 0.0) return hi;
  std::uintmax_t max_iter = 200;
  auto [a, b] = boost::math::tools::toms748_solve(h, lo, hi, -lambda, h(hi),
                                                  boost::math::tools::eps_tolerance<double>(52), max_iter);
  double root = 0.5 * (a + b);
  // Newton polish for the 1e-10 relative constraint target.
  for (int k = 0; k < 3; ++k) {
    const double dh = 2.0 * Qv * root + (p + 1.0) * Uv * std::pow(root, p);
    if (dh == 0.0) break;
    root -= h(root) / dh;
  }
  return root;
}

}  // namespace detail

inline SolveResult minimize_GammaTilde(const ProblemSpec& ps, const Field& init, const SolverOptions& opts = {}) {
  if (ps.kind != ProblemKind::GammaTilde) throw ConfigError("minimize_GammaTilde: wrong problem kind");
  check_problem(ps);
  if (init.grid != ps.grid) throw GeometryError("minimize_GammaTilde: init grid mismatch");

  SolveResult res;
  res.method = "GammaTilde";
  res.problem = ps;
  res.equation = EquationKind::TravelingEq2Inhom;

  Model model(ps.sym, ps.nl, ps.grid);
  const double p = ps.nl.p, lambda = ps.lambda;
  Multiplier pre = model.L().transformed([](double m) { return 1.0 / (m + 1.0); });

  auto restore = [&](const Field& v) -> std::optional<Field> {
    auto a = detail::amplitude_root(model.Q(v), model.U(v), p, lambda);
    if (!a || !(*a > 0.0)) return std::nullopt;
    return *a * v;
  };

  Field u = drop_nyquist(init);
  {
    auto r0 = restore(u);
    if (!r0 && !ps.nl.odd()) r0 = restore(-u);
    if (!r0) throw ConfigError("minimize_GammaTilde: no amplitude of the initial guess meets the constraint");
    u = std::move(*r0);
  }
  double e = model.J(u, 1.0);
  double tau = 1.0;
  detail::StopMonitor monitor(opts.window, opts.objective_rtol);
  double gamma = 0.0, residual = INFINITY;
  bool done = false;
  int bracket_failures = 0;

  auto extract = [&](const Field& v, double& gam, bool precond = false) {
    Field A = model.Lu(v);
    axpy(A, 1.0, v);
    Field nrm = drop_nyquist(v + model.f(v));
    gam = inner(A, nrm) / inner(nrm, nrm);
    axpy(A, -gam, nrm);
    return precond ? std::sqrt(inner(A, pre.apply(A))) : detail::resolved_l2(A);
  };

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    residual = extract(u, gamma);
    const double threshold = opts.tol * (sobolev_norm(u, ps.sym.s / 2.0) + 1.0);
    monitor.push(e);
    if (opts.record_history) res.history.push_back({it, e, residual, tau});
    if (residual <= threshold && monitor.settled()) {
      done = true;
      res.status = "converged";
      break;
    }

    Field nrm = u + model.f(u);
    Field g = model.Lu(u);
    axpy(g, 1.0, u);
    axpy(g, -gamma, nrm);  // remove the normal part first, as for Iq
    Field G = pre.apply(g);
    Field N = pre.apply(nrm);
    Field d = G;
    axpy(d, -inner(g, N) / inner(nrm, N), N);
    const double slope = inner(g, d);
    if (!(slope > 0.0)) {
      done = residual <= threshold;
      res.status = done ? "converged" : "stalled";
      break;
    }
    auto candidate = [&](double step) -> std::optional<std::pair<Field, double>> {
      Field v = u;
      axpy(v, -step, d);
      auto w = restore(v);
      if (!w) {
        ++bracket_failures;
        return std::nullopt;
      }
      const double ev = model.J(*w, 1.0);
      return std::make_pair(std::move(*w), ev);
    };
    auto residual_of = [&](const Field& v) {
      double gv;
      return extract(v, gv, true);
    };
    const bool accepted = detail::line_search(u, e, tau, slope, opts, candidate, residual_of);
    if (!accepted) {
      done = residual <= threshold;
      res.status = done ? "converged" : (bracket_failures > 0 ? "bracket_failure" : "stalled");
      break;
    }
    tau *= opts.step_growth;
  }
  if (it == opts.max_iter) res.status = "max_iter";
  if (bracket_failures > 0) {
    std::ostringstream msg;
    msg << "GammaTilde: amplitude bracket failed " << bracket_failures << " times during line search";
    res.warnings.push_back(msg.str());
  }

  if (opts.normalize) res.center = center_profile(u);
  res.u = u;
  res.iterations = it;
  res.objective = model.J(u, 1.0);
  res.constraint_value = model.Utilde(u);
  res.residual = extract(u, gamma);
  res.multiplier = gamma;
  res.wave_speed = 1.0 / gamma;
  res.converged = done;
  return res;
}

inline SolveResult solve(const ProblemSpec& ps, const Field& init, const SolverOptions& opts = {}) {
  switch (ps.kind) {
    case ProblemKind::Iq: return minimize_Iq(ps, init, opts);
    case ProblemKind::Gamma: return minimize_Gamma(ps, init, opts);
    case ProblemKind::GammaTilde: return minimize_GammaTilde(ps, init, opts);
  }
  throw ConfigError("solve: unknown problem kind");
}

// ---- scalings to prescribed speed -------------------------------------------------

enum class ScaleMode { Scale1, Scale2 };

struct ScaledSolution {
  Field v;
  EquationKind equation = EquationKind::TravelingEq1;
  double wave_speed = 0.0;
  double beta = 1.0;
  double residual = 0.0;
  bool verified = false;
};

/// v = beta u with beta^{p-1} = gamma (Scale1) or kappa gamma (Scale2).
inline ScaledSolution scale_solution(const SolveResult& res, ScaleMode mode, double kappa, double tol = 1e-6) {
  if (res.method != "Gamma") throw ConfigError("scale_solution: needs a Gamma result");
  const auto& ps = res.problem;
  const double gamma = res.multiplier;
  if (!(gamma > 0.0)) throw ConfigError("scale_solution: gamma must be positive");
  if (!(kappa > 0.0)) throw ConfigError("scale_solution: kappa must be positive");
  const double p = ps.nl.p;
  const double rel = 1e-12;
  ScaledSolution out;
  out.wave_speed = kappa;
  if (mode == ScaleMode::Scale1) {
    if (std::abs(ps.kappa - kappa) > rel * kappa)
      throw ConfigError("scale_solution: Scale1 needs a result solved with the same kappa");
    out.beta = std::pow(gamma, 1.0 / (p - 1.0));
    out.equation = EquationKind::TravelingEq1;
  } else if (ps.nl.inhomogeneous()) {
    if (!(kappa > 1.0)) throw ConfigError("scale_solution: inhomogeneous route needs kappa > 1");
    if (std::abs(ps.kappa - (1.0 - 1.0 / kappa)) > rel)
      throw ConfigError("scale_solution: inhomogeneous route needs a result solved with kappa' = 1 - 1/kappa");
    out.beta = std::pow(kappa * gamma, 1.0 / (p - 1.0));
    out.equation = EquationKind::TravelingEq2Inhom;
  } else {
    if (std::abs(ps.kappa - 1.0) > rel) throw ConfigError("scale_solution: Scale2 needs a result solved with kappa = 1");
    out.beta = std::pow(kappa * gamma, 1.0 / (p - 1.0));
    out.equation = EquationKind::TravelingEq2;
  }
  out.v = out.beta * res.u;
  out.residual = residual_norm(out.v, kappa, out.equation, ps.sym, ps.nl);
  out.verified = out.residual < tol;
  return out;
}

// ---- Petviashvili iteration ------------------------------------------------------

inline SolveResult petviashvili(const SymbolSpec& sym, const Nonlinearity& nl, double c, EquationKind eq,
                                const Field& init, const SolverOptions& opts = {}) {
  check_spec(sym);
  check_nonlinearity(nl);
  if (eq == EquationKind::TravelingEq2Inhom ? !(c > 1.0) : !(c > 0.0))
    throw ConfigError("petviashvili: wave speed outside the coercive range");

  SolveResult res;
  res.method = "Petviashvili";
  res.equation = eq;
  res.problem.sym = sym;
  res.problem.nl = nl;
  res.problem.grid = init.grid;

  Model model(sym, nl, init.grid);
  Multiplier A = model.L().transformed([c, eq](double m) {
    switch (eq) {
      case EquationKind::TravelingEq1: return m + c;
      case EquationKind::TravelingEq2: return c * (m + 1.0);
      case EquationKind::TravelingEq2Inhom: return c * m + (c - 1.0);
    }
    return m;
  });
  Multiplier Ainv = A.transformed([](double a) { return 1.0 / a; });
  const double sigma = nl.p / (nl.p - 1.0);

  Field u = drop_nyquist(init);
  if (!nl.odd() && inner(model.f(u), u) < 0.0) u = -u;
  double residual = INFINITY;
  bool done = false;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    Field Au = A.apply(u);
    Field f = model.f(u);
    Field r = Au - f;
    residual = detail::resolved_l2(r);
    const double threshold = opts.tol * (sobolev_norm(u, sym.s / 2.0) + 1.0);
    const double M = inner(Au, u) / inner(f, u);
    if (opts.record_history) res.history.push_back({it, M, residual, 0.0});
    if (residual <= threshold) {
      done = true;
      res.status = "converged";
      break;
    }
    if (!std::isfinite(M) || M <= 1e-12 || M > 1e12 || !all_finite(u)) {
      res.status = "diverged";
      break;
    }
    u = std::pow(M, sigma) * Ainv.apply(f);
  }
  if (it == opts.max_iter) res.status = "max_iter";

  if (opts.normalize && all_finite(u)) res.center = center_profile(u);
  res.u = u;
  res.iterations = it;
  res.multiplier = c;
  res.wave_speed = c;
  res.residual = residual_norm(u, c, eq, sym, nl);
  res.converged = done;
  switch (eq) {
    case EquationKind::TravelingEq1:
      res.objective = model.E(u);
      res.constraint_value = model.Q(u);
      break;
    case EquationKind::TravelingEq2:
      res.objective = model.J(u, 1.0);
      res.constraint_value = model.U(u);
      break;
    case EquationKind::TravelingEq2Inhom:
      res.objective = model.J(u, 1.0);
      res.constraint_value = model.Utilde(u);
      break;
  }
  return res;
}

// ---- multiplier sign check ----------------------------------------------------------

struct PositivityReport {
  bool positive = false;             // extracted c > 0
  bool identity_applicable = false;  // E(w) < 0 and int F(w) > 0
  bool consistent = false;           // identity agrees in sign with c
  double c_extracted = 0.0;
  double c_identity = 0.0;
  double dE_dtheta = 0.0;  // 2 E(w) - (p-1) int F(w)
  std::string verdict;     // "positive", "negative" or "indeterminate"
};

inline PositivityReport multiplier_positivity_check(const SolveResult& res) {
  if (res.method != "Iq") throw ConfigError("multiplier_positivity_check: needs an Iq result");
  const auto& ps = res.problem;
  Model model(ps.sym, ps.nl, res.u.grid);
  PositivityReport rep;
  const double E = model.E(res.u), U = model.U(res.u), Q = model.Q(res.u);
  rep.c_extracted = res.multiplier;
  rep.positive = res.multiplier > 0.0;
  rep.dE_dtheta = 2.0 * E - (ps.nl.p - 1.0) * U;
  rep.c_identity = -rep.dE_dtheta / (2.0 * Q);
  rep.identity_applicable = E < 0.0 && U > 0.0;
  rep.consistent = rep.identity_applicable && rep.dE_dtheta < 0.0 && rep.positive;
  if (!rep.identity_applicable)
    rep.verdict = "indeterminate";
  else
    rep.verdict = rep.consistent ? "positive" : "negative";
  return rep;
}

}  // namespace solwave
