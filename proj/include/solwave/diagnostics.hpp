#pragma once

// Spectral regularity checks and parameter curves with the monotonicity, negativity,
// subadditivity and scaling predicates evaluated on the attained minima.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "solwave/error.hpp"
#include "solwave/solver.hpp"
#include "solwave/spectral.hpp"

namespace solwave {

struct RegularityReport {
  double h_half_s_norm = 0.0;
  double h_s_norm = 0.0;
  double tail_exponent_estimate = 0.0;
  bool tail_reliable = false;
  int tail_points = 0;
  double roundoff_floor = 0.0;
  double refined_h_s_norm = 0.0;
  double refinement_change = 0.0;  // relative change of the H^s norm under n -> 2n
  bool refinement_stable = false;
};

/// log|c| ~ -tau log xi over the top decade of frequencies that sit above the roundoff floor.
inline void fit_spectral_tail(const Field& u, RegularityReport& rep) {
  const Grid& g = u.grid;
  auto half = fft::rdft(u.values);
  double peak = 0.0;
  for (int i = 0; i < g.n / 2; ++i) peak = std::max(peak, std::abs(half[i]));
  rep.roundoff_floor = 1e2 * std::numeric_limits<double>::epsilon() * peak;
  int top = 0;
  for (int i = 1; i < g.n / 2; ++i)
    if (std::abs(half[i]) > rep.roundoff_floor) top = i;
  const int lo = std::max(1, top / 10);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int i = lo; i <= top; ++i) {
    const double a = std::abs(half[i]);
    if (!(a > rep.roundoff_floor)) continue;
    const double x = std::log(g.xi_half(i)), y = std::log(a);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++m;
  }
  rep.tail_points = m;
  const double den = m * sxx - sx * sx;
  if (m < 4 || top < 10 || !(den > 0.0)) {
    rep.tail_reliable = false;
    rep.tail_exponent_estimate = 0.0;
    return;
  }
  rep.tail_exponent_estimate = -(m * sxy - sx * sy) / den;
  rep.tail_reliable = true;
}

/// `refine(n)` should re-solve the problem on n points; without it the field is
/// spectrally interpolated, which only checks that the norm is resolved.
inline RegularityReport regularity_profile(const Field& u, const SymbolSpec& sym,
                                           const std::function<Field(int)>& refine = nullptr) {
  check_spec(sym);
  RegularityReport rep;
  rep.h_half_s_norm = sobolev_norm(u, 0.5 * sym.s);
  rep.h_s_norm = sobolev_norm(u, sym.s);
  fit_spectral_tail(u, rep);
  const Field fine = refine ? refine(2 * u.grid.n) : resample(u, 2 * u.grid.n);
  rep.refined_h_s_norm = sobolev_norm(fine, sym.s);
  if (rep.h_s_norm == 0.0) {
    rep.refinement_change = rep.refined_h_s_norm == 0.0 ? 0.0 : 1.0;
  } else {
    rep.refinement_change = std::abs(rep.refined_h_s_norm - rep.h_s_norm) / rep.h_s_norm;
  }
  rep.refinement_stable = rep.refinement_change < 0.01;
  return rep;
}

// ---- curve study ---------------------------------------------------------------

struct CurveRow {
  double param = 0.0;  // q or lambda
  bool ok = false;     // solve finished and converged
  std::string error;
  SolveResult result;
};

struct Predicate {
  std::string name;
  bool evaluated = false;  // false when every needed row failed
  bool passed = false;
  double worst = 0.0;  // smallest slack (negative means violated)
  std::string detail;
};

struct CurveStudyOptions {
  SolverOptions solver;
  int threads = 1;
  double scaling_tol = 5e-3;      // relative, Gamma_{theta l} / Gamma_l vs theta^{2/(p+1)}
  double monotone_tol = 1e-8;     // relative slack for monotonicity
  double subadd_margin = 1e-2;    // fraction of |objective| for strict subadditivity
  double multiplier_tol = 1e-3;   // gamma vs 2 Gamma / ((p+1) lambda)
};

struct CurveStudy {
  ProblemKind kind = ProblemKind::Iq;
  std::vector<CurveRow> rows;
  std::vector<Predicate> predicates;

  bool all_converged() const {
    return std::all_of(rows.begin(), rows.end(), [](const CurveRow& r) { return r.ok; });
  }
  bool predicates_pass() const {
    return std::all_of(predicates.begin(), predicates.end(),
                       [](const Predicate& p) { return !p.evaluated || p.passed; });
  }
  const CurveRow* find(double param) const {
    for (const auto& r : rows)
      if (r.ok && std::abs(r.param - param) <= 1e-12 * std::max(1.0, std::abs(param))) return &r;
    return nullptr;
  }
};

/// Runs fn(i) for i in [0, count) on at most `threads` workers.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
}

namespace detail {

inline Predicate begin_predicate(std::string name) {
  Predicate p;
  p.name = std::move(name);
  p.passed = true;
  p.worst = std::numeric_limits<double>::infinity();
  return p;
}

inline void record(Predicate& p, double slack, const std::string& what) {
  p.evaluated = true;
  if (slack < p.worst) p.worst = slack;
  if (slack < 0.0) {
    p.passed = false;
    if (!p.detail.empty()) p.detail += "; ";
    p.detail += what;
  }
}

inline void finish(CurveStudy& st, Predicate p) {
  if (!p.evaluated) {
    p.passed = false;
    p.worst = 0.0;
    p.detail = "no converged rows to compare";
  }
  st.predicates.push_back(std::move(p));
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

inline void iq_predicates(CurveStudy& st, const CurveStudyOptions& o) {
  auto neg = begin_predicate("objective_negative");
  auto pos = begin_predicate("wave_speed_positive");
  for (const auto& r : st.rows) {
    if (!r.ok) continue;
    record(neg, -r.result.objective, "I(" + fmt(r.param) + ") = " + fmt(r.result.objective));
    record(pos, r.result.wave_speed, "c(" + fmt(r.param) + ") = " + fmt(r.result.wave_speed));
  }
  finish(st, neg);
  finish(st, pos);
  auto sub = begin_predicate("strict_subadditivity");
  for (const auto& a : st.rows)
    for (const auto& b : st.rows) {
      if (!a.ok || !b.ok || b.param < a.param) continue;
      const CurveRow* ab = st.find(a.param + b.param);
      if (!ab) continue;
      const double lhs = ab->result.objective, rhs = a.result.objective + b.result.objective;
      record(sub, rhs - lhs - o.subadd_margin * std::abs(lhs),
             "I(" + fmt(ab->param) + ") not below I(" + fmt(a.param) + ") + I(" + fmt(b.param) + ")");
    }
  finish(st, sub);
}

inline void gamma_predicates(CurveStudy& st, const CurveStudyOptions& o, bool tilde) {
  std::vector<const CurveRow*> ok;
  for (const auto& r : st.rows)
    if (r.ok) ok.push_back(&r);
  std::sort(ok.begin(), ok.end(), [](auto* a, auto* b) { return a->param < b->param; });

  auto mono = begin_predicate("monotone_in_lambda");
  for (std::size_t i = 1; i < ok.size(); ++i) {
    if (ok[i - 1]->param <= 0.0) continue;
    const double a = ok[i - 1]->result.objective, b = ok[i]->result.objective;
    record(mono, b - a + o.monotone_tol * std::abs(a),
           "objective drops from " + fmt(ok[i - 1]->param) + " to " + fmt(ok[i]->param));
  }
  finish(st, mono);

  if (!tilde) {
    auto scal = begin_predicate("scaling_law");
    for (auto* a : ok)
      for (auto* b : ok) {
        if (!(a->param > 0.0) || !(b->param > a->param)) continue;
        const double theta = b->param / a->param;
        const double p = a->result.problem.nl.p;
        const double want = std::pow(theta, 2.0 / (p + 1.0));
        const double got = b->result.objective / a->result.objective;
        record(scal, o.scaling_tol - std::abs(got / want - 1.0),
               "ratio " + fmt(got) + " vs " + fmt(want) + " at theta " + fmt(theta));
      }
    finish(st, scal);

    auto mult = begin_predicate("multiplier_identity");
    auto speed = begin_predicate("speed_times_gamma");
    for (auto* r : ok) {
      const double g = r->result.multiplier, chk = r->result.multiplier_check;
      record(mult, o.multiplier_tol - std::abs(g / chk - 1.0),
             "gamma " + fmt(g) + " vs " + fmt(chk) + " at " + fmt(r->param));
      if (r->result.problem.kappa == 1.0)
        record(speed, 1e-12 - std::abs(r->result.wave_speed * g - 1.0), "c gamma != 1 at " + fmt(r->param));
    }
    finish(st, mult);
    if (speed.evaluated) st.predicates.push_back(speed);
  }

  // Gamma_l < Gamma_{l - a} + Gamma_a; for the tilde problem the sub-unit scaling
  // Gamma~_{theta l} < theta Gamma~_l.
  auto sub = begin_predicate(tilde ? "sub_unit_scaling" : "strict_subadditivity");
  for (auto* a : ok)
    for (auto* b : ok) {
      if (!(a->param > 0.0) || !(b->param >= a->param)) continue;
      if (tilde) {
        if (b->param == a->param) continue;
        const double theta = b->param / a->param;
        const double lhs = b->result.objective, rhs = theta * a->result.objective;
        record(sub, rhs - lhs - o.subadd_margin * std::abs(lhs),
               "objective(" + fmt(b->param) + ") not below theta * objective(" + fmt(a->param) + ")");
      } else {
        const CurveRow* ab = st.find(a->param + b->param);
        if (!ab) continue;
        const double lhs = ab->result.objective, rhs = a->result.objective + b->result.objective;
        record(sub, rhs - lhs - o.subadd_margin * std::abs(lhs),
               "objective(" + fmt(ab->param) + ") not below the split sum");
      }
    }
  finish(st, sub);
}

}  // namespace detail

/// Solves `base` at every q (Iq) or lambda (Gamma, GammaTilde) in `params`.
inline CurveStudy curve_study(const ProblemSpec& base, const std::vector<double>& params,
                              const CurveStudyOptions& opts = {}) {
  if (params.empty()) throw ConfigError("curve_study: empty parameter grid");
  CurveStudy st;
  st.kind = base.kind;
  st.rows.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    ProblemSpec ps = base;
    if (base.kind == ProblemKind::Iq)
      ps.q = params[i];
    else
      ps.lambda = params[i];
    check_problem(ps);
  }
  parallel_for(static_cast<int>(params.size()), opts.threads, [&](int i) {
    CurveRow& row = st.rows[i];
    row.param = params[i];
    ProblemSpec ps = base;
    if (base.kind == ProblemKind::Iq)
      ps.q = params[i];
    else
      ps.lambda = params[i];
    try {
      row.result = solve(ps, default_init(ps.grid, opts.solver.init), opts.solver);
      row.ok = row.result.converged;
      if (!row.ok) row.error = row.result.status;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });
  switch (base.kind) {
    case ProblemKind::Iq: detail::iq_predicates(st, opts); break;
    case ProblemKind::Gamma: detail::gamma_predicates(st, opts, false); break;
    case ProblemKind::GammaTilde: detail::gamma_predicates(st, opts, true); break;
  }
  return st;
}

}  // namespace solwave
