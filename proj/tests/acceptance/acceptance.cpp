// Acceptance checks. `acceptance` runs all of them, `acceptance 3 9` runs a subset.
// One line per criterion: "AC<k> PASS|FAIL <summary>", plus indented detail lines.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "solwave/solwave.hpp"

using namespace solwave;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_error(const Field& u, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (int j = 0; j < u.size(); ++j) e = std::max(e, std::abs(u[j] - exact(u.grid.x(j))));
  return e;
}

double sech2(double x) {
  const double s = 1.0 / std::cosh(x);
  return s * s;
}

const SymbolSpec kdv_sym = neg_second_derivative();
const Nonlinearity square = make_nonlinearity(NonlinearForm::B2, 2.0);

// ---------------------------------------------------------------------------

Outcome closed_form_soliton() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Grid g(80.0, 2048);
  const auto init = default_init(g, InitKind::Gaussian);
  const auto iq = minimize_Iq(ProblemSpec::Iq(3.0, kdv_sym, square, g), init);
  const double c = iq.multiplier;
  auto exact = [](double c) { return [c](double x) { return 1.5 * c * sech2(std::sqrt(c) * x / 2); }; };
  const double e1 = max_error(iq.u, exact(c));
  const double r1 = residual_norm(iq.u, c, EquationKind::TravelingEq1, kdv_sym, square);
  o.check(iq.converged, "minimize_Iq converged (" + iq.status + ")");
  o.check(e1 < 1e-5, fmt("minimize_Iq: c=%.10f max error %.3e < 1e-5", c, e1));
  o.check(r1 < 1e-7, fmt("minimize_Iq: residual %.3e < 1e-7", r1));

  const auto pv = petviashvili(kdv_sym, square, c, EquationKind::TravelingEq1, init);
  const double e2 = max_error(pv.u, exact(c));
  const double r2 = residual_norm(pv.u, c, EquationKind::TravelingEq1, kdv_sym, square);
  o.check(pv.converged, "petviashvili converged (" + pv.status + ")");
  o.check(e2 < 1e-5, fmt("petviashvili at the extracted c: max error %.3e < 1e-5", e2));
  o.check(r2 < 1e-7, fmt("petviashvili: residual %.3e < 1e-7", r2));
  const double t = seconds_since(t0);
  o.check(t < 30.0, fmt("runtime %.2f s < 30 s", t));
  o.summary = fmt("sech^2 oracle: Iq error %.2e, Petviashvili error %.2e", e1, e2);
  return o;
}

Outcome bbm_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Grid g(80.0, 2048);
  const double c = 2.0;
  const auto pv = petviashvili(kdv_sym, square, c, EquationKind::TravelingEq2Inhom, default_init(g, InitKind::Gaussian));
  const double e = max_error(pv.u, [c](double x) { return 1.5 * (c - 1) * sech2(std::sqrt((c - 1) / c) * x / 2); });
  o.check(pv.converged, "petviashvili converged (" + pv.status + ")");
  o.check(e < 1e-5, fmt("max error %.3e < 1e-5", e));
  o.check(pv.residual < 1e-7, fmt("residual %.3e", pv.residual));
  const double t = seconds_since(t0);
  o.check(t < 30.0, fmt("runtime %.2f s < 30 s", t));
  o.summary = fmt("BBM-type wave at c=2: max error %.2e", e);
  return o;
}

Outcome multiplier_identity() {
  Outcome o;
  struct Case {
    const char* name;
    SymbolSpec sym;
    Nonlinearity nl;
    double lambda;
    Grid grid;
  };
  const std::vector<Case> cases = {
      {"Fractional(1/2) p=1.8 B1", fractional(0.5), make_nonlinearity(NonlinearForm::B1, 1.8), 1.0, Grid(160.0, 4096)},
      {"NegSecondDerivative p=2 B2", kdv_sym, square, 2.0, Grid(80.0, 1024)},
      {"CapillaryWhitham(1) p=1.5 B1", capillary_whitham(1.0), make_nonlinearity(NonlinearForm::B1, 1.5), 1.0,
       Grid(160.0, 4096)},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto r = minimize_Gamma(ProblemSpec::Gamma(c.lambda, 1.0, c.sym, c.nl, c.grid), default_init(c.grid, InitKind::Gaussian));
    const double rel = std::abs(r.multiplier - r.multiplier_check) / std::abs(r.multiplier_check);
    worst = std::max(worst, rel);
    o.check(r.converged, std::string(c.name) + " converged (" + r.status + ")");
    o.check(rel < 1e-3, fmt("%s lambda=%g: gamma=%.10f, 2Gamma/((p+1)lambda)=%.10f, rel %.2e < 1e-3", c.name, c.lambda,
                            r.multiplier, r.multiplier_check, rel));
  }
  o.summary = fmt("three cases, worst relative mismatch %.2e", worst);
  return o;
}

Outcome scaling_law() {
  Outcome o;
  CurveStudyOptions opts;
  opts.threads = 4;
  const double p = 1.8;
  const auto st = curve_study(
      ProblemSpec::Gamma(1.0, 1.0, fractional(0.5), make_nonlinearity(NonlinearForm::B1, p), Grid(160.0, 4096)),
      {1, 2, 3, 4, 8}, opts);
  o.check(st.all_converged(), "all five solves converged");
  double worst = 0.0;
  for (double theta : {2.0, 4.0}) {
    const auto* a = st.find(1.0);
    const auto* b = st.find(theta);
    if (!a || !b) {
      o.check(false, fmt("theta=%g: missing row", theta));
      continue;
    }
    const double got = b->result.objective / a->result.objective, want = std::pow(theta, 2 / (p + 1));
    const double rel = std::abs(got / want - 1);
    worst = std::max(worst, rel);
    o.check(rel < 5e-3, fmt("Gamma(%g)/Gamma(1) = %.8f vs theta^{2/(p+1)} = %.8f, rel %.2e < 5e-3", theta, got, want, rel));
  }
  bool mono = true;
  for (std::size_t i = 1; i < st.rows.size(); ++i)
    if (!(st.rows[i].result.objective > st.rows[i - 1].result.objective)) mono = false;
  std::string values;
  for (const auto& r : st.rows) values += fmt(" %.6f", r.result.objective);
  o.check(mono, "Gamma increasing over lambda in {1,2,3,4,8}:" + values);
  o.summary = fmt("worst scaling mismatch %.2e, monotone %s", worst, mono ? "yes" : "no");
  return o;
}

Outcome negativity_subadditivity() {
  Outcome o;
  CurveStudyOptions opts;
  opts.threads = 3;
  const auto st = curve_study(ProblemSpec::Iq(1.0, kdv_sym, square, Grid(160.0, 2048)), {0.5, 1.0, 2.0}, opts);
  o.check(st.all_converged(), "all three solves converged");
  for (const auto& r : st.rows) o.check(r.result.objective < 0.0, fmt("I(%g) = %.10f < 0", r.param, r.result.objective));
  double worst = INFINITY;
  for (auto [q1, q2] : std::vector<std::pair<double, double>>{{0.5, 0.5}, {1.0, 1.0}}) {
    const auto *a = st.find(q1), *b = st.find(q2), *ab = st.find(q1 + q2);
    if (!a || !b || !ab) {
      o.check(false, "missing row");
      continue;
    }
    const double gap = a->result.objective + b->result.objective - ab->result.objective;
    const double margin = gap / std::abs(ab->result.objective);
    worst = std::min(worst, margin);
    o.check(margin > 0.01, fmt("I(%g) = %.8f < I(%g) + I(%g) = %.8f, margin %.2f%% > 1%%", q1 + q2,
                               ab->result.objective, q1, q2, a->result.objective + b->result.objective, 100 * margin));
  }
  o.summary = fmt("I_q < 0 on {0.5,1,2}; smallest subadditivity margin %.1f%%", 100 * worst);
  return o;
}

Outcome conservation() {
  Outcome o;
  // Eq1: KdV wave from the Iq problem
  std::array<double, 2> eq1{};
  for (int k = 0; k < 2; ++k) {
    const int n = k == 0 ? 512 : 1024;
    const double dt = k == 0 ? 0.015 : 0.0075;
    Grid g(80.0, n);
    const auto r = minimize_Iq(ProblemSpec::Iq(3.0, kdv_sym, square, g), default_init(g, InitKind::Gaussian));
    EvolutionSpec es;
    es.equation = EvolutionEquation::Eq1;
    es.sym = kdv_sym;
    es.nl = square;
    es.dt = dt;
    es.t_end = 10.0;
    const auto tr = evolve(es, r.u);
    eq1[k] = std::max(tr.max_drift[0], tr.max_drift[1]);
    o.check(!tr.blow_up, fmt("Eq1 n=%d dt=%g: drift E %.2e, Q %.2e", n, dt, tr.max_drift[0], tr.max_drift[1]));
  }
  o.check(eq1[0] < 1e-6, fmt("Eq1 drift at reference resolution %.2e < 1e-6", eq1[0]));
  o.check(eq1[0] >= 8 * eq1[1], fmt("Eq1 drift improves %.1fx >= 8x under (2n, dt/2)", eq1[0] / eq1[1]));

  // Eq2: wave from the Gamma problem, speed 1/gamma
  std::array<double, 2> eq2{};
  for (int k = 0; k < 2; ++k) {
    const int n = k == 0 ? 2048 : 4096;
    const double dt = k == 0 ? 0.1 : 0.05;
    Grid g(80.0, n);
    const auto r = minimize_Gamma(ProblemSpec::Gamma(2.0, 1.0, kdv_sym, square, g), default_init(g, InitKind::Gaussian));
    EvolutionSpec es;
    es.equation = EvolutionEquation::Eq2;
    es.sym = kdv_sym;
    es.nl = square;
    es.dt = dt;
    es.t_end = 10.0;
    const auto tr = evolve(es, r.u);
    eq2[k] = std::max(tr.max_drift[0], tr.max_drift[1]);
    o.check(!tr.blow_up, fmt("Eq2 n=%d dt=%g c=%.4f: drift J %.2e, U %.2e", n, dt, r.wave_speed, tr.max_drift[0],
                             tr.max_drift[1]));
  }
  o.check(eq2[0] < 1e-6, fmt("Eq2 drift at reference resolution %.2e < 1e-6", eq2[0]));
  o.check(eq2[0] >= 8 * eq2[1], fmt("Eq2 drift improves %.1fx >= 8x under (2n, dt/2)", eq2[0] / eq2[1]));
  o.summary = fmt("t=10: Eq1 drift %.2e (%.0fx), Eq2 drift %.2e (%.0fx)", eq1[0], eq1[0] / eq1[1], eq2[0], eq2[0] / eq2[1]);
  return o;
}

Outcome orbital_stability() {
  Outcome o;
  Grid g(80.0, 1024);
  const auto r = minimize_Iq(ProblemSpec::Iq(3.0, kdv_sym, square, g), default_init(g, InitKind::Gaussian));
  o.check(r.converged, "KdV wave converged");
  EvolutionSpec es;
  es.equation = EvolutionEquation::Eq1;
  es.sym = kdv_sym;
  es.nl = square;
  es.dt = 0.005;
  es.t_end = 20.0;
  es.record_stride = 20;
  const std::vector<double> sizes = {1e-3, 5e-4, 2.5e-4};
  std::vector<double> maxd(sizes.size());
  parallel_for(3, 3, [&](int i) { maxd[i] = stability_experiment(r, sizes[i], es).max_distance; });
  o.check(maxd[0] <= 1e-2, fmt("size 1e-3: max orbital distance %.4e <= 1e-2", maxd[0]));
  for (std::size_t i = 1; i < sizes.size(); ++i)
    o.check(maxd[i] < maxd[i - 1], fmt("size %.2e: %.4e < %.4e", sizes[i], maxd[i], maxd[i - 1]));
  o.summary = fmt("max distance %.3e / %.3e / %.3e for sizes 1e-3 / 5e-4 / 2.5e-4", maxd[0], maxd[1], maxd[2]);
  return o;
}

Outcome commutator_decay() {
  Outcome o;
  Grid g(256.0, 4096);
  const auto u = make_field(g, [](double x) { return std::exp(-x * x / 32); });
  std::string parts;
  for (const auto& [name, sym] : std::vector<std::pair<const char*, SymbolSpec>>{
           {"CapillaryWhitham(1)", capillary_whitham(1.0)}, {"Fractional(1/2)", fractional(0.5)}}) {
    const auto d = decay_scan(sym, u, {4, 8, 16, 32});
    o.check(d.classification == DecayClass::decays && d.final_ratio < 0.05,
            fmt("%s: %s, final/initial %.3e < 0.05", name, to_string(d.classification), d.final_ratio));
    parts += fmt(" %s %.1e", name, d.final_ratio);
  }
  o.summary = "Gaussian u, r in {4,8,16,32}, final ratios:" + parts;
  return o;
}

Outcome cantor_counterexample_check() {
  Outcome o;
  CantorOptions opts;  // alpha 1/2, A1 1, A2 2, depth 6, band-limited u on E
  const auto jump = cantor_counterexample(opts);
  std::string ratios;
  for (double q : jump.series.ratios) ratios += fmt(" %.4f", q);
  o.details.push_back(fmt("     l=%g n=%d, mass of u^ on E %.6f, ratios%s", opts.length, opts.n, jump.band_mass_on_E,
                          ratios.c_str()));
  o.check(jump.series.classification == DecayClass::non_decaying,
          fmt("A1=1, A2=2: classified %s (needs non_decaying: last >= 0.5 max)", to_string(jump.series.classification)));
  o.check(jump.min_ratio > 0.3, fmt("A1=1, A2=2: minimum ratio %.4f > 0.3", jump.min_ratio));
  opts.A1 = opts.A2;
  const auto flat = cantor_counterexample(opts);
  o.check(flat.series.classification == DecayClass::decays,
          fmt("A1=A2=2: classified %s, final ratio %.2e", to_string(flat.series.classification), flat.series.final_ratio));
  o.summary = fmt("jump symbol: %s (min ratio %.3f); A1=A2: %s", to_string(jump.series.classification), jump.min_ratio,
                  to_string(flat.series.classification));
  return o;
}

Outcome prescribed_speed() {
  Outcome o;
  Grid g(160.0, 4096);
  const auto sym = fractional(0.5);
  const auto nl = make_nonlinearity(NonlinearForm::B1, 1.8);
  const auto init = default_init(g, InitKind::Gaussian);
  double worst = 0.0;
  const auto base = minimize_Gamma(ProblemSpec::Gamma(1.0, 1.0, sym, nl, g), init);
  for (double kappa : {1.0, 2.0}) {
    const auto r = kappa == 1.0 ? base : minimize_Gamma(ProblemSpec::Gamma(1.0, kappa, sym, nl, g), init);
    const auto s1 = scale_solution(r, ScaleMode::Scale1, kappa);
    const auto s2 = scale_solution(base, ScaleMode::Scale2, kappa);
    worst = std::max({worst, s1.residual, s2.residual});
    o.check(s1.residual < 1e-6, fmt("scale 1, c=%g: %s residual %.2e < 1e-6", kappa, to_string(s1.equation), s1.residual));
    o.check(s2.residual < 1e-6, fmt("scale 2, c=%g: %s residual %.2e < 1e-6", kappa, to_string(s2.equation), s2.residual));
  }
  o.summary = fmt("worst residual %.2e over both scalings and c in {1,2}", worst);
  return o;
}

Outcome property_suites() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Grid g(40.0, 1024);
  std::mt19937 rng(2024);
  std::normal_distribution<double> nd;
  auto smooth = [&]() {
    Field u(g);
    for (int k = 1; k <= 12; ++k) {
      const double a = nd(rng) / k, b = nd(rng) / k;
      for (int j = 0; j < g.n; ++j) {
        const double t = 2 * std::numbers::pi * k * g.x(j) / g.length;
        u[j] += a * std::cos(t) + b * std::sin(t);
      }
    }
    return u;
  };
  const std::vector<SymbolSpec> syms = {fractional(0.5), fractional(1.5), capillary_whitham(1.0),
                                        fat_cantor(1.0, 1.0, 2.0, 0.5, 6, 8.0)};

  double parseval = 0.0, adj = 0.0, sq = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto u = smooth(), v = smooth();
    const double a = inner(u, u), b = weighted_energy(u, [](double) { return 1.0; });
    parseval = std::max(parseval, std::abs(a - b) / a);
    for (const auto& s : syms) {
      Multiplier L(s, g), R(sqrt_symbol(s), g);
      const double x = inner(L.apply(u), v), y = inner(u, L.apply(v));
      adj = std::max(adj, std::abs(x - y) / std::max(1.0, std::abs(x)));
      const auto Lu = L.apply(u), RRu = R.apply(R.apply(u));
      sq = std::max(sq, max_abs(Lu - RRu) / std::max(1.0, max_abs(Lu)));
    }
  }
  o.check(parseval < 1e-12, fmt("Parseval: relative mismatch %.2e < 1e-12", parseval));
  o.check(adj < 1e-12, fmt("self-adjointness: %.2e < 1e-12", adj));
  o.check(sq < 1e-12, fmt("square-root identity: %.2e < 1e-12", sq));

  double fd = 0.0;
  const auto u = make_field(g, [](double x) { return std::exp(-x * x / 4) * (1 + 0.3 * std::sin(x)); });
  const auto v = drop_nyquist(make_field(g, [](double x) { return std::cos(0.9 * x) / (1 + x * x); }));
  for (const auto& s : syms)
    for (auto form : {NonlinearForm::B1, NonlinearForm::B2, NonlinearForm::InhomogeneousB2})
      for (auto fn : {Functional::energy(), Functional::mass(), Functional::J(0.7), Functional::potential(),
                      Functional::potential_tilde()}) {
        const auto nl = make_nonlinearity(form, 2.5);
        const double h = 1e-5;
        const double num = (eval_functional(fn, u + h * v, s, nl) - eval_functional(fn, u - h * v, s, nl)) / (2 * h);
        const double ana = inner(grad_functional(fn, u, s, nl), v);
        fd = std::max(fd, std::abs(num - ana) / (1 + std::abs(ana)));
      }
  o.check(fd < 1e-6, fmt("gradient vs finite differences: %.2e < 1e-6", fd));

  double cm = 0.0;
  for (double alpha : {0.1, 0.25, 0.5, 0.75, 0.9})
    for (int d = 0; d <= 14; ++d)
      cm = std::max(cm, std::abs(build_cantor_set(alpha, d, 1.0).measure() - (1 - alpha * (1 - std::ldexp(1.0, -d)))));
  o.check(cm < 1e-12, fmt("Cantor measure formula: %.2e < 1e-12", cm));

  double ti = 0.0;
  const auto nl = make_nonlinearity(NonlinearForm::B1, 1.8);
  for (const auto& s : syms)
    for (auto fn : {Functional::energy(), Functional::mass(), Functional::J(1.0), Functional::potential()}) {
      const double base = eval_functional(fn, u, s, nl);
      for (int k : {1, 37, 500}) {
        const double moved = eval_functional(fn, shift_cells(u, k), s, nl);
        ti = std::max(ti, std::abs(moved - base) / std::max(1.0, std::abs(base)));
      }
    }
  o.check(ti < 1e-10, fmt("translation invariance of objectives: %.2e < 1e-10", ti));
  const double t = seconds_since(t0);
  o.check(t < 300.0, fmt("runtime %.2f s < 300 s", t));
  o.summary = fmt("Parseval %.0e, adjoint %.0e, sqrt %.0e, FD %.0e, Cantor %.0e, shift %.0e", parseval, adj, sq, fd, cm, ti);
  return o;
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
    {1, {"closed-form soliton", closed_form_soliton}},
    {2, {"BBM-type oracle", bbm_oracle}},
    {3, {"multiplier identity", multiplier_identity}},
    {4, {"scaling law and monotonicity", scaling_law}},
    {5, {"negativity and subadditivity", negativity_subadditivity}},
    {6, {"conservation", conservation}},
    {7, {"orbital stability", orbital_stability}},
    {8, {"commutator decay", commutator_decay}},
    {9, {"Cantor counter-example", cantor_counterexample_check}},
    {10, {"scaling to prescribed speed", prescribed_speed}},
    {11, {"property suites", property_suites}},
};

}  // namespace

int main(int argc, char** argv) {
  // library warnings go to stderr; the verdict lines stay on stdout
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a.rfind("AC", 0) == 0) a = a.substr(2);
    const int k = std::atoi(a.c_str());
    if (!criteria.count(k)) {
      std::fprintf(stderr, "unknown criterion '%s' (1..11)\n", argv[i]);
      return 2;
    }
    selected.push_back(k);
  }
  if (selected.empty())
    for (const auto& [k, _] : criteria) selected.push_back(k);

  int failed = 0;
  for (int k : selected) {
    const auto& [name, fn] = criteria.at(k);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("exception: ") + e.what();
    }
    std::printf("AC%d %s %s: %s (%.1f s)\n", k, o.pass ? "PASS" : "FAIL", name, o.summary.c_str(), seconds_since(t0));
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed ? 1 : 0;
}
