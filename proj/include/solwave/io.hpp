#pragma once

// JSON manifests and CSV tables for results; specs round-trip so that a solve
// manifest is enough to rebuild the problem later.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "solwave/cclab.hpp"
#include "solwave/diagnostics.hpp"
#include "solwave/error.hpp"
#include "solwave/evolution.hpp"
#include "solwave/solver.hpp"
#include "solwave/symbols.hpp"

namespace solwave::io {

using json = nlohmann::ordered_json;

// ---- enum names ------------------------------------------------------------------

template <class E, std::size_t N>
E parse_enum(const std::string& name, const std::array<E, N>& all, const char* what) {
  for (E e : all)
    if (name == to_string(e)) return e;
  std::string msg = std::string("unknown ") + what + " '" + name + "' (expected one of";
  for (E e : all) msg += std::string(" ") + to_string(e);
  throw ConfigError(msg + ")");
}

inline SymbolKind parse_symbol_kind(const std::string& s) {
  return parse_enum(s, std::array{SymbolKind::Fractional, SymbolKind::NegSecondDerivative, SymbolKind::CapillaryWhitham,
                                  SymbolKind::FatCantor, SymbolKind::Tabulated},
                    "symbol kind");
}
inline NonlinearForm parse_form(const std::string& s) {
  return parse_enum(s, std::array{NonlinearForm::B1, NonlinearForm::B2, NonlinearForm::InhomogeneousB1,
                                  NonlinearForm::InhomogeneousB2},
                    "nonlinearity form");
}
inline ProblemKind parse_problem_kind(const std::string& s) {
  return parse_enum(s, std::array{ProblemKind::Iq, ProblemKind::Gamma, ProblemKind::GammaTilde}, "problem kind");
}
inline EquationKind parse_equation_kind(const std::string& s) {
  return parse_enum(s, std::array{EquationKind::TravelingEq1, EquationKind::TravelingEq2,
                                  EquationKind::TravelingEq2Inhom},
                    "equation");
}
inline EvolutionEquation parse_evolution_equation(const std::string& s) {
  return parse_enum(s, std::array{EvolutionEquation::Eq1, EvolutionEquation::Eq2, EvolutionEquation::Eq2Inhom},
                    "evolution equation");
}

// ---- specs -------------------------------------------------------------------------

inline json to_json(const SymbolSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["s"] = s.s;
  j["A1"] = s.A1;
  j["A2"] = s.A2;
  switch (s.kind) {
    case SymbolKind::CapillaryWhitham: j["T"] = s.T; break;
    case SymbolKind::FatCantor:
      j["alpha"] = s.alpha;
      j["depth"] = s.depth;
      j["extent"] = s.extent;
      break;
    case SymbolKind::Tabulated: {
      json t = json::array();
      for (auto [xi, m] : s.table) t.push_back({xi, m});
      j["table"] = t;
      break;
    }
    default: break;
  }
  if (s.power != 1.0) j["power"] = s.power;
  return j;
}

inline SymbolSpec symbol_from_json(const json& in) {
  const bool root = in.contains("power") && in["power"].get<double>() == 0.5;
  json j = in;
  if (root) {
    // stored parameters are those of the square root; rebuild the base symbol first
    j["s"] = 2.0 * in.at("s").get<double>();
    for (const char* k : {"A1", "A2"})
      if (in.contains(k)) j[k] = std::pow(in[k].get<double>(), 2);
  }
  const SymbolKind kind = parse_symbol_kind(j.at("kind").get<std::string>());
  SymbolSpec s;
  switch (kind) {
    case SymbolKind::Fractional: s = fractional(j.at("s").get<double>()); break;
    case SymbolKind::NegSecondDerivative: s = neg_second_derivative(); break;
    case SymbolKind::CapillaryWhitham: s = capillary_whitham(j.at("T").get<double>()); break;
    case SymbolKind::FatCantor:
      s = fat_cantor(j.at("s").get<double>(), j.at("A1").get<double>(), j.at("A2").get<double>(),
                     j.at("alpha").get<double>(), j.at("depth").get<int>(), j.at("extent").get<double>());
      break;
    case SymbolKind::Tabulated: {
      std::vector<std::pair<double, double>> table;
      for (const auto& row : j.at("table")) table.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
      s = tabulated(std::move(table), j.at("s").get<double>(), j.at("A1").get<double>(), j.at("A2").get<double>());
      break;
    }
  }
  if (root) s = sqrt_symbol(s);
  return s;
}

inline json to_json(const Nonlinearity& nl) {
  return json{{"form", to_string(nl.form)}, {"p", nl.p}, {"cp", nl.cp}};
}

inline Nonlinearity nonlinearity_from_json(const json& j) {
  return make_nonlinearity(parse_form(j.at("form").get<std::string>()), j.at("p").get<double>(),
                           j.value("cp", 1.0));
}

inline json to_json(const Grid& g) { return json{{"length", g.length}, {"n", g.n}}; }

inline Grid grid_from_json(const json& j) { return Grid(j.at("length").get<double>(), j.at("n").get<int>()); }

inline json to_json(const ProblemSpec& ps) {
  json j;
  j["kind"] = to_string(ps.kind);
  switch (ps.kind) {
    case ProblemKind::Iq: j["q"] = ps.q; break;
    case ProblemKind::Gamma:
      j["lambda"] = ps.lambda;
      j["kappa"] = ps.kappa;
      break;
    case ProblemKind::GammaTilde:
      j["lambda"] = ps.lambda;
      j["lambda0"] = ps.lambda0;
      break;
  }
  j["symbol"] = to_json(ps.sym);
  j["nonlinearity"] = to_json(ps.nl);
  j["grid"] = to_json(ps.grid);
  return j;
}

inline ProblemSpec problem_from_json(const json& j) {
  const SymbolSpec sym = symbol_from_json(j.at("symbol"));
  const Nonlinearity nl = nonlinearity_from_json(j.at("nonlinearity"));
  const Grid g = grid_from_json(j.at("grid"));
  ProblemSpec ps;
  switch (parse_problem_kind(j.at("kind").get<std::string>())) {
    case ProblemKind::Iq: ps = ProblemSpec::Iq(j.at("q").get<double>(), sym, nl, g); break;
    case ProblemKind::Gamma:
      ps = ProblemSpec::Gamma(j.at("lambda").get<double>(), j.value("kappa", 1.0), sym, nl, g);
      break;
    case ProblemKind::GammaTilde:
      ps = ProblemSpec::GammaTilde(j.at("lambda").get<double>(), sym, nl, g, j.value("lambda0", 0.0));
      break;
  }
  check_problem(ps);
  return ps;
}

// ---- results -----------------------------------------------------------------------

/// Scalars of a solve; the profile itself goes to a field file.
inline json to_json(const SolveResult& r) {
  json j;
  j["method"] = r.method;
  j["status"] = r.status;
  j["converged"] = r.converged;
  j["equation"] = to_string(r.equation);
  j["multiplier"] = r.multiplier;
  j["wave_speed"] = r.wave_speed;
  j["objective"] = r.objective;
  j["constraint_value"] = r.constraint_value;
  j["residual"] = r.residual;
  j["iterations"] = r.iterations;
  j["center"] = r.center;
  if (r.method == "Gamma" || r.method == "GammaTilde") j["multiplier_check"] = r.multiplier_check;
  j["warnings"] = r.warnings;
  if (r.method != "Petviashvili") j["problem"] = to_json(r.problem);
  return j;
}

inline void result_scalars_from_json(const json& j, SolveResult& r) {
  r.method = j.at("method").get<std::string>();
  r.status = j.value("status", "");
  r.converged = j.at("converged").get<bool>();
  r.equation = parse_equation_kind(j.at("equation").get<std::string>());
  r.multiplier = j.at("multiplier").get<double>();
  r.wave_speed = j.at("wave_speed").get<double>();
  r.objective = j.at("objective").get<double>();
  r.constraint_value = j.value("constraint_value", 0.0);
  r.residual = j.at("residual").get<double>();
  r.iterations = j.value("iterations", 0);
  r.center = j.value("center", 0.0);
  r.multiplier_check = j.value("multiplier_check", 0.0);
  if (j.contains("problem")) r.problem = problem_from_json(j["problem"]);
}

inline json to_json(const ValidationReport& v) {
  json j;
  j["passed"] = v.passed;
  j["min_ratio"] = v.min_ratio;
  j["max_ratio"] = v.max_ratio;
  j["min_ratio_raw"] = v.min_ratio_raw;
  j["max_ratio_raw"] = v.max_ratio_raw;
  j["max_low"] = v.max_low;
  j["min_low"] = v.min_low;
  j["high_samples"] = v.high_samples;
  j["low_samples"] = v.low_samples;
  j["ratio_decays"] = v.ratio_decays;
  j["messages"] = v.messages;
  return j;
}

inline json to_json(const ExponentClassification& c) {
  auto bound = [](double v) { return std::isfinite(v) ? json(v) : json("inf"); };
  return json{{"existence_range", {1.0, bound(c.existence_hi)}},
              {"stability_range", {1.0, bound(c.stability_hi)}},
              {"status", to_string(c.status)}};
}

inline json to_json(const DecaySeries& d) {
  json j;
  j["which"] = to_string(d.which);
  j["classification"] = to_string(d.classification);
  j["radii"] = d.radii;
  j["values"] = d.values;
  j["ratios"] = d.ratios;
  j["min_ratio"] = d.min_ratio;
  j["final_ratio"] = d.final_ratio;
  j["floor"] = d.floor;
  j["scale"] = d.scale;
  j["thresholds"] = {{"decay_ratio", d.thresholds.decay_ratio},
                     {"wobble", d.thresholds.wobble},
                     {"non_decay_ratio", d.thresholds.non_decay_ratio},
                     {"floor_rel", d.thresholds.floor_rel}};
  return j;
}

inline json to_json(const RegularityReport& r) {
  return json{{"h_half_s_norm", r.h_half_s_norm},
              {"h_s_norm", r.h_s_norm},
              {"tail_exponent_estimate", r.tail_exponent_estimate},
              {"tail_reliable", r.tail_reliable},
              {"tail_points", r.tail_points},
              {"refined_h_s_norm", r.refined_h_s_norm},
              {"refinement_change", r.refinement_change},
              {"refinement_stable", r.refinement_stable}};
}

inline json to_json(const Predicate& p) {
  return json{{"name", p.name}, {"evaluated", p.evaluated}, {"passed", p.passed}, {"worst_slack", p.worst},
              {"detail", p.detail}};
}

inline json to_json(const EvolutionTrace& t) {
  json j;
  j["invariants"] = {t.names[0], t.names[1]};
  j["max_drift"] = {t.max_drift[0], t.max_drift[1]};
  j["steps"] = t.steps;
  j["dt"] = t.dt_used;
  j["blow_up"] = t.blow_up;
  j["last_valid_time"] = t.last_valid_time;
  j["max_imag_residue"] = t.max_imag_residue;
  j["band_growth"] = t.band_growth;
  if (!t.distance.empty()) j["max_distance"] = t.max_distance;
  return j;
}

// ---- files -------------------------------------------------------------------------

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

namespace detail {
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// time, both invariants, and distance when present.
inline void write_trace_csv(const std::filesystem::path& path, const EvolutionTrace& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const bool dist = !t.distance.empty();
  out << "time," << t.names[0] << ',' << t.names[1] << (dist ? ",distance" : "") << '\n';
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    out << detail::num(t.times[i]) << ',' << detail::num(t.invariants[i][0]) << ','
        << detail::num(t.invariants[i][1]);
    if (dist) out << ',' << detail::num(t.distance[i]);
    out << '\n';
  }
}

inline void write_decay_csv(const std::filesystem::path& path, const DecaySeries& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "r,value,ratio\n";
  for (std::size_t i = 0; i < d.radii.size(); ++i)
    out << detail::num(d.radii[i]) << ',' << detail::num(d.values[i]) << ',' << detail::num(d.ratios[i]) << '\n';
}

inline void write_curve_csv(const std::filesystem::path& path, const CurveStudy& st) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << (st.kind == ProblemKind::Iq ? "q" : "lambda")
      << ",converged,objective,multiplier,multiplier_check,wave_speed,residual,iterations,error\n";
  for (const auto& r : st.rows) {
    const auto& s = r.result;
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    out << detail::num(r.param) << ',' << (r.ok ? 1 : 0) << ',' << detail::num(s.objective) << ','
        << detail::num(s.multiplier) << ',' << detail::num(s.multiplier_check) << ',' << detail::num(s.wave_speed)
        << ',' << detail::num(s.residual) << ',' << s.iterations << ',' << err << '\n';
  }
}

}  // namespace solwave::io
