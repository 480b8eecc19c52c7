// solwave: batch runner for solitary-wave experiments.
//
// Exit codes: 0 ok, 1 numerical failure (non-convergence, blow-up, --strict findings),
// 2 bad config, 3 missing input manifest or field, 4 output directory already in use.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "solwave/solwave.hpp"

namespace fs = std::filesystem;
using namespace solwave;
using solwave::cli::Section;
using json = io::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kMissingInput = 3, kCollision = 4 };

struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutputCollision : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool strict = false;
  bool force = false;
  bool allow_failure = false;
  std::string manifest;  // stability input, overrides the config entry
};

/// Shared state of one command invocation.
class Run {
 public:
  Run(const Globals& g, const char* command) : g_(g), command_(command), root_(Section::load(g.config)) {
    dir_ = fs::path(g.config).parent_path();
    seed_ = g.seed ? *g.seed : root_.get<std::uint64_t>("seed", 12345);
    previous_ = set_warning_handler([this](const std::string& msg) {
      // called under the library's warning lock
      warnings_.push_back(msg);
      std::cerr << "warning: " << msg << '\n';
    });
  }
  ~Run() { set_warning_handler(previous_); }

  const Globals& globals() const { return g_; }
  const Section& root() const { return root_; }
  const fs::path& config_dir() const { return dir_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void warn_here(const std::string& msg) { warn(msg); }

  /// Creates the output directory; refuses to write into a non-empty one without --force.
  fs::path out() {
    if (!out_ready_) {
      const fs::path o = g_.out;
      if (fs::exists(o) && !fs::is_directory(o)) throw OutputCollision("output path " + o.string() + " is a file");
      if (fs::exists(o) && !fs::is_empty(o) && !g_.force)
        throw OutputCollision("output directory " + o.string() + " is not empty (use --force)");
      fs::create_directories(o);
      out_ready_ = true;
    }
    return g_.out;
  }

  json header() const {
    json j;
    j["command"] = command_;
    j["config"] = fs::path(g_.config).filename().string();
    j["seed"] = seed_;
    return j;
  }

  int finish(json& manifest, bool failed) {
    manifest["warnings"] = warnings_;
    io::write_json(out() / "manifest.json", manifest);
    if (failed && !g_.allow_failure) return kFailure;
    if (g_.strict && !warnings_.empty()) return kFailure;
    return kOk;
  }

 private:
  Globals g_;
  std::string command_;
  Section root_;
  fs::path dir_;
  std::uint64_t seed_ = 0;
  std::vector<std::string> warnings_;
  WarningHandler previous_;
  bool out_ready_ = false;
};

/// Re-raises library validation errors with the section they came from.
template <class F>
auto in_section(const Section& s, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    if (std::string_view(e.what()).starts_with("config:")) throw;
    throw ConfigError("config: section '" + s.path() + "' (line " + std::to_string(s.line()) + "): " + e.what());
  } catch (const ConstructionError& e) {
    throw ConfigError("config: section '" + s.path() + "' (line " + std::to_string(s.line()) + "): " + e.what());
  }
}

// ---- config sections ---------------------------------------------------------------

SymbolSpec read_symbol(const Section& root, const fs::path& dir) {
  Section s = root.child("symbol");
  s.expect_keys({"kind", "s", "A1", "A2", "T", "alpha", "depth", "extent", "table", "sqrt"});
  const std::string kind = s.get<std::string>("kind");
  SymbolSpec sym = in_section(s, [&] {
    switch (io::parse_symbol_kind(kind)) {
      case SymbolKind::Fractional: return fractional(s.positive("s"));
      case SymbolKind::NegSecondDerivative: return neg_second_derivative();
      case SymbolKind::CapillaryWhitham: return capillary_whitham(s.get<double>("T"));
      case SymbolKind::FatCantor:
        return fat_cantor(s.positive("s", 1.0), s.positive("A1", 1.0), s.positive("A2", 2.0), s.get<double>("alpha", 0.5),
                          s.get<int>("depth", 6), s.positive("extent", 1.0));
      case SymbolKind::Tabulated:
        return load_tabulated(s.file("table", dir).string(), s.positive("s"), s.positive("A1"), s.positive("A2"));
    }
    throw ConfigError("unknown symbol kind");
  });
  if (s.get<bool>("sqrt", false)) sym = sqrt_symbol(sym);
  return sym;
}

Nonlinearity read_nonlinearity(const Section& root) {
  Section s = root.child("nonlinearity");
  s.expect_keys({"form", "p", "cp"});
  return in_section(s, [&] {
    return make_nonlinearity(io::parse_form(s.get<std::string>("form")), s.get<double>("p"), s.get<double>("cp", 1.0));
  });
}

Grid read_grid(const Section& root) {
  Section s = root.child("grid");
  s.expect_keys({"length", "n"});
  const double len = s.positive("length");
  const int n = s.get<int>("n");
  return in_section(s, [&] { return Grid(len, n); });
}

SolverOptions read_solver(const Section& root) {
  SolverOptions o;
  auto s = root.optional_child("solver");
  if (!s) return o;
  s->expect_keys({"tol", "objective_rtol", "window", "max_iter", "armijo", "precond_shift", "init", "history"});
  o.tol = s->positive("tol", o.tol);
  o.objective_rtol = s->positive("objective_rtol", o.objective_rtol);
  o.window = s->positive_int("window", o.window);
  o.max_iter = s->positive_int("max_iter", o.max_iter);
  o.armijo = s->positive("armijo", o.armijo);
  o.precond_shift = s->positive("precond_shift", o.precond_shift);
  o.record_history = s->get<bool>("history", true);
  const std::string init = s->get<std::string>("init", "Gaussian");
  if (init == "Gaussian")
    o.init = InitKind::Gaussian;
  else if (init == "Sech2")
    o.init = InitKind::Sech2;
  else
    s->fail("init", "expected Gaussian or Sech2");
  return o;
}

struct ProblemConfig {
  bool petviashvili = false;
  ProblemSpec spec;
  double c = 1.0;
  EquationKind equation = EquationKind::TravelingEq1;
};

ProblemConfig read_problem(const Section& root, const SymbolSpec& sym, const Nonlinearity& nl, const Grid& grid) {
  Section s = root.child("problem");
  s.expect_keys({"kind", "q", "lambda", "kappa", "lambda0", "c", "equation"});
  ProblemConfig pc;
  const std::string kind = s.get<std::string>("kind");
  if (kind == "Petviashvili") {
    pc.petviashvili = true;
    pc.c = s.positive("c");
    pc.equation = in_section(s, [&] { return io::parse_equation_kind(s.get<std::string>("equation", "TravelingEq1")); });
    return pc;
  }
  const ProblemKind k = in_section(s, [&] { return io::parse_problem_kind(kind); });
  switch (k) {
    case ProblemKind::Iq: pc.spec = ProblemSpec::Iq(s.positive("q"), sym, nl, grid); break;
    case ProblemKind::Gamma: {
      const double lambda = s.get<double>("lambda");
      if (lambda == 0.0) s.fail("lambda", "must be nonzero");
      pc.spec = ProblemSpec::Gamma(lambda, s.positive("kappa", 1.0), sym, nl, grid);
      break;
    }
    case ProblemKind::GammaTilde: {
      const double lambda0 = s.get<double>("lambda0", 0.0);
      const double lambda = s.get<double>("lambda");
      if (!(lambda > lambda0)) s.fail("lambda", "must exceed lambda0");
      pc.spec = ProblemSpec::GammaTilde(lambda, sym, nl, grid, lambda0);
      break;
    }
  }
  in_section(s, [&] { check_problem(pc.spec); });
  return pc;
}

SolveResult run_problem(const ProblemConfig& pc, const SymbolSpec& sym, const Nonlinearity& nl, const Grid& grid,
                        const SolverOptions& opts) {
  const Field init = default_init(grid, opts.init);
  if (pc.petviashvili) return petviashvili(sym, nl, pc.c, pc.equation, init, opts);
  return solve(pc.spec, init, opts);
}

EvolutionSpec read_evolution(const Section& s, const SymbolSpec& sym, const Nonlinearity& nl,
                             EvolutionEquation fallback) {
  EvolutionSpec es;
  es.sym = sym;
  es.nl = nl;
  es.equation = s.has("equation")
                    ? in_section(s, [&] { return io::parse_evolution_equation(s.get<std::string>("equation")); })
                    : fallback;
  es.dt = s.positive("dt");
  es.t_end = s.positive("t_end");
  es.snapshot_stride = s.get<int>("snapshot_stride", 0);
  if (es.snapshot_stride < 0) s.fail("snapshot_stride", "must be nonnegative");
  es.record_stride = s.positive_int("record_stride", 1);
  es.cfl = s.positive("cfl", es.cfl);
  es.dealias = s.get<bool>("dealias", true);
  return es;
}

Field read_field_file(const fs::path& p) {
  if (!fs::exists(p)) throw MissingInput("missing field file " + p.string());
  return p.extension() == ".bin" ? read_binary_field(p.string()) : read_text_field(p.string());
}

struct LoadedSolve {
  SolveResult res;
  SymbolSpec sym;
  Nonlinearity nl;
  json manifest;
};

LoadedSolve load_solve_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw MissingInput("missing solve manifest " + path.string());
  LoadedSolve out;
  try {
    out.manifest = io::read_json(path);
    if (out.manifest.value("command", "") != "solve") throw ConfigError("not a solve manifest");
    io::result_scalars_from_json(out.manifest.at("result"), out.res);
    out.sym = io::symbol_from_json(out.manifest.at("symbol"));
    out.nl = io::nonlinearity_from_json(out.manifest.at("nonlinearity"));
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  out.res.u = read_field_file(path.parent_path() / out.manifest.at("field").at("binary").get<std::string>());
  return out;
}

void write_history(const fs::path& p, const SolveResult& r) {
  std::ofstream out(p);
  out << "iter,objective,residual,step\n";
  char buf[160];
  for (const auto& h : r.history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", h.iter, h.objective, h.residual, h.step);
    out << buf;
  }
}

std::string fmt(double v, int prec = 10) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// ---- commands ------------------------------------------------------------------------

int cmd_solve(const Globals& g) {
  Run run(g, "solve");
  const Section& root = run.root();
  root.expect_keys({"seed", "symbol", "nonlinearity", "grid", "problem", "solver", "scale", "regularity"});
  const SymbolSpec sym = read_symbol(root, run.config_dir());
  const Nonlinearity nl = read_nonlinearity(root);
  const Grid grid = read_grid(root);
  const SolverOptions opts = read_solver(root);
  const ProblemConfig pc = read_problem(root, sym, nl, grid);
  std::optional<std::pair<ScaleMode, double>> scale;
  if (auto s = root.optional_child("scale")) {
    s->expect_keys({"mode", "kappa"});
    if (pc.petviashvili || pc.spec.kind != ProblemKind::Gamma) s->fail("mode", "scaling needs a Gamma problem");
    const std::string mode = s->get<std::string>("mode");
    if (mode != "Scale1" && mode != "Scale2") s->fail("mode", "expected Scale1 or Scale2");
    scale.emplace(mode == "Scale1" ? ScaleMode::Scale1 : ScaleMode::Scale2, s->positive("kappa"));
  }
  bool resolve_refined = false;
  if (auto s = root.optional_child("regularity")) {
    s->expect_keys({"resolve"});
    resolve_refined = s->get<bool>("resolve", false);
  }

  const fs::path out = run.out();
  SolveResult res = run_problem(pc, sym, nl, grid, opts);
  for (const auto& w : res.warnings) run.warn_here(w);

  json m = run.header();
  m["symbol"] = io::to_json(sym);
  m["nonlinearity"] = io::to_json(nl);
  m["grid"] = io::to_json(grid);
  if (pc.petviashvili) m["petviashvili"] = {{"c", pc.c}, {"equation", to_string(pc.equation)}};
  m["result"] = io::to_json(res);
  m["field"] = {{"text", "u.txt"}, {"binary", "u.bin"}};
  write_text_field((out / "u.txt").string(), res.u);
  write_binary_field((out / "u.bin").string(), res.u);
  if (opts.record_history) write_history(out / "history.csv", res);

  if (res.method == "Iq") {
    const auto pos = multiplier_positivity_check(res);
    m["positivity"] = {{"positive", pos.positive}, {"verdict", pos.verdict}, {"c_identity", pos.c_identity},
                       {"dE_dtheta", pos.dE_dtheta}};
  }
  std::function<Field(int)> refine;
  if (resolve_refined)
    refine = [&](int n) {
      Grid fine(grid.length, n);
      ProblemConfig pf = pc;
      pf.spec.grid = fine;
      return run_problem(pf, sym, nl, fine, opts).u;
    };
  m["regularity"] = io::to_json(regularity_profile(res.u, sym, refine));

  bool failed = !res.converged;
  if (scale) {
    const auto sc = scale_solution(res, scale->first, scale->second);
    write_text_field((out / "v.txt").string(), sc.v);
    write_binary_field((out / "v.bin").string(), sc.v);
    m["scaled"] = {{"mode", scale->first == ScaleMode::Scale1 ? "Scale1" : "Scale2"},
                   {"kappa", scale->second},
                   {"equation", to_string(sc.equation)},
                   {"wave_speed", sc.wave_speed},
                   {"beta", sc.beta},
                   {"residual", sc.residual},
                   {"verified", sc.verified},
                   {"field", {{"text", "v.txt"}, {"binary", "v.bin"}}}};
    failed = failed || !sc.verified;
    std::cout << "scaled: " << to_string(sc.equation) << " c=" << fmt(sc.wave_speed) << " residual=" << fmt(sc.residual, 3)
              << '\n';
  }
  std::cout << res.method << ": " << res.status << " after " << res.iterations << " iterations, multiplier="
            << fmt(res.multiplier) << " wave_speed=" << fmt(res.wave_speed) << " objective=" << fmt(res.objective)
            << " residual=" << fmt(res.residual, 3) << '\n';
  return run.finish(m, failed);
}

int cmd_evolve(const Globals& g) {
  Run run(g, "evolve");
  const Section& root = run.root();
  root.expect_keys({"seed", "symbol", "nonlinearity", "grid", "problem", "solver", "evolution"});
  Section ev = root.child("evolution");
  ev.expect_keys({"equation", "dt", "t_end", "snapshot_stride", "record_stride", "cfl", "dealias", "manifest",
                  "track_distance"});

  SolveResult res;
  SymbolSpec sym;
  Nonlinearity nl;
  std::string source;
  if (ev.has("manifest")) {
    auto loaded = load_solve_manifest(ev.file("manifest", run.config_dir()));
    res = std::move(loaded.res);
    sym = loaded.sym;
    nl = loaded.nl;
    source = ev.get<std::string>("manifest");
  } else {
    sym = read_symbol(root, run.config_dir());
    nl = read_nonlinearity(root);
    const Grid grid = read_grid(root);
    const SolverOptions opts = read_solver(root);
    res = run_problem(read_problem(root, sym, nl, grid), sym, nl, grid, opts);
    source = "solve";
    if (!res.converged) run.warn_here("initial solve did not converge (" + res.status + ")");
  }
  const EvolutionSpec spec = read_evolution(ev, sym, nl, evolution_for(res.equation));
  const bool track = ev.get<bool>("track_distance", true);

  const fs::path out = run.out();
  const EvolutionTrace tr = in_section(ev, [&] { return evolve(spec, res.u, track ? &res.u : nullptr); });
  if (tr.band_growth > 1e4)
    run.warn_here("upper band grew by " + fmt(tr.band_growth, 3) + "; reduce dt for this resolution");

  io::write_trace_csv(out / "trace.csv", tr);
  json snaps = json::array();
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%04zu.bin", i);
    write_binary_field((out / name).string(), tr.snapshots[i]);
    snaps.push_back({{"time", tr.snapshot_times[i]}, {"file", name}});
  }
  write_text_field((out / "final.txt").string(), tr.final_state);

  json m = run.header();
  m["source"] = source;
  m["symbol"] = io::to_json(sym);
  m["nonlinearity"] = io::to_json(nl);
  m["equation"] = to_string(spec.equation);
  m["t_end"] = spec.t_end;
  m["trace"] = io::to_json(tr);
  m["snapshots"] = snaps;
  m["files"] = {{"trace", "trace.csv"}, {"final", "final.txt"}};
  std::cout << to_string(spec.equation) << ": " << tr.steps << " steps, drift " << tr.names[0] << "="
            << fmt(tr.max_drift[0], 3) << " " << tr.names[1] << "=" << fmt(tr.max_drift[1], 3)
            << (track ? " max distance=" + fmt(tr.max_distance, 3) : std::string()) << (tr.blow_up ? " BLOW-UP" : "")
            << '\n';
  return run.finish(m, tr.blow_up);
}

int cmd_stability(const Globals& g) {
  Run run(g, "stability");
  const Section& root = run.root();
  root.expect_keys({"seed", "stability", "evolution"});
  Section st = root.child("stability");
  st.expect_keys({"manifest", "sizes", "noise_band"});
  fs::path mpath;
  if (!g.manifest.empty())
    mpath = g.manifest;
  else if (st.has("manifest"))
    mpath = st.file("manifest", run.config_dir());
  else
    throw MissingInput("stability needs a solve manifest (stability.manifest or --manifest)");
  const LoadedSolve loaded = load_solve_manifest(mpath);
  Section ev = root.child("evolution");
  ev.expect_keys({"equation", "dt", "t_end", "record_stride", "cfl", "dealias"});
  const EvolutionSpec spec = read_evolution(ev, loaded.sym, loaded.nl, evolution_for(loaded.res.equation));
  std::vector<double> sizes = st.list("sizes", {1e-3, 5e-4, 2.5e-4});
  for (double s : sizes)
    if (!(s >= 0.0)) st.fail("sizes", "perturbation sizes must be nonnegative");
  StabilityOptions so;
  so.noise_band = st.positive("noise_band", so.noise_band);
  so.seed = run.seed();

  const fs::path out = run.out();
  std::vector<StabilityReport> reps(sizes.size());
  in_section(st, [&] {
    parallel_for(static_cast<int>(sizes.size()), g.threads,
                 [&](int i) { reps[i] = stability_experiment(loaded.res, sizes[i], spec, so); });
  });

  std::ofstream csv(out / "stability.csv");
  csv << "size,max_distance,blow_up\n";
  json rows = json::array();
  bool blow = false;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto& r = reps[i];
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", r.perturbation_size, r.max_distance, r.blow_up ? 1 : 0);
    csv << buf;
    char name[32];
    std::snprintf(name, sizeof name, "distance_%02zu.csv", i);
    io::write_trace_csv(out / name, r.trace);
    rows.push_back({{"size", r.perturbation_size}, {"max_distance", r.max_distance}, {"blow_up", r.blow_up},
                    {"trace", name}, {"drift", {r.trace.max_drift[0], r.trace.max_drift[1]}}});
    blow = blow || r.blow_up;
    std::cout << "size=" << fmt(r.perturbation_size, 4) << " max_distance=" << fmt(r.max_distance, 4)
              << (r.blow_up ? " BLOW-UP" : "") << '\n';
  }
  // halving the perturbation should not increase the response
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return sizes[a] > sizes[b]; });
  bool monotone = true;
  for (std::size_t k = 1; k < order.size(); ++k)
    if (reps[order[k]].max_distance > reps[order[k - 1]].max_distance * (1.0 + 1e-6) + 1e-12) monotone = false;
  if (!monotone) run.warn_here("orbital distance is not monotone in the perturbation size");

  json m = run.header();
  m["manifest"] = mpath.string();
  m["equation"] = to_string(spec.equation);
  m["t_end"] = spec.t_end;
  m["dt"] = spec.dt;
  m["noise_band"] = so.noise_band;
  m["runs"] = rows;
  m["monotone"] = monotone;
  return run.finish(m, blow);
}

Field commutator_profile(const Section& c, const Grid& grid, const SymbolSpec& sym, const fs::path& dir) {
  auto p = c.optional_child("profile");
  if (!p) return make_field(grid, [](double x) { return std::exp(-x * x / 32.0); });
  p->expect_keys({"kind", "sigma", "width", "extent", "path"});
  const std::string kind = p->get<std::string>("kind", "Gaussian");
  if (kind == "Gaussian") {
    const double sg = p->positive("sigma", 4.0);
    return make_field(grid, [sg](double x) { return std::exp(-x * x / (2.0 * sg * sg)); });
  }
  if (kind == "Sech") {
    const double w = p->positive("width", 1.0);
    return make_field(grid, [w](double x) { return 1.0 / std::cosh(x / w); });
  }
  if (kind == "CantorBand" || kind == "Bump") {
    const IntervalSet* E = nullptr;
    if (kind == "CantorBand") {
      if (sym.kind != SymbolKind::FatCantor) p->fail("kind", "CantorBand needs a FatCantor symbol");
      E = sym.E.get();
    }
    const double ext = p->positive("extent", sym.kind == SymbolKind::FatCantor ? sym.extent : 1.0);
    return band_limited_profile(grid, ext, E);
  }
  if (kind == "Field") {
    Field u = read_field_file(p->file("path", dir));
    if (u.grid.n != grid.n || std::abs(u.grid.length - grid.length) > 1e-9 * grid.length)
      p->fail("path", "field grid does not match the grid section");
    return Field(grid, u.values);
  }
  p->fail("kind", "expected Gaussian, Sech, CantorBand, Bump or Field");
}

int cmd_commutator(const Globals& g) {
  Run run(g, "commutator");
  const Section& root = run.root();
  root.expect_keys({"seed", "symbol", "grid", "commutator"});
  const SymbolSpec sym = read_symbol(root, run.config_dir());
  const Grid grid = read_grid(root);
  Section c = root.child("commutator");
  c.expect_keys({"profile", "radii", "which", "pythagorean", "concentration"});
  const Field u = commutator_profile(c, grid, sym, run.config_dir());
  const std::vector<double> radii = c.list("radii", {4, 8, 16, 32});
  const std::string which = c.get<std::string>("which", "phi");
  if (which != "phi" && which != "psi") c.fail("which", "expected phi or psi");
  for (double r : radii)
    if (!(2.0 * r < 0.5 * grid.length)) c.fail("radii", "radius " + fmt(r) + " needs l > 4r; enlarge grid.length");
  const bool pyth = c.get<bool>("pythagorean", true);

  const fs::path out = run.out();
  const DecaySeries d = in_section(
      c, [&] { return decay_scan(sym, u, radii, which == "phi" ? CutoffBranch::phi : CutoffBranch::psi, pyth); });
  io::write_decay_csv(out / "decay.csv", d);
  write_text_field((out / "profile.txt").string(), u);

  json m = run.header();
  m["symbol"] = io::to_json(sym);
  m["grid"] = io::to_json(grid);
  m["decay"] = io::to_json(d);
  if (auto cc = c.optional_child("concentration")) {
    cc->expect_keys({"kappa", "r"});
    const double kappa = cc->positive("kappa", 1.0), r = cc->positive("r");
    const auto cp = in_section(*cc, [&] { return concentration_profile(u, sym, kappa, r); });
    write_text_field((out / "density.txt").string(), cp.rho);
    m["concentration"] = {{"kappa", kappa},
                          {"r", r},
                          {"sup_window_mass", cp.sup_window_mass},
                          {"argmax_center", cp.argmax_center},
                          {"total_mass", cp.total_mass},
                          {"ratio", cp.total_mass > 0 ? cp.sup_window_mass / cp.total_mass : 0.0}};
  }
  if (sym.kind == SymbolKind::FatCantor) m["measure_E_per_tile"] = build_cantor_set(sym.alpha, sym.depth, 1.0).measure();
  for (std::size_t i = 0; i < d.radii.size(); ++i)
    std::cout << "r=" << fmt(d.radii[i]) << " value=" << fmt(d.values[i], 6) << " ratio=" << fmt(d.ratios[i], 6) << '\n';
  std::cout << "classification: " << to_string(d.classification) << " (min ratio " << fmt(d.min_ratio, 4) << ")\n";
  return run.finish(m, false);
}

int cmd_sweep(const Globals& g) {
  Run run(g, "sweep");
  const Section& root = run.root();
  root.expect_keys({"seed", "symbol", "nonlinearity", "grid", "problem", "solver", "sweep"});
  const SymbolSpec sym = read_symbol(root, run.config_dir());
  const Nonlinearity nl = read_nonlinearity(root);
  const Grid grid = read_grid(root);
  const ProblemConfig pc = read_problem(root, sym, nl, grid);
  Section s = root.child("sweep");
  s.expect_keys({"values", "scaling_tol", "monotone_tol", "subadd_margin", "multiplier_tol"});
  if (pc.petviashvili) s.fail("values", "sweeps run the variational problems, not Petviashvili");
  const std::vector<double> values = s.list("values");
  if (values.empty()) s.fail("values", "required");
  CurveStudyOptions co;
  co.solver = read_solver(root);
  co.threads = g.threads;
  co.scaling_tol = s.positive("scaling_tol", co.scaling_tol);
  co.monotone_tol = s.positive("monotone_tol", co.monotone_tol);
  co.subadd_margin = s.positive("subadd_margin", co.subadd_margin);
  co.multiplier_tol = s.positive("multiplier_tol", co.multiplier_tol);

  const fs::path out = run.out();
  const CurveStudy st = in_section(s, [&] { return curve_study(pc.spec, values, co); });
  io::write_curve_csv(out / "curve.csv", st);

  json m = run.header();
  m["problem"] = io::to_json(pc.spec);
  m["values"] = values;
  json rows = json::array();
  for (const auto& r : st.rows) {
    rows.push_back({{"param", r.param}, {"ok", r.ok}, {"objective", r.result.objective},
                    {"multiplier", r.result.multiplier}, {"wave_speed", r.result.wave_speed},
                    {"residual", r.result.residual}, {"error", r.error}});
    if (!r.ok) run.warn_here("row " + fmt(r.param) + " failed: " + r.error);
    std::cout << (st.kind == ProblemKind::Iq ? "q=" : "lambda=") << fmt(r.param) << " objective=" << fmt(r.result.objective)
              << " multiplier=" << fmt(r.result.multiplier) << (r.ok ? "" : " FAILED") << '\n';
  }
  m["rows"] = rows;
  if (st.kind == ProblemKind::Gamma) {
    json ratios = json::array();
    const CurveRow* base = nullptr;
    for (const auto& r : st.rows)
      if (r.ok && (!base || r.param < base->param)) base = &r;
    for (const auto& r : st.rows) {
      if (!base || !r.ok || &r == base) continue;
      const double theta = r.param / base->param;
      const double want = std::pow(theta, 2.0 / (nl.p + 1.0)), got = r.result.objective / base->result.objective;
      ratios.push_back({{"theta", theta}, {"ratio", got}, {"expected", want}});
      std::cout << "ratio at theta=" << fmt(theta) << ": " << fmt(got, 8) << " (theta^{2/(p+1)} = " << fmt(want, 8)
                << ")\n";
    }
    m["ratios"] = ratios;
  }
  json preds = json::array();
  for (const auto& p : st.predicates) {
    preds.push_back(io::to_json(p));
    std::cout << "predicate " << p.name << ": " << (p.evaluated ? (p.passed ? "pass" : "FAIL") : "not evaluated") << '\n';
    if (p.evaluated && !p.passed) run.warn_here("predicate " + p.name + " failed: " + p.detail);
  }
  m["predicates"] = preds;
  return run.finish(m, false);
}

int cmd_validate(const Globals& g) {
  Run run(g, "validate");
  const Section& root = run.root();
  root.expect_keys({"seed", "symbol", "nonlinearity", "validate"});
  const SymbolSpec sym = read_symbol(root, run.config_dir());
  std::optional<double> p;
  if (root.has("nonlinearity")) {
    Section n = root.child("nonlinearity");
    p = n.get<double>("p");
    if (!(*p > 1.0)) n.fail("p", "must exceed 1");
  }
  std::vector<double> xi;
  if (auto v = root.optional_child("validate")) {
    v->expect_keys({"xi_samples", "xi_max", "count"});
    xi = v->list("xi_samples");
    if (xi.empty()) {
      const double xmax = v->positive("xi_max", 1e3);
      const int count = v->positive_int("count", 400);
      for (int i = 0; i < count; ++i) xi.push_back(xmax * std::pow(1e-3 / xmax, 1.0 - double(i) / (count - 1)));
    }
  } else {
    for (int i = 0; i < 400; ++i) xi.push_back(std::pow(10.0, -3.0 + 6.0 * i / 399.0));
  }

  const fs::path out = run.out();
  const auto rep = validate_symbol(sym, xi);
  const auto cls = classify_exponent(sym.s, p.value_or(2.0));
  {
    std::ofstream tab(out / "symbol.txt");
    char buf[128];
    for (double x : xi) {
      const double mv = eval_symbol(sym, x);
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", x, mv, std::abs(x) >= 1 ? mv / std::pow(two_pi * std::abs(x), sym.s) : 0.0);
      tab << buf;
    }
  }
  std::cout << "symbol " << to_string(sym.kind) << " s=" << fmt(sym.s) << ": bounds " << (rep.passed ? "pass" : "FAIL")
            << " (sampled m/(2 pi |xi|)^s in [" << fmt(rep.min_ratio, 6) << ", " << fmt(rep.max_ratio, 6)
            << "], declared [" << fmt(sym.A1, 6) << ", " << fmt(sym.A2, 6) << "])\n";
  for (const auto& msg : rep.messages) std::cout << "  " << msg << '\n';
  std::cout << "stability range: p in (1, " << fmt(cls.stability_hi) << ")\n";
  if (std::isfinite(cls.existence_hi)) {
    std::cout << "existence range: p in (1, " << fmt(cls.existence_hi) << ")\n";
    std::cout << "existence upper bound p=" << fmt(cls.existence_hi) << '\n';
  } else {
    std::cout << "existence range: p in (1, inf)\n";
  }
  if (p) std::cout << "p=" << fmt(*p) << ": " << to_string(cls.status) << '\n';

  json m = run.header();
  m["symbol"] = io::to_json(sym);
  m["validation"] = io::to_json(rep);
  m["exponents"] = io::to_json(cls);
  if (p) m["p"] = *p;
  m["files"] = {{"table", "symbol.txt"}};
  if (!rep.passed) run.warn_here("symbol violates its declared bounds");
  return run.finish(m, false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solwave: solitary waves of nonlocal dispersive equations"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "experiment config (YAML)");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "seed for noise (overrides the config)");
  app.add_option("--threads", g.threads, "worker threads for sweeps and ensembles")->check(CLI::PositiveNumber);
  app.add_flag("--strict", g.strict, "treat warnings and failed sweep rows as failures");
  app.add_flag("--force", g.force, "write into a non-empty output directory");
  app.add_flag("--allow-failure", g.allow_failure, "exit 0 even when a solve or run fails");

  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const Globals&);
  };
  const Cmd cmds[] = {
      {"solve", "solve a variational problem or run the fixed-point iteration", cmd_solve},
      {"evolve", "time-evolve a computed wave", cmd_evolve},
      {"stability", "perturb a solved wave and track its orbital distance", cmd_stability},
      {"commutator", "cutoff commutator values over a radius scan", cmd_commutator},
      {"sweep", "solve over a q or lambda grid and check the curve predicates", cmd_sweep},
      {"validate", "check symbol bounds and classify the exponent", cmd_validate},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* s = app.add_subcommand(c.name, c.help);
    if (std::string(c.name) == "stability") s->add_option("--manifest", g.manifest, "solve manifest to perturb");
    subs.push_back(s);
  }
  CLI11_PARSE(app, argc, argv);
  if (g.config.empty()) {
    std::cerr << "error: --config is required\n";
    return kConfig;
  }
  try {
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) return cmds[i].fn(g);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const ConstructionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const MissingInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMissingInput;
  } catch (const OutputCollision& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCollision;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
