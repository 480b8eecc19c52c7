#pragma once

// Power nonlinearities, their primitives and the conserved/variational functionals.

#include <cmath>
#include <limits>
#include <string>

#include "solwave/error.hpp"
#include "solwave/spectral.hpp"
#include "solwave/symbols.hpp"

namespace solwave {

enum class NonlinearForm { B1, B2, InhomogeneousB1, InhomogeneousB2 };

inline const char* to_string(NonlinearForm f) {
  switch (f) {
    case NonlinearForm::B1: return "B1";
    case NonlinearForm::B2: return "B2";
    case NonlinearForm::InhomogeneousB1: return "InhomogeneousB1";
    case NonlinearForm::InhomogeneousB2: return "InhomogeneousB2";
  }
  return "?";
}

struct Nonlinearity {
  NonlinearForm form = NonlinearForm::B1;
  double p = 2.0;
  double cp = 1.0;

  bool odd() const { return form == NonlinearForm::B1 || form == NonlinearForm::InhomogeneousB1; }
  bool inhomogeneous() const {
    return form == NonlinearForm::InhomogeneousB1 || form == NonlinearForm::InhomogeneousB2;
  }
  /// Same exponent and coefficient without the identity part.
  Nonlinearity homogeneous() const {
    Nonlinearity h = *this;
    if (form == NonlinearForm::InhomogeneousB1) h.form = NonlinearForm::B1;
    if (form == NonlinearForm::InhomogeneousB2) h.form = NonlinearForm::B2;
    return h;
  }
};

inline void check_nonlinearity(const Nonlinearity& nl) {
  if (!(nl.p > 1.0) || !std::isfinite(nl.p)) throw ConfigError("nonlinearity: p must exceed 1");
  if (nl.cp == 0.0 || !std::isfinite(nl.cp)) throw ConfigError("nonlinearity: c_p must be nonzero");
  if (nl.odd() && !(nl.cp > 0.0)) throw ConfigError("nonlinearity: c_p must be positive for B1");
}

inline Nonlinearity make_nonlinearity(NonlinearForm form, double p, double cp = 1.0) {
  Nonlinearity nl{form, p, cp};
  check_nonlinearity(nl);
  return nl;
}

namespace detail {
/// |x|^a with 0^a = 0.
inline double abs_pow(double x, double a) {
  const double ax = std::abs(x);
  if (ax == 0.0) return 0.0;
  if (a == 1.0) return ax;
  if (a == 2.0) return ax * ax;
  return std::pow(ax, a);
}
}  // namespace detail

/// Homogeneous part f.
inline double f_scalar(const Nonlinearity& nl, double x) {
  if (nl.odd()) return nl.cp * x * detail::abs_pow(x, nl.p - 1.0);
  return nl.cp * detail::abs_pow(x, nl.p);
}

/// Homogeneous primitive F, F(0) = 0.
inline double F_scalar(const Nonlinearity& nl, double x) {
  if (nl.odd()) return nl.cp * detail::abs_pow(x, nl.p + 1.0) / (nl.p + 1.0);
  return nl.cp * x * detail::abs_pow(x, nl.p) / (nl.p + 1.0);
}

/// f'(x) of the homogeneous part.
inline double fprime_scalar(const Nonlinearity& nl, double x) {
  const double d = nl.cp * nl.p * detail::abs_pow(x, nl.p - 1.0);
  if (nl.odd()) return d;
  return x < 0.0 ? -d : d;
}

inline Field homogeneous_f(const Nonlinearity& nl, const Field& u) {
  Field r(u.grid);
  for (int j = 0; j < u.size(); ++j) r[j] = f_scalar(nl, u[j]);
  return r;
}

inline Field homogeneous_F(const Nonlinearity& nl, const Field& u) {
  Field r(u.grid);
  for (int j = 0; j < u.size(); ++j) r[j] = F_scalar(nl, u[j]);
  return r;
}

/// f(u), or g(u) = u + f(u) for the inhomogeneous forms.
inline Field eval_f(const Nonlinearity& nl, const Field& u) {
  check_nonlinearity(nl);
  Field r = homogeneous_f(nl, u);
  if (nl.inhomogeneous()) axpy(r, 1.0, u);
  return r;
}

/// F(u), or u^2/2 + F(u) for the inhomogeneous forms.
inline Field eval_F(const Nonlinearity& nl, const Field& u) {
  check_nonlinearity(nl);
  Field r = homogeneous_F(nl, u);
  if (nl.inhomogeneous())
    for (int j = 0; j < u.size(); ++j) r[j] += 0.5 * u[j] * u[j];
  return r;
}

struct Functional {
  enum Kind { E, Q, Jkappa, U, Utilde } kind = E;
  double kappa = 1.0;

  static Functional energy() { return {E, 1.0}; }
  static Functional mass() { return {Q, 1.0}; }
  static Functional J(double kappa) { return {Jkappa, kappa}; }
  static Functional potential() { return {U, 1.0}; }
  static Functional potential_tilde() { return {Utilde, 1.0}; }
};

inline const char* to_string(Functional::Kind k) {
  switch (k) {
    case Functional::E: return "E";
    case Functional::Q: return "Q";
    case Functional::Jkappa: return "J";
    case Functional::U: return "U";
    case Functional::Utilde: return "Utilde";
  }
  return "?";
}

/// Symbol, nonlinearity and the sampled operator for one grid.
class Model {
 public:
  Model(const SymbolSpec& sym, const Nonlinearity& nl, const Grid& grid)
      : sym_(sym), nl_(nl), hom_(nl.homogeneous()), L_(sym, grid) {
    check_nonlinearity(nl);
  }

  const SymbolSpec& symbol() const { return sym_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const Multiplier& L() const { return L_; }
  const Grid& grid() const { return L_.grid(); }

  Field Lu(const Field& u) const { return L_.apply(u); }
  Field f(const Field& u) const { return homogeneous_f(hom_, u); }

  double uLu(const Field& u) const { return inner(u, L_.apply(u)); }
  double Q(const Field& u) const { return 0.5 * inner(u, u); }
  double U(const Field& u) const { return integral(homogeneous_F(hom_, u)); }
  double Utilde(const Field& u) const { return Q(u) + U(u); }
  double J(const Field& u, double kappa) const { return 0.5 * (uLu(u) + kappa * inner(u, u)); }
  double E(const Field& u) const { return 0.5 * uLu(u) - U(u); }

  double value(Functional fn, const Field& u) const {
    switch (fn.kind) {
      case Functional::E: return E(u);
      case Functional::Q: return Q(u);
      case Functional::Jkappa: return J(u, fn.kappa);
      case Functional::U: return U(u);
      case Functional::Utilde: return Utilde(u);
    }
    return 0.0;
  }

  Field gradient(Functional fn, const Field& u) const {
    switch (fn.kind) {
      case Functional::E: return Lu(u) - f(u);
      case Functional::Q: return u;
      case Functional::Jkappa: {
        Field g = Lu(u);
        axpy(g, fn.kappa, u);
        return g;
      }
      case Functional::U: return f(u);
      case Functional::Utilde: return u + f(u);
    }
    return u;
  }

 private:
  SymbolSpec sym_;
  Nonlinearity nl_;
  Nonlinearity hom_;
  Multiplier L_;
};

inline double eval_functional(Functional fn, const Field& u, const SymbolSpec& sym, const Nonlinearity& nl) {
  if (fn.kind == Functional::Jkappa && !(fn.kappa > 0.0)) throw ConfigError("J: kappa must be positive");
  return Model(sym, nl, u.grid).value(fn, u);
}

inline Field grad_functional(Functional fn, const Field& u, const SymbolSpec& sym, const Nonlinearity& nl) {
  return Model(sym, nl, u.grid).gradient(fn, u);
}

enum class ExponentStatus { stable_existence, existence_only, out_of_range };

inline const char* to_string(ExponentStatus s) {
  switch (s) {
    case ExponentStatus::stable_existence: return "stable_existence";
    case ExponentStatus::existence_only: return "existence_only";
    case ExponentStatus::out_of_range: return "out_of_range";
  }
  return "?";
}

struct ExponentClassification {
  double existence_lo = 1.0, existence_hi = 0.0;  // open intervals
  double stability_lo = 1.0, stability_hi = 0.0;
  ExponentStatus status = ExponentStatus::out_of_range;
};

inline ExponentClassification classify_exponent(double s, double p) {
  if (!(s > 0.0)) throw ConfigError("classify_exponent: s must be positive");
  if (!(p > 1.0)) throw ConfigError("classify_exponent: p must exceed 1");
  ExponentClassification c;
  c.stability_hi = 2.0 * s + 1.0;
  c.existence_hi = s < 1.0 ? (1.0 + s) / (1.0 - s) : std::numeric_limits<double>::infinity();
  if (p < c.stability_hi)
    c.status = ExponentStatus::stable_existence;
  else if (p < c.existence_hi)
    c.status = ExponentStatus::existence_only;
  else
    c.status = ExponentStatus::out_of_range;
  return c;
}

}  // namespace solwave
