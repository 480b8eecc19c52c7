#pragma once

// Periodic grid on [-l/2, l/2) standing in for the real line, transforms with the
// e^{-2 pi i x xi} convention and physical scaling, multipliers and Sobolev norms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "solwave/error.hpp"
#include "solwave/fft.hpp"
#include "solwave/symbols.hpp"

namespace solwave {

using cplx = std::complex<double>;

struct Grid {
  double length = 1.0;
  int n = 8;

  Grid() = default;
  Grid(double length_, int n_) : length(length_), n(n_) { validate(); }

  void validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("grid: length must be positive");
    if (n < 8 || n % 2 != 0) throw ConfigError("grid: n must be even and at least 8");
  }
  double dx() const { return length / n; }
  double dxi() const { return 1.0 / length; }
  double x(int j) const { return -0.5 * length + j * dx(); }
  /// Signed wavenumber of FFT-order index i; the Nyquist index n/2 maps to -n/2.
  int wavenumber(int i) const { return i < n / 2 ? i : i - n; }
  double xi(int i) const { return wavenumber(i) / length; }
  /// Frequency of half-spectrum index i in [0, n/2].
  double xi_half(int i) const { return i / length; }
  bool operator==(const Grid& o) const { return length == o.length && n == o.n; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g) : grid(g), values(g.n, 0.0) {}
  Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.n) throw GeometryError("field: length does not match grid");
  }

  int size() const { return grid.n; }
  double& operator[](int j) { return values[j]; }
  double operator[](int j) const { return values[j]; }
};

struct Spectrum {
  Grid grid;
  std::vector<cplx> coeffs;  // FFT order, index i <-> wavenumber grid.wavenumber(i)
};

inline Field make_field(const Grid& g, const std::function<double(double)>& fn) {
  Field u(g);
  for (int j = 0; j < g.n; ++j) u[j] = fn(g.x(j));
  return u;
}

inline void require_same_grid(const Field& a, const Field& b) {
  if (a.grid != b.grid) throw GeometryError("fields live on different grids");
}

// ---- pointwise arithmetic ------------------------------------------------

inline Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field r(a.grid);
  for (int j = 0; j < a.size(); ++j) r[j] = a[j] + b[j];
  return r;
}
inline Field operator-(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field r(a.grid);
  for (int j = 0; j < a.size(); ++j) r[j] = a[j] - b[j];
  return r;
}
inline Field operator*(double c, const Field& a) {
  Field r(a.grid);
  for (int j = 0; j < a.size(); ++j) r[j] = c * a[j];
  return r;
}
inline Field operator-(const Field& a) { return -1.0 * a; }
/// a += c * b
inline void axpy(Field& a, double c, const Field& b) {
  for (int j = 0; j < a.size(); ++j) a[j] += c * b[j];
}

/// Riemann-sum inner product dx * sum u v.
inline double inner(const Field& u, const Field& v) {
  require_same_grid(u, v);
  double s = 0.0;
  for (int j = 0; j < u.size(); ++j) s += u[j] * v[j];
  return s * u.grid.dx();
}
inline double l2_norm(const Field& u) { return std::sqrt(inner(u, u)); }
inline double integral(const Field& u) {
  return std::accumulate(u.values.begin(), u.values.end(), 0.0) * u.grid.dx();
}
inline double max_abs(const Field& u) {
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v));
  return m;
}
inline bool all_finite(const Field& u) {
  return std::all_of(u.values.begin(), u.values.end(), [](double v) { return std::isfinite(v); });
}

// ---- transforms ------------------------------------------------------------

namespace detail {
inline double parity(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }
}  // namespace detail

/// coeffs(k) = dx * sum_j u_j e^{-2 pi i xi_k x_j}.
inline Spectrum forward(const Field& u) {
  const Grid& g = u.grid;
  const int n = g.n;
  auto half = fft::rdft(u.values);
  Spectrum out{g, std::vector<cplx>(n)};
  const double dx = g.dx();
  for (int i = 0; i <= n / 2; ++i) out.coeffs[i] = half[i];
  for (int i = n / 2 + 1; i < n; ++i) out.coeffs[i] = std::conj(half[n - i]);
  for (int i = 0; i < n; ++i) out.coeffs[i] *= dx * detail::parity(g.wavenumber(i));
  return out;
}

/// Exact inverse of forward; rejects spectra whose image is not real.
inline Field inverse(const Spectrum& spec, double tol = 1e-10) {
  const Grid& g = spec.grid;
  const int n = g.n;
  if (static_cast<int>(spec.coeffs.size()) != n) throw GeometryError("spectrum: length does not match grid");
  std::vector<cplx> work(n);
  for (int i = 0; i < n; ++i) work[i] = spec.coeffs[i] * detail::parity(g.wavenumber(i));
  auto vals = fft::idft(std::move(work));
  Field u(g);
  double re2 = 0.0, im2 = 0.0;
  const double dxi = g.dxi();
  for (int j = 0; j < n; ++j) {
    u[j] = vals[j].real() * dxi;
    re2 += u[j] * u[j];
    im2 += vals[j].imag() * vals[j].imag() * dxi * dxi;
  }
  if (std::sqrt(im2) > tol * std::sqrt(re2) + 1e-300 && std::sqrt(im2) > 1e-300) {
    std::ostringstream msg;
    msg << "inverse: imaginary residue " << std::sqrt(im2 / n) << " exceeds tolerance (spectrum not conjugate-symmetric)";
    throw SymmetryError(msg.str());
  }
  return u;
}

// ---- multipliers -------------------------------------------------------------

/// Symbol sampled on the nonnegative half spectrum of a grid; the Nyquist entry is 0.
class Multiplier {
 public:
  Multiplier() = default;
  Multiplier(const SymbolSpec& sym, const Grid& g) : grid_(g), m_(g.n / 2 + 1) {
    for (int i = 0; i < g.n / 2; ++i) m_[i] = eval_symbol(sym, g.xi_half(i));
    m_[g.n / 2] = 0.0;
  }
  Multiplier(const Grid& g, std::vector<double> m) : grid_(g), m_(std::move(m)) {
    if (static_cast<int>(m_.size()) != g.n / 2 + 1) throw GeometryError("multiplier: wrong sample count");
    m_[g.n / 2] = 0.0;
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& samples() const { return m_; }
  double operator[](int i) const { return m_[i]; }

  Field apply(const Field& u) const {
    if (u.grid != grid_) throw GeometryError("multiplier: grid mismatch");
    auto half = fft::rdft(u.values);
    for (std::size_t i = 0; i < half.size(); ++i) half[i] *= m_[i];
    auto v = fft::irdft(std::move(half), grid_.n);
    const double scale = 1.0 / grid_.n;
    for (double& x : v) x *= scale;
    return Field(grid_, std::move(v));
  }

  /// Pointwise map of the sampled values, e.g. 1/(m + c).
  Multiplier transformed(const std::function<double(double)>& fn) const {
    Multiplier out = *this;
    for (int i = 0; i < grid_.n / 2; ++i) out.m_[i] = fn(m_[i]);
    out.m_[grid_.n / 2] = 0.0;
    return out;
  }

 private:
  Grid grid_;
  std::vector<double> m_;
};

/// L u, with an advisory warning when m |u^| is not small at the top of the band.
inline Field apply_multiplier(const SymbolSpec& sym, const Field& u, double tail_tol = 1e-6) {
  Multiplier L(sym, u.grid);
  auto half = fft::rdft(u.values);
  const int n = u.grid.n;
  double peak = 0.0, tail = 0.0;
  const int band = std::max(1, n / 32);
  for (int i = 0; i < n / 2; ++i) {
    const double w = L[i] * std::abs(half[i]);
    peak = std::max(peak, w);
    if (i >= n / 2 - band) tail = std::max(tail, w);
  }
  if (peak > 0.0 && tail > tail_tol * peak) {
    std::ostringstream msg;
    msg << "apply_multiplier: spectral tail " << tail / peak << " of peak exceeds " << tail_tol
        << "; grid may be under-resolved";
    warn(msg.str());
  }
  return L.apply(u);
}

// ---- norms -------------------------------------------------------------------

/// Weighted sum over all wavenumbers (Nyquist once) of w(xi)|c_k|^2 dxi.
inline double weighted_energy(const Field& u, const std::function<double(double)>& weight, bool include_nyquist = true) {
  const Grid& g = u.grid;
  auto half = fft::rdft(u.values);
  const double dx = g.dx();
  double s = 0.0;
  for (int i = 0; i <= g.n / 2; ++i) {
    if (i == g.n / 2 && !include_nyquist) continue;
    const double mult = (i == 0 || i == g.n / 2) ? 1.0 : 2.0;
    s += mult * weight(g.xi_half(i)) * std::norm(half[i]);
  }
  return s * dx * dx * g.dxi();
}

inline double sobolev_norm(const Field& u, double r) {
  return std::sqrt(weighted_energy(u, [r](double xi) { return std::pow(1.0 + xi * xi, r); }));
}

/// (int u L u + kappa u^2)^{1/2}.
inline double equivalent_norm_J(const Field& u, const SymbolSpec& sym, double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("equivalent_norm_J: kappa must be positive");
  Multiplier L(sym, u.grid);
  const double v = inner(u, L.apply(u)) + kappa * inner(u, u);
  return std::sqrt(std::max(v, 0.0));
}

/// Constants k1, k2 with k1 |u|^2_{H^{s/2}} <= J-norm^2 <= k2 |u|^2_{H^{s/2}}
/// (for fields without Nyquist content).
inline std::pair<double, double> norm_equivalence_constants(const SymbolSpec& sym, double kappa) {
  const double k1 = std::min(sym.A1_eff(), kappa) / std::pow(2.0, sym.s / 2.0);
  const double k2 = sym.A2_eff() + kappa;
  return {k1, k2};
}

// ---- translations ------------------------------------------------------------

/// u(x - k dx), cyclic.
inline Field shift_cells(const Field& u, int k) {
  const int n = u.size();
  Field r(u.grid);
  const int kk = ((k % n) + n) % n;
  for (int j = 0; j < n; ++j) r[(j + kk) % n] = u[j];
  return r;
}

/// u(x - y) by spectral phase shift (Nyquist dropped).
inline Field translate(const Field& u, double y) {
  const Grid& g = u.grid;
  auto half = fft::rdft(u.values);
  for (int i = 0; i < g.n / 2; ++i) half[i] *= std::polar(1.0, -two_pi * g.xi_half(i) * y);
  half[g.n / 2] = 0.0;
  auto v = fft::irdft(std::move(half), g.n);
  for (double& x : v) x /= g.n;
  return Field(g, std::move(v));
}

/// Zero the unpaired Nyquist mode.
inline Field drop_nyquist(const Field& u) {
  auto half = fft::rdft(u.values);
  half[u.grid.n / 2] = 0.0;
  auto v = fft::irdft(std::move(half), u.grid.n);
  for (double& x : v) x /= u.grid.n;
  return Field(u.grid, std::move(v));
}

/// Spectral interpolation onto a grid of the same length and different n.
inline Field resample(const Field& u, int n_new) {
  const Grid& g = u.grid;
  Grid h(g.length, n_new);
  auto half = fft::rdft(u.values);
  std::vector<cplx> out(n_new / 2 + 1, 0.0);
  const int keep = std::min(g.n, n_new) / 2;
  for (int i = 0; i < keep; ++i) out[i] = half[i];
  auto v = fft::irdft(std::move(out), n_new);
  for (double& x : v) x /= g.n;
  return Field(h, std::move(v));
}

/// Largest |u| within `margin` of either end of the domain, relative to max |u|.
inline double boundary_tail(const Field& u, double margin_fraction = 0.02) {
  const int n = u.size();
  const int w = std::max(1, static_cast<int>(margin_fraction * n));
  double edge = 0.0;
  for (int j = 0; j < w; ++j) edge = std::max({edge, std::abs(u[j]), std::abs(u[n - 1 - j])});
  const double peak = max_abs(u);
  return peak > 0.0 ? edge / peak : 0.0;
}

// ---- serialization -------------------------------------------------------------

inline constexpr char field_magic[17] = "SOLWAVE-FIELD-v1";

inline void write_text_field(const std::string& path, const Field& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  for (int j = 0; j < u.size(); ++j) out << u.grid.x(j) << ' ' << u[j] << '\n';
}

inline Field read_text_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<double> xs, vs;
  double x, v;
  while (in >> x >> v) {
    xs.push_back(x);
    vs.push_back(v);
  }
  if (xs.size() < 8) throw GeometryError(path + ": too few samples");
  const double dx = xs[1] - xs[0];
  Grid g(dx * xs.size(), static_cast<int>(xs.size()));
  return Field(g, std::move(vs));
}

/// 16-byte magic, int64 n, float64 length, n float64 values (host byte order, little-endian in practice).
inline void write_binary_field(const std::string& path, const Field& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(field_magic, 16);
  const std::int64_t n = u.grid.n;
  const double len = u.grid.length;
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(reinterpret_cast<const char*>(u.values.data()), static_cast<std::streamsize>(sizeof(double) * n));
}

inline Field read_binary_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  char magic[16];
  in.read(magic, 16);
  if (!in || std::memcmp(magic, field_magic, 16) != 0) throw std::runtime_error(path + ": bad field header");
  std::int64_t n = 0;
  double len = 0.0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || n < 8 || n > (1LL << 30)) throw std::runtime_error(path + ": bad field size");
  Grid g(len, static_cast<int>(n));
  Field u(g);
  in.read(reinterpret_cast<char*>(u.values.data()), static_cast<std::streamsize>(sizeof(double) * n));
  if (!in) throw std::runtime_error(path + ": truncated field data");
  return u;
}

}  // namespace solwave
