#pragma once

// Thin FFTW3 wrapper: cached plans, thread-safe execution on caller buffers.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace solwave::fft {

using cplx = std::complex<double>;

namespace detail {

enum class Kind { Forward, Backward, R2C, C2R };

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(Kind kind, int n) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(static_cast<int>(kind), n);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    auto* cin = fftw_alloc_complex(n);
    auto* cout = fftw_alloc_complex(n);
    auto* rbuf = fftw_alloc_real(n);
    switch (kind) {
      case Kind::Forward:
        plan = fftw_plan_dft_1d(n, cin, cout, FFTW_FORWARD, flags);
        break;
      case Kind::Backward:
        plan = fftw_plan_dft_1d(n, cin, cout, FFTW_BACKWARD, flags);
        break;
      case Kind::R2C:
        plan = fftw_plan_dft_r2c_1d(n, rbuf, cout, flags);
        break;
      case Kind::C2R:
        plan = fftw_plan_dft_c2r_1d(n, cin, rbuf, flags);
        break;
    }
    fftw_free(cin);
    fftw_free(cout);
    fftw_free(rbuf);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::tuple<int, int>, fftw_plan> plans_;
};

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

/// Unnormalized DFT: out_k = sum_j in_j e^{-2 pi i jk/n}.
inline std::vector<cplx> dft(std::vector<cplx> in) {
  const int n = static_cast<int>(in.size());
  std::vector<cplx> out(in.size());
  auto plan = detail::PlanCache::instance().get(detail::Kind::Forward, n);
  fftw_execute_dft(plan, detail::as_fftw(in.data()), detail::as_fftw(out.data()));
  return out;
}

/// Unnormalized inverse DFT: out_j = sum_k in_k e^{+2 pi i jk/n}.
inline std::vector<cplx> idft(std::vector<cplx> in) {
  const int n = static_cast<int>(in.size());
  std::vector<cplx> out(in.size());
  auto plan = detail::PlanCache::instance().get(detail::Kind::Backward, n);
  fftw_execute_dft(plan, detail::as_fftw(in.data()), detail::as_fftw(out.data()));
  return out;
}

/// Real-input DFT, returns the n/2+1 nonnegative-index coefficients.
inline std::vector<cplx> rdft(std::vector<double> in) {
  const int n = static_cast<int>(in.size());
  std::vector<cplx> out(n / 2 + 1);
  auto plan = detail::PlanCache::instance().get(detail::Kind::R2C, n);
  fftw_execute_dft_r2c(plan, in.data(), detail::as_fftw(out.data()));
  return out;
}

/// Inverse of rdft (unnormalized). The half spectrum is taken by value since c2r clobbers it.
inline std::vector<double> irdft(std::vector<cplx> half, int n) {
  std::vector<double> out(n);
  auto plan = detail::PlanCache::instance().get(detail::Kind::C2R, n);
  fftw_execute_dft_c2r(plan, detail::as_fftw(half.data()), out.data());
  return out;
}

}  // namespace solwave::fft
