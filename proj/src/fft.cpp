#include "odt/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

namespace odt {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct FftEngine::Plan {
  fftw_plan plan = nullptr;
  fftw_complex* buf_in = nullptr;
  fftw_complex* buf_out = nullptr;
  std::size_t n = 0;

  ~Plan() {
    std::lock_guard lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    if (buf_in) fftw_free(buf_in);
    if (buf_out) fftw_free(buf_out);
  }
};

FftEngine::FftEngine() = default;
FftEngine::~FftEngine() = default;

void FftEngine::transform(const GridSpec& g, const std::complex<double>* in,
                          std::complex<double>* out, bool forward) {
  const auto key = std::make_tuple(g.nx, g.ny, g.nz, forward);
  auto it = plans_.find(key);
  if (it == plans_.end()) {
    auto p = std::make_unique<Plan>();
    p->n = g.count();
    {
      std::lock_guard lock(planner_mutex());
      p->buf_in = fftw_alloc_complex(p->n);
      p->buf_out = fftw_alloc_complex(p->n);
      // x-fastest storage means x is FFTW's last (fastest) dimension.
      p->plan = fftw_plan_dft_3d(g.nz, g.ny, g.nx, p->buf_in, p->buf_out,
                                 forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!p->plan) throw Error("fftw: plan creation failed");
    it = plans_.emplace(key, std::move(p)).first;
  }
  Plan& p = *it->second;
  std::memcpy(p.buf_in, in, p.n * sizeof(fftw_complex));
  fftw_execute(p.plan);
  const double scale = 1.0 / std::sqrt(double(p.n));
  const auto* src = reinterpret_cast<const std::complex<double>*>(p.buf_out);
  for (std::size_t i = 0; i < p.n; ++i) out[i] = src[i] * scale;
}

Spectrum3 fft3(const Volume3& v, FftEngine& eng) {
  require_sized(v, "fft3");
  require_finite(v, "fft3");
  Spectrum3 s(v.grid);
  for (std::size_t i = 0; i < v.data.size(); ++i) s.data[i] = v.data[i];
  eng.transform(v.grid, s.data.data(), s.data.data(), true);
  return s;
}

Volume3 ifft3(const Spectrum3& s, FftEngine& eng) {
  require_sized(s, "ifft3");
  require_finite(s, "ifft3");
  std::vector<std::complex<double>> tmp(s.data.size());
  eng.transform(s.grid, s.data.data(), tmp.data(), false);
  Volume3 v(s.grid);
  double max_re = 0.0, max_im = 0.0;
  for (std::size_t i = 0; i < tmp.size(); ++i) {
    v.data[i] = tmp[i].real();
    max_re = std::max(max_re, std::abs(tmp[i].real()));
    max_im = std::max(max_im, std::abs(tmp[i].imag()));
  }
  // Only Hermitian spectra map back to real volumes; anything else is a bug
  // upstream, so the residue check is strict.
  if (max_im > 1e-5 * max_re)
    throw ValidationError("ifft3: imaginary residue exceeds 1e-5 of the real peak");
  return v;
}

namespace {
struct SharedEngine {
  std::mutex mutex;
  FftEngine engine;
};
SharedEngine& shared_engine() {
  static SharedEngine e;
  return e;
}
}  // namespace

Spectrum3 fft3(const Volume3& v) {
  auto& e = shared_engine();
  std::lock_guard lock(e.mutex);
  return fft3(v, e.engine);
}

Volume3 ifft3(const Spectrum3& s) {
  auto& e = shared_engine();
  std::lock_guard lock(e.mutex);
  return ifft3(s, e.engine);
}

}  // namespace odt
