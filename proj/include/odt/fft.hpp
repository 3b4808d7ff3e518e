#ifndef ODT_FFT_HPP
#define ODT_FFT_HPP

#include <map>
#include <memory>
#include <tuple>

#include "odt/grid.hpp"

namespace odt {

/// Unitary 3D DFT backed by FFTW. Transforms always run through internal
/// FFTW-allocated buffers so the planner sees one fixed alignment and the
/// same codelets execute on every run (outputs are bit-reproducible).
///
/// An engine caches one plan per (dims, direction). Engines are not
/// thread-safe; give each concurrent solve its own instance. Plan creation
/// is serialized internally (the FFTW planner is a global resource).
class FftEngine {
 public:
  FftEngine();
  ~FftEngine();
  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  /// out(k) = n^(-1/2) * sum_x in(x) exp(-2*pi*i k.x/N)   (forward)
  /// out(x) = n^(-1/2) * sum_k in(k) exp(+2*pi*i k.x/N)   (inverse)
  /// in and out may alias.
  void transform(const GridSpec& g, const std::complex<double>* in, std::complex<double>* out,
                 bool forward);

 private:
  struct Plan;
  std::map<std::tuple<int, int, int, bool>, std::unique_ptr<Plan>> plans_;
};

Spectrum3 fft3(const Volume3& v, FftEngine& eng);
Volume3 ifft3(const Spectrum3& s, FftEngine& eng);

/// Convenience overloads using a shared process-wide engine (serialized).
Spectrum3 fft3(const Volume3& v);
Volume3 ifft3(const Spectrum3& s);

}  // namespace odt

#endif
