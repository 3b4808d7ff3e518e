#ifndef ODT_GRID_HPP
#define ODT_GRID_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "odt/error.hpp"

namespace odt {

/// Uniform 3D voxel grid. Data arrays are stored x-fastest:
/// index = x + nx*(y + ny*z). Pitches are in micrometers.
struct GridSpec {
  int nx = 0, ny = 0, nz = 0;
  double dx = 0.0, dy = 0.0, dz = 0.0;

  std::size_t count() const {
    return std::size_t(nx) * std::size_t(ny) * std::size_t(nz);
  }
  std::size_t index(int x, int y, int z) const {
    return std::size_t(x) + std::size_t(nx) * (std::size_t(y) + std::size_t(ny) * std::size_t(z));
  }
  int n(int axis) const { return axis == 0 ? nx : axis == 1 ? ny : nz; }
  double pitch(int axis) const { return axis == 0 ? dx : axis == 1 ? dy : dz; }

  /// Signed frequency of index k along an axis, cycles/um. DC sits at index 0:
  /// ((k + N/2) mod N - N/2) / (N*d).
  double freq(int axis, int k) const {
    const int N = n(axis);
    const int m = (k + N / 2) % N - N / 2;
    return double(m) / (double(N) * pitch(axis));
  }
  double freq_step(int axis) const { return 1.0 / (double(n(axis)) * pitch(axis)); }

  /// Spatial coordinate of index i along an axis, centered so the volume
  /// midpoint is the origin (exact sign flip under i -> N-1-i).
  double pos(int axis, int i) const {
    return (double(i) - 0.5 * double(n(axis) - 1)) * pitch(axis);
  }

  bool operator==(const GridSpec&) const = default;

  /// Throws ValidationError unless all counts >= 4 and all pitches > 0.
  void validate() const;
};

/// Real-valued scalar field (RI contrast or scattering potential).
struct Volume3 {
  GridSpec grid;
  std::vector<double> data;

  Volume3() = default;
  explicit Volume3(const GridSpec& g) : grid(g), data(g.count(), 0.0) {}

  double& at(int x, int y, int z) { return data[grid.index(x, y, z)]; }
  double at(int x, int y, int z) const { return data[grid.index(x, y, z)]; }
};

/// Complex Fourier-domain field on the same index layout as Volume3.
struct Spectrum3 {
  GridSpec grid;
  std::vector<std::complex<double>> data;

  Spectrum3() = default;
  explicit Spectrum3(const GridSpec& g) : grid(g), data(g.count()) {}

  std::complex<double>& at(int x, int y, int z) { return data[grid.index(x, y, z)]; }
  const std::complex<double>& at(int x, int y, int z) const { return data[grid.index(x, y, z)]; }
};

/// Binary indicator of measured frequency voxels (the OTF support).
struct SupportMask {
  GridSpec grid;
  std::vector<std::uint8_t> data;

  SupportMask() = default;
  explicit SupportMask(const GridSpec& g) : grid(g), data(g.count(), 0) {}

  bool at(int x, int y, int z) const { return data[grid.index(x, y, z)] != 0; }
  void set(int x, int y, int z, bool v = true) { data[grid.index(x, y, z)] = v ? 1 : 0; }
  std::size_t set_count() const;
};

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);
void require_finite(const Volume3& v, const char* what);
void require_finite(const Spectrum3& s, const char* what);
void require_sized(const Volume3& v, const char* what);
void require_sized(const Spectrum3& s, const char* what);
void require_sized(const SupportMask& m, const char* what);

/// data(k) == conj(data(-k mod N)) within rel_tol of the peak magnitude.
bool is_hermitian(const Spectrum3& s, double rel_tol = 1e-6);

/// mask(k) = mask(-k mod N) for every voxel.
bool is_centrally_symmetric(const SupportMask& m);

/// Sets mask(-k) wherever mask(k) is set. Idempotent.
void symmetrize(SupportMask& m);

}  // namespace odt

#endif
