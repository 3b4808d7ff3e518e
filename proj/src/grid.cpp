#include "odt/grid.hpp"

#include <cmath>
#include <string>

namespace odt {

void GridSpec::validate() const {
  if (nx < 4 || ny < 4 || nz < 4)
    throw ValidationError("grid: all voxel counts must be >= 4, got " + std::to_string(nx) + "x" +
                          std::to_string(ny) + "x" + std::to_string(nz));
  if (!(dx > 0.0) || !(dy > 0.0) || !(dz > 0.0))
    throw ValidationError("grid: all pitches must be > 0");
}

std::size_t SupportMask::set_count() const {
  std::size_t c = 0;
  for (auto v : data) c += (v != 0);
  return c;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ValidationError(std::string(what) + ": grid mismatch");
}

void require_finite(const Volume3& v, const char* what) {
  for (double x : v.data)
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + ": non-finite input");
}

void require_finite(const Spectrum3& s, const char* what) {
  for (const auto& z : s.data)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw ValidationError(std::string(what) + ": non-finite input");
}

void require_sized(const Volume3& v, const char* what) {
  v.grid.validate();
  if (v.data.size() != v.grid.count())
    throw ValidationError(std::string(what) + ": data length does not match grid");
}

void require_sized(const Spectrum3& s, const char* what) {
  s.grid.validate();
  if (s.data.size() != s.grid.count())
    throw ValidationError(std::string(what) + ": data length does not match grid");
}

void require_sized(const SupportMask& m, const char* what) {
  m.grid.validate();
  if (m.data.size() != m.grid.count())
    throw ValidationError(std::string(what) + ": data length does not match grid");
}

bool is_hermitian(const Spectrum3& s, double rel_tol) {
  double peak = 0.0;
  for (const auto& z : s.data) peak = std::max(peak, std::abs(z));
  const double tol = rel_tol * peak;
  const auto& g = s.grid;
  for (int z = 0; z < g.nz; ++z) {
    const int zr = (g.nz - z) % g.nz;
    for (int y = 0; y < g.ny; ++y) {
      const int yr = (g.ny - y) % g.ny;
      for (int x = 0; x < g.nx; ++x) {
        const int xr = (g.nx - x) % g.nx;
        const auto d = s.data[g.index(x, y, z)] - std::conj(s.data[g.index(xr, yr, zr)]);
        if (std::abs(d) > tol) return false;
      }
    }
  }
  return true;
}

bool is_centrally_symmetric(const SupportMask& m) {
  const auto& g = m.grid;
  for (int z = 0; z < g.nz; ++z) {
    const int zr = (g.nz - z) % g.nz;
    for (int y = 0; y < g.ny; ++y) {
      const int yr = (g.ny - y) % g.ny;
      for (int x = 0; x < g.nx; ++x) {
        const int xr = (g.nx - x) % g.nx;
        if (m.data[g.index(x, y, z)] != m.data[g.index(xr, yr, zr)]) return false;
      }
    }
  }
  return true;
}

void symmetrize(SupportMask& m) {
  const auto& g = m.grid;
  for (int z = 0; z < g.nz; ++z) {
    const int zr = (g.nz - z) % g.nz;
    for (int y = 0; y < g.ny; ++y) {
      const int yr = (g.ny - y) % g.ny;
      for (int x = 0; x < g.nx; ++x) {
        const int xr = (g.nx - x) % g.nx;
        if (m.data[g.index(x, y, z)]) m.data[g.index(xr, yr, zr)] = 1;
      }
    }
  }
}

}  // namespace odt
