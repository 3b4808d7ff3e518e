#include "odt/optics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace odt {

namespace {
constexpr double kPi = 3.14159265358979323846;

/// Distance from point p to the detection Ewald cap
/// {|k| = R, lateral(k) <= s_max, k_z > 0}, exploiting symmetry about the
/// optical axis: the cap reduces to an arc in the (lateral, z) half-plane.
double cap_distance(double px, double py, double pz, double R, double s_max, double z_rim) {
  const double plat = std::hypot(px, py);
  const double pr = std::hypot(plat, pz);
  if (pr == 0.0) return R;
  if (pz > 0.0 && plat * R <= s_max * pr) return std::abs(pr - R);
  return std::hypot(plat - s_max, pz - z_rim);
}
}  // namespace

void OpticsGeometry::validate() const {
  if (!(wavelength > 0.0)) throw ValidationError("optics: wavelength must be > 0");
  if (!(n_medium > 0.0)) throw ValidationError("optics: n_medium must be > 0");
  if (!(na_illum > 0.0) || na_illum > n_medium)
    throw ValidationError("optics: require 0 < na_illum <= n_medium");
  if (!(na_detect > 0.0) || na_detect > n_medium)
    throw ValidationError("optics: require 0 < na_detect <= n_medium");
  if (n_angles < 1) throw ValidationError("optics: n_angles must be >= 1");
  if (pattern == Pattern::custom && directions.empty())
    throw ValidationError("optics: custom pattern needs a direction list");
}

std::vector<std::array<double, 3>> OpticsGeometry::illumination_directions() const {
  validate();
  std::vector<std::array<double, 3>> dirs;
  const double sin_max = na_illum / n_medium;
  switch (pattern) {
    case Pattern::circle: {
      const double cz = std::sqrt(std::max(0.0, 1.0 - sin_max * sin_max));
      for (int j = 0; j < n_angles; ++j) {
        const double phi = 2.0 * kPi * j / n_angles;
        dirs.push_back({sin_max * std::cos(phi), sin_max * std::sin(phi), cz});
      }
      break;
    }
    case Pattern::spiral: {
      const double golden = kPi * (3.0 - std::sqrt(5.0));
      for (int j = 0; j < n_angles; ++j) {
        const double r = sin_max * std::sqrt((j + 0.5) / n_angles);
        const double phi = golden * j;
        const double cz = std::sqrt(std::max(0.0, 1.0 - r * r));
        dirs.push_back({r * std::cos(phi), r * std::sin(phi), cz});
      }
      break;
    }
    case Pattern::custom: {
      for (const auto& d : directions) {
        const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        if (!(norm > 0.0)) throw ValidationError("optics: zero-length illumination direction");
        std::array<double, 3> u{d[0] / norm, d[1] / norm, d[2] / norm};
        if (!(u[2] > 0.0)) throw ValidationError("optics: illumination direction must have z > 0");
        if (std::hypot(u[0], u[1]) > sin_max * (1.0 + 1e-9))
          throw ValidationError("optics: illumination direction exceeds na_illum");
        dirs.push_back(u);
      }
      break;
    }
  }
  return dirs;
}

double lateral_band_halfwidth(const OpticsGeometry& geom) {
  return (geom.na_illum + geom.na_detect) / geom.wavelength;
}

double axial_band_halfwidth(const OpticsGeometry& geom) {
  const double na = std::max(geom.na_illum, geom.na_detect);
  const double n = geom.n_medium;
  return (n - std::sqrt(n * n - na * na)) / geom.wavelength;
}

SupportMask build_support_mask(const OpticsGeometry& geom, const GridSpec& grid) {
  grid.validate();
  geom.validate();

  const double lat_half = lateral_band_halfwidth(geom);
  const double ax_half = axial_band_halfwidth(geom);
  if (0.5 / grid.dx < lat_half * (1.0 - 1e-12) || 0.5 / grid.dy < lat_half * (1.0 - 1e-12))
    throw ValidationError("build_support_mask: lateral Nyquist violation (pitch too coarse)");
  if (0.5 / grid.dz < ax_half * (1.0 - 1e-12))
    throw ValidationError("build_support_mask: axial Nyquist violation (pitch too coarse)");

  const double R = geom.n_medium / geom.wavelength;
  const double s_max = geom.na_detect / geom.wavelength;
  const double z_rim = std::sqrt(std::max(0.0, R * R - s_max * s_max));
  const double sx = grid.freq_step(0), sy = grid.freq_step(1), sz = grid.freq_step(2);
  const double tol = 0.5 * std::sqrt(sx * sx + sy * sy + sz * sz);

  // Precompute per-axis frequency tables once.
  std::vector<double> fx(grid.nx), fy(grid.ny), fz(grid.nz);
  for (int i = 0; i < grid.nx; ++i) fx[i] = grid.freq(0, i);
  for (int i = 0; i < grid.ny; ++i) fy[i] = grid.freq(1, i);
  for (int i = 0; i < grid.nz; ++i) fz[i] = grid.freq(2, i);

  SupportMask mask(grid);
  for (const auto& dir : geom.illumination_directions()) {
    const double kin_x = R * dir[0], kin_y = R * dir[1], kin_z = R * dir[2];
    // Bounding box of this cap in scattering-vector space, padded by tol.
    const double x_lo = -s_max - kin_x - tol, x_hi = s_max - kin_x + tol;
    const double y_lo = -s_max - kin_y - tol, y_hi = s_max - kin_y + tol;
    const double z_lo = z_rim - kin_z - tol, z_hi = R - kin_z + tol;
    for (int z = 0; z < grid.nz; ++z) {
      if (fz[z] < z_lo || fz[z] > z_hi) continue;
      for (int y = 0; y < grid.ny; ++y) {
        if (fy[y] < y_lo || fy[y] > y_hi) continue;
        const std::size_t row = grid.index(0, y, z);
        for (int x = 0; x < grid.nx; ++x) {
          if (fx[x] < x_lo || fx[x] > x_hi) continue;
          if (mask.data[row + x]) continue;
          if (cap_distance(fx[x] + kin_x, fy[y] + kin_y, fz[z] + kin_z, R, s_max, z_rim) <= tol)
            mask.data[row + x] = 1;
        }
      }
    }
  }

  if (mask.set_count() == 0) throw ValidationError("build_support_mask: empty mask");
  symmetrize(mask);
  mask.data[0] = 1;  // DC
  return mask;
}

Degraded degrade(const Volume3& f_true, const SupportMask& mask, FftEngine& eng) {
  require_sized(f_true, "degrade");
  require_sized(mask, "degrade");
  require_same_grid(f_true.grid, mask.grid, "degrade");
  Degraded out;
  out.g = fft3(f_true, eng);
  for (std::size_t i = 0; i < out.g.data.size(); ++i)
    if (!mask.data[i]) out.g.data[i] = 0.0;
  out.raw = ifft3(out.g, eng);
  return out;
}

Degraded degrade(const Volume3& f_true, const SupportMask& mask) {
  FftEngine eng;
  return degrade(f_true, mask, eng);
}

MaskExtents mask_extents(const SupportMask& mask) {
  require_sized(mask, "mask_extents");
  const auto& g = mask.grid;
  MaskExtents e;
  for (int z = 0; z < g.nz; ++z)
    for (int y = 0; y < g.ny; ++y) {
      const std::size_t row = g.index(0, y, z);
      for (int x = 0; x < g.nx; ++x) {
        if (!mask.data[row + x]) continue;
        e.fx = std::max(e.fx, std::abs(g.freq(0, x)));
        e.fy = std::max(e.fy, std::abs(g.freq(1, y)));
        e.fz = std::max(e.fz, std::abs(g.freq(2, z)));
      }
    }
  return e;
}

}  // namespace odt
