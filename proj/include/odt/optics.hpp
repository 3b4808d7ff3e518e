#ifndef ODT_OPTICS_HPP
#define ODT_OPTICS_HPP

#include <array>
#include <vector>

#include "odt/fft.hpp"
#include "odt/grid.hpp"

namespace odt {

/// ODT acquisition geometry. Wavelength in um, optical axis along +z.
struct OpticsGeometry {
  double wavelength = 0.532;
  double n_medium = 1.337;
  double na_illum = 1.2;
  double na_detect = 1.2;
  int n_angles = 49;

  enum class Pattern { circle, spiral, custom };
  Pattern pattern = Pattern::circle;
  /// Unit illumination direction vectors (s_z > 0); used when pattern == custom.
  std::vector<std::array<double, 3>> directions;

  void validate() const;

  /// Resolves the pattern into concrete unit direction vectors.
  /// circle: n_angles directions on a cone at the full illumination NA.
  /// spiral: Fermat spiral filling the illumination cone.
  std::vector<std::array<double, 3>> illumination_directions() const;
};

/// Band half-widths of the measurable support, cycles/um.
double lateral_band_halfwidth(const OpticsGeometry& geom);
double axial_band_halfwidth(const OpticsGeometry& geom);

/// Rasterizes the union of Ewald caps {k_s - k_in} over all illumination
/// directions onto the grid's frequency voxels: a voxel is set when its
/// center lies within half a frequency-voxel diagonal of a cap surface.
/// The result is centrally symmetrized and DC is forced on.
SupportMask build_support_mask(const OpticsGeometry& geom, const GridSpec& grid);

struct Degraded {
  Spectrum3 g;  ///< masked spectrum (zero outside support)
  Volume3 raw;  ///< naive zero-filled reconstruction ifft3(g)
};

/// Missing-cone degradation model: g = M .* fft3(f_true), raw = ifft3(g).
Degraded degrade(const Volume3& f_true, const SupportMask& mask);
Degraded degrade(const Volume3& f_true, const SupportMask& mask, FftEngine& eng);

/// Largest |frequency| among set voxels, per axis (cycles/um).
struct MaskExtents {
  double fx = 0, fy = 0, fz = 0;
};
MaskExtents mask_extents(const SupportMask& mask);

}  // namespace odt

#endif
