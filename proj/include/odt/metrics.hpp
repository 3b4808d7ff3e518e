#ifndef ODT_METRICS_HPP
#define ODT_METRICS_HPP

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "odt/grid.hpp"

namespace odt {

double mse(std::span<const double> a, std::span<const double> b);
double mse(const Volume3& a, const Volume3& b);

/// Centered correlation. Throws ValidationError if either input has zero
/// variance (degenerate), never returns NaN silently.
double pearson(std::span<const double> a, std::span<const double> b);
double pearson(const Volume3& a, const Volume3& b);

/// Mean local SSIM of two 2D slices (row-major, w fastest) with an 11x11
/// Gaussian window (std 1.5) and stabilizers C1 = (0.01 L)^2, C2 = (0.03 L)^2.
/// dynamic_range <= 0 selects the joint min-max range of the two inputs.
double ssim(std::span<const double> a, std::span<const double> b, int w, int h,
            double dynamic_range = 0.0);

struct SliceRow {
  int z_index = 0;
  double z_um = 0.0;
  double mse = 0.0;
  double ssim = 0.0;     // NaN when the slice pair is degenerate
  double pearson = 0.0;  // NaN when a slice has zero variance
};

struct SliceReport {
  std::vector<SliceRow> rows;
  double vol_mse = 0.0;
  double vol_ssim = 0.0;  // mean of defined per-slice values
  double vol_pearson = 0.0;
};

/// Per-axial-slice metrics for slices with |z| <= z_range_um
/// (z_range_um <= 0 means every slice). Aggregates cover the included region.
SliceReport evaluate_slices(const Volume3& a, const Volume3& b, double z_range_um);

/// Header `z_um,mse,ssim,pearson`, one row per slice, aggregate row last.
void write_csv(const SliceReport& report, std::ostream& os);

/// Full width at half maximum (um) of the 1D profile along `axis` through the
/// given point, by linear interpolation at the half-peak crossings.
double fwhm_profile(const Volume3& vol, int axis, std::array<double, 3> through_um);

/// Standard deviation of voxels farther than radius_um from center_um.
double background_std(const Volume3& vol, std::array<double, 3> center_um, double radius_um);

}  // namespace odt

#endif
