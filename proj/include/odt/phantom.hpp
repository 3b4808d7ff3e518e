#ifndef ODT_PHANTOM_HPP
#define ODT_PHANTOM_HPP

#include <array>
#include <cstdint>

#include "odt/grid.hpp"

namespace odt {

/// Synthetic ground-truth volumes: single bead, bead pair, or a
/// shell-and-granule cell. Coordinates are um in the centered grid frame,
/// contrasts are delta-n values on top of the background.
struct PhantomSpec {
  enum class Kind { sphere, sphere_pair, shell_cell };
  enum class Edge { hard, smooth };

  Kind kind = Kind::sphere;
  std::array<double, 3> center{0, 0, 0};
  double radius = 1.0;     // um (default: 2 um bead diameter)
  double contrast = 0.12;  // approx SiO2 in aqueous medium

  // sphere_pair
  std::array<double, 3> center2{0, 0, 0};
  double radius2 = 1.0;
  double contrast2 = 0.12;

  // shell_cell: cytoplasm ball + membrane shell + granules inside
  double shell_thickness = 0.2;   // um
  double shell_contrast = 0.06;
  int granule_count = 8;
  double granule_radius = 0.3;    // um
  double granule_contrast = 0.05;
  std::uint64_t seed = 1234;      // granule placement

  double background = 0.0;
  Edge edge = Edge::hard;
  double edge_width_voxels = 2.0;  // transition width for smooth edges

  void validate() const;
};

/// Voxel value = background + sum of contrasts of shapes containing the
/// voxel center; smoothed edges use a linear ramp across the transition
/// width, centered on the nominal boundary.
Volume3 generate(const PhantomSpec& spec, const GridSpec& grid);

}  // namespace odt

#endif
