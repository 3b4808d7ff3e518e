#include "odt/phantom.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace odt {

namespace {

// Ball or spherical shell with an optional linear edge ramp.
struct Shape {
  std::array<double, 3> center;
  double r_inner = 0.0;  // 0 for balls
  double r_outer = 0.0;
  double contrast = 0.0;
};

// 1 inside, 0 outside, linear ramp of width w centered on each boundary.
double shape_weight(const Shape& s, double r, double w) {
  auto ramp_below = [w](double edge, double x) {  // 1 for x << edge
    if (w <= 0.0) return x <= edge ? 1.0 : 0.0;
    return std::clamp((edge + 0.5 * w - x) / w, 0.0, 1.0);
  };
  double weight = ramp_below(s.r_outer, r);
  if (s.r_inner > 0.0) weight *= 1.0 - ramp_below(s.r_inner, r);
  return weight;
}

}  // namespace

void PhantomSpec::validate() const {
  if (!(radius > 0.0)) throw ValidationError("phantom: radius must be > 0");
  if (kind == Kind::sphere_pair && !(radius2 > 0.0))
    throw ValidationError("phantom: radius2 must be > 0");
  if (kind == Kind::shell_cell) {
    if (!(shell_thickness > 0.0)) throw ValidationError("phantom: shell_thickness must be > 0");
    if (granule_count < 0) throw ValidationError("phantom: granule_count must be >= 0");
    if (granule_count > 0 && !(granule_radius > 0.0))
      throw ValidationError("phantom: granule_radius must be > 0");
  }
  if (edge == Edge::smooth && !(edge_width_voxels > 0.0))
    throw ValidationError("phantom: edge_width_voxels must be > 0 for smooth edges");
}

Volume3 generate(const PhantomSpec& spec, const GridSpec& grid) {
  grid.validate();
  spec.validate();

  const double edge_w =
      spec.edge == PhantomSpec::Edge::smooth ? spec.edge_width_voxels * grid.dx : 0.0;

  std::vector<Shape> shapes;
  switch (spec.kind) {
    case PhantomSpec::Kind::sphere:
      shapes.push_back({spec.center, 0.0, spec.radius, spec.contrast});
      break;
    case PhantomSpec::Kind::sphere_pair:
      shapes.push_back({spec.center, 0.0, spec.radius, spec.contrast});
      shapes.push_back({spec.center2, 0.0, spec.radius2, spec.contrast2});
      break;
    case PhantomSpec::Kind::shell_cell: {
      shapes.push_back({spec.center, 0.0, spec.radius, spec.contrast});
      shapes.push_back(
          {spec.center, spec.radius, spec.radius + spec.shell_thickness, spec.shell_contrast});
      // Granules sit fully inside the cytoplasm; placement is seeded.
      std::mt19937_64 rng(spec.seed);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      const double reach = spec.radius - spec.granule_radius - 0.5 * edge_w;
      if (spec.granule_count > 0 && !(reach > 0.0))
        throw ValidationError("phantom: granules do not fit inside the cell radius");
      for (int i = 0; i < spec.granule_count; ++i) {
        double gx, gy, gz;
        do {
          gx = unit(rng);
          gy = unit(rng);
          gz = unit(rng);
        } while (gx * gx + gy * gy + gz * gz > 1.0);
        shapes.push_back({{spec.center[0] + gx * reach, spec.center[1] + gy * reach,
                           spec.center[2] + gz * reach},
                          0.0,
                          spec.granule_radius,
                          spec.granule_contrast});
      }
      break;
    }
  }

  // Every shape must fit inside the grid with a 2-voxel margin.
  for (const auto& s : shapes) {
    const double reach = s.r_outer + 0.5 * edge_w;
    for (int a = 0; a < 3; ++a) {
      const double half = 0.5 * grid.n(a) * grid.pitch(a);
      if (std::abs(s.center[a]) + reach > half - 2.0 * grid.pitch(a))
        throw ValidationError("phantom: shape out of bounds (needs a 2-voxel margin)");
    }
  }

  Volume3 vol(grid);
  for (int z = 0; z < grid.nz; ++z) {
    const double pz = grid.pos(2, z);
    for (int y = 0; y < grid.ny; ++y) {
      const double py = grid.pos(1, y);
      const std::size_t row = grid.index(0, y, z);
      for (int x = 0; x < grid.nx; ++x) {
        const double px = grid.pos(0, x);
        double v = spec.background;
        for (const auto& s : shapes) {
          const double rx = px - s.center[0];
          const double ry = py - s.center[1];
          const double rz = pz - s.center[2];
          const double r = std::sqrt(rx * rx + ry * ry + rz * rz);
          v += s.contrast * shape_weight(s, r, edge_w);
        }
        vol.data[row + x] = v;
      }
    }
  }
  return vol;
}

}  // namespace odt
