#include "odt/diff.hpp"

#include <cmath>

namespace odt {

void grad(const Volume3& v, Volume3& gx, Volume3& gy, Volume3& gz) {
  require_sized(v, "grad");
  const auto& g = v.grid;
  if (gx.grid != g) gx = Volume3(g);
  if (gy.grid != g) gy = Volume3(g);
  if (gz.grid != g) gz = Volume3(g);
  const double* d = v.data.data();
  for (int z = 0; z < g.nz; ++z) {
    const int zp = (z + 1 == g.nz) ? 0 : z + 1;
    for (int y = 0; y < g.ny; ++y) {
      const int yp = (y + 1 == g.ny) ? 0 : y + 1;
      const std::size_t row = g.index(0, y, z);
      const std::size_t row_yp = g.index(0, yp, z);
      const std::size_t row_zp = g.index(0, y, zp);
      for (int x = 0; x < g.nx; ++x) {
        const int xp = (x + 1 == g.nx) ? 0 : x + 1;
        const double c = d[row + x];
        gx.data[row + x] = d[row + xp] - c;
        gy.data[row + x] = d[row_yp + x] - c;
        gz.data[row + x] = d[row_zp + x] - c;
      }
    }
  }
}

std::array<Volume3, 3> grad(const Volume3& v) {
  std::array<Volume3, 3> g;
  grad(v, g[0], g[1], g[2]);
  return g;
}

void div(const Volume3& px, const Volume3& py, const Volume3& pz, Volume3& out) {
  require_sized(px, "div");
  require_same_grid(px.grid, py.grid, "div");
  require_same_grid(px.grid, pz.grid, "div");
  const auto& g = px.grid;
  if (out.grid != g) out = Volume3(g);
  for (int z = 0; z < g.nz; ++z) {
    const int zm = (z == 0) ? g.nz - 1 : z - 1;
    for (int y = 0; y < g.ny; ++y) {
      const int ym = (y == 0) ? g.ny - 1 : y - 1;
      const std::size_t row = g.index(0, y, z);
      const std::size_t row_ym = g.index(0, ym, z);
      const std::size_t row_zm = g.index(0, y, zm);
      for (int x = 0; x < g.nx; ++x) {
        const int xm = (x == 0) ? g.nx - 1 : x - 1;
        out.data[row + x] = px.data[row + x] - px.data[row + xm] +
                            py.data[row + x] - py.data[row_ym + x] +
                            pz.data[row + x] - pz.data[row_zm + x];
      }
    }
  }
}

Volume3 div(const Volume3& px, const Volume3& py, const Volume3& pz) {
  Volume3 out;
  div(px, py, pz, out);
  return out;
}

Volume3 laplacian_symbol(const GridSpec& grid) {
  grid.validate();
  Volume3 sym(grid);
  std::vector<double> ax(grid.nx), ay(grid.ny), az(grid.nz);
  constexpr double two_pi = 6.283185307179586476925286766559;
  for (int i = 0; i < grid.nx; ++i) ax[i] = 2.0 - 2.0 * std::cos(two_pi * i / grid.nx);
  for (int i = 0; i < grid.ny; ++i) ay[i] = 2.0 - 2.0 * std::cos(two_pi * i / grid.ny);
  for (int i = 0; i < grid.nz; ++i) az[i] = 2.0 - 2.0 * std::cos(two_pi * i / grid.nz);
  for (int z = 0; z < grid.nz; ++z)
    for (int y = 0; y < grid.ny; ++y) {
      const std::size_t row = grid.index(0, y, z);
      const double yz = ay[y] + az[z];
      for (int x = 0; x < grid.nx; ++x) sym.data[row + x] = std::max(0.0, ax[x] + yz);
    }
  return sym;
}

}  // namespace odt
