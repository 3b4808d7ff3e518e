#include "odt/patch.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace odt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Mirror an index into [0, n) with edge samples included (..., 1, 0 | 0, 1, ...).
int fold_reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

int padded_extent(int n, int patch, int stride) {
  if (n <= patch) return patch;
  const int over = n - patch;
  const int steps = (over + stride - 1) / stride;
  return patch + steps * stride;
}

}  // namespace

void PatchLayout::validate() const {
  if (patch < 2 || patch % 2 != 0) throw ValidationError("patch: edge length must be even and >= 2");
  if (stride < 1 || stride > patch) throw ValidationError("patch: require 1 <= stride <= patch");
  if (patch % stride != 0)
    throw ValidationError("patch: stride must divide the patch edge so padded axes tile evenly");
}

PatchSet extract(const Volume3& vol, const PatchLayout& layout) {
  require_sized(vol, "extract");
  layout.validate();
  const auto& g = vol.grid;

  PatchSet set;
  set.padded = g;
  int counts[3];
  for (int a = 0; a < 3; ++a) {
    const int padded = padded_extent(g.n(a), layout.patch, layout.stride);
    const int pad = padded - g.n(a);
    set.pad_lo[a] = pad / 2;
    counts[a] = (padded - layout.patch) / layout.stride + 1;
    (a == 0 ? set.padded.nx : a == 1 ? set.padded.ny : set.padded.nz) = padded;
  }

  const GridSpec pg{layout.patch, layout.patch, layout.patch, g.dx, g.dy, g.dz};
  for (int cz = 0; cz < counts[2]; ++cz)
    for (int cy = 0; cy < counts[1]; ++cy)
      for (int cx = 0; cx < counts[0]; ++cx) {
        const std::array<int, 3> origin{cx * layout.stride, cy * layout.stride,
                                        cz * layout.stride};
        Volume3 p(pg);
        for (int z = 0; z < pg.nz; ++z) {
          const int sz = fold_reflect(origin[2] + z - set.pad_lo[2], g.nz);
          for (int y = 0; y < pg.ny; ++y) {
            const int sy = fold_reflect(origin[1] + y - set.pad_lo[1], g.ny);
            const std::size_t prow = pg.index(0, y, z);
            for (int x = 0; x < pg.nx; ++x) {
              const int sx = fold_reflect(origin[0] + x - set.pad_lo[0], g.nx);
              p.data[prow + x] = vol.data[g.index(sx, sy, sz)];
            }
          }
        }
        set.patches.push_back(std::move(p));
        set.origins.push_back(origin);
      }
  return set;
}

Volume3 window3(int patch, PatchLayout::Window mode) {
  if (patch < 2 || patch % 2 != 0)
    throw ValidationError("window3: patch edge must be even and >= 2");
  const GridSpec g{patch, patch, patch, 1.0, 1.0, 1.0};
  Volume3 w(g);
  if (mode == PatchLayout::Window::paper_literal) {
    for (auto& v : w.data) v = 1.0;
    return w;
  }
  std::vector<double> w1(patch);
  for (int t = 0; t < patch; ++t) {
    const double s = std::sin(kPi * (t + 0.5) / patch);
    w1[t] = s * s;
  }
  for (int z = 0; z < patch; ++z)
    for (int y = 0; y < patch; ++y) {
      const std::size_t row = g.index(0, y, z);
      const double wyz = w1[y] * w1[z];
      for (int x = 0; x < patch; ++x) w.data[row + x] = w1[x] * wyz;
    }
  return w;
}

Volume3 stitch(const PatchSet& set, const PatchLayout& layout, const GridSpec& out_grid) {
  layout.validate();
  out_grid.validate();
  if (set.patches.size() != set.origins.size() || set.patches.empty())
    throw ValidationError("stitch: inconsistent patch set");
  for (int a = 0; a < 3; ++a)
    if (set.pad_lo[a] < 0 || set.pad_lo[a] + out_grid.n(a) > set.padded.n(a))
      throw ValidationError("stitch: output grid does not fit the padded canvas");

  const Volume3 win = window3(layout.patch, layout.window);
  Volume3 canvas(set.padded), weight(set.padded);

  for (std::size_t p = 0; p < set.patches.size(); ++p) {
    const Volume3& patch = set.patches[p];
    if (patch.grid.nx != layout.patch || patch.grid.ny != layout.patch ||
        patch.grid.nz != layout.patch)
      throw ValidationError("stitch: patch dimensions do not match the layout");
    const auto& o = set.origins[p];
    for (int z = 0; z < layout.patch; ++z)
      for (int y = 0; y < layout.patch; ++y) {
        const std::size_t prow = patch.grid.index(0, y, z);
        const std::size_t crow = set.padded.index(o[0], o[1] + y, o[2] + z);
        for (int x = 0; x < layout.patch; ++x) {
          const double wv = win.data[prow + x];
          canvas.data[crow + x] += wv * patch.data[prow + x];
          weight.data[crow + x] += wv;
        }
      }
  }

  Volume3 out(out_grid);
  for (int z = 0; z < out_grid.nz; ++z)
    for (int y = 0; y < out_grid.ny; ++y) {
      const std::size_t orow = out_grid.index(0, y, z);
      const std::size_t crow = set.padded.index(set.pad_lo[0], y + set.pad_lo[1], z + set.pad_lo[2]);
      for (int x = 0; x < out_grid.nx; ++x) {
        const double wv = weight.data[crow + x];
        if (!(wv > 1e-12)) throw ValidationError("stitch: coverage hole in the patch layout");
        out.data[orow + x] = canvas.data[crow + x] / wv;
      }
    }
  return out;
}

std::pair<Volume3, PatchedReport> patched_regularize(const Volume3& raw,
                                                     const MaskBuilder& mask_builder,
                                                     const SolverParams& params,
                                                     const PatchLayout& layout, int threads) {
  params.validate();
  PatchSet set = extract(raw, layout);
  const GridSpec pg = set.patches.front().grid;
  const SupportMask patch_mask = mask_builder(pg);
  require_same_grid(patch_mask.grid, pg, "patched_regularize");

  PatchedReport report;
  report.n_patches = int(set.patches.size());
  report.final_residual.resize(set.patches.size());
  std::vector<PhaseTimes> times(set.patches.size());

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  auto worker = [&] {
    for (;;) {
      const std::size_t p = next.fetch_add(1);
      if (p >= set.patches.size()) return;
      auto [vol, rep] = regularize(set.patches[p], patch_mask, params);
      set.patches[p] = std::move(vol);
      times[p] = rep.times;
      report.final_residual[p] = rep.outer_residual.back();
    }
  };
  const int n_workers = std::max(1, std::min<int>(threads, int(set.patches.size())));
  if (n_workers == 1) {
    worker();
  } else {
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& t : times) {
    report.times.fupdate_s += t.fupdate_s;
    report.times.shrink_s += t.shrink_s;
    report.times.bookkeep_s += t.bookkeep_s;
    report.times.wall_s += t.wall_s;
  }

  return {stitch(set, layout, raw.grid), std::move(report)};
}

}  // namespace odt
