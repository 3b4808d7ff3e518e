#ifndef ODT_PATCH_HPP
#define ODT_PATCH_HPP

#include <array>
#include <functional>
#include <vector>

#include "odt/grid.hpp"
#include "odt/solver.hpp"

namespace odt {

struct PatchLayout {
  int patch = 64;
  int stride = 32;

  enum class Window {
    partition_of_unity,  ///< separable sin^2 weights; exact PoU at 50% overlap
    paper_literal,       ///< uniform weights, normalized by per-voxel coverage
  };
  Window window = Window::partition_of_unity;

  void validate() const;
};

struct PatchSet {
  std::vector<Volume3> patches;
  std::vector<std::array<int, 3>> origins;  ///< voxel offsets in the padded canvas
  GridSpec padded;
  std::array<int, 3> pad_lo{0, 0, 0};
};

/// Reflectively pads so every axis is patch-coverable at the stride, then
/// emits all patches. Patch count per axis = (padded_N - patch)/stride + 1.
PatchSet extract(const Volume3& vol, const PatchLayout& layout);

/// Separable weight volume for one patch. partition_of_unity:
/// w(t) = sin^2(pi (t + 0.5)/patch) per axis; paper_literal: all ones.
Volume3 window3(int patch, PatchLayout::Window mode);

/// Accumulates window-weighted patches onto the padded canvas, normalizes by
/// the accumulated weight (identically 1 in the partition-of-unity interior,
/// the coverage count in paper_literal mode), and crops back to out_grid.
/// A voxel with zero accumulated weight is a coverage hole and throws.
Volume3 stitch(const PatchSet& set, const PatchLayout& layout, const GridSpec& out_grid);

using MaskBuilder = std::function<SupportMask(const GridSpec&)>;

struct PatchedReport {
  int n_patches = 0;
  PhaseTimes times;                    // summed over patches
  std::vector<double> final_residual;  // last outer residual per patch
};

/// extract -> regularize each patch independently (one patch-sized mask of
/// identical geometry) -> stitch. Patch solves may run on `threads` workers;
/// accumulation is always sequential in patch order, so the result is
/// deterministic.
std::pair<Volume3, PatchedReport> patched_regularize(const Volume3& raw,
                                                     const MaskBuilder& mask_builder,
                                                     const SolverParams& params,
                                                     const PatchLayout& layout, int threads = 1);

}  // namespace odt

#endif
