#ifndef ODT_DIFF_HPP
#define ODT_DIFF_HPP

#include <array>

#include "odt/grid.hpp"

namespace odt {

/// Forward first differences with periodic boundary:
/// gx[i,j,k] = v[(i+1) mod nx, j, k] - v[i,j,k], and likewise per axis.
void grad(const Volume3& v, Volume3& gx, Volume3& gy, Volume3& gz);
std::array<Volume3, 3> grad(const Volume3& v);

/// Negative adjoint of grad, so <grad(u), p> = -<u, div(p)> exactly.
/// Backward differences: div[i] = px[i]-px[i-1] + py[j]-py[j-1] + pz[k]-pz[k-1].
void div(const Volume3& px, const Volume3& py, const Volume3& pz, Volume3& out);
Volume3 div(const Volume3& px, const Volume3& py, const Volume3& pz);

/// Fourier multiplier of grad^T grad (nonnegative):
/// D(k) = sum_axis 2 - 2*cos(2*pi*k_axis/N_axis). D(0) = 0.
Volume3 laplacian_symbol(const GridSpec& grid);

}  // namespace odt

#endif
