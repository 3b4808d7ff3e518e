#ifndef ODT_SOLVER_HPP
#define ODT_SOLVER_HPP

#include <memory>
#include <string_view>
#include <vector>

#include "odt/fft.hpp"
#include "odt/grid.hpp"

namespace odt {

enum class NonnegMode {
  project,       ///< w = max(f + b_w, 0)
  paper_shrink,  ///< soft threshold: w = max(|f+b_w| - 1/gamma, 0) * sign(f+b_w)
};

struct SolverParams {
  int n_outer = 2;    // N
  int n_inner = 400;  // M
  double mu = 10.0;
  double tau = 10.0;  // TV splitting weight (the lambda of the update formulas)
  double gamma = 1.0;
  NonnegMode nonneg = NonnegMode::project;
  double tol_fupdate = 0.0;  // 0 = exact Fourier solve (the implemented path)

  void validate() const;

  /// Named presets: bead (2,400,10,10,1), spyogenes (5,100,50,50,1),
  /// ociaml3 (3,60,150,150,1).
  static SolverParams preset(std::string_view name);
};

struct PhaseTimes {
  double fupdate_s = 0.0;
  double shrink_s = 0.0;
  double bookkeep_s = 0.0;
  double wall_s = 0.0;
};

struct SolveReport {
  /// ||Af - g||_2 on the support against the original g, one entry per outer
  /// iteration, measured at the end of the inner loop.
  std::vector<double> outer_residual;
  /// ||Af - g||^2 + TV(f) after every inner iteration.
  std::vector<double> inner_objective;
  PhaseTimes times;
  double min_f = 0.0;
};

/// All split-Bregman working variables. The trailing buffers cache
/// quantities derived from the current f so consecutive steps can share
/// them; the step functions keep the validity flags consistent.
struct SolverState {
  GridSpec grid;
  SupportMask mask;
  Volume3 f;
  Volume3 dx, dy, dz;      // split gradient variables
  Volume3 w;               // split non-negativity variable
  Volume3 bx, by, bz, bw;  // Bregman multipliers
  Spectrum3 gk;            // Bregman-refreshed data, zero off mask
  int outer = 0, inner = 0;

  Volume3 lap_symbol;   // Fourier multiplier of grad^T grad
  Volume3 adj_gk;       // ifft3(gk)
  Volume3 gx, gy, gz;   // gradient of current f
  Spectrum3 f_hat;      // spectrum of current f
  Volume3 scratch;
  bool adj_valid = false, grad_valid = false, f_hat_valid = false;

  std::unique_ptr<FftEngine> fft;
};

/// f0 = ifft3(g) (the zero-filled adjoint), all other variables zero.
/// g must be Hermitian and supported on the mask.
SolverState init_state(const Spectrum3& g, const SupportMask& mask, const SolverParams& params);

/// Solves (mu A^T A + tau grad^T grad + gamma I) f = rhs in the Fourier basis,
/// rhs = mu A^T gk + tau grad^T(d - b) + gamma (w - b_w).
void f_update(SolverState& st, const SolverParams& params);

/// Coupled isotropic shrinkage of (grad f + b) with threshold 1/tau.
void shrink_tv(SolverState& st, const SolverParams& params);

/// Non-negativity step in the configured mode.
void shrink_nonneg(SolverState& st, const SolverParams& params);

/// b_i += grad_i f - d_i, b_w += f - w.
void update_multipliers(SolverState& st);

/// gk += g_measured - mask .* fft3(f), zero off the support.
void bregman_refresh(SolverState& st, const Spectrum3& g_measured);

/// N outer x M inner iterations of {f_update, shrink_tv, shrink_nonneg,
/// update_multipliers}, with bregman_refresh after each inner loop.
/// Deterministic: identical inputs give bit-identical outputs.
std::pair<Volume3, SolveReport> regularize(const Spectrum3& g, const SupportMask& mask,
                                           const SolverParams& params);

/// Same, with g = mask .* fft3(raw).
std::pair<Volume3, SolveReport> regularize(const Volume3& raw, const SupportMask& mask,
                                           const SolverParams& params);

}  // namespace odt

#endif
