#include "odt/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "odt/diff.hpp"

namespace odt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void ensure_grad(SolverState& st) {
  if (!st.grad_valid) {
    grad(st.f, st.gx, st.gy, st.gz);
    st.grad_valid = true;
  }
}

void ensure_f_hat(SolverState& st) {
  if (!st.f_hat_valid) {
    st.f_hat = fft3(st.f, *st.fft);
    st.f_hat_valid = true;
  }
}

void ensure_adj_gk(SolverState& st) {
  if (!st.adj_valid) {
    st.adj_gk = ifft3(st.gk, *st.fft);
    st.adj_valid = true;
  }
}

void check_finite_or_abort(const Volume3& v, const char* phase, int outer, int inner) {
  for (double x : v.data)
    if (!std::isfinite(x))
      throw SolverAbort(std::string("solver: non-finite value in ") + phase + " at outer " +
                        std::to_string(outer) + ", inner " + std::to_string(inner));
}

}  // namespace

void SolverParams::validate() const {
  if (n_outer < 1 || n_inner < 1)
    throw ValidationError("solver: iteration counts must be >= 1");
  if (!(mu > 0.0) || !(tau > 0.0) || !(gamma > 0.0))
    throw ValidationError("solver: mu, tau, gamma must be > 0");
  if (tol_fupdate < 0.0) throw ValidationError("solver: tol_fupdate must be >= 0");
}

SolverParams SolverParams::preset(std::string_view name) {
  SolverParams p;
  if (name == "bead") {
    p.n_outer = 2; p.n_inner = 400; p.mu = 10; p.tau = 10; p.gamma = 1;
  } else if (name == "spyogenes") {
    p.n_outer = 5; p.n_inner = 100; p.mu = 50; p.tau = 50; p.gamma = 1;
  } else if (name == "ociaml3") {
    p.n_outer = 3; p.n_inner = 60; p.mu = 150; p.tau = 150; p.gamma = 1;
  } else {
    throw ValidationError("solver: unknown preset '" + std::string(name) + "'");
  }
  return p;
}

SolverState init_state(const Spectrum3& g, const SupportMask& mask, const SolverParams& params) {
  params.validate();
  require_sized(g, "init_state");
  require_sized(mask, "init_state");
  require_same_grid(g.grid, mask.grid, "init_state");

  double peak = 0.0;
  for (const auto& z : g.data) peak = std::max(peak, std::abs(z));
  for (std::size_t i = 0; i < g.data.size(); ++i)
    if (!mask.data[i] && std::abs(g.data[i]) > 1e-12 * peak)
      throw ValidationError("init_state: g has energy outside the support mask");
  if (!is_hermitian(g)) throw ValidationError("init_state: g is not Hermitian");

  SolverState st;
  st.grid = g.grid;
  st.mask = mask;
  st.fft = std::make_unique<FftEngine>();
  st.gk = g;
  for (std::size_t i = 0; i < st.gk.data.size(); ++i)
    if (!mask.data[i]) st.gk.data[i] = 0.0;

  st.f = ifft3(st.gk, *st.fft);
  st.dx = Volume3(st.grid); st.dy = Volume3(st.grid); st.dz = Volume3(st.grid);
  st.w = Volume3(st.grid);
  st.bx = Volume3(st.grid); st.by = Volume3(st.grid); st.bz = Volume3(st.grid);
  st.bw = Volume3(st.grid);
  st.lap_symbol = laplacian_symbol(st.grid);
  st.adj_gk = st.f;  // gk == g at this point
  st.adj_valid = true;
  return st;
}

void f_update(SolverState& st, const SolverParams& params) {
  params.validate();
  ensure_adj_gk(st);

  // rhs = mu A^T gk + tau grad^T(d - b) + gamma (w - b_w), with
  // grad^T q = q[i-1] - q[i] per axis (periodic), fused into one pass.
  const auto& g = st.grid;
  if (st.scratch.grid != g) st.scratch = Volume3(g);
  Volume3& rhs = st.scratch;
  for (int z = 0; z < g.nz; ++z) {
    const int zm = (z == 0) ? g.nz - 1 : z - 1;
    for (int y = 0; y < g.ny; ++y) {
      const int ym = (y == 0) ? g.ny - 1 : y - 1;
      const std::size_t row = g.index(0, y, z);
      const std::size_t row_ym = g.index(0, ym, z);
      const std::size_t row_zm = g.index(0, y, zm);
      for (int x = 0; x < g.nx; ++x) {
        const int xm = (x == 0) ? g.nx - 1 : x - 1;
        const std::size_t i = row + x;
        const double tv = (st.dx.data[row + xm] - st.bx.data[row + xm]) -
                          (st.dx.data[i] - st.bx.data[i]) +
                          (st.dy.data[row_ym + x] - st.by.data[row_ym + x]) -
                          (st.dy.data[i] - st.by.data[i]) +
                          (st.dz.data[row_zm + x] - st.bz.data[row_zm + x]) -
                          (st.dz.data[i] - st.bz.data[i]);
        rhs.data[i] = params.mu * st.adj_gk.data[i] + params.tau * tv +
                      params.gamma * (st.w.data[i] - st.bw.data[i]);
      }
    }
  }

  // The divisor mu M(k) + tau D(k) + gamma is >= gamma > 0 everywhere, so the
  // pointwise division is always defined.
  st.f_hat = fft3(rhs, *st.fft);
  const std::size_t n = g.count();
  for (std::size_t i = 0; i < n; ++i) {
    const double divisor = params.mu * (st.mask.data[i] ? 1.0 : 0.0) +
                           params.tau * st.lap_symbol.data[i] + params.gamma;
    st.f_hat.data[i] /= divisor;
  }
  st.f = ifft3(st.f_hat, *st.fft);
  st.f_hat_valid = true;
  st.grad_valid = false;
}

void shrink_tv(SolverState& st, const SolverParams& params) {
  params.validate();
  ensure_grad(st);
  const double thresh = 1.0 / params.tau;
  const std::size_t n = st.grid.count();
  for (std::size_t i = 0; i < n; ++i) {
    const double ax = st.gx.data[i] + st.bx.data[i];
    const double ay = st.gy.data[i] + st.by.data[i];
    const double az = st.gz.data[i] + st.bz.data[i];
    const double s = std::sqrt(ax * ax + ay * ay + az * az);
    if (s > thresh) {
      const double scale = (s - thresh) / s;
      st.dx.data[i] = scale * ax;
      st.dy.data[i] = scale * ay;
      st.dz.data[i] = scale * az;
    } else {
      st.dx.data[i] = 0.0;
      st.dy.data[i] = 0.0;
      st.dz.data[i] = 0.0;
    }
  }
}

void shrink_nonneg(SolverState& st, const SolverParams& params) {
  params.validate();
  const std::size_t n = st.grid.count();
  if (params.nonneg == NonnegMode::project) {
    for (std::size_t i = 0; i < n; ++i)
      st.w.data[i] = std::max(st.f.data[i] + st.bw.data[i], 0.0);
  } else {
    const double thresh = 1.0 / params.gamma;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = st.f.data[i] + st.bw.data[i];
      const double m = std::abs(a);
      st.w.data[i] = m > thresh ? (m - thresh) * (a / m) : 0.0;
    }
  }
}

void update_multipliers(SolverState& st) {
  ensure_grad(st);
  const std::size_t n = st.grid.count();
  for (std::size_t i = 0; i < n; ++i) {
    st.bx.data[i] += st.gx.data[i] - st.dx.data[i];
    st.by.data[i] += st.gy.data[i] - st.dy.data[i];
    st.bz.data[i] += st.gz.data[i] - st.dz.data[i];
    st.bw.data[i] += st.f.data[i] - st.w.data[i];
  }
}

void bregman_refresh(SolverState& st, const Spectrum3& g_measured) {
  require_same_grid(st.grid, g_measured.grid, "bregman_refresh");
  ensure_f_hat(st);
  for (std::size_t i = 0; i < st.gk.data.size(); ++i) {
    if (st.mask.data[i])
      st.gk.data[i] += g_measured.data[i] - st.f_hat.data[i];
    else
      st.gk.data[i] = 0.0;
  }
  st.adj_valid = false;
}

std::pair<Volume3, SolveReport> regularize(const Spectrum3& g, const SupportMask& mask,
                                           const SolverParams& params) {
  const auto t_start = Clock::now();
  SolverState st = init_state(g, mask, params);
  SolveReport report;
  report.inner_objective.reserve(std::size_t(params.n_outer) * params.n_inner);

  for (int outer = 1; outer <= params.n_outer; ++outer) {
    st.outer = outer;
    for (int inner = 1; inner <= params.n_inner; ++inner) {
      st.inner = inner;

      auto t0 = Clock::now();
      try {
        f_update(st, params);
      } catch (const ValidationError& e) {
        throw SolverAbort(std::string("solver: f_update failed at outer ") +
                          std::to_string(outer) + ", inner " + std::to_string(inner) + ": " +
                          e.what());
      }
      report.times.fupdate_s += seconds_since(t0);
      check_finite_or_abort(st.f, "f_update", outer, inner);

      t0 = Clock::now();
      shrink_tv(st, params);
      shrink_nonneg(st, params);
      report.times.shrink_s += seconds_since(t0);

      t0 = Clock::now();
      update_multipliers(st);
      // Objective of the unconstrained form: data misfit against the
      // original g plus isotropic TV, both cheap from the cached f_hat
      // and gradient.
      double misfit = 0.0;
      for (std::size_t i = 0; i < st.gk.data.size(); ++i)
        if (st.mask.data[i]) misfit += std::norm(st.f_hat.data[i] - g.data[i]);
      double tv = 0.0;
      for (std::size_t i = 0; i < st.grid.count(); ++i)
        tv += std::sqrt(st.gx.data[i] * st.gx.data[i] + st.gy.data[i] * st.gy.data[i] +
                        st.gz.data[i] * st.gz.data[i]);
      report.inner_objective.push_back(misfit + tv);
      report.times.bookkeep_s += seconds_since(t0);
    }

    auto t0 = Clock::now();
    double misfit = 0.0;
    for (std::size_t i = 0; i < st.gk.data.size(); ++i)
      if (st.mask.data[i]) misfit += std::norm(st.f_hat.data[i] - g.data[i]);
    report.outer_residual.push_back(std::sqrt(misfit));
    bregman_refresh(st, g);
    report.times.bookkeep_s += seconds_since(t0);
  }

  report.min_f = st.f.data.empty() ? 0.0 : st.f.data[0];
  for (double x : st.f.data) report.min_f = std::min(report.min_f, x);
  report.times.wall_s = seconds_since(t_start);
  return {std::move(st.f), std::move(report)};
}

std::pair<Volume3, SolveReport> regularize(const Volume3& raw, const SupportMask& mask,
                                           const SolverParams& params) {
  require_sized(raw, "regularize");
  require_same_grid(raw.grid, mask.grid, "regularize");
  FftEngine eng;
  Spectrum3 g = fft3(raw, eng);
  for (std::size_t i = 0; i < g.data.size(); ++i)
    if (!mask.data[i]) g.data[i] = 0.0;
  return regularize(g, mask, params);
}

}  // namespace odt
