#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "odt/diff.hpp"
#include "odt/optics.hpp"
#include "odt/phantom.hpp"
#include "odt/solver.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace odt;
using testutil::grid;
using testutil::random_volume;

namespace {

SupportMask random_symmetric_mask(const GridSpec& g, std::uint64_t seed, double fill = 0.4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SupportMask m(g);
  for (auto& v : m.data) v = u(rng) < fill;
  symmetrize(m);
  m.data[0] = 1;
  return m;
}

Spectrum3 random_masked_spectrum(const SupportMask& mask, std::uint64_t seed) {
  // Spectrum of a random real volume, restricted to the mask: Hermitian and
  // supported by construction. Uses the direct-summation DFT, not fft3.
  Spectrum3 g = oracle::dft_forward(random_volume(mask.grid, seed));
  for (std::size_t i = 0; i < g.data.size(); ++i)
    if (!mask.data[i]) g.data[i] = 0.0;
  return g;
}

// The shared 8^3 missing-cone problem: a small bead behind the standard
// acquisition geometry.
struct ToyProblem {
  GridSpec g{8, 8, 8, 0.11, 0.11, 0.11};
  SupportMask mask;
  Spectrum3 gdata;
  ToyProblem() {
    OpticsGeometry geom;  // defaults: 0.532 / 1.337 / 1.2 / 1.2 / 49 angles
    mask = build_support_mask(geom, g);
    PhantomSpec ph;
    ph.radius = 0.2;
    ph.contrast = 0.12;
    const Volume3 truth = generate(ph, g);
    gdata = degrade(truth, mask).g;
  }
};

}  // namespace

TEST_CASE("presets carry the published parameter tuples") {
  const SolverParams bead = SolverParams::preset("bead");
  CHECK(bead.n_outer == 2);
  CHECK(bead.n_inner == 400);
  CHECK(bead.mu == 10.0);
  CHECK(bead.tau == 10.0);
  CHECK(bead.gamma == 1.0);
  const SolverParams spy = SolverParams::preset("spyogenes");
  CHECK(spy.n_outer == 5);
  CHECK(spy.n_inner == 100);
  CHECK(spy.mu == 50.0);
  const SolverParams oci = SolverParams::preset("ociaml3");
  CHECK(oci.n_outer == 3);
  CHECK(oci.n_inner == 60);
  CHECK(oci.tau == 150.0);
  CHECK_THROWS_AS(SolverParams::preset("nope"), ValidationError);
}

TEST_CASE("parameter validation") {
  SolverParams p;
  p.mu = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = SolverParams{};
  p.n_inner = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("init_state: zero data gives an all-zero state") {
  const GridSpec g = grid(8, 8, 8);
  SupportMask mask = random_symmetric_mask(g, 1);
  const SolverState st = init_state(Spectrum3(g), mask, SolverParams{});
  for (double x : st.f.data) CHECK(x == 0.0);
  for (double x : st.dx.data) CHECK(x == 0.0);
  for (double x : st.w.data) CHECK(x == 0.0);
  for (double x : st.bw.data) CHECK(x == 0.0);
}

TEST_CASE("init_state: full mask makes f0 the exact inverse transform") {
  const GridSpec g = grid(8, 8, 8);
  SupportMask all(g);
  for (auto& v : all.data) v = 1;
  const Volume3 truth = random_volume(g, 7);
  FftEngine eng;
  const Spectrum3 gdata = fft3(truth, eng);
  const SolverState st = init_state(gdata, all, SolverParams{});
  CHECK(testutil::rel_l2_diff(st.f, truth) < 1e-10);
}

TEST_CASE("init_state: zero-filled adjoint matches the direct-summation DFT oracle") {
  const GridSpec g = grid(8, 8, 8);
  const SupportMask mask = random_symmetric_mask(g, 13);
  const Spectrum3 gdata = random_masked_spectrum(mask, 14);
  const SolverState st = init_state(gdata, mask, SolverParams{});
  const Volume3 expected = oracle::dft_inverse_real(gdata);
  CHECK(testutil::rel_l2_diff(st.f, expected) < 1e-9);
}

TEST_CASE("init_state rejects bad inputs") {
  const GridSpec g = grid(6, 6, 6);
  const SupportMask mask = random_symmetric_mask(g, 21);
  Spectrum3 bad(g);
  bad.data[1] = {1.0, 2.0};  // not Hermitian once masked, also off-support risk
  for (std::size_t i = 0; i < bad.data.size(); ++i)
    if (!mask.data[i]) bad.data[i] = 0.0;
  if (mask.data[1]) {
    CHECK_THROWS_AS(init_state(bad, mask, SolverParams{}), ValidationError);
  }
  Spectrum3 off(g);
  for (auto& z : off.data) z = 1.0;  // energy everywhere, mask is partial
  CHECK_THROWS_AS(init_state(off, mask, SolverParams{}), ValidationError);
}

TEST_CASE("f_update: all-zero state stays zero") {
  const GridSpec g = grid(8, 8, 8);
  SolverState st = init_state(Spectrum3(g), random_symmetric_mask(g, 31), SolverParams{});
  f_update(st, SolverParams{});
  for (double x : st.f.data) CHECK(x == 0.0);
}

TEST_CASE("f_update equals the dense 64x64 solve on 4^3, 20 random instances") {
  std::mt19937_64 seed_gen(4242);
  for (int instance = 0; instance < 20; ++instance) {
    const GridSpec g = grid(4, 4, 4);
    const SupportMask mask = random_symmetric_mask(g, seed_gen());
    const Spectrum3 gk = random_masked_spectrum(mask, seed_gen());

    SolverParams params;
    params.mu = 1.0 + double(instance % 5);
    params.tau = 0.5 + double(instance % 3);
    params.gamma = 0.25 + 0.5 * double(instance % 2);

    SolverState st = init_state(gk, mask, params);
    st.dx = random_volume(g, seed_gen());
    st.dy = random_volume(g, seed_gen());
    st.dz = random_volume(g, seed_gen());
    st.bx = random_volume(g, seed_gen());
    st.by = random_volume(g, seed_gen());
    st.bz = random_volume(g, seed_gen());
    st.w = random_volume(g, seed_gen());
    st.bw = random_volume(g, seed_gen());
    f_update(st, params);

    const Volume3 dense = oracle::solve_f_update_dense(mask, gk, st.dx, st.dy, st.dz, st.bx,
                                                       st.by, st.bz, st.w, st.bw, params);
    CHECK(testutil::rel_l2_diff(st.f, dense) < 1e-8);
  }
}

TEST_CASE("f_update: data term dominates in the tau, gamma -> 0 limit") {
  const GridSpec g = grid(8, 8, 8);
  SupportMask all(g);
  for (auto& v : all.data) v = 1;
  FftEngine eng;
  const Spectrum3 gdata = fft3(random_volume(g, 55), eng);
  SolverParams params;
  params.mu = 1.0;
  params.tau = 1e-9;
  params.gamma = 1e-9;
  SolverState st = init_state(gdata, all, params);
  f_update(st, params);
  const Volume3 expected = ifft3(gdata, eng);
  CHECK(testutil::rel_l2_diff(st.f, expected) < 1e-5);
}

TEST_CASE("fourier divisor is positive definite: min >= gamma") {
  const GridSpec g = grid(8, 8, 8);
  const SupportMask mask = random_symmetric_mask(g, 61);
  const Volume3 D = laplacian_symbol(g);
  SolverParams params;
  double min_div = 1e300;
  for (std::size_t i = 0; i < g.count(); ++i)
    min_div = std::min(min_div, params.mu * (mask.data[i] ? 1.0 : 0.0) +
                                    params.tau * D.data[i] + params.gamma);
  CHECK(min_div >= params.gamma);
  CHECK(min_div > 0.0);
}

TEST_CASE("shrink_tv: constant f with zero multipliers gives d = 0") {
  const GridSpec g = grid(8, 8, 8);
  SolverState st = init_state(Spectrum3(g), random_symmetric_mask(g, 71), SolverParams{});
  for (auto& x : st.f.data) x = 2.5;
  st.grad_valid = false;
  shrink_tv(st, SolverParams{});
  for (double x : st.dx.data) CHECK(x == 0.0);
  for (double x : st.dy.data) CHECK(x == 0.0);
  for (double x : st.dz.data) CHECK(x == 0.0);
}

TEST_CASE("shrink_tv: scalar magnitude 2/tau shrinks to 1/tau, direction kept") {
  const GridSpec g = grid(4, 4, 4);
  SolverParams params;
  params.tau = 5.0;
  SolverState st = init_state(Spectrum3(g), random_symmetric_mask(g, 81), params);
  // Constant f so grad f = 0; feed the magnitude through bx alone.
  st.bx.data[g.index(1, 2, 3)] = 2.0 / params.tau;
  shrink_tv(st, params);
  CHECK(st.dx.data[g.index(1, 2, 3)] == doctest::Approx(1.0 / params.tau).epsilon(1e-12));
  CHECK(st.dy.data[g.index(1, 2, 3)] == 0.0);
  // s below the threshold maps to zero.
  st.bx.data[g.index(1, 2, 3)] = 0.5 / params.tau;
  shrink_tv(st, params);
  CHECK(st.dx.data[g.index(1, 2, 3)] == 0.0);
}

TEST_CASE("shrink_tv never increases the pointwise magnitude (1-Lipschitz)") {
  const GridSpec g = grid(8, 8, 8);
  SolverParams params;
  params.tau = 3.0;
  SolverState st = init_state(Spectrum3(g), random_symmetric_mask(g, 91), params);
  st.f = random_volume(g, 92);
  st.grad_valid = false;
  st.bx = random_volume(g, 93);
  st.by = random_volume(g, 94);
  st.bz = random_volume(g, 95);
  shrink_tv(st, params);
  REQUIRE(st.grad_valid);
  for (std::size_t i = 0; i < g.count(); ++i) {
    const double ax = st.gx.data[i] + st.bx.data[i];
    const double ay = st.gy.data[i] + st.by.data[i];
    const double az = st.gz.data[i] + st.bz.data[i];
    const double s = std::sqrt(ax * ax + ay * ay + az * az);
    const double d = std::sqrt(st.dx.data[i] * st.dx.data[i] + st.dy.data[i] * st.dy.data[i] +
                               st.dz.data[i] * st.dz.data[i]);
    CHECK(d <= s + 1e-12);
  }
}

TEST_CASE("shrink_nonneg hand values") {
  const GridSpec g = grid(4, 4, 4);
  SolverParams params;
  params.gamma = 2.0;

  SolverState st = init_state(Spectrum3(g), random_symmetric_mask(g, 101), params);
  // f + b_w = 0 everywhere -> w = 0 in both modes.
  params.nonneg = NonnegMode::paper_shrink;
  shrink_nonneg(st, params);
  for (double x : st.w.data) CHECK(x == 0.0);
  params.nonneg = NonnegMode::project;
  shrink_nonneg(st, params);
  for (double x : st.w.data) CHECK(x == 0.0);

  // f + b_w = -3/gamma: the printed formula gives -2/gamma, projection gives 0.
  for (auto& x : st.bw.data) x = -3.0 / params.gamma;
  params.nonneg = NonnegMode::paper_shrink;
  shrink_nonneg(st, params);
  for (double x : st.w.data) CHECK(x == doctest::Approx(-2.0 / params.gamma));
  params.nonneg = NonnegMode::project;
  shrink_nonneg(st, params);
  for (double x : st.w.data) CHECK(x == 0.0);
}

TEST_CASE("update_multipliers: fixed point and single-step definition") {
  const GridSpec g = grid(6, 6, 6);
  SolverState st = init_state(Spectrum3(g), random_symmetric_mask(g, 111), SolverParams{});
  st.f = random_volume(g, 112);
  st.grad_valid = false;

  // d = grad f and w = f leave b unchanged.
  auto gf = grad(st.f);
  st.dx = gf[0];
  st.dy = gf[1];
  st.dz = gf[2];
  st.w = st.f;
  st.bx = random_volume(g, 113);
  const Volume3 bx_before = st.bx;
  update_multipliers(st);
  CHECK(testutil::max_abs_diff(st.bx, bx_before) == 0.0);

  // Zero b and arbitrary d: one update gives b = grad f - d exactly.
  st.bx = Volume3(g);
  st.by = Volume3(g);
  st.bz = Volume3(g);
  st.bw = Volume3(g);
  st.dx = random_volume(g, 114);
  update_multipliers(st);
  for (std::size_t i = 0; i < g.count(); ++i) {
    CHECK(st.bx.data[i] == gf[0].data[i] - st.dx.data[i]);
    CHECK(st.bw.data[i] == st.f.data[i] - st.w.data[i]);
  }
}

TEST_CASE("bregman_refresh hand cases") {
  const GridSpec g = grid(8, 8, 8);
  const SupportMask mask = random_symmetric_mask(g, 121);
  const Spectrum3 gdata = random_masked_spectrum(mask, 122);

  // Af = g exactly: refresh is a no-op on the support.
  SolverState st = init_state(gdata, mask, SolverParams{});
  st.f_hat = gdata;
  st.f_hat_valid = true;
  const Spectrum3 before = st.gk;
  bregman_refresh(st, gdata);
  double diff = 0.0;
  for (std::size_t i = 0; i < g.count(); ++i)
    if (mask.data[i]) diff = std::max(diff, std::abs(st.gk.data[i] - before.data[i]));
  CHECK(diff < 1e-12);

  // f = 0: g1 = 2 g.
  SolverState st2 = init_state(gdata, mask, SolverParams{});
  st2.f = Volume3(g);
  st2.f_hat_valid = false;
  bregman_refresh(st2, gdata);
  for (std::size_t i = 0; i < g.count(); ++i) {
    if (mask.data[i])
      CHECK(std::abs(st2.gk.data[i] - 2.0 * gdata.data[i]) < 1e-12);
    else
      CHECK(std::abs(st2.gk.data[i]) == 0.0);
  }

  // Random f: the refreshed data stays zero off the support.
  SolverState st3 = init_state(gdata, mask, SolverParams{});
  st3.f = random_volume(g, 123);
  st3.f_hat_valid = false;
  bregman_refresh(st3, gdata);
  for (std::size_t i = 0; i < g.count(); ++i)
    if (!mask.data[i]) CHECK(std::abs(st3.gk.data[i]) == 0.0);
}

TEST_CASE("fixed point: exact data and injected splitting variables keep f_true") {
  const GridSpec g = grid(8, 8, 8);
  SupportMask all(g);
  for (auto& v : all.data) v = 1;
  PhantomSpec ph;
  ph.radius = 0.2;
  ph.contrast = 0.1;
  GridSpec pg = g;
  const Volume3 f_true = generate(ph, pg);
  FftEngine eng;
  const Spectrum3 gdata = fft3(f_true, eng);

  SolverParams params;
  params.mu = 1e4;
  params.tau = 1.0;
  params.gamma = 1.0;
  SolverState st = init_state(gdata, all, params);
  const auto gf = grad(f_true);
  st.dx = gf[0];
  st.dy = gf[1];
  st.dz = gf[2];
  st.w = f_true;
  f_update(st, params);
  CHECK(testutil::rel_l2_diff(st.f, f_true) < 1e-6);
}

TEST_CASE("regularize: full mask, weak prior returns the input") {
  const GridSpec g = grid(16, 16, 16);
  SupportMask all(g);
  for (auto& v : all.data) v = 1;
  // Unit-amplitude smooth blob: the TV pull is 1-homogeneous, so the
  // relative displacement at mu = 1e4 shrinks with signal scale.
  PhantomSpec ph;
  ph.radius = 0.4;
  ph.contrast = 1.0;
  ph.edge = PhantomSpec::Edge::smooth;
  ph.edge_width_voxels = 3.0;
  const Volume3 input = generate(ph, g);

  SolverParams params;
  params.n_outer = 1;
  params.n_inner = 20;
  params.mu = 1e4;
  params.tau = 1.0;
  params.gamma = 1.0;
  const auto [out, report] = regularize(input, all, params);
  CHECK(testutil::rel_l2_diff(out, input) < 1e-3);
}

TEST_CASE("regularize is deterministic (bit-identical reruns)") {
  const ToyProblem toy;
  SolverParams params;
  params.n_outer = 2;
  params.n_inner = 30;
  const auto [f1, r1] = regularize(toy.gdata, toy.mask, params);
  const auto [f2, r2] = regularize(toy.gdata, toy.mask, params);
  CHECK(f1.data == f2.data);
  CHECK(r1.outer_residual == r2.outer_residual);
  CHECK(r1.inner_objective == r2.inner_objective);
}

TEST_CASE("regularize agrees with the long-run proximal-gradient oracle on 8^3") {
  const ToyProblem toy;
  SolverParams params;
  params.n_outer = 1;  // single Bregman pass: the inner loop solves
  params.n_inner = 4000;
  params.mu = 200.0;  // strong data term so the tiny problem keeps structure
  params.tau = 1.0;
  params.gamma = 1.0;
  params.nonneg = NonnegMode::project;
  const auto [f, report] = regularize(toy.gdata, toy.mask, params);

  const Volume3 ref = oracle::prox_gradient_reference(toy.gdata, toy.mask, params.mu, 100000);
  CHECK(testutil::rel_l2_diff(f, ref) <= 1e-2);
}

TEST_CASE("multiplier drift vanishes at convergence on the 8^3 toy") {
  const ToyProblem toy;
  SolverParams params;
  params.n_outer = 1;
  params.n_inner = 2000;
  params.mu = 200.0;
  params.tau = 1.0;
  params.gamma = 1.0;
  SolverState st = init_state(toy.gdata, toy.mask, params);
  for (int it = 0; it < params.n_inner; ++it) {
    f_update(st, params);
    shrink_tv(st, params);
    shrink_nonneg(st, params);
    update_multipliers(st);
  }
  const auto gf = grad(st.f);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < st.grid.count(); ++i) {
    const double ex = gf[0].data[i] - st.dx.data[i];
    const double ey = gf[1].data[i] - st.dy.data[i];
    const double ez = gf[2].data[i] - st.dz.data[i];
    num += ex * ex + ey * ey + ez * ez;
    den += gf[0].data[i] * gf[0].data[i] + gf[1].data[i] * gf[1].data[i] +
           gf[2].data[i] * gf[2].data[i];
  }
  CHECK(std::sqrt(num) < 1e-3 * std::sqrt(den));
}

TEST_CASE("bead run: residual decreases across outer iterations, f nearly non-negative") {
  const GridSpec g{16, 16, 16, 0.11, 0.11, 0.11};
  OpticsGeometry geom;
  const SupportMask mask = build_support_mask(geom, g);
  PhantomSpec ph;
  ph.radius = 0.4;
  ph.contrast = 0.12;
  const Volume3 truth = generate(ph, g);
  const Degraded deg = degrade(truth, mask);

  SolverParams params;
  params.n_outer = 2;
  params.n_inner = 60;
  const auto [f, report] = regularize(deg.g, mask, params);
  REQUIRE(report.outer_residual.size() == 2);
  CHECK(report.outer_residual.back() < report.outer_residual.front());

  double fmax = 0.0;
  for (double x : f.data) fmax = std::max(fmax, x);
  CHECK(report.min_f >= -0.05 * fmax);
}

TEST_CASE("paper_shrink mode runs and stays finite") {
  const ToyProblem toy;
  SolverParams params;
  params.n_outer = 1;
  params.n_inner = 50;
  params.nonneg = NonnegMode::paper_shrink;
  const auto [f, report] = regularize(toy.gdata, toy.mask, params);
  for (double x : f.data) CHECK(std::isfinite(x));
  CHECK(report.inner_objective.size() == 50);
}

TEST_CASE("overflowing data aborts with solver context") {
  const GridSpec g = grid(8, 8, 8);
  SupportMask all(g);
  for (auto& v : all.data) v = 1;
  Spectrum3 gdata(g);
  gdata.data[0] = 1e305;  // real DC spike: Hermitian, on-support
  SolverParams params;
  params.mu = 1e8;
  params.n_outer = 1;
  params.n_inner = 2;
  CHECK_THROWS_AS(regularize(gdata, all, params), SolverAbort);
}
