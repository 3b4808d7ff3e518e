// odtreg: missing-cone degradation and split-Bregman TV regularization of
// 3D refractive-index tomograms, with evaluation and benchmarking commands.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "odt/config.hpp"
#include "odt/metrics.hpp"
#include "odt/optics.hpp"
#include "odt/patch.hpp"
#include "odt/phantom.hpp"
#include "odt/solver.hpp"
#include "odt/volio.hpp"

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

odt::RunConfig resolve_config(const CommonOpts& c) {
  odt::RunConfig cfg;
  if (!c.config_path.empty()) cfg = odt::load_config(c.config_path);
  if (c.seed) cfg.phantom.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--config", c.config_path, "configuration file (INI sections)");
  cmd->add_option("--seed", c.seed, "seed for randomized phantom options");
  cmd->add_option("--threads", c.threads, "worker cap for patched solves");
}

json times_json(const odt::PhaseTimes& t) {
  return {{"fupdate_s", t.fupdate_s},
          {"shrink_s", t.shrink_s},
          {"bookkeep_s", t.bookkeep_s},
          {"wall_s", t.wall_s}};
}

json params_json(const odt::SolverParams& p) {
  return {{"outer", p.n_outer},
          {"inner", p.n_inner},
          {"mu", p.mu},
          {"tau", p.tau},
          {"gamma", p.gamma},
          {"nonneg", p.nonneg == odt::NonnegMode::project ? "project" : "paper_shrink"}};
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw odt::IoError("cannot create '" + tmp.string() + "'");
    out << text;
    if (!out) throw odt::IoError("write failed on '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw odt::IoError("cannot rename '" + tmp.string() + "'");
}

int run_phantom(const CommonOpts& common, const std::string& out_path) {
  const auto cfg = resolve_config(common);
  const odt::Volume3 vol = odt::generate(cfg.phantom, cfg.grid);
  odt::write_vol(out_path, vol);
  std::cout << "phantom: wrote " << out_path << " (" << cfg.grid.nx << "x" << cfg.grid.ny << "x"
            << cfg.grid.nz << ")\n";
  return 0;
}

int run_mask(const CommonOpts& common, const std::string& out_path) {
  const auto cfg = resolve_config(common);
  const odt::SupportMask mask = odt::build_support_mask(cfg.optics, cfg.grid);
  odt::write_mask(out_path, mask);
  const auto ext = odt::mask_extents(mask);
  std::cout << "mask: wrote " << out_path << ", " << mask.set_count() << " voxels set, extents "
            << ext.fx << "/" << ext.fy << "/" << ext.fz << " cyc/um\n";
  return 0;
}

int run_degrade(const std::string& truth_path, const std::string& mask_path,
                const std::string& out_spec, const std::string& out_raw) {
  const odt::Volume3 truth = odt::read_vol(truth_path);
  const odt::SupportMask mask = odt::read_mask(mask_path);
  const odt::Degraded deg = odt::degrade(truth, mask);
  odt::write_spec(out_spec, deg.g);
  odt::write_vol(out_raw, deg.raw);
  std::cout << "degrade: wrote " << out_spec << " and " << out_raw << "\n";
  return 0;
}

int run_regularize(const CommonOpts& common, const std::string& input_path,
                   const std::string& spectrum_path, const std::string& mask_path,
                   const std::string& preset, const odt::SolverParams& flag_params,
                   const std::vector<bool>& flag_given, int patched_flag,
                   const std::string& out_path, std::string report_path) {
  auto cfg = resolve_config(common);
  if (!preset.empty()) {
    cfg.solver = odt::SolverParams::preset(preset);
    cfg.solver_preset = preset;
  }
  // Individual flags override both the config file and the preset.
  if (flag_given[0]) cfg.solver.n_outer = flag_params.n_outer;
  if (flag_given[1]) cfg.solver.n_inner = flag_params.n_inner;
  if (flag_given[2]) cfg.solver.mu = flag_params.mu;
  if (flag_given[3]) cfg.solver.tau = flag_params.tau;
  if (flag_given[4]) cfg.solver.gamma = flag_params.gamma;
  if (flag_given[5]) cfg.solver.nonneg = flag_params.nonneg;
  if (patched_flag == 1) cfg.patched = true;
  if (patched_flag == -1) cfg.patched = false;
  cfg.solver.validate();

  const odt::SupportMask mask = odt::read_mask(mask_path);

  json report;
  report["command"] = "regularize";
  report["params"] = params_json(cfg.solver);
  if (!cfg.solver_preset.empty()) report["preset"] = cfg.solver_preset;

  odt::Volume3 result;
  if (cfg.patched) {
    if (input_path.empty())
      throw odt::ValidationError("regularize: --patched needs a raw volume input (--input)");
    const odt::Volume3 raw = odt::read_vol(input_path);
    // Patches get their own support mask of identical geometry.
    auto cfg_optics = cfg.optics;
    auto builder = [cfg_optics](const odt::GridSpec& g) {
      return odt::build_support_mask(cfg_optics, g);
    };
    auto [vol, rep] = odt::patched_regularize(raw, builder, cfg.solver, cfg.patch, cfg.threads);
    result = std::move(vol);
    report["patched"] = {{"n_patches", rep.n_patches},
                         {"patch", cfg.patch.patch},
                         {"stride", cfg.patch.stride},
                         {"final_residuals", rep.final_residual}};
    report["times"] = times_json(rep.times);
  } else {
    odt::SolveReport rep;
    if (!spectrum_path.empty()) {
      const odt::Spectrum3 g = odt::read_spec(spectrum_path);
      std::tie(result, rep) = odt::regularize(g, mask, cfg.solver);
    } else if (!input_path.empty()) {
      const odt::Volume3 raw = odt::read_vol(input_path);
      std::tie(result, rep) = odt::regularize(raw, mask, cfg.solver);
    } else {
      throw odt::ValidationError("regularize: need --input or --spectrum");
    }
    report["residuals"] = rep.outer_residual;
    report["objective"] = rep.inner_objective;
    report["min_f"] = rep.min_f;
    report["times"] = times_json(rep.times);
  }

  odt::write_vol(out_path, result);
  if (report_path.empty()) report_path = out_path + ".report.json";
  write_text_atomic(report_path, report.dump(2) + "\n");
  std::cout << "regularize: wrote " << out_path << " and " << report_path << "\n";
  return 0;
}

int run_eval(const std::string& a_path, const std::string& b_path, double z_range,
             const std::string& out_csv) {
  const odt::Volume3 a = odt::read_vol(a_path);
  const odt::Volume3 b = odt::read_vol(b_path);
  const odt::SliceReport rep = odt::evaluate_slices(a, b, z_range);
  std::ostringstream csv;
  odt::write_csv(rep, csv);
  write_text_atomic(out_csv, csv.str());
  std::cout << "eval: wrote " << out_csv << " (volume mse " << rep.vol_mse << ", ssim "
            << rep.vol_ssim << ", pearson " << rep.vol_pearson << ")\n";
  return 0;
}

int run_export(const std::string& in_path, const std::string& out_path) {
  const odt::Volume3 v = odt::read_vol(in_path);
  odt::write_raw_f32(out_path, v);
  std::cout << "export: wrote " << out_path << " (raw f32, " << v.grid.nx << "x" << v.grid.ny
            << "x" << v.grid.nz << ", x-fastest)\n";
  return 0;
}

int run_bench(const CommonOpts& common, std::vector<int> lateral_sizes, int inner, int outer,
              int repeat, const std::string& out_csv) {
  auto cfg = resolve_config(common);
  if (lateral_sizes.empty()) lateral_sizes = {64, 96, 128, 160, 192, 224, 256, 288, 320};
  if (repeat < 1) throw odt::ValidationError("bench: --repeat must be >= 1");
  std::cout << "bench iterations: inner=" << inner << " outer=" << outer
            << " (default interpretation: inner=100, outer=5), best of " << repeat << "\n";

  odt::SolverParams params = cfg.solver;
  params.n_inner = inner;
  params.n_outer = outer;
  params.validate();

  std::ostringstream csv;
  csv << "nx,ny,nz,voxels,wall_s,fupdate_s,shrink_s,bookkeep_s\n";
  for (int s : lateral_sizes) {
    odt::GridSpec grid{s, s, 64, cfg.grid.dx, cfg.grid.dy, cfg.grid.dz};
    odt::PhantomSpec ph = cfg.phantom;
    const odt::Volume3 truth = odt::generate(ph, grid);
    const odt::SupportMask mask = odt::build_support_mask(cfg.optics, grid);
    const odt::Degraded deg = odt::degrade(truth, mask);
    double wall = 0.0;
    odt::PhaseTimes phases;
    for (int r = 0; r < repeat; ++r) {
      const auto t0 = Clock::now();
      auto [vol, rep] = odt::regularize(deg.g, mask, params);
      const double w = std::chrono::duration<double>(Clock::now() - t0).count();
      (void)vol;
      if (r == 0 || w < wall) {
        wall = w;
        phases = rep.times;
      }
    }
    csv << grid.nx << ',' << grid.ny << ',' << grid.nz << ',' << grid.count() << ',' << wall
        << ',' << phases.fupdate_s << ',' << phases.shrink_s << ',' << phases.bookkeep_s << '\n';
    std::cout << "bench: " << grid.nx << "x" << grid.ny << "x" << grid.nz << " -> " << wall
              << " s\n";
  }
  write_text_atomic(out_csv, csv.str());
  std::cout << "bench: wrote " << out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"missing-cone TV regularization toolkit"};
  app.require_subcommand(1);

  CommonOpts common;

  auto* phantom = app.add_subcommand("phantom", "generate a ground-truth volume");
  add_common(phantom, common);
  std::string phantom_out = "phantom.vol3";
  phantom->add_option("-o,--output", phantom_out, "output volume file");

  auto* mask_cmd = app.add_subcommand("mask", "build the missing-cone support mask");
  add_common(mask_cmd, common);
  std::string mask_out = "mask.vol3";
  mask_cmd->add_option("-o,--output", mask_out, "output mask file");

  auto* degrade_cmd = app.add_subcommand("degrade", "apply the degradation model");
  std::string truth_path, degrade_mask, out_spec = "g.vol3", out_raw = "raw.vol3";
  degrade_cmd->add_option("--truth", truth_path, "ground-truth volume")->required();
  degrade_cmd->add_option("--mask", degrade_mask, "support mask file")->required();
  degrade_cmd->add_option("--out-spectrum", out_spec, "output spectrum file");
  degrade_cmd->add_option("--out-raw", out_raw, "output raw (zero-filled) volume");

  auto* reg = app.add_subcommand("regularize", "split-Bregman TV + non-negativity");
  add_common(reg, common);
  std::string reg_input, reg_spectrum, reg_mask, reg_preset, reg_out = "regularized.vol3";
  std::string reg_report, reg_nonneg;
  odt::SolverParams flag_params;
  reg->add_option("--input", reg_input, "raw volume input");
  reg->add_option("--spectrum", reg_spectrum, "masked spectrum input (alternative to --input)");
  reg->add_option("--mask", reg_mask, "support mask file")->required();
  reg->add_option("--preset", reg_preset, "bead | spyogenes | ociaml3");
  auto* o_outer = reg->add_option("--outer", flag_params.n_outer, "outer (Bregman) iterations");
  auto* o_inner = reg->add_option("--inner", flag_params.n_inner, "inner iterations");
  auto* o_mu = reg->add_option("--mu", flag_params.mu, "data fidelity weight");
  auto* o_tau = reg->add_option("--tau", flag_params.tau, "TV splitting weight");
  auto* o_gamma = reg->add_option("--gamma", flag_params.gamma, "non-negativity weight");
  auto* o_nonneg = reg->add_option("--nonneg", reg_nonneg, "project | paper_shrink");
  auto* o_patched = reg->add_flag("--patched", "patch-wise solve (64^3 / stride 32 default)");
  auto* o_whole = reg->add_flag("--whole-volume", "force a whole-volume solve");
  reg->add_option("-o,--output", reg_out, "output volume file");
  reg->add_option("--report", reg_report, "run report path (default: <output>.report.json)");

  auto* eval_cmd = app.add_subcommand("eval", "per-slice MSE / SSIM / Pearson report");
  std::string eval_a, eval_b, eval_out = "eval.csv";
  double eval_zrange = 2.0;
  eval_cmd->add_option("--a", eval_a, "volume A")->required();
  eval_cmd->add_option("--b", eval_b, "volume B")->required();
  eval_cmd->add_option("--zrange", eval_zrange, "half range in um (0 = all slices)");
  eval_cmd->add_option("-o,--output", eval_out, "output CSV");

  auto* export_cmd = app.add_subcommand("export", "export a volume as headerless raw f32");
  std::string export_in, export_out = "volume.f32";
  export_cmd->add_option("--input", export_in, "VOL3 volume file")->required();
  export_cmd->add_option("-o,--output", export_out, "output raw file");

  auto* bench = app.add_subcommand("bench", "runtime ladder over lateral sizes (z fixed at 64)");
  add_common(bench, common);
  std::vector<int> bench_sizes;
  int bench_inner = 100, bench_outer = 5, bench_repeat = 1;
  std::string bench_out = "bench.csv";
  bench->add_option("--sizes", bench_sizes, "lateral sizes (default 64..320 ladder)")
      ->delimiter(',');
  bench->add_option("--inner", bench_inner, "inner iterations");
  bench->add_option("--outer", bench_outer, "outer iterations");
  bench->add_option("--repeat", bench_repeat, "runs per size; the fastest is reported");
  bench->add_option("-o,--output", bench_out, "output CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(phantom)) return run_phantom(common, phantom_out);
    if (app.got_subcommand(mask_cmd)) return run_mask(common, mask_out);
    if (app.got_subcommand(degrade_cmd))
      return run_degrade(truth_path, degrade_mask, out_spec, out_raw);
    if (app.got_subcommand(reg)) {
      if (!reg_nonneg.empty()) {
        if (reg_nonneg == "project") flag_params.nonneg = odt::NonnegMode::project;
        else if (reg_nonneg == "paper_shrink") flag_params.nonneg = odt::NonnegMode::paper_shrink;
        else throw odt::ValidationError("regularize: --nonneg expects project|paper_shrink");
      }
      const std::vector<bool> given{o_outer->count() > 0, o_inner->count() > 0,
                                    o_mu->count() > 0,    o_tau->count() > 0,
                                    o_gamma->count() > 0, o_nonneg->count() > 0};
      const int patched_flag = o_whole->count() ? -1 : (o_patched->count() ? 1 : 0);
      return run_regularize(common, reg_input, reg_spectrum, reg_mask, reg_preset, flag_params,
                            given, patched_flag, reg_out, reg_report);
    }
    if (app.got_subcommand(eval_cmd)) return run_eval(eval_a, eval_b, eval_zrange, eval_out);
    if (app.got_subcommand(export_cmd)) return run_export(export_in, export_out);
    if (app.got_subcommand(bench))
      return run_bench(common, bench_sizes, bench_inner, bench_outer, bench_repeat, bench_out);
  } catch (const odt::ValidationError& e) {
    std::cerr << "odtreg: " << e.what() << "\n";
    return 2;
  } catch (const odt::IoError& e) {
    std::cerr << "odtreg: " << e.what() << "\n";
    return 3;
  } catch (const odt::SolverAbort& e) {
    std::cerr << "odtreg: " << e.what() << "\n";
    return 4;
  } catch (const odt::FormatError& e) {
    std::cerr << "odtreg: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "odtreg: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
