#ifndef ODT_CONFIG_HPP
#define ODT_CONFIG_HPP

#include <filesystem>
#include <string>

#include "odt/grid.hpp"
#include "odt/optics.hpp"
#include "odt/patch.hpp"
#include "odt/phantom.hpp"
#include "odt/solver.hpp"

namespace odt {

/// Run configuration, assembled from the INI-style config file
/// ([grid], [optics], [phantom], [solver], [patch], [output]) with CLI
/// flags taking precedence. Unknown sections or keys are errors.
struct RunConfig {
  GridSpec grid{64, 64, 64, 0.1, 0.1, 0.1};
  OpticsGeometry optics;
  PhantomSpec phantom;
  SolverParams solver;
  std::string solver_preset;  // empty = explicit parameters
  PatchLayout patch;
  bool patched = false;
  std::string output_dir = ".";
  int threads = 1;
  double z_range_um = 2.0;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace odt

#endif
