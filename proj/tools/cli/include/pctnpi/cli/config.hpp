#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pctnpi/bath.hpp"
#include "pctnpi/network.hpp"
#include "pctnpi/system.hpp"

namespace pctnpi::cli {

/// One (memory length, mode) pair to simulate. L = 0 stands for the full
/// horizon and is resolved against the step count.
struct RunSpec {
  int L = 0;
  Mode mode = Mode::full;
};

/// A parsed run configuration. See configs/ for the YAML layout.
struct RunConfig {
  std::filesystem::path source;
  SystemSpec system;
  SpectralDensity spectral_density;
  BathConfig bath;
  int steps = 1;
  std::vector<RunSpec> runs;
  CMatrix rho0;
  std::string name;
  std::vector<std::string> warnings;  ///< non-fatal notes produced while loading

  int memory_of(const RunSpec& r) const noexcept { return r.L == 0 ? steps : r.L; }
};

/// Parses YAML text. Validation failures throw ConfigError with a
/// "<source>:<line>: " prefix pointing at the offending node.
RunConfig parse_config(const std::string& text, const std::filesystem::path& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

const char* mode_name(Mode mode) noexcept;

}  // namespace pctnpi::cli
