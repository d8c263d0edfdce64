#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dsm/baseline.hpp"
#include "dsm/osa.hpp"
#include "dsm/synth.hpp"

namespace dsm {

/// Reads a surface from (a) CSV with an `x,y,z` header, one point per row,
/// or (b) the ASCII mesh format: `N T`, N vertex lines, T zero-based face
/// lines. Chosen by extension: `.csv` selects CSV.
SurfaceGrid read_surface(const std::filesystem::path& path);

/// Writes CSV for plain grids and the mesh format for triangulated ones
/// (always the mesh format when the path ends in `.mesh`). Atomic:
/// write-temp-then-rename.
void write_surface(const std::filesystem::path& path, const SurfaceGrid& grid);

/// One reproducible run: problem file references, solver and baseline
/// settings, output directory. Mirrors the sectioned config file.
struct RunConfig {
  std::filesystem::path initial;
  std::vector<std::filesystem::path> targets;
  std::vector<double> times;
  SolverOptions solver;
  BaselineOptions baseline;
  std::filesystem::path out_dir = ".";
  double quantile = 0.95;  // robust Hausdorff quantile for compare
};

/// Parses the sectioned key = value config; relative paths resolve against
/// the config file's directory.
RunConfig load_config(const std::filesystem::path& path);
void write_config(const std::filesystem::path& path, const RunConfig& config);

SnapshotProblem load_problem(const RunConfig& config);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

int run_match(const RunConfig& config);

struct StrainArgs {
  std::filesystem::path reference;
  std::filesystem::path deformed;   // explicit deformed grid, or
  std::filesystem::path match_dir;  // a completed match output directory
  std::filesystem::path out_dir = ".";
};
int run_strain(const StrainArgs& args);

int run_compare(const RunConfig& config);

struct SynthArgs {
  SyntheticSpec spec;
  std::filesystem::path out_dir = ".";
};
int run_synth(const SynthArgs& args);

}  // namespace dsm
