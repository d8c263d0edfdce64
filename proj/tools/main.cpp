#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dsm/io.hpp"

namespace {

struct SolverFlags {
  std::optional<unsigned long> seed;
  std::optional<int> max_iters;
  std::optional<double> rho, lambda, sigma_v, sigma_d, quantile;
  bool frozen_u = false;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& flags) {
  cmd->add_option("--seed", flags.seed, "RNG seed recorded with the run");
  cmd->add_option("--max-iters", flags.max_iters, "Iteration cap");
  cmd->add_option("--rho", flags.rho, "Proximal parameter");
  cmd->add_option("--lambda", flags.lambda, "Disparity weight");
  cmd->add_option("--sigma-v", flags.sigma_v, "Velocity kernel scale");
  cmd->add_option("--sigma-d", flags.sigma_d, "Disparity kernel scale");
  cmd->add_flag("--frozen-u", flags.frozen_u, "Freeze the dynamics matrices at x^0");
  cmd->add_option("--quantile", flags.quantile, "Robust Hausdorff quantile")
      ->check(CLI::Range(1e-9, 1.0));
}

void apply(dsm::RunConfig& cfg, const SolverFlags& flags,
           const std::string& out_override) {
  if (flags.seed) cfg.solver.seed = *flags.seed;
  if (flags.max_iters) cfg.solver.max_iterations = *flags.max_iters;
  if (flags.rho) cfg.solver.rho = *flags.rho;
  if (flags.lambda) cfg.solver.lambda = *flags.lambda;
  if (flags.sigma_v) cfg.solver.sigma_v = *flags.sigma_v;
  if (flags.sigma_d) cfg.solver.sigma_d = *flags.sigma_d;
  if (flags.frozen_u) cfg.solver.frozen_u = true;
  if (flags.quantile) cfg.quantile = *flags.quantile;
  if (!out_override.empty()) cfg.out_dir = out_override;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffeomorphic snapshot matching"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  SolverFlags flags;

  auto* match = app.add_subcommand("match", "Run the splitting solver on a config");
  match->add_option("--config", config_path, "Run configuration file")->required();
  match->add_option("--out", out_dir, "Output directory (overrides the config)");
  add_solver_flags(match, flags);

  auto* compare = app.add_subcommand("compare", "Splitting solver vs the GD baseline");
  compare->add_option("--config", config_path, "Run configuration file")->required();
  compare->add_option("--out", out_dir, "Output directory (overrides the config)");
  add_solver_flags(compare, flags);

  std::string reference, deformed, match_dir;
  auto* strain = app.add_subcommand("strain", "Area-ratio strain intensity per vertex");
  strain->add_option("--reference", reference, "Triangulated reference mesh")->required();
  strain->add_option("--deformed", deformed, "Deformed grid (same vertex order)");
  strain->add_option("--match-dir", match_dir, "Take the final match trajectory instead");
  strain->add_option("--out", out_dir, "Output directory");

  std::string shape = "sphere", deformation = "smooth-bump";
  dsm::SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic instance");
  synth->add_option("--shape", shape, "sphere | ellipsoid | open-sheet");
  synth->add_option("--deformation", deformation, "translation | uniform-scale | smooth-bump");
  synth->add_option("--n-points", synth_args.spec.n_points, "Initial grid size");
  synth->add_option("--m-points", synth_args.spec.m_points, "Target grid size");
  synth->add_option("--snapshots", synth_args.spec.n_snapshots, "Number of snapshots L");
  synth->add_option("--magnitude", synth_args.spec.magnitude, "Deformation magnitude");
  synth->add_option("--noise", synth_args.spec.noise, "Gaussian noise on targets");
  synth->add_option("--seed", synth_args.spec.seed, "RNG seed");
  synth->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (match->parsed() || compare->parsed()) {
      dsm::RunConfig cfg = dsm::load_config(config_path);
      apply(cfg, flags, out_dir);
      return match->parsed() ? dsm::run_match(cfg) : dsm::run_compare(cfg);
    }
    if (strain->parsed()) {
      dsm::StrainArgs args;
      args.reference = reference;
      args.deformed = deformed;
      args.match_dir = match_dir;
      if (!out_dir.empty()) args.out_dir = out_dir;
      return dsm::run_strain(args);
    }
    synth_args.spec.base_shape = dsm::parse_base_shape(shape);
    synth_args.spec.deformation = dsm::parse_deformation(deformation);
    synth_args.out_dir = out_dir;
    return dsm::run_synth(synth_args);
  } catch (const dsm::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const dsm::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const dsm::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  }
}
