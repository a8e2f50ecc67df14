#include <iostream>

#include <CLI11.hpp>

#include "gfe/cli.hpp"

int main(int argc, char** argv) {
  gfe::cli::RunConfig cfg;
  CLI::App app{"Geometric finite elements: interpolation, derivative audits and harmonic-map minimization"};
  app.add_option("--command", cfg.command, "interpolate, audit or minimize")
      ->required()
      ->check(CLI::IsMember({"interpolate", "audit", "minimize"}));
  app.add_option("--manifold", cfg.manifold, "Target manifold")
      ->check(CLI::IsMember({"euclidean", "sphere2", "so3"}))
      ->capture_default_str();
  app.add_option("--rule", cfg.rule, "Interpolation rule")
      ->check(CLI::IsMember({"geodesic", "projection"}))
      ->capture_default_str();
  app.add_option("--order", cfg.order, "Lagrange order")->check(CLI::Range(1, 2))->capture_default_str();
  app.add_option("--mesh", cfg.mesh_path, "Mesh file")->check(CLI::ExistingFile);
  app.add_option("--bc", cfg.bc_path, "Nodal values CSV (all nodes for interpolate, fixed nodes for minimize)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", cfg.out_path, "Output path prefix")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--tol", cfg.tol, "Gradient-norm tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--max-iter", cfg.max_iter, "Descent iteration cap")->check(CLI::NonNegativeNumber)->capture_default_str();
  app.add_flag("--corrupt-ddv", cfg.corrupt_ddv)->group("");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gfe::cli::kBadInput;
  }
  return gfe::cli::run(cfg, std::cout, std::cerr);
}
