// minimax-bayes: solve minimax-Bayes policy games over a finite MDP set.
//
//   minimax-bayes solve problem.json --solver wma --rounds 4096 --out run/
//   minimax-bayes enumerate --states 2 --actions 2 --out policies.json
//   minimax-bayes verify --out run/

#include <iostream>

#include <CLI11.hpp>

#include "cli_commands.h"

int main(int argc, char** argv) {
  using namespace minimax_bayes::cli;

  CLI::App app{"Minimax-Bayes policy games over finite MDP sets"};
  app.require_subcommand(1);

  SolveOptions solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a problem file");
  solve_cmd->add_option("problem", solve.problem, "Problem JSON file")
      ->required();
  solve_cmd->add_option("--solver", solve.solver)
      ->check(CLI::IsMember({"exact", "wma", "wma-sr", "fictitious"}))
      ->capture_default_str();
  solve_cmd->add_option("--rounds", solve.rounds, "Rounds K")
      ->capture_default_str();
  solve_cmd->add_option("--learning-rate", solve.learning_rate,
                        "Rate l in (0, 1/2]; default sqrt(ln N / K)");
  solve_cmd->add_option("--samples", solve.samples, "Rollouts S per round")
      ->capture_default_str();
  solve_cmd->add_option("--epochs", solve.epochs,
                        "wma-sr: epochs of length j^2 (overrides --rounds)")
      ->capture_default_str();
  solve_cmd->add_option("--seed", solve.seed)->capture_default_str();
  solve_cmd->add_option("--restriction", solve.restriction,
                        "Restricted prior set JSON");
  solve_cmd->add_option("--policies", solve.policies,
                        "Policy-set JSON (default: all policies)");
  solve_cmd->add_option("--out", solve.out, "Output directory")
      ->capture_default_str();
  solve_cmd->add_option("--mode", solve.mode, "Rollout mode")
      ->check(CLI::IsMember({"truncated", "geometric"}))
      ->capture_default_str();
  solve_cmd->add_flag("--independent-samples", solve.independent_samples,
                      "Draw separate rollouts per policy");
  solve_cmd->add_option("--cap", solve.policy_cap, "Policy count cap")
      ->capture_default_str();

  EnumerateOptions enumerate;
  CLI::App* enum_cmd =
      app.add_subcommand("enumerate", "Write every deterministic policy");
  enum_cmd->add_option("--states", enumerate.states)->required();
  enum_cmd->add_option("--actions", enumerate.actions)->required();
  enum_cmd->add_option("--out", enumerate.out, "Policy-set JSON file")
      ->required();
  enum_cmd->add_option("--cap", enumerate.policy_cap, "Policy count cap")
      ->capture_default_str();

  VerifyOptions verify;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Check a finished run's guarantees");
  verify_cmd->add_option("--out", verify.out, "Run directory")->required();
  verify_cmd->add_option("--azuma-runs", verify.azuma_runs,
                         "Extra seeded wma-sr runs for the Azuma check (0 skips)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kMalformedInput;
  }

  if (*solve_cmd) return RunSolve(solve, std::cout, std::cerr);
  if (*enum_cmd) return RunEnumerate(enumerate, std::cout, std::cerr);
  return RunVerify(verify, std::cout, std::cerr);
}
