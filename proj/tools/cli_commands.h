#ifndef MINIMAX_BAYES_TOOLS_CLI_COMMANDS_H_
#define MINIMAX_BAYES_TOOLS_CLI_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "minimax_bayes/policy_space.h"

namespace minimax_bayes::cli {

enum ExitCode : int {
  kOk = 0,
  kMalformedInput = 1,
  kInfeasible = 2,  // also: policy cap exceeded
  kSolverFailure = 3,
};

struct SolveOptions {
  std::filesystem::path problem;
  std::string solver = "exact";
  int rounds = 1000;
  std::optional<double> learning_rate;
  int samples = 64;
  int epochs = 0;  // wma-sr only; 0 runs a single block of `rounds`
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> restriction;
  std::optional<std::filesystem::path> policies;
  std::filesystem::path out = "out";
  std::string mode = "truncated";
  bool independent_samples = false;
  std::uint64_t policy_cap = kDefaultPolicyCap;
};

struct EnumerateOptions {
  int states = 0;
  int actions = 0;
  std::filesystem::path out;
  std::uint64_t policy_cap = kDefaultPolicyCap;
};

struct VerifyOptions {
  std::filesystem::path out;
  int azuma_runs = 30;
};

int RunSolve(const SolveOptions& options, std::ostream& out, std::ostream& err);
int RunEnumerate(const EnumerateOptions& options, std::ostream& out,
                 std::ostream& err);
int RunVerify(const VerifyOptions& options, std::ostream& out,
              std::ostream& err);

}  // namespace minimax_bayes::cli

#endif  // MINIMAX_BAYES_TOOLS_CLI_COMMANDS_H_
