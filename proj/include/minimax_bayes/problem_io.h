#ifndef MINIMAX_BAYES_PROBLEM_IO_H_
#define MINIMAX_BAYES_PROBLEM_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "minimax_bayes/common.h"
#include "minimax_bayes/mdp.h"
#include "minimax_bayes/policy_space.h"

namespace minimax_bayes {

// An MDP set as read from a problem file. `raw_mdps` keep the file's rewards
// (what gets written back out); `mdps` are rescaled by `reward_scale` so every
// utility lies in [-1, 1]. All solvers work on `mdps`.
struct Problem {
  double gamma = 0.0;
  int num_states = 0;
  int num_actions = 0;
  StateDistribution init = StateDistribution::PointMass(1, 0);
  std::vector<Mdp> raw_mdps;
  std::vector<Mdp> mdps;
  double reward_scale = 1.0;

  int num_mdps() const { return static_cast<int>(mdps.size()); }
  bool operator==(const Problem& other) const;
};

// Validation errors are InvalidInputError with JSONPath-style paths such as
// "$.gamma" or "$.mdps[1].transitions[0][1][2]".
Problem ParseProblem(const nlohmann::json& doc);
Problem LoadProblem(const std::filesystem::path& file);
nlohmann::json ProblemToJson(const Problem& problem);

// A policy-set document is a JSON list of action maps.
PolicySet ParsePolicySet(const nlohmann::json& doc);
PolicySet LoadPolicySet(const std::filesystem::path& file);
nlohmann::json PolicySetToJson(const PolicySet& policies);

// A restriction document is either explicit,
//   {"statistic_values": [[...], ...], "target": [...], "tolerance": t}
// or derived from occupancies,
//   {"statistic": "occupancy", "policy": "optimal" | [index per MDP],
//    "beta": [...], "target": [...] | "target_belief": [...], "tolerance": t}
// where "beta" (optional) selects the projected statistic and
// "target_belief" sets the target to that belief's expected statistic.
RestrictedPriorSet ParseRestriction(const nlohmann::json& doc,
                                    const Problem& problem,
                                    const PolicySet& policies);
RestrictedPriorSet LoadRestriction(const std::filesystem::path& file,
                                   const Problem& problem,
                                   const PolicySet& policies);

// Reads a whole file as JSON. Parse errors become InvalidInputError at "$".
nlohmann::json ReadJsonFile(const std::filesystem::path& file);
// Writes `doc` with two-space indentation and a trailing newline.
void WriteJsonFile(const std::filesystem::path& file, const nlohmann::json& doc);

}  // namespace minimax_bayes

#endif  // MINIMAX_BAYES_PROBLEM_IO_H_
