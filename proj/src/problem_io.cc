#include "minimax_bayes/problem_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace minimax_bayes {
namespace {

using nlohmann::json;

std::string At(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

const json& Field(const json& obj, const std::string& key,
                  const std::string& path) {
  if (!obj.is_object()) throw InvalidInputError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw InvalidInputError(path + "." + key, "required field is missing");
  }
  return *it;
}

double Number(const json& value, const std::string& path) {
  if (!value.is_number()) throw InvalidInputError(path, "expected a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) throw InvalidInputError(path, "number is not finite");
  return x;
}

int Integer(const json& value, const std::string& path) {
  if (!value.is_number_integer()) {
    throw InvalidInputError(path, "expected an integer");
  }
  return value.get<int>();
}

const json& Array(const json& value, const std::string& path,
                  std::optional<std::size_t> length = std::nullopt) {
  if (!value.is_array()) throw InvalidInputError(path, "expected an array");
  if (length && value.size() != *length) {
    throw InvalidInputError(path, "expected " + std::to_string(*length) +
                                      " entries, found " +
                                      std::to_string(value.size()));
  }
  return value;
}

std::vector<double> NumberArray(const json& value, const std::string& path,
                                std::optional<std::size_t> length = std::nullopt) {
  Array(value, path, length);
  std::vector<double> out;
  out.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(Number(value[i], At(path, i)));
  }
  return out;
}

Eigen::VectorXd ToVector(const std::vector<double>& values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

// Re-roots a validation error thrown by an in-memory constructor.
[[noreturn]] void Reroot(const InvalidInputError& e, const std::string& root) {
  const std::string what = e.what();
  const std::string message =
      e.path().empty() ? what : what.substr(e.path().size() + 2);
  throw InvalidInputError(e.path().empty() ? root : root + "." + e.path(),
                          message);
}

Mdp ParseMdp(const json& doc, int num_states, int num_actions, double gamma,
             const std::string& path) {
  const std::string t_path = path + ".transitions";
  const json& transitions =
      Array(Field(doc, "transitions", path), t_path, num_states);
  std::vector<std::vector<std::vector<double>>> nested(num_states);
  for (int s = 0; s < num_states; ++s) {
    const std::string s_path = At(t_path, s);
    const json& row = Array(transitions[s], s_path, num_actions);
    nested[s].reserve(num_actions);
    for (int a = 0; a < num_actions; ++a) {
      nested[s].push_back(NumberArray(row[a], At(s_path, a), num_states));
    }
  }
  const std::vector<double> rewards =
      NumberArray(Field(doc, "rewards", path), path + ".rewards", num_states);
  try {
    return Mdp::FromNested(nested, rewards, gamma);
  } catch (const InvalidInputError& e) {
    Reroot(e, path);
  }
}

}  // namespace

bool Problem::operator==(const Problem& other) const {
  return gamma == other.gamma && num_states == other.num_states &&
         num_actions == other.num_actions && init == other.init &&
         raw_mdps == other.raw_mdps && mdps == other.mdps &&
         reward_scale == other.reward_scale;
}

Problem ParseProblem(const json& doc) {
  if (!doc.is_object()) throw InvalidInputError("$", "expected an object");
  Problem problem;
  problem.gamma = Number(Field(doc, "gamma", "$"), "$.gamma");
  if (!(problem.gamma > 0.0 && problem.gamma < 1.0)) {
    std::ostringstream msg;
    msg << "discount " << problem.gamma << " outside (0, 1)";
    throw InvalidInputError("$.gamma", msg.str());
  }
  problem.num_states = Integer(Field(doc, "states", "$"), "$.states");
  if (problem.num_states < 1) {
    throw InvalidInputError("$.states", "need at least one state");
  }
  problem.num_actions = Integer(Field(doc, "actions", "$"), "$.actions");
  if (problem.num_actions < 1) {
    throw InvalidInputError("$.actions", "need at least one action");
  }
  const std::vector<double> init =
      NumberArray(Field(doc, "init", "$"), "$.init", problem.num_states);
  ValidateProbabilityVector(ToVector(init), "$.init");
  problem.init = StateDistribution(ToVector(init));

  const json& mdps = Array(Field(doc, "mdps", "$"), "$.mdps");
  if (mdps.empty()) throw InvalidInputError("$.mdps", "need at least one MDP");
  for (std::size_t m = 0; m < mdps.size(); ++m) {
    problem.raw_mdps.push_back(ParseMdp(mdps[m], problem.num_states,
                                        problem.num_actions, problem.gamma,
                                        At("$.mdps", m)));
  }
  problem.mdps = problem.raw_mdps;
  problem.reward_scale = NormalizeRewards(problem.mdps);
  return problem;
}

json ProblemToJson(const Problem& problem) {
  json mdps = json::array();
  for (const Mdp& mdp : problem.raw_mdps) {
    json transitions = json::array();
    for (int s = 0; s < mdp.num_states(); ++s) {
      json per_action = json::array();
      for (int a = 0; a < mdp.num_actions(); ++a) {
        json row = json::array();
        for (int t = 0; t < mdp.num_states(); ++t) {
          row.push_back(mdp.transition(s, a, t));
        }
        per_action.push_back(std::move(row));
      }
      transitions.push_back(std::move(per_action));
    }
    json rewards = json::array();
    for (Eigen::Index s = 0; s < mdp.rewards().size(); ++s) {
      rewards.push_back(mdp.rewards()[s]);
    }
    mdps.push_back({{"transitions", std::move(transitions)},
                    {"rewards", std::move(rewards)}});
  }
  json init = json::array();
  for (int s = 0; s < problem.init.size(); ++s) init.push_back(problem.init[s]);
  return {{"gamma", problem.gamma},
          {"states", problem.num_states},
          {"actions", problem.num_actions},
          {"init", std::move(init)},
          {"mdps", std::move(mdps)}};
}

json ReadJsonFile(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InvalidInputError("$", "cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInputError("$", file.string() + " is not valid JSON: " +
                                     e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& file, const json& doc) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << doc.dump(2) << '\n';
}

Problem LoadProblem(const std::filesystem::path& file) {
  return ParseProblem(ReadJsonFile(file));
}

PolicySet ParsePolicySet(const json& doc) {
  Array(doc, "$");
  std::vector<DeterministicPolicy> policies;
  policies.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = At("$", i);
    Array(doc[i], path);
    std::vector<int> actions;
    for (std::size_t s = 0; s < doc[i].size(); ++s) {
      actions.push_back(Integer(doc[i][s], At(path, s)));
    }
    try {
      policies.emplace_back(std::move(actions));
    } catch (const InvalidInputError& e) {
      // DeterministicPolicy reports "policy[s]"; here the map is "$[i][s]".
      const std::string p = e.path();
      const std::string tail = p.rfind("policy", 0) == 0 ? p.substr(6) : "." + p;
      const std::string what = e.what();
      throw InvalidInputError(path + tail, what.substr(p.size() + 2));
    }
  }
  try {
    return PolicySet(std::move(policies));
  } catch (const InvalidInputError& e) {
    // PolicySet reports "policies[i]"; the document root is the list itself.
    const std::string p = e.path();
    const std::string tail = p.rfind("policies", 0) == 0 ? p.substr(8) : p;
    const std::string what = e.what();
    throw InvalidInputError("$" + tail, p.empty() ? what
                                                  : what.substr(p.size() + 2));
  }
}

PolicySet LoadPolicySet(const std::filesystem::path& file) {
  return ParsePolicySet(ReadJsonFile(file));
}

json PolicySetToJson(const PolicySet& policies) {
  json doc = json::array();
  for (const DeterministicPolicy& policy : policies) {
    doc.push_back(policy.actions());
  }
  return doc;
}

RestrictedPriorSet ParseRestriction(const json& doc, const Problem& problem,
                                    const PolicySet& policies) {
  if (!doc.is_object()) throw InvalidInputError("$", "expected an object");
  double tolerance = kDefaultRestrictionTolerance;
  if (doc.contains("tolerance")) {
    tolerance = Number(doc["tolerance"], "$.tolerance");
    if (tolerance < 0.0) {
      throw InvalidInputError("$.tolerance", "must be nonnegative");
    }
  }
  const int m_count = problem.num_mdps();

  if (doc.contains("statistic_values")) {
    const json& rows = Array(doc["statistic_values"], "$.statistic_values",
                             static_cast<std::size_t>(m_count));
    std::vector<std::vector<double>> values;
    for (int m = 0; m < m_count; ++m) {
      values.push_back(NumberArray(rows[m], At("$.statistic_values", m),
                                   m == 0 ? std::nullopt
                                          : std::optional(values[0].size())));
    }
    const std::size_t k = values[0].size();
    if (k == 0) {
      throw InvalidInputError("$.statistic_values[0]", "statistic is empty");
    }
    Eigen::MatrixXd stats(m_count, static_cast<Eigen::Index>(k));
    for (int m = 0; m < m_count; ++m) stats.row(m) = ToVector(values[m]);
    const std::vector<double> target =
        NumberArray(Field(doc, "target", "$"), "$.target", k);
    return RestrictedPriorSet(stats, ToVector(target), tolerance);
  }

  const json& statistic = Field(doc, "statistic", "$");
  if (statistic != "occupancy") {
    throw InvalidInputError("$.statistic",
                            "expected \"occupancy\" or explicit statistic_values");
  }
  std::vector<int> policy_of_mdp;
  const json& policy = Field(doc, "policy", "$");
  if (policy == "optimal") {
    policy_of_mdp = PerMdpOptimalPolicies(problem.mdps, policies, problem.init);
  } else {
    Array(policy, "$.policy", static_cast<std::size_t>(m_count));
    for (int m = 0; m < m_count; ++m) {
      const int index = Integer(policy[m], At("$.policy", m));
      if (index < 0 || index >= policies.size()) {
        throw InvalidInputError(At("$.policy", m),
                                "policy index out of range");
      }
      policy_of_mdp.push_back(index);
    }
  }
  std::optional<StateDistribution> beta;
  if (doc.contains("beta")) {
    const std::vector<double> b =
        NumberArray(doc["beta"], "$.beta", problem.num_states);
    ValidateProbabilityVector(ToVector(b), "$.beta");
    beta = StateDistribution(ToVector(b));
  }
  // Build once with a placeholder target to learn the statistic rows.
  const RestrictedPriorSet shape = RestrictedPriorSet::FromOccupancy(
      problem.mdps, policies, policy_of_mdp,
      Eigen::VectorXd::Zero(beta ? problem.num_states
                                 : problem.num_states * problem.num_states),
      tolerance, beta);
  Eigen::VectorXd target;
  if (doc.contains("target_belief")) {
    const std::vector<double> xi =
        NumberArray(doc["target_belief"], "$.target_belief", m_count);
    ValidateProbabilityVector(ToVector(xi), "$.target_belief");
    target = shape.ExpectedStatistic(Belief(ToVector(xi)));
  } else {
    target = ToVector(NumberArray(Field(doc, "target", "$"), "$.target",
                                  shape.dimension()));
  }
  return RestrictedPriorSet(shape.statistic_values(), std::move(target),
                            tolerance);
}

RestrictedPriorSet LoadRestriction(const std::filesystem::path& file,
                                   const Problem& problem,
                                   const PolicySet& policies) {
  return ParseRestriction(ReadJsonFile(file), problem, policies);
}

}  // namespace minimax_bayes
