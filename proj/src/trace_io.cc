#include "minimax_bayes/trace_io.h"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace minimax_bayes {
namespace {

using nlohmann::json;

constexpr const char* kBaseHeader =
    "round,chosen_mdp,chosen_policy,expected_payoff,cumulative_average,"
    "bound_slack";
constexpr const char* kEstimateHeader =
    ",estimate_error_term,cumulative_error,epoch_index,clamp_count";

template <typename T>
T ParseField(const std::string& text, int line, int column) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInputError(
        "trace.csv:" + std::to_string(line) + ":" + std::to_string(column),
        "cannot parse '" + text + "'");
  }
  return value;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

json VectorToJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd VectorFromJson(const json& doc, const std::string& path) {
  if (!doc.is_array()) throw InvalidInputError(path, "expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(doc.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_number()) {
      throw InvalidInputError(path + "[" + std::to_string(i) + "]",
                              "expected a number");
    }
    v[static_cast<Eigen::Index>(i)] = doc[i].get<double>();
  }
  return v;
}

template <typename T>
T Get(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw InvalidInputError(path + "." + key, "required field is missing");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInputError(path + "." + key, "wrong type");
  }
}

}  // namespace

std::string FormatDouble(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<TraceRow> TraceRowsFromWma(const WmaTrace& trace) {
  const std::vector<double> slack = RunningGuaranteeSlack(trace);
  std::vector<TraceRow> rows;
  rows.reserve(trace.rounds.size());
  double total = 0.0;
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    const WmaRound& r = trace.rounds[k];
    total += r.expected_payoff;
    TraceRow row;
    row.round = static_cast<std::int64_t>(k) + 1;
    row.chosen_mdp = r.belief.Mode();
    row.chosen_policy = r.sampled_policy;
    row.expected_payoff = r.expected_payoff;
    row.cumulative_average = total / static_cast<double>(k + 1);
    row.bound_slack = slack[k];
    rows.push_back(row);
  }
  return rows;
}

std::vector<TraceRow> TraceRowsFromWmaSr(const WmaSrResult& run,
                                         int epoch_index,
                                         std::int64_t round_offset) {
  const std::vector<Eigen::VectorXd> cumulative =
      run.ledger.CumulativePerPolicy();
  const std::vector<double> slack =
      RunningGuaranteeSlack(run.trace, &cumulative);
  std::vector<TraceRow> rows = TraceRowsFromWma(run.trace);
  double error = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    TraceRow& row = rows[k];
    row.round += round_offset;
    row.bound_slack = slack[k];
    row.estimate_error_term = run.ledger.per_round[k];
    error += row.estimate_error_term;
    row.cumulative_error = error;
    row.epoch_index = epoch_index;
    row.clamp_count = run.cumulative_clamps[k];
  }
  return rows;
}

void WriteTraceCsv(std::ostream& out, const std::vector<TraceRow>& rows,
                   bool with_estimates) {
  out << kBaseHeader;
  if (with_estimates) out << kEstimateHeader;
  out << '\n';
  for (const TraceRow& r : rows) {
    out << r.round << ',' << r.chosen_mdp << ',' << r.chosen_policy << ','
        << FormatDouble(r.expected_payoff) << ','
        << FormatDouble(r.cumulative_average) << ','
        << FormatDouble(r.bound_slack);
    if (with_estimates) {
      out << ',' << FormatDouble(r.estimate_error_term) << ','
          << FormatDouble(r.cumulative_error) << ',' << r.epoch_index << ','
          << r.clamp_count;
    }
    out << '\n';
  }
}

ParsedTraceCsv ReadTraceCsv(std::istream& in) {
  ParsedTraceCsv parsed;
  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidInputError("trace.csv", "missing header");
  }
  const std::string base = kBaseHeader;
  if (line == base + kEstimateHeader) {
    parsed.with_estimates = true;
  } else if (line != base) {
    throw InvalidInputError("trace.csv:1", "unexpected header");
  }
  const std::size_t width = parsed.with_estimates ? 10 : 6;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsv(line);
    if (f.size() != width) {
      throw InvalidInputError("trace.csv:" + std::to_string(line_no),
                              "expected " + std::to_string(width) + " fields");
    }
    TraceRow r;
    r.round = ParseField<std::int64_t>(f[0], line_no, 1);
    r.chosen_mdp = ParseField<int>(f[1], line_no, 2);
    r.chosen_policy = ParseField<int>(f[2], line_no, 3);
    r.expected_payoff = ParseField<double>(f[3], line_no, 4);
    r.cumulative_average = ParseField<double>(f[4], line_no, 5);
    r.bound_slack = ParseField<double>(f[5], line_no, 6);
    if (parsed.with_estimates) {
      r.estimate_error_term = ParseField<double>(f[6], line_no, 7);
      r.cumulative_error = ParseField<double>(f[7], line_no, 8);
      r.epoch_index = ParseField<int>(f[8], line_no, 9);
      r.clamp_count = ParseField<std::int64_t>(f[9], line_no, 10);
    }
    parsed.rows.push_back(r);
  }
  return parsed;
}

void WriteFictitiousPlayCsv(std::ostream& out,
                            const FictitiousPlayResult& result) {
  out << "round,chosen_mdp,chosen_policy,gap\n";
  for (std::size_t k = 0; k < result.gap_history.size(); ++k) {
    out << k + 1 << ',' << result.mdp_choices[k] << ','
        << result.policy_choices[k] << ','
        << FormatDouble(result.gap_history[k]) << '\n';
  }
}

void TraceDocument::Append(const WmaTrace& trace, int epoch,
                           std::int64_t round_offset) {
  num_policies = trace.num_policies;
  num_mdps = trace.num_mdps;
  segments.push_back({epoch, trace.learning_rate, round_offset,
                      trace.num_rounds()});
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    const WmaRound& r = trace.rounds[k];
    rounds.push_back({round_offset + static_cast<std::int64_t>(k) + 1, epoch,
                      r.distribution, r.belief.probs(), r.update_row,
                      r.sampled_policy});
  }
}

json TraceDocumentToJson(const TraceDocument& doc) {
  json segments = json::array();
  for (const TraceSegment& s : doc.segments) {
    segments.push_back({{"epoch", s.epoch},
                        {"learning_rate", s.learning_rate},
                        {"round_offset", s.round_offset},
                        {"length", s.length}});
  }
  json rounds = json::array();
  for (const TraceRecord& r : doc.rounds) {
    rounds.push_back({{"round", r.round},
                      {"epoch", r.epoch},
                      {"q", VectorToJson(r.distribution)},
                      {"belief", VectorToJson(r.belief)},
                      {"update_row", VectorToJson(r.update_row)},
                      {"sampled_policy", r.sampled_policy}});
  }
  return {{"solver", doc.solver},
          {"num_policies", doc.num_policies},
          {"num_mdps", doc.num_mdps},
          {"segments", std::move(segments)},
          {"rounds", std::move(rounds)}};
}

TraceDocument TraceDocumentFromJson(const json& doc) {
  TraceDocument out;
  out.solver = Get<std::string>(doc, "solver", "$");
  out.num_policies = Get<int>(doc, "num_policies", "$");
  out.num_mdps = Get<int>(doc, "num_mdps", "$");
  const json segments = Get<json>(doc, "segments", "$");
  for (std::size_t j = 0; j < segments.size(); ++j) {
    const std::string path = "$.segments[" + std::to_string(j) + "]";
    out.segments.push_back({Get<int>(segments[j], "epoch", path),
                            Get<double>(segments[j], "learning_rate", path),
                            Get<std::int64_t>(segments[j], "round_offset", path),
                            Get<int>(segments[j], "length", path)});
  }
  const json rounds = Get<json>(doc, "rounds", "$");
  for (std::size_t k = 0; k < rounds.size(); ++k) {
    const std::string path = "$.rounds[" + std::to_string(k) + "]";
    const json& r = rounds[k];
    TraceRecord rec;
    rec.round = Get<std::int64_t>(r, "round", path);
    rec.epoch = Get<int>(r, "epoch", path);
    rec.distribution = VectorFromJson(Get<json>(r, "q", path), path + ".q");
    rec.belief = VectorFromJson(Get<json>(r, "belief", path), path + ".belief");
    rec.update_row =
        VectorFromJson(Get<json>(r, "update_row", path), path + ".update_row");
    rec.sampled_policy = Get<int>(r, "sampled_policy", path);
    if (rec.distribution.size() != out.num_policies ||
        rec.update_row.size() != out.num_policies ||
        rec.belief.size() != out.num_mdps) {
      throw InvalidInputError(path, "vector lengths do not match N and M");
    }
    out.rounds.push_back(std::move(rec));
  }
  return out;
}

json GameSolutionToJson(const GameSolution& solution) {
  return {{"value", solution.value},
          {"policy_distribution", VectorToJson(solution.policy_distribution)},
          {"belief", VectorToJson(solution.belief.probs())},
          {"method", solution.method},
          {"duality_gap", solution.duality_gap},
          {"iterations", solution.iterations}};
}

}  // namespace minimax_bayes
