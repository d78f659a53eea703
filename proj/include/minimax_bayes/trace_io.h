#ifndef MINIMAX_BAYES_TRACE_IO_H_
#define MINIMAX_BAYES_TRACE_IO_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "minimax_bayes/game.h"
#include "minimax_bayes/wma.h"
#include "minimax_bayes/wma_sr.h"

namespace minimax_bayes {

// 17 significant digits, '.' decimal separator, independent of locale.
std::string FormatDouble(double value);

// One CSV row per round. The last four columns exist only for runs on
// estimated payoffs.
struct TraceRow {
  std::int64_t round = 0;  // global, 1-based
  int chosen_mdp = 0;      // mode of nature's belief
  int chosen_policy = 0;   // the decision maker's sampled policy
  double expected_payoff = 0.0;
  double cumulative_average = 0.0;  // within the current epoch
  double bound_slack = 0.0;  // running slack of the weighted-majority bound
  double estimate_error_term = 0.0;  // max_i E_{k,i}
  double cumulative_error = 0.0;     // within the current epoch
  int epoch_index = 0;
  std::int64_t clamp_count = 0;  // cumulative
};

std::vector<TraceRow> TraceRowsFromWma(const WmaTrace& trace);

// Rows for one WMA-SR run that forms epoch `epoch_index` and starts after
// `round_offset` earlier rounds.
std::vector<TraceRow> TraceRowsFromWmaSr(const WmaSrResult& run,
                                         int epoch_index,
                                         std::int64_t round_offset);

void WriteTraceCsv(std::ostream& out, const std::vector<TraceRow>& rows,
                   bool with_estimates);

struct ParsedTraceCsv {
  bool with_estimates = false;
  std::vector<TraceRow> rows;
};

// Throws InvalidInputError on a malformed header or row.
ParsedTraceCsv ReadTraceCsv(std::istream& in);

void WriteFictitiousPlayCsv(std::ostream& out,
                            const FictitiousPlayResult& result);

// Everything a verifier needs to rebuild a weighted-majority run given the
// problem: per-round strategies and the payoffs used in the weight update.
struct TraceRecord {
  std::int64_t round = 0;
  int epoch = 0;
  Eigen::VectorXd distribution;
  Eigen::VectorXd belief;
  Eigen::VectorXd update_row;
  int sampled_policy = 0;
};

struct TraceSegment {
  int epoch = 0;
  double learning_rate = 0.0;
  std::int64_t round_offset = 0;
  int length = 0;
};

struct TraceDocument {
  std::string solver;
  int num_policies = 0;
  int num_mdps = 0;
  std::vector<TraceSegment> segments;
  std::vector<TraceRecord> rounds;

  void Append(const WmaTrace& trace, int epoch, std::int64_t round_offset);
};

nlohmann::json TraceDocumentToJson(const TraceDocument& doc);
TraceDocument TraceDocumentFromJson(const nlohmann::json& doc);

nlohmann::json GameSolutionToJson(const GameSolution& solution);

}  // namespace minimax_bayes

#endif  // MINIMAX_BAYES_TRACE_IO_H_
