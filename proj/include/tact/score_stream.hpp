#ifndef TACT_SCORE_STREAM_HPP_
#define TACT_SCORE_STREAM_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>

#include "tact/config.hpp"
#include "tact/serialize.hpp"
#include "tact/types.hpp"

namespace tact {

// Streaming reward-scoring protocol: one ScoreRequest per line on the input,
// one ScoreResponse per request on the output, order preserved. Malformed
// lines produce an error record and never abort the stream.
//
// Request:  {"schema_version":1,"request_id":...,"trace":"...",
//            "qa":{...inline item...} | "qa_id":N,
//            "k":3?,"weights":{"lambda_acc":..,"lambda_cs":..,"lambda_fmt":..}?}
// Response: {"schema_version":1,"request_id":...,"parse_ok":..,
//            "answer_parsable":..,"r_acc":..,"r_cs":..,"r_fmt":..,
//            "composite":..,"answer":{...}|"unparsable"}
// Error:    {"schema_version":1,"request_id":...|null,"error":"..."}

struct ScoreContext {
  int k_levels = 3;
  RewardWeights weights;
  // Bench lookup for requests that reference an item by qa_id.
  std::unordered_map<std::int64_t, QAItem> bench;
  int workers = 1;
};

// Scores a single already-parsed request line; returns the response (or
// error) record.
Json score_request_line(const std::string& line, const ScoreContext& context);

// Runs the full protocol; returns the number of lines processed. Worker
// counts above 1 score chunks in parallel with an ordered merge.
std::size_t score_stream(std::istream& in, std::ostream& out, const ScoreContext& context);

}  // namespace tact

#endif  // TACT_SCORE_STREAM_HPP_
