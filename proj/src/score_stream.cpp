#include "tact/score_stream.hpp"

#include <future>
#include <istream>
#include <ostream>
#include <vector>

#include "tact/rewards.hpp"

namespace tact {

namespace {

Json error_record(const Json& request_id, const std::string& message) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["request_id"] = request_id;
  j["error"] = message;
  return j;
}

}  // namespace

Json score_request_line(const std::string& line, const ScoreContext& context) {
  Json request;
  try {
    request = Json::parse(line);
  } catch (const Json::exception& e) {
    return error_record(nullptr, std::string("malformed json: ") + e.what());
  }
  Json request_id = request.contains("request_id") ? request.at("request_id") : Json(nullptr);
  try {
    if (!request.is_object()) throw DataError("request must be an object");
    if (request.value("schema_version", -1) != kSchemaVersion)
      throw DataError("unsupported schema_version");
    if (!request.contains("trace") || !request.at("trace").is_string())
      throw DataError("missing trace string");
    const std::string trace = request.at("trace").get<std::string>();

    QAItem item;
    if (request.contains("qa")) {
      item = qa_item_from_json(request.at("qa"));
    } else if (request.contains("qa_id")) {
      const auto id = request.at("qa_id").get<std::int64_t>();
      const auto it = context.bench.find(id);
      if (it == context.bench.end())
        throw DataError("qa_id " + std::to_string(id) + " not in the loaded bench");
      item = it->second;
    } else {
      throw DataError("request needs qa or qa_id");
    }

    const int k_levels = request.value("k", context.k_levels);
    RewardWeights weights = context.weights;
    if (request.contains("weights")) {
      const Json& w = request.at("weights");
      weights.lambda_acc = w.value("lambda_acc", weights.lambda_acc);
      weights.lambda_cs = w.value("lambda_cs", weights.lambda_cs);
      weights.lambda_fmt = w.value("lambda_fmt", weights.lambda_fmt);
      weights.binary_accuracy = w.value("binary_accuracy", weights.binary_accuracy);
    }

    const RewardBreakdown breakdown = composite_reward(trace, item, weights, k_levels);
    const ParsedTrace parsed = parse_trace(trace, k_levels);
    const std::optional<Answer> answer = extract_answer(parsed, item, k_levels);

    Json response;
    response["schema_version"] = kSchemaVersion;
    response["request_id"] = request_id;
    response["parse_ok"] = breakdown.parse_ok;
    response["answer_parsable"] = breakdown.answer_parsable;
    response["r_acc"] = breakdown.r_acc;
    response["r_cs"] = breakdown.r_cs;
    response["r_fmt"] = breakdown.r_fmt;
    response["composite"] = breakdown.composite;
    response["answer"] = answer ? answer_to_json(*answer) : Json("unparsable");
    return response;
  } catch (const std::exception& e) {
    return error_record(request_id, e.what());
  }
}

std::size_t score_stream(std::istream& in, std::ostream& out, const ScoreContext& context) {
  const int workers = std::max(context.workers, 1);
  std::size_t processed = 0;
  if (workers == 1) {
    std::string line;
    while (std::getline(in, line)) {
      out << score_request_line(line, context).dump() << '\n';
      ++processed;
    }
    out.flush();
    return processed;
  }

  // Chunked parallel scoring with an ordered merge; output bytes are
  // independent of the worker count.
  constexpr std::size_t kChunk = 512;
  std::vector<std::string> lines;
  lines.reserve(kChunk);
  std::string line;
  bool more = true;
  while (more) {
    lines.clear();
    while (lines.size() < kChunk * static_cast<std::size_t>(workers)) {
      if (!std::getline(in, line)) {
        more = false;
        break;
      }
      lines.push_back(line);
    }
    if (lines.empty()) break;
    const std::size_t per =
        (lines.size() + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
    std::vector<std::future<std::vector<std::string>>> futures;
    for (std::size_t begin = 0; begin < lines.size(); begin += per) {
      const std::size_t end = std::min(begin + per, lines.size());
      futures.push_back(std::async(std::launch::async, [&lines, &context, begin, end] {
        std::vector<std::string> chunk;
        chunk.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
          chunk.push_back(score_request_line(lines[i], context).dump());
        }
        return chunk;
      }));
    }
    for (auto& f : futures) {
      for (const auto& result : f.get()) out << result << '\n';
    }
    processed += lines.size();
  }
  out.flush();
  return processed;
}

}  // namespace tact
