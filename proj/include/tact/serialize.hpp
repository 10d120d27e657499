#ifndef TACT_SERIALIZE_HPP_
#define TACT_SERIALIZE_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tact/config.hpp"
#include "tact/metrics.hpp"
#include "tact/policy.hpp"
#include "tact/types.hpp"

namespace tact {

// Insertion-ordered JSON keeps the schema_version field first and makes
// every serialization byte-stable.
using Json = nlohmann::ordered_json;

// --- QA items / QA sets (line-delimited, one item per line) ---------------
Json qa_item_to_json(const QAItem& item);
QAItem qa_item_from_json(const Json& j);
void write_qa_items(std::ostream& out, const std::vector<QAItem>& items);
std::vector<QAItem> read_qa_items(std::istream& in);
void write_qa_items_file(const std::string& path, const std::vector<QAItem>& items);
std::vector<QAItem> read_qa_items_file(const std::string& path);

// --- Trace files (one {qa_id, trace} record per line) ----------------------
void write_trace_file(const std::string& path, const std::vector<QAItem>& items,
                      const std::vector<std::string>& traces);
// Returns traces aligned with `items`; missing qa_ids are an error.
std::vector<std::string> read_trace_file(const std::string& path,
                                         const std::vector<QAItem>& items);

// --- Policy checkpoints -----------------------------------------------------
Json checkpoint_to_json(const PolicyParams& params);
PolicyParams checkpoint_from_json(const Json& j);
void write_checkpoint(const std::string& path, const PolicyParams& params);
PolicyParams read_checkpoint(const std::string& path);

// --- Metric reports ---------------------------------------------------------
Json metric_report_to_json(const MetricReport& report);
MetricReport metric_report_from_json(const Json& j);
std::string metric_report_csv(const MetricReport& report);  // header + one row

// --- Run config -------------------------------------------------------------
Json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config_file(const std::string& path);
// Dotted-path override, e.g. "trainer.gamma_grounding=0.05". Values parse as
// JSON when possible, else as strings.
void apply_override(Json& config, const std::string& key_value);

// --- Answers ----------------------------------------------------------------
Json answer_to_json(const Answer& answer);
Answer answer_from_json(const Json& j);

}  // namespace tact

#endif  // TACT_SERIALIZE_HPP_
