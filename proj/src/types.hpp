#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace selfdc {

// Router thresholds. The three confidence ranges are
// [0, alpha-beta], (alpha-beta, alpha+beta), [alpha+beta, 1].
struct Thresholds {
  double alpha = 0.4;
  double beta = 0.1;
};

enum class ConfidenceMode { Verbalized, Probability };
enum class Method { SelfDC, Direct, CoT, GenRead, RR };

struct RunConfig {
  Thresholds thresholds;
  int max_depth = 3;
  int num_retrieved = 3;
  double temperature = 0.1;
  double top_p = 0.1;
  ConfidenceMode confidence_mode = ConfidenceMode::Verbalized;
  Method method = Method::SelfDC;
  std::string backend_id = "oracle";
  std::string retriever_id = "local";
  std::int64_t seed = 0;
};

// Validates ranges and fills nothing (defaults live in the struct itself).
// Throws InvalidThresholds / InvalidField.
RunConfig validate_run_config(const RunConfig& raw);

enum class Route { RetrieveThenRead, Decompose, GenerateThenRead };

// Route of a trace node: a real route, a forced-retrieve fallback marker,
// or a baseline marker for single-node baseline traces.
enum class NodeRoute {
  RetrieveThenRead,
  Decompose,
  GenerateThenRead,
  DepthFallback,
  SingleSubFallback,
  Direct,
  CoT,
};

struct Passage {
  std::string text;
  std::optional<std::string> source_url;
  int rank = 1;
  std::string retriever_id;
};

struct TraceNode {
  std::string question;
  int depth = 0;
  std::optional<double> confidence;  // absent on forced-retrieve fallbacks
  NodeRoute route = NodeRoute::RetrieveThenRead;
  std::vector<Passage> passages;
  std::vector<TraceNode> sub_nodes;
  std::string answer;
  // Counters are rollups: own calls plus the sum over sub_nodes.
  std::int64_t llm_calls = 0;
  std::int64_t retrieval_calls = 0;
};

// Recursive structural check of the TraceNode invariants: sub_nodes non-empty
// iff route == Decompose, child depth = parent depth + 1, counters are exact
// rollups. Returns a human-readable violation list; empty means valid.
std::vector<std::string> check_trace_invariants(const TraceNode& root,
                                                int max_depth);

enum class QType { Easy, Hard, Unlabeled };

struct DatasetRecord {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;
  QType qtype = QType::Unlabeled;
  std::map<std::string, std::string> meta;
};

// --- enum <-> string names ---
std::string to_string(ConfidenceMode m);
std::string to_string(Method m);
std::string to_string(NodeRoute r);
std::string to_string(QType t);
ConfidenceMode confidence_mode_from_string(const std::string& s);
Method method_from_string(const std::string& s);
NodeRoute node_route_from_string(const std::string& s);
QType qtype_from_string(const std::string& s);

// --- JSON serialization ---
nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TraceNode& n);
TraceNode trace_node_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DatasetRecord& r);
DatasetRecord dataset_record_from_json(const nlohmann::json& j);

// Loads a JSON-lines dataset file; ids must be unique.
std::vector<DatasetRecord> load_dataset(const std::string& path);
void save_dataset(const std::vector<DatasetRecord>& records,
                  const std::string& path);

}  // namespace selfdc
