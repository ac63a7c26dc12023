#include "types.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace selfdc {

using nlohmann::json;

RunConfig validate_run_config(const RunConfig& raw) {
  const auto& t = raw.thresholds;
  if (t.alpha < 0.0 || t.alpha > 1.0)
    throw InvalidThresholds("alpha must lie in [0,1], got " +
                            std::to_string(t.alpha));
  if (t.beta < 0.0 || t.beta > 0.5)
    throw InvalidThresholds("beta must lie in [0,0.5], got " +
                            std::to_string(t.beta));
  if (t.alpha - t.beta < 0.0)
    throw InvalidThresholds("alpha-beta must be >= 0 (alpha=" +
                            std::to_string(t.alpha) +
                            ", beta=" + std::to_string(t.beta) + ")");
  if (t.alpha + t.beta > 1.0)
    throw InvalidThresholds("alpha+beta must be <= 1 (alpha=" +
                            std::to_string(t.alpha) +
                            ", beta=" + std::to_string(t.beta) + ")");
  if (raw.max_depth < 1) throw InvalidField("max_depth must be >= 1");
  if (raw.num_retrieved < 1) throw InvalidField("num_retrieved must be >= 1");
  if (raw.temperature < 0.0) throw InvalidField("temperature must be >= 0");
  if (raw.top_p <= 0.0 || raw.top_p > 1.0)
    throw InvalidField("top_p must lie in (0,1]");
  return raw;
}

static void check_node(const TraceNode& n, int expected_depth, int max_depth,
                       const std::string& path,
                       std::vector<std::string>& out) {
  if (n.depth != expected_depth)
    out.push_back(path + ": depth " + std::to_string(n.depth) + " != " +
                  std::to_string(expected_depth));
  if (n.depth > max_depth)
    out.push_back(path + ": depth exceeds max_depth");
  const bool is_decompose = n.route == NodeRoute::Decompose;
  if (is_decompose != !n.sub_nodes.empty())
    out.push_back(path + ": sub_nodes non-empty iff route=Decompose violated");
  std::int64_t child_retrievals = 0;
  std::int64_t child_llm = 0;
  for (std::size_t i = 0; i < n.sub_nodes.size(); ++i) {
    const auto& c = n.sub_nodes[i];
    child_retrievals += c.retrieval_calls;
    child_llm += c.llm_calls;
    check_node(c, n.depth + 1, max_depth, path + "/" + std::to_string(i), out);
  }
  if (n.retrieval_calls < child_retrievals)
    out.push_back(path + ": retrieval_calls below children sum");
  if (n.llm_calls < child_llm)
    out.push_back(path + ": llm_calls below children sum");
}

std::vector<std::string> check_trace_invariants(const TraceNode& root,
                                                int max_depth) {
  std::vector<std::string> out;
  check_node(root, root.depth, max_depth, "root", out);
  return out;
}

std::string to_string(ConfidenceMode m) {
  return m == ConfidenceMode::Verbalized ? "verbalized" : "probability";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::SelfDC: return "self_dc";
    case Method::Direct: return "direct";
    case Method::CoT: return "cot";
    case Method::GenRead: return "genread";
    case Method::RR: return "rr";
  }
  return "self_dc";
}

std::string to_string(NodeRoute r) {
  switch (r) {
    case NodeRoute::RetrieveThenRead: return "retrieve_then_read";
    case NodeRoute::Decompose: return "decompose";
    case NodeRoute::GenerateThenRead: return "generate_then_read";
    case NodeRoute::DepthFallback: return "depth_fallback";
    case NodeRoute::SingleSubFallback: return "single_sub_fallback";
    case NodeRoute::Direct: return "direct";
    case NodeRoute::CoT: return "cot";
  }
  return "retrieve_then_read";
}

std::string to_string(QType t) {
  switch (t) {
    case QType::Easy: return "easy";
    case QType::Hard: return "hard";
    case QType::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

ConfidenceMode confidence_mode_from_string(const std::string& s) {
  if (s == "verbalized" || s == "verb") return ConfidenceMode::Verbalized;
  if (s == "probability" || s == "prob") return ConfidenceMode::Probability;
  throw InvalidField("unknown confidence_mode: " + s);
}

Method method_from_string(const std::string& s) {
  if (s == "self_dc" || s == "selfdc") return Method::SelfDC;
  if (s == "direct") return Method::Direct;
  if (s == "cot") return Method::CoT;
  if (s == "genread") return Method::GenRead;
  if (s == "rr") return Method::RR;
  throw InvalidField("unknown method: " + s);
}

NodeRoute node_route_from_string(const std::string& s) {
  if (s == "retrieve_then_read") return NodeRoute::RetrieveThenRead;
  if (s == "decompose") return NodeRoute::Decompose;
  if (s == "generate_then_read") return NodeRoute::GenerateThenRead;
  if (s == "depth_fallback") return NodeRoute::DepthFallback;
  if (s == "single_sub_fallback") return NodeRoute::SingleSubFallback;
  if (s == "direct") return NodeRoute::Direct;
  if (s == "cot") return NodeRoute::CoT;
  throw InvalidField("unknown route: " + s);
}

QType qtype_from_string(const std::string& s) {
  if (s == "easy") return QType::Easy;
  if (s == "hard") return QType::Hard;
  if (s == "unlabeled") return QType::Unlabeled;
  throw InvalidField("unknown qtype: " + s);
}

json to_json(const RunConfig& c) {
  return json{{"alpha", c.thresholds.alpha},
              {"beta", c.thresholds.beta},
              {"max_depth", c.max_depth},
              {"num_retrieved", c.num_retrieved},
              {"temperature", c.temperature},
              {"top_p", c.top_p},
              {"confidence_mode", to_string(c.confidence_mode)},
              {"method", to_string(c.method)},
              {"backend_id", c.backend_id},
              {"retriever_id", c.retriever_id},
              {"seed", c.seed}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;  // absent keys keep the defaults
  if (j.contains("alpha")) c.thresholds.alpha = j.at("alpha").get<double>();
  if (j.contains("beta")) c.thresholds.beta = j.at("beta").get<double>();
  if (j.contains("max_depth")) c.max_depth = j.at("max_depth").get<int>();
  if (j.contains("num_retrieved"))
    c.num_retrieved = j.at("num_retrieved").get<int>();
  if (j.contains("temperature"))
    c.temperature = j.at("temperature").get<double>();
  if (j.contains("top_p")) c.top_p = j.at("top_p").get<double>();
  if (j.contains("confidence_mode"))
    c.confidence_mode =
        confidence_mode_from_string(j.at("confidence_mode").get<std::string>());
  if (j.contains("method"))
    c.method = method_from_string(j.at("method").get<std::string>());
  if (j.contains("backend_id"))
    c.backend_id = j.at("backend_id").get<std::string>();
  if (j.contains("retriever_id"))
    c.retriever_id = j.at("retriever_id").get<std::string>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::int64_t>();
  return c;
}

json to_json(const TraceNode& n) {
  json j{{"question", n.question},
         {"depth", n.depth},
         {"route", to_string(n.route)},
         {"answer", n.answer},
         {"llm_calls", n.llm_calls},
         {"retrieval_calls", n.retrieval_calls}};
  if (n.confidence) j["confidence"] = *n.confidence;
  j["passages"] = json::array();
  for (const auto& p : n.passages) {
    json pj{{"text", p.text}, {"rank", p.rank},
            {"retriever_id", p.retriever_id}};
    if (p.source_url) pj["source_url"] = *p.source_url;
    j["passages"].push_back(std::move(pj));
  }
  j["sub_nodes"] = json::array();
  for (const auto& c : n.sub_nodes) j["sub_nodes"].push_back(to_json(c));
  return j;
}

TraceNode trace_node_from_json(const json& j) {
  TraceNode n;
  n.question = j.at("question").get<std::string>();
  n.depth = j.at("depth").get<int>();
  n.route = node_route_from_string(j.at("route").get<std::string>());
  n.answer = j.at("answer").get<std::string>();
  n.llm_calls = j.at("llm_calls").get<std::int64_t>();
  n.retrieval_calls = j.at("retrieval_calls").get<std::int64_t>();
  if (j.contains("confidence")) n.confidence = j.at("confidence").get<double>();
  for (const auto& pj : j.at("passages")) {
    Passage p;
    p.text = pj.at("text").get<std::string>();
    p.rank = pj.at("rank").get<int>();
    p.retriever_id = pj.at("retriever_id").get<std::string>();
    if (pj.contains("source_url"))
      p.source_url = pj.at("source_url").get<std::string>();
    n.passages.push_back(std::move(p));
  }
  for (const auto& cj : j.at("sub_nodes"))
    n.sub_nodes.push_back(trace_node_from_json(cj));
  return n;
}

json to_json(const DatasetRecord& r) {
  return json{{"id", r.id},
              {"question", r.question},
              {"gold_answers", r.gold_answers},
              {"qtype", to_string(r.qtype)},
              {"meta", r.meta}};
}

DatasetRecord dataset_record_from_json(const json& j) {
  DatasetRecord r;
  r.id = j.at("id").get<std::string>();
  r.question = j.at("question").get<std::string>();
  r.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
  if (r.gold_answers.empty())
    throw InvalidField("record " + r.id + ": gold_answers must be non-empty");
  if (j.contains("qtype"))
    r.qtype = qtype_from_string(j.at("qtype").get<std::string>());
  if (j.contains("meta"))
    r.meta = j.at("meta").get<std::map<std::string, std::string>>();
  return r;
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidField("cannot open dataset file: " + path);
  std::vector<DatasetRecord> records;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto r = dataset_record_from_json(json::parse(line));
    if (!seen.insert(r.id).second)
      throw InvalidField("duplicate dataset id: " + r.id);
    records.push_back(std::move(r));
  }
  return records;
}

void save_dataset(const std::vector<DatasetRecord>& records,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidField("cannot write dataset file: " + path);
  for (const auto& r : records) out << to_json(r).dump() << "\n";
}

}  // namespace selfdc
