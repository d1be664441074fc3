// ============================================================================
// ff/eval.hpp — model querying, verdict parsing, and the resumable run log
// ============================================================================
//
// The run log is append-only line-delimited JSON. Each line is one Judgment
// keyed by (statement_id, rule, model); a rerun skips every key already in
// the log, so an interrupted run picks up where it stopped. Aggregation is a
// pure function of the log contents, independent of completion order and of
// the concurrency limit used to produce it.
// ============================================================================
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ff/corpus.hpp"
#include "ff/logic.hpp"

namespace ff {

inline constexpr const char* kDefaultSystemPrompt =
    "You answer questions about whether statements are correct.";
// Bearer token read from this environment variable when set.
inline constexpr const char* kApiKeyEnvVar = "FALLACY_FORGE_API_KEY";

enum class ApiKind {
  kChat,        // POST {base_url}/v1/chat/completions
  kCompletion,  // POST {base_url}/v1/completions (plain-text continuation)
};

struct ModelEndpoint {
  std::string name;      // display label, unique per run
  std::string base_url;  // scheme://host[:port]
  std::string model_id;  // endpoint-side model name
  double temperature = 0.0;
  int max_retries = 3;        // retries beyond the first attempt
  double timeout_seconds = 30.0;
  ApiKind api = ApiKind::kChat;
  std::string system_prompt = kDefaultSystemPrompt;  // chat path only
  int backoff_ms = 250;  // initial retry delay, doubled per retry
};

// Endpoint config file: JSON array of objects with the ModelEndpoint fields
// (`name`, `base_url`, `model_id` required; the rest optional).
std::vector<ModelEndpoint> load_endpoints(const std::filesystem::path& path);

enum class Verdict { kTrue, kFalse, kUnparseable };

std::string_view verdict_to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

struct Judgment {
  std::string statement_id;
  std::string rule_code;
  std::string model;
  Verdict verdict = Verdict::kUnparseable;
  std::string raw_response;
  std::string timestamp;  // ISO 8601 UTC, preserved verbatim on rewrite
  int attempts = 0;

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

// Sends one prompt and returns the assistant content of the first completion
// choice (chat) or the first continuation text (completion). Transient
// failures (connect errors, 408/429/5xx) are retried with exponential
// backoff up to max_retries. Throws TransportError once retries are
// exhausted, AuthError on 401/403, ProtocolError on a malformed body.
// attempts_out, when given, receives the number of attempts made.
std::string query_model(const ModelEndpoint& endpoint, const std::string& prompt_text,
                        int* attempts_out = nullptr);

// Case-insensitive scan for the standalone tokens "true"/"false"; the
// earliest occurrence wins. Neither found -> kUnparseable. Total function.
Verdict parse_verdict(std::string_view raw);

// Judgment log I/O. Field names: statement_id, rule, model, verdict,
// raw_response, timestamp, attempts. A torn trailing line (interrupted
// writer) is dropped; malformed interior lines raise ParseError.
std::vector<Judgment> load_judgment_log(const std::filesystem::path& path);
void save_judgment_log(const std::vector<Judgment>& judgments,
                       const std::filesystem::path& path);
std::string judgment_to_json_line(const Judgment& j);

struct VerdictCounts {
  int true_count = 0;
  int false_count = 0;
  int unparseable_count = 0;
};

struct RunSummary {
  int planned = 0;      // (statement, rule, endpoint) triples in this run
  int new_queries = 0;  // triples not already in the log
  // (rule code, model name) -> counts over the run's triples.
  std::map<std::pair<std::string, std::string>, VerdictCounts> counts;
  // All judgments covering this run's triples, for table building.
  std::vector<Judgment> judgments;
};

struct RunOptions {
  int concurrency_limit = 4;
  NegationStyle negation_style = NegationStyle::kPrefixNo;
  PromptTemplate prompt_template = PromptTemplate::standard();
};

// Queries every (statement, rule, endpoint) triple not already present in
// the log, appending judgments as they complete. Per-item failures are
// recorded as UNPARSEABLE judgments carrying the error text; only log I/O
// failures are fatal (IoError).
RunSummary run_evaluation(const std::vector<Statement>& statements,
                          const std::vector<LogicalRule>& rules,
                          const std::vector<ModelEndpoint>& endpoints,
                          const std::filesystem::path& log_path, const RunOptions& options = {});

std::string utc_timestamp_now();

}  // namespace ff
