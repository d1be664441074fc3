#include "ff/eval.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ff/errors.hpp"

namespace ff {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool is_transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

bool is_auth_status(int status) { return status == 401 || status == 403; }

json build_request_body(const ModelEndpoint& endpoint, const std::string& prompt_text) {
  json body;
  body["model"] = endpoint.model_id;
  if (endpoint.api == ApiKind::kChat) {
    body["messages"] = json::array({
        json{{"role", "system"}, {"content", endpoint.system_prompt}},
        json{{"role", "user"}, {"content", prompt_text}},
    });
  } else {
    body["prompt"] = prompt_text;
  }
  body["temperature"] = endpoint.temperature;
  return body;
}

std::string extract_content(const ModelEndpoint& endpoint, const std::string& body) {
  json payload;
  try {
    payload = json::parse(body);
  } catch (const json::exception& ex) {
    throw ProtocolError(std::string("response body is not JSON: ") + ex.what());
  }
  try {
    const auto& choice = payload.at("choices").at(0);
    if (endpoint.api == ApiKind::kChat) {
      return choice.at("message").at("content").get<std::string>();
    }
    return choice.at("text").get<std::string>();
  } catch (const json::exception& ex) {
    throw ProtocolError(std::string("response body has no completion choice: ") + ex.what());
  }
}

struct WorkItem {
  std::string statement_id;
  std::string rule_code;
  std::string prompt_text;
  size_t endpoint_index = 0;
};

}  // namespace

std::string_view verdict_to_string(Verdict v) {
  switch (v) {
    case Verdict::kTrue:
      return "TRUE";
    case Verdict::kFalse:
      return "FALSE";
    case Verdict::kUnparseable:
      return "UNPARSEABLE";
  }
  return "UNPARSEABLE";
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "TRUE") return Verdict::kTrue;
  if (s == "FALSE") return Verdict::kFalse;
  if (s == "UNPARSEABLE") return Verdict::kUnparseable;
  throw ParseError("unknown verdict '" + std::string(s) + "'", 0);
}

Verdict parse_verdict(std::string_view raw) {
  auto is_word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  auto find_token = [&](std::string_view token) -> size_t {
    for (size_t i = 0; i + token.size() <= raw.size(); ++i) {
      bool match = true;
      for (size_t k = 0; k < token.size(); ++k) {
        if (std::tolower(static_cast<unsigned char>(raw[i + k])) != token[k]) {
          match = false;
          break;
        }
      }
      if (!match) continue;
      const bool left_ok = (i == 0) || !is_word_char(raw[i - 1]);
      const size_t end = i + token.size();
      const bool right_ok = (end == raw.size()) || !is_word_char(raw[end]);
      if (left_ok && right_ok) return i;
    }
    return std::string_view::npos;
  };

  const size_t true_pos = find_token("true");
  const size_t false_pos = find_token("false");
  if (true_pos == std::string_view::npos && false_pos == std::string_view::npos) {
    return Verdict::kUnparseable;
  }
  return true_pos < false_pos ? Verdict::kTrue : Verdict::kFalse;
}

std::vector<ModelEndpoint> load_endpoints(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open endpoints config '" + path.string() + "'");
  json root;
  try {
    in >> root;
  } catch (const json::exception& ex) {
    throw ParseError(std::string("endpoints config is not valid JSON: ") + ex.what(), 0);
  }
  if (!root.is_array()) {
    throw ParseError("endpoints config must be a JSON array", 0);
  }
  std::vector<ModelEndpoint> out;
  std::set<std::string> names;
  for (const auto& obj : root) {
    ModelEndpoint ep;
    try {
      ep.name = obj.at("name").get<std::string>();
      ep.base_url = obj.at("base_url").get<std::string>();
      ep.model_id = obj.at("model_id").get<std::string>();
    } catch (const json::exception&) {
      throw MissingFieldError("endpoint entries need 'name', 'base_url' and 'model_id'");
    }
    ep.temperature = obj.value("temperature", 0.0);
    ep.max_retries = obj.value("max_retries", 3);
    ep.timeout_seconds = obj.value("timeout", 30.0);
    ep.backoff_ms = obj.value("backoff_ms", 250);
    ep.system_prompt = obj.value("system_prompt", std::string(kDefaultSystemPrompt));
    const std::string api = obj.value("api", std::string("chat"));
    if (api == "chat") {
      ep.api = ApiKind::kChat;
    } else if (api == "completion") {
      ep.api = ApiKind::kCompletion;
    } else {
      throw ParseError("endpoint api must be 'chat' or 'completion', got '" + api + "'", 0);
    }
    if (ep.temperature < 0) throw ParseError("endpoint temperature must be >= 0", 0);
    if (!names.insert(ep.name).second) {
      throw DuplicateIdError("duplicate endpoint name '" + ep.name + "'");
    }
    out.push_back(std::move(ep));
  }
  return out;
}

std::string query_model(const ModelEndpoint& endpoint, const std::string& prompt_text,
                        int* attempts_out) {
  httplib::Client client(endpoint.base_url);
  const auto timeout = std::chrono::duration<double>(endpoint.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));

  httplib::Headers headers;
  if (const char* key = std::getenv(kApiKeyEnvVar); key != nullptr && key[0] != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const char* path =
      endpoint.api == ApiKind::kChat ? "/v1/chat/completions" : "/v1/completions";
  const std::string body = build_request_body(endpoint, prompt_text).dump();

  const int total_attempts = endpoint.max_retries + 1;
  int delay_ms = endpoint.backoff_ms;
  std::string last_error;
  for (int attempt = 1; attempt <= total_attempts; ++attempt) {
    if (attempts_out) *attempts_out = attempt;
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
    } else if (is_auth_status(res->status)) {
      throw AuthError("authentication rejected by '" + endpoint.name + "' (HTTP " +
                      std::to_string(res->status) + ")");
    } else if (res->status >= 200 && res->status < 300) {
      return extract_content(endpoint, res->body);
    } else if (!is_transient_status(res->status)) {
      throw ProtocolError("endpoint '" + endpoint.name + "' returned HTTP " +
                          std::to_string(res->status));
    } else {
      last_error = "HTTP " + std::to_string(res->status);
    }
    if (attempt < total_attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      delay_ms = std::min(delay_ms * 2, 8000);
    }
  }
  throw TransportError("endpoint '" + endpoint.name + "' unreachable after " +
                       std::to_string(total_attempts) + " attempts: " + last_error);
}

std::string judgment_to_json_line(const Judgment& j) {
  ordered_json obj;
  obj["statement_id"] = j.statement_id;
  obj["rule"] = j.rule_code;
  obj["model"] = j.model;
  obj["verdict"] = std::string(verdict_to_string(j.verdict));
  obj["raw_response"] = j.raw_response;
  obj["timestamp"] = j.timestamp;
  obj["attempts"] = j.attempts;
  return obj.dump();
}

std::vector<Judgment> load_judgment_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open judgment log '" + path.string() + "'");
  std::vector<Judgment> out;
  std::string line;
  int line_no = 0;
  int last_content_line = 0;
  std::optional<ParseError> pending;
  while (std::getline(in, line)) {
    ++line_no;
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    // A parse failure that was not on the final content line is corruption.
    if (pending) throw *pending;
    last_content_line = line_no;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
      Judgment j;
      j.statement_id = obj.at("statement_id").get<std::string>();
      j.rule_code = obj.at("rule").get<std::string>();
      j.model = obj.at("model").get<std::string>();
      j.verdict = verdict_from_string(obj.at("verdict").get<std::string>());
      j.raw_response = obj.at("raw_response").get<std::string>();
      j.timestamp = obj.at("timestamp").get<std::string>();
      j.attempts = obj.at("attempts").get<int>();
      out.push_back(std::move(j));
    } catch (const nlohmann::json::exception& ex) {
      // Possibly a torn final line from an interrupted writer; decided once
      // we know whether anything follows it.
      pending = ParseError(std::string("malformed judgment: ") + ex.what(), line_no);
    }
  }
  (void)last_content_line;
  return out;  // a pending failure on the very last line is dropped
}

void save_judgment_log(const std::vector<Judgment>& judgments,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out.is_open()) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& j : judgments) {
    out << judgment_to_json_line(j) << "\n";
  }
  if (!out.good()) throw IoError("failed writing judgment log to '" + path.string() + "'");
}

std::string utc_timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

RunSummary run_evaluation(const std::vector<Statement>& statements,
                          const std::vector<LogicalRule>& rules,
                          const std::vector<ModelEndpoint>& endpoints,
                          const std::filesystem::path& log_path, const RunOptions& options) {
  if (options.concurrency_limit < 1) throw Error("concurrency_limit must be >= 1");

  using Key = std::tuple<std::string, std::string, std::string>;  // (statement, rule, model)

  std::vector<Judgment> existing;
  if (std::filesystem::exists(log_path)) {
    existing = load_judgment_log(log_path);
  }
  std::set<Key> logged;
  for (const auto& j : existing) {
    logged.insert({j.statement_id, j.rule_code, j.model});
  }

  // Prompts are endpoint-independent; render once per (statement, rule).
  const auto prompts =
      expand_corpus(statements, rules, options.negation_style, options.prompt_template);

  RunSummary summary;
  std::set<Key> planned;
  std::vector<WorkItem> todo;
  for (size_t e = 0; e < endpoints.size(); ++e) {
    for (const auto& p : prompts) {
      Key key{p.statement_id, p.rule_code, endpoints[e].name};
      planned.insert(key);
      ++summary.planned;
      if (logged.count(key) == 0) {
        todo.push_back(WorkItem{p.statement_id, p.rule_code, p.prompt_text, e});
      }
    }
  }
  summary.new_queries = static_cast<int>(todo.size());

  std::ofstream log_out(log_path, std::ios::out | std::ios::app);
  if (!log_out.is_open()) throw IoError("cannot open run log '" + log_path.string() + "'");

  std::mutex sink_mutex;  // guards log_out and new_judgments
  std::vector<Judgment> new_judgments;
  std::atomic<size_t> next_item{0};
  std::atomic<bool> io_failed{false};

  auto worker = [&]() {
    while (!io_failed.load()) {
      const size_t idx = next_item.fetch_add(1);
      if (idx >= todo.size()) return;
      const WorkItem& item = todo[idx];
      const ModelEndpoint& endpoint = endpoints[item.endpoint_index];

      Judgment j;
      j.statement_id = item.statement_id;
      j.rule_code = item.rule_code;
      j.model = endpoint.name;
      int attempts = 0;
      try {
        const std::string raw = query_model(endpoint, item.prompt_text, &attempts);
        j.raw_response = raw;
        j.verdict = parse_verdict(raw);
      } catch (const Error& ex) {
        j.raw_response = std::string("[error] ") + ex.what();
        j.verdict = Verdict::kUnparseable;
      }
      j.attempts = attempts;
      j.timestamp = utc_timestamp_now();

      std::lock_guard<std::mutex> lock(sink_mutex);
      log_out << judgment_to_json_line(j) << "\n";
      log_out.flush();
      if (!log_out.good()) {
        io_failed.store(true);
        return;
      }
      new_judgments.push_back(std::move(j));
    }
  };

  const int thread_count = std::min(
      options.concurrency_limit, static_cast<int>(std::max<size_t>(todo.size(), 1)));
  std::vector<std::thread> pool;
  pool.reserve(thread_count);
  for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  if (io_failed.load()) {
    throw IoError("failed appending to run log '" + log_path.string() + "'");
  }

  // Aggregate over the run's triples only; the log may hold other runs too.
  auto tally = [&](const Judgment& j) {
    Key key{j.statement_id, j.rule_code, j.model};
    if (planned.count(key) == 0) return;
    auto& c = summary.counts[{j.rule_code, j.model}];
    switch (j.verdict) {
      case Verdict::kTrue:
        ++c.true_count;
        break;
      case Verdict::kFalse:
        ++c.false_count;
        break;
      case Verdict::kUnparseable:
        ++c.unparseable_count;
        break;
    }
    summary.judgments.push_back(j);
  };
  for (const auto& j : existing) tally(j);
  for (const auto& j : new_judgments) tally(j);

  return summary;
}

}  // namespace ff
