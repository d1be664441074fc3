#include "ff/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ff/errors.hpp"

namespace ff {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string require_string_field(const ordered_json& obj, const char* key, int line) {
  if (!obj.contains(key)) {
    throw MissingFieldError("missing field '" + std::string(key) + "' on line " +
                            std::to_string(line));
  }
  const auto& v = obj.at(key);
  if (!v.is_string()) {
    throw ParseError("field '" + std::string(key) + "' must be a string", line);
  }
  return v.get<std::string>();
}

std::optional<std::string> optional_string_field(const ordered_json& obj, const char* key,
                                                 int line) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  if (!obj.at(key).is_string()) {
    throw ParseError("field '" + std::string(key) + "' must be a string", line);
  }
  return obj.at(key).get<std::string>();
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;  // blank
}

std::string trim(std::string_view sv) {
  size_t b = 0, e = sv.size();
  while (b < e && std::isspace(static_cast<unsigned char>(sv[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(sv[e - 1]))) --e;
  return std::string(sv.substr(b, e - b));
}

void replace_all(std::string& text, std::string_view what, std::string_view with) {
  size_t pos = 0;
  while ((pos = text.find(what, pos)) != std::string::npos) {
    text.replace(pos, what.size(), with);
    pos += with.size();
  }
}

}  // namespace

Domain Domain::from_string(const std::string& label) {
  if (label == "medical") return medical();
  if (label == "environmental") return environmental();
  return other(label);
}

PromptTemplate PromptTemplate::standard() {
  return PromptTemplate{
      "Is the statement \"{lhs} implies {rhs}\" correct? "
      "Respond with exactly one word: TRUE or FALSE."};
}

PromptTemplate PromptTemplate::bare() {
  return PromptTemplate{"Is the statement \"{lhs} implies {rhs}\" correct?"};
}

std::vector<Statement> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw IoError("cannot open corpus file '" + path.string() + "'");
  }
  std::vector<Statement> out;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(std::string("malformed JSON: ") + ex.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("record is not a JSON object", line_no);

    Statement s;
    s.id = require_string_field(obj, "id", line_no);
    s.domain = Domain::from_string(require_string_field(obj, "domain", line_no));
    s.antecedent = require_string_field(obj, "antecedent", line_no);
    s.consequent = require_string_field(obj, "consequent", line_no);
    s.antecedent_neg = optional_string_field(obj, "antecedent_neg", line_no);
    s.consequent_neg = optional_string_field(obj, "consequent_neg", line_no);
    s.source = optional_string_field(obj, "source", line_no);

    if (s.antecedent.empty()) throw ParseError("empty antecedent", line_no);
    if (s.consequent.empty()) throw ParseError("empty consequent", line_no);
    if (!seen_ids.insert(s.id).second) {
      throw DuplicateIdError("duplicate statement id '" + s.id + "' on line " +
                             std::to_string(line_no));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string statement_to_json_line(const Statement& s) {
  ordered_json obj;
  obj["id"] = s.id;
  obj["domain"] = s.domain.str();
  obj["antecedent"] = s.antecedent;
  obj["consequent"] = s.consequent;
  if (s.antecedent_neg) obj["antecedent_neg"] = *s.antecedent_neg;
  if (s.consequent_neg) obj["consequent_neg"] = *s.consequent_neg;
  if (s.source) obj["source"] = *s.source;
  return obj.dump();
}

void save_corpus(const std::vector<Statement>& statements, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out.is_open()) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& s : statements) {
    out << statement_to_json_line(s) << "\n";
  }
  if (!out.good()) throw IoError("failed writing corpus to '" + path.string() + "'");
}

std::vector<Statement> import_plain_text(const std::filesystem::path& path, const Domain& domain,
                                         const std::string& id_prefix) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open '" + path.string() + "'");

  // Connectives in rough order of specificity; the earliest match in the
  // line wins when several appear.
  static const std::array<std::string_view, 5> kConnectives = {
      " $\\implies$ ", " implies ", " => ", " -> ", " ⟹ "};

  std::vector<Statement> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;

    size_t best_pos = std::string::npos;
    std::string_view best_sep;
    std::string lowered = line;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto sep : kConnectives) {
      std::string sep_lower(sep);
      std::transform(sep_lower.begin(), sep_lower.end(), sep_lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      const size_t pos = lowered.find(sep_lower);
      if (pos != std::string::npos && pos < best_pos) {
        best_pos = pos;
        best_sep = sep;
      }
    }
    if (best_pos == std::string::npos) {
      throw ParseError("no implication connective found", line_no);
    }

    std::string lhs = trim(std::string_view(line).substr(0, best_pos));
    std::string rhs = trim(std::string_view(line).substr(best_pos + best_sep.size()));
    while (!rhs.empty() && (rhs.back() == '.' || rhs.back() == '\r')) rhs.pop_back();
    rhs = trim(rhs);
    if (lhs.empty() || rhs.empty()) {
      throw ParseError("implication with an empty side", line_no);
    }

    Statement s;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "%03d", static_cast<int>(out.size()) + 1);
    s.id = id_prefix + idbuf;
    s.domain = domain;
    s.antecedent = std::move(lhs);
    s.consequent = std::move(rhs);
    out.push_back(std::move(s));
  }
  return out;
}

PromptRecord render_prompt(const Variant& variant, const PromptTemplate& tmpl) {
  if (tmpl.text.find("{lhs}") == std::string::npos) {
    throw TemplateError("prompt template is missing the {lhs} placeholder");
  }
  if (tmpl.text.find("{rhs}") == std::string::npos) {
    throw TemplateError("prompt template is missing the {rhs} placeholder");
  }
  std::string text = tmpl.text;
  replace_all(text, "{lhs}", variant.lhs_text);
  replace_all(text, "{rhs}", variant.rhs_text);

  PromptRecord rec;
  rec.statement_id = variant.statement_id;
  rec.rule_code = std::string(variant.rule.code());
  rec.prompt_text = std::move(text);
  return rec;
}

std::vector<PromptRecord> expand_corpus(const std::vector<Statement>& statements,
                                        const std::vector<LogicalRule>& rules,
                                        NegationStyle style, const PromptTemplate& tmpl) {
  if (rules.empty()) throw Error("expand_corpus: empty rule list");
  std::vector<LogicalRule> ordered = rules;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const LogicalRule& a, const LogicalRule& b) {
                     return rule_rank(a) < rule_rank(b);
                   });
  std::vector<PromptRecord> out;
  out.reserve(statements.size() * ordered.size());
  for (const auto& s : statements) {
    for (const auto& rule : ordered) {
      out.push_back(render_prompt(apply_rule(s, rule, style), tmpl));
    }
  }
  return out;
}

void save_prompts(const std::vector<PromptRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out.is_open()) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& r : records) {
    ordered_json obj;
    obj["statement_id"] = r.statement_id;
    obj["rule"] = r.rule_code;
    obj["prompt_text"] = r.prompt_text;
    out << obj.dump() << "\n";
  }
  if (!out.good()) throw IoError("failed writing prompts to '" + path.string() + "'");
}

std::vector<PromptRecord> load_prompts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open '" + path.string() + "'");
  std::vector<PromptRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(std::string("malformed JSON: ") + ex.what(), line_no);
    }
    PromptRecord rec;
    rec.statement_id = require_string_field(obj, "statement_id", line_no);
    rec.rule_code = require_string_field(obj, "rule", line_no);
    rec.prompt_text = require_string_field(obj, "prompt_text", line_no);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace ff
