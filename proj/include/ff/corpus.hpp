// Statement corpora: line-delimited JSON records, one accepted implication
// per line, plus prompt rendering for the eight variants.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ff/logic.hpp"

namespace ff {

struct Domain {
  enum class Kind { kMedical, kEnvironmental, kOther };

  Kind kind = Kind::kOther;
  std::string name;  // carries the label for kOther; canonical otherwise

  static Domain medical() { return {Kind::kMedical, "medical"}; }
  static Domain environmental() { return {Kind::kEnvironmental, "environmental"}; }
  static Domain other(std::string label) { return {Kind::kOther, std::move(label)}; }
  static Domain from_string(const std::string& label);

  const std::string& str() const { return name; }

  friend bool operator==(const Domain&, const Domain&) = default;
};

struct Statement {
  std::string id;
  Domain domain;
  std::string antecedent;  // affirmative clause, stored sentence-initial
  std::string consequent;  // affirmative clause, stored mid-sentence
  std::optional<std::string> antecedent_neg;  // explicit negation override
  std::optional<std::string> consequent_neg;
  std::optional<std::string> source;

  friend bool operator==(const Statement&, const Statement&) = default;
};

struct PromptRecord {
  std::string statement_id;
  std::string rule_code;
  std::string prompt_text;

  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

struct PromptTemplate {
  // Placeholders {lhs} and {rhs} are both required.
  std::string text;

  // Question plus a one-word answer-format instruction, so verdicts parse
  // deterministically.
  static PromptTemplate standard();
  // Bare question form, no answer-format instruction.
  static PromptTemplate bare();
};

// Corpus file: UTF-8 JSONL, one object per line, fields `id`, `domain`,
// `antecedent`, `consequent`, optional `antecedent_neg`, `consequent_neg`,
// `source`. Lines starting with '#' and blank lines are ignored.
// Throws ParseError (with line number), DuplicateIdError, MissingFieldError.
std::vector<Statement> load_corpus(const std::filesystem::path& path);

// Deterministic serialization; save then load is identity on the record set.
void save_corpus(const std::vector<Statement>& statements, const std::filesystem::path& path);
std::string statement_to_json_line(const Statement& s);

// One-shot importer for plain text files with one implication per line,
// "A implies B" (also accepts "=>" and "->" as the connective). Trailing
// periods are stripped; ids are generated as <id_prefix><3-digit index>.
std::vector<Statement> import_plain_text(const std::filesystem::path& path, const Domain& domain,
                                         const std::string& id_prefix);

// Fills the template with the variant's clauses. The quoted implication
// sentence is "{lhs} implies {rhs}". Throws TemplateError when a placeholder
// is missing.
PromptRecord render_prompt(const Variant& variant, const PromptTemplate& tmpl);

// |statements| x |rules| prompt records, grouped by statement, rules in the
// order given. Throws on an empty rule list; propagates apply_rule errors.
std::vector<PromptRecord> expand_corpus(const std::vector<Statement>& statements,
                                        const std::vector<LogicalRule>& rules,
                                        NegationStyle style = NegationStyle::kPrefixNo,
                                        const PromptTemplate& tmpl = PromptTemplate::standard());

// Variant-prompt file I/O (JSONL: statement_id, rule, prompt_text).
void save_prompts(const std::vector<PromptRecord>& records, const std::filesystem::path& path);
std::vector<PromptRecord> load_prompts(const std::filesystem::path& path);

}  // namespace ff
