#include "ff/logic.hpp"

#include <cctype>

#include "ff/corpus.hpp"
#include "ff/errors.hpp"

namespace ff {
namespace {

constexpr std::array<std::string_view, 8> kCodes = {"PQ", "PnQ", "nPQ", "nPnQ",
                                                    "QP", "QnP", "nQP", "nQnP"};
constexpr std::array<std::string_view, 8> kDisplayNames = {
    "P=>Q", "P=>~Q", "~P=>Q", "~P=>~Q", "Q=>P", "Q=>~P", "~Q=>P", "~Q=>~P"};

constexpr LogicalRule rule_at(int rank) {
  // Ranks 0..3 keep P on the left, 4..7 put Q there; within each block the
  // two negation flags count up in (lhs, rhs) binary order.
  return LogicalRule{rank < 4 ? Side::kP : Side::kQ, ((rank & 2) != 0), ((rank & 1) != 0)};
}

bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

}  // namespace

const std::array<LogicalRule, 8>& enumerate_rules() {
  static const std::array<LogicalRule, 8> rules = {
      rule_at(0), rule_at(1), rule_at(2), rule_at(3),
      rule_at(4), rule_at(5), rule_at(6), rule_at(7)};
  return rules;
}

int rule_rank(const LogicalRule& rule) {
  int rank = (rule.antecedent_side == Side::kQ) ? 4 : 0;
  if (rule.lhs_negated) rank += 2;
  if (rule.rhs_negated) rank += 1;
  return rank;
}

std::string_view LogicalRule::code() const { return kCodes[static_cast<size_t>(rule_rank(*this))]; }

std::string LogicalRule::display_name() const {
  return std::string(kDisplayNames[static_cast<size_t>(rule_rank(*this))]);
}

Validity LogicalRule::validity() const {
  const bool is_pq = antecedent_side == Side::kP && !lhs_negated && !rhs_negated;
  return is_pq ? Validity::kValid : Validity::kInvalid;
}

std::optional<LogicalRule> rule_from_code(std::string_view code) {
  for (size_t i = 0; i < kCodes.size(); ++i) {
    if (kCodes[i] == code) return rule_at(static_cast<int>(i));
  }
  return std::nullopt;
}

std::string decapitalize(std::string_view text) {
  std::string out(text);
  // Two leading uppercase letters read as an acronym; leave those alone.
  if (out.size() >= 2 && is_upper(out[0]) && is_upper(out[1])) return out;
  if (!out.empty()) out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
  return out;
}

std::string render_negation(std::string_view clause, NegationStyle style,
                            const std::optional<std::string>& explicit_override) {
  if (clause.empty()) throw EmptyClauseError("render_negation: empty clause");
  std::string out;
  if (explicit_override.has_value()) {
    out = *explicit_override;
  } else {
    const char* prefix = (style == NegationStyle::kPrefixNo) ? "no " : "not ";
    out = prefix + decapitalize(clause);
  }
  if (out.empty()) throw EmptyClauseError("render_negation: rendered clause is empty");
  return out;
}

Variant apply_rule(const Statement& statement, const LogicalRule& rule, NegationStyle style) {
  struct Atom {
    const std::string* text;
    const std::optional<std::string>* neg_override;
    bool is_antecedent;
  };
  const Atom antecedent{&statement.antecedent, &statement.antecedent_neg, true};
  const Atom consequent{&statement.consequent, &statement.consequent_neg, false};

  const Atom& lhs_atom = (rule.antecedent_side == Side::kP) ? antecedent : consequent;
  const Atom& rhs_atom = (rule.antecedent_side == Side::kP) ? consequent : antecedent;

  auto render = [&](const Atom& atom, bool negated, bool rhs_slot) -> std::string {
    if (atom.text->empty()) throw EmptyClauseError("apply_rule: statement clause is empty");
    if (negated) return render_negation(*atom.text, style, *atom.neg_override);
    // Antecedents are stored sentence-initial; pulled into the right-hand
    // slot they lose their leading capital.
    if (rhs_slot && atom.is_antecedent) return decapitalize(*atom.text);
    return *atom.text;
  };

  Variant v;
  v.statement_id = statement.id;
  v.rule = rule;
  v.lhs_text = render(lhs_atom, rule.lhs_negated, /*rhs_slot=*/false);
  v.rhs_text = render(rhs_atom, rule.rhs_negated, /*rhs_slot=*/true);
  v.validity = rule.validity();
  if (v.lhs_text.empty() || v.rhs_text.empty()) {
    throw EmptyClauseError("apply_rule: rendered clause is empty");
  }
  return v;
}

}  // namespace ff
