// ============================================================================
// ff/logic.hpp — the eight-rule implication taxonomy and variant derivation
// ============================================================================
//
// An accepted statement "P implies Q" has eight polarity arrangements,
// indexed by which atom sits left of "implies" and whether each side is
// negated:
//
//   code   arrangement        left atom  left neg  right neg
//   PQ     P  => Q            P          no        no      (valid)
//   PnQ    P  => ~Q           P          no        yes
//   nPQ    ~P => Q            P          yes       no
//   nPnQ   ~P => ~Q           P          yes       yes
//   QP     Q  => P            Q          no        no
//   QnP    Q  => ~P           Q          no        yes
//   nQP    ~Q => P            Q          yes       no
//   nQnP   ~Q => ~P           Q          yes       yes
//
// Only PQ is scored valid. That includes the contrapositive nQnP: the
// statements this taxonomy is applied to are causal/probabilistic claims,
// not material implications, so reversing them is scored as a fallacy.
//
// Negation is rendered at the surface level ("no <clause>" by default,
// "not <clause>" as an alternative), with optional per-statement override
// text for clauses where template negation reads badly. The first letter
// of a clause is lowercased when it is pulled into a mid-sentence slot,
// unless it starts like an acronym ("TBI" stays "TBI").
// ============================================================================
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace ff {

enum class Side { kP, kQ };
enum class Validity { kValid, kInvalid };
enum class NegationStyle { kPrefixNo, kPrefixNot };

struct LogicalRule {
  Side antecedent_side = Side::kP;  // which original atom appears left of "implies"
  bool lhs_negated = false;
  bool rhs_negated = false;

  std::string_view code() const;          // canonical code, e.g. "nPnQ"
  std::string display_name() const;       // e.g. "~P=>~Q"
  Validity validity() const;              // kValid iff *this is PQ

  friend bool operator==(const LogicalRule&, const LogicalRule&) = default;
};

// All 8 rules in canonical order: PQ, PnQ, nPQ, nPnQ, QP, QnP, nQP, nQnP.
const std::array<LogicalRule, 8>& enumerate_rules();

// Canonical code -> rule; nullopt for unknown codes.
std::optional<LogicalRule> rule_from_code(std::string_view code);

// Position of a rule in the canonical order (0..7).
int rule_rank(const LogicalRule& rule);

struct Statement;  // corpus.hpp

struct Variant {
  std::string statement_id;
  LogicalRule rule;
  std::string lhs_text;
  std::string rhs_text;
  Validity validity = Validity::kInvalid;
};

// Surface negation of one clause. Returns `explicit_override` when provided;
// otherwise prefixes per style, lowercasing the clause's first letter unless
// it opens like an acronym. Throws EmptyClauseError when the input clause or
// the produced text is empty. Not idempotent; never called twice by any rule.
std::string render_negation(std::string_view clause, NegationStyle style,
                            const std::optional<std::string>& explicit_override = std::nullopt);

// Instantiates `statement` under `rule`. The identity rule PQ reproduces the
// stored clauses byte for byte. An un-negated antecedent moved into the
// right-hand slot is de-capitalized (it was stored sentence-initial).
// Throws EmptyClauseError when a rendered clause comes out empty.
Variant apply_rule(const Statement& statement, const LogicalRule& rule,
                   NegationStyle style = NegationStyle::kPrefixNo);

// Lowercases the first letter of `text` unless the text opens with two
// uppercase letters (acronym heuristic). Exposed for reuse and tests.
std::string decapitalize(std::string_view text);

}  // namespace ff
