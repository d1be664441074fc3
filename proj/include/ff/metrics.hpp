// Per-rule TRUE-fraction aggregation, the summed error column, and table
// rendering. Everything here is a pure function of the judgment log.
//
// fraction = TRUE / (TRUE + FALSE) per (rule, model); unparseable judgments
// are excluded from the denominator and reported as their own count. The
// error column sums |target - fraction| over models, target 1.0 for the
// valid rule PQ and 0.0 for the seven fallacy rules.
#pragma once

#include <string>
#include <vector>

#include "ff/eval.hpp"
#include "ff/logic.hpp"

namespace ff {

struct ResultCell {
  double fraction = 0.0;
  bool defined = false;  // false when TRUE + FALSE == 0 for the cell
  int true_count = 0;
  int false_count = 0;
  int unparseable_count = 0;
};

struct ResultTable {
  std::vector<LogicalRule> rules;               // rules present, canonical order
  std::vector<std::string> models;              // column order
  std::vector<std::vector<ResultCell>> cells;   // [rule][model]
  std::vector<double> error;                    // per rule; empty until computed

  const ResultCell& cell(int rule_idx, int model_idx) const {
    return cells[static_cast<size_t>(rule_idx)][static_cast<size_t>(model_idx)];
  }
};

// Model columns are sorted by name unless an explicit order is given (models
// absent from the log are dropped, extras appended in name order). Throws
// EmptyLogError on an empty log.
ResultTable compute_fractions(const std::vector<Judgment>& log);
ResultTable compute_fractions(const std::vector<Judgment>& log,
                              const std::vector<std::string>& model_order);

// Per-rule summed error. Throws UndefinedCellError when any cell in the
// table is undefined.
std::vector<double> compute_error_column(const ResultTable& table);

double rule_target(const LogicalRule& rule);  // 1.0 for PQ, else 0.0

enum class TableFormat { kMarkdown, kCsv };

// Markdown: canonical rule order, star prefix on the seven invalid rules,
// 2-decimal display. CSV: columns
//   rule,valid,<model...>,error,unparseable_total
// with '.' decimals at full precision. Undefined cells render as n/a (nan in
// CSV); a missing error column renders the same way.
std::string render_table(const ResultTable& table, TableFormat format);

// Bundled reference results: published TRUE fractions of four models over
// 100-statement corpora, plus the error column as printed at publication.
struct GoldenTable {
  std::string name;  // "medical" or "environmental"
  std::vector<std::string> models;
  std::vector<std::vector<double>> fractions;  // [8 rules][models]
  std::vector<double> printed_error;           // as published, one per rule
};

const GoldenTable& golden_table(const std::string& name);  // throws Error on unknown name
ResultTable golden_result_table(const GoldenTable& golden);

// Published fractions beside the recomputed error sums and the printed error
// column; cells where the two disagree beyond 0.005 are flagged.
std::string golden_report(const GoldenTable& golden);

// Shortest round-trip decimal form, '.' separator.
std::string format_double_full(double value);

}  // namespace ff
