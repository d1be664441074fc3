#include "ff/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "ff/errors.hpp"

namespace ff {
namespace {

std::string format_2dp(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::string starred_name(const LogicalRule& rule) {
  std::string name = rule.display_name();
  return rule.validity() == Validity::kValid ? name : "*" + name;
}

}  // namespace

std::string format_double_full(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

double rule_target(const LogicalRule& rule) {
  return rule.validity() == Validity::kValid ? 1.0 : 0.0;
}

ResultTable compute_fractions(const std::vector<Judgment>& log) {
  return compute_fractions(log, {});
}

ResultTable compute_fractions(const std::vector<Judgment>& log,
                              const std::vector<std::string>& model_order) {
  if (log.empty()) throw EmptyLogError("judgment log is empty");

  std::set<std::string> rule_codes;
  std::set<std::string> models_seen;
  for (const auto& j : log) {
    rule_codes.insert(j.rule_code);
    models_seen.insert(j.model);
  }

  ResultTable table;
  for (const auto& rule : enumerate_rules()) {
    if (rule_codes.count(std::string(rule.code()))) table.rules.push_back(rule);
  }
  for (const auto& name : model_order) {
    if (models_seen.count(name)) {
      table.models.push_back(name);
      models_seen.erase(name);
    }
  }
  for (const auto& name : models_seen) table.models.push_back(name);  // already sorted

  std::map<std::string, int> rule_idx;
  std::map<std::string, int> model_idx;
  for (size_t i = 0; i < table.rules.size(); ++i) {
    rule_idx[std::string(table.rules[i].code())] = static_cast<int>(i);
  }
  for (size_t i = 0; i < table.models.size(); ++i) {
    model_idx[table.models[i]] = static_cast<int>(i);
  }

  table.cells.assign(table.rules.size(), std::vector<ResultCell>(table.models.size()));
  for (const auto& j : log) {
    auto& cell = table.cells[static_cast<size_t>(rule_idx.at(j.rule_code))]
                            [static_cast<size_t>(model_idx.at(j.model))];
    switch (j.verdict) {
      case Verdict::kTrue:
        ++cell.true_count;
        break;
      case Verdict::kFalse:
        ++cell.false_count;
        break;
      case Verdict::kUnparseable:
        ++cell.unparseable_count;
        break;
    }
  }
  for (auto& row : table.cells) {
    for (auto& cell : row) {
      const int denom = cell.true_count + cell.false_count;
      cell.defined = denom > 0;
      cell.fraction = cell.defined ? static_cast<double>(cell.true_count) / denom : 0.0;
    }
  }
  return table;
}

std::vector<double> compute_error_column(const ResultTable& table) {
  std::vector<double> error;
  error.reserve(table.rules.size());
  for (size_t r = 0; r < table.rules.size(); ++r) {
    const double target = rule_target(table.rules[r]);
    double sum = 0.0;
    for (size_t m = 0; m < table.models.size(); ++m) {
      const auto& cell = table.cells[r][m];
      if (!cell.defined) {
        throw UndefinedCellError("cell (" + std::string(table.rules[r].code()) + ", " +
                                 table.models[m] + ") has no parseable judgments");
      }
      sum += std::abs(target - cell.fraction);
    }
    error.push_back(sum);
  }
  return error;
}

std::string render_table(const ResultTable& table, TableFormat format) {
  std::ostringstream out;
  const bool has_error = table.error.size() == table.rules.size();

  if (format == TableFormat::kMarkdown) {
    out << "| Rule |";
    for (const auto& m : table.models) out << ' ' << m << " |";
    out << " Error | Unparseable |\n";
    out << "|---|";
    for (size_t i = 0; i < table.models.size(); ++i) out << "---|";
    out << "---|---|\n";
    for (size_t r = 0; r < table.rules.size(); ++r) {
      out << "| " << starred_name(table.rules[r]) << " |";
      int unparseable_total = 0;
      for (size_t m = 0; m < table.models.size(); ++m) {
        const auto& cell = table.cells[r][m];
        unparseable_total += cell.unparseable_count;
        out << ' ' << (cell.defined ? format_2dp(cell.fraction) : "n/a") << " |";
      }
      out << ' ' << (has_error ? format_2dp(table.error[r]) : "n/a") << " | "
          << unparseable_total << " |\n";
    }
    return out.str();
  }

  out << "rule,valid";
  for (const auto& m : table.models) out << ',' << m;
  out << ",error,unparseable_total\n";
  for (size_t r = 0; r < table.rules.size(); ++r) {
    const auto& rule = table.rules[r];
    out << rule.code() << ',' << (rule.validity() == Validity::kValid ? 1 : 0);
    int unparseable_total = 0;
    for (size_t m = 0; m < table.models.size(); ++m) {
      const auto& cell = table.cells[r][m];
      unparseable_total += cell.unparseable_count;
      out << ',' << (cell.defined ? format_double_full(cell.fraction) : "nan");
    }
    out << ',' << (has_error ? format_double_full(table.error[r]) : "nan") << ','
        << unparseable_total << "\n";
  }
  return out.str();
}

namespace {

GoldenTable make_medical() {
  GoldenTable t;
  t.name = "medical";
  t.models = {"GPT-2 (774M)", "LLaMA 3 (8B)", "Gemma 3 (12B)", "Mistral (7B)"};
  t.fractions = {
      {0.89, 0.96, 0.99, 0.98},  // PQ
      {0.43, 0.10, 0.06, 0.12},  // PnQ
      {0.48, 0.43, 0.39, 0.41},  // nPQ
      {0.67, 0.41, 0.43, 0.56},  // nPnQ
      {0.64, 0.54, 0.59, 0.41},  // QP
      {0.42, 0.32, 0.27, 0.29},  // QnP
      {0.34, 0.31, 0.30, 0.21},  // nQP
      {0.63, 0.53, 0.59, 0.49},  // nQnP
  };
  t.printed_error = {0.18, 0.71, 1.71, 2.17, 2.18, 1.30, 1.16, 2.14};
  return t;
}

GoldenTable make_environmental() {
  GoldenTable t;
  t.name = "environmental";
  t.models = {"GPT-2 (774M)", "LLaMA 3 (8B)", "Gemma 3 (12B)", "Mistral (7B)"};
  t.fractions = {
      {0.76, 0.94, 0.99, 0.97},  // PQ
      {0.42, 0.15, 0.05, 0.11},  // PnQ
      {0.53, 0.56, 0.50, 0.52},  // nPQ
      {0.64, 0.04, 0.05, 0.13},  // nPnQ
      {0.65, 0.66, 0.62, 0.71},  // QP
      {0.50, 0.29, 0.18, 0.38},  // QnP
      {0.51, 0.30, 0.22, 0.25},  // nQP
      {0.67, 0.36, 0.26, 0.35},  // nQnP
  };
  t.printed_error = {0.34, 0.74, 2.11, 0.86, 2.54, 1.35, 1.28, 1.64};
  return t;
}

}  // namespace

const GoldenTable& golden_table(const std::string& name) {
  static const GoldenTable medical = make_medical();
  static const GoldenTable environmental = make_environmental();
  if (name == "medical") return medical;
  if (name == "environmental") return environmental;
  throw Error("unknown golden table '" + name + "' (expected 'medical' or 'environmental')");
}

ResultTable golden_result_table(const GoldenTable& golden) {
  ResultTable table;
  table.rules.assign(enumerate_rules().begin(), enumerate_rules().end());
  table.models = golden.models;
  table.cells.assign(table.rules.size(), std::vector<ResultCell>(table.models.size()));
  for (size_t r = 0; r < table.rules.size(); ++r) {
    for (size_t m = 0; m < table.models.size(); ++m) {
      auto& cell = table.cells[r][m];
      cell.fraction = golden.fractions[r][m];
      cell.defined = true;
    }
  }
  return table;
}

std::string golden_report(const GoldenTable& golden) {
  ResultTable table = golden_result_table(golden);
  const std::vector<double> recomputed = compute_error_column(table);

  std::ostringstream out;
  out << "Golden reference table: " << golden.name << "\n";
  out << "| Rule |";
  for (const auto& m : golden.models) out << ' ' << m << " |";
  out << " Error (recomputed) | Error (published) | |\n";
  out << "|---|";
  for (size_t i = 0; i < golden.models.size() + 3; ++i) out << "---|";
  out << "\n";

  int discrepancies = 0;
  for (size_t r = 0; r < table.rules.size(); ++r) {
    out << "| " << starred_name(table.rules[r]) << " |";
    for (size_t m = 0; m < golden.models.size(); ++m) {
      out << ' ' << format_2dp(golden.fractions[r][m]) << " |";
    }
    const double delta = std::abs(recomputed[r] - golden.printed_error[r]);
    const bool mismatch = delta > 0.005;
    if (mismatch) ++discrepancies;
    out << ' ' << format_2dp(recomputed[r]) << " | " << format_2dp(golden.printed_error[r])
        << " | " << (mismatch ? "MISMATCH" : "") << " |\n";
  }
  out << "\n";
  if (discrepancies > 0) {
    out << discrepancies << " published error cell(s) disagree with the summation rule "
        << "|target - fraction| summed over models; the recomputed column is authoritative.\n";
  } else {
    out << "All published error cells match the recomputed sums.\n";
  }
  return out.str();
}

}  // namespace ff
