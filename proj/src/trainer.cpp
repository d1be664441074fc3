#include "ff/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "ff/corpus.hpp"
#include "ff/errors.hpp"
#include "ff/metrics.hpp"  // format_double_full
#include <nlohmann/json.hpp>

namespace ff {

namespace {

// Overflow-safe logistic: never exponentiates a positive score.
double sigmoid(double s) {
  if (s >= 0.0) {
    return 1.0 / (1.0 + std::exp(-s));
  }
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double dot(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

int max_index(const std::vector<ToyDataset::Pair>& pairs, int ToyDataset::Pair::* field) {
  int best = -1;
  for (const auto& pair : pairs) best = std::max(best, pair.*field);
  return best;
}

}  // namespace

int ToyDataset::premise_count() const { return max_index(pairs, &Pair::premise) + 1; }
int ToyDataset::consequent_count() const { return max_index(pairs, &Pair::consequent) + 1; }

void ToyDataset::validate() const {
  if (pairs.empty()) throw Error("dataset has no pairs");
  std::set<int> seen_premises;
  for (const auto& pair : pairs) {
    if (pair.premise < 0 || pair.consequent < 0) {
      throw Error("dataset pair '" + pair.label + "' has a negative atom index");
    }
    if (!seen_premises.insert(pair.premise).second) {
      throw Error("dataset premise atom " + std::to_string(pair.premise) +
                  " appears in more than one pair; premises must be separable");
    }
  }
}

ToyDataset synthesize_dataset(int n_pairs, std::uint64_t /*seed*/) {
  if (n_pairs < 1) throw Error("dataset needs at least one pair");
  ToyDataset ds;
  ds.pairs.reserve(static_cast<size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) {
    char label[16];
    std::snprintf(label, sizeof(label), "p%03d", i + 1);
    ds.pairs.push_back({i, i, label});
  }
  return ds;
}

ToyDataset dataset_from_corpus(const std::vector<Statement>& statements) {
  if (statements.empty()) throw Error("corpus has no statements to build a dataset from");
  ToyDataset ds;
  ds.pairs.reserve(statements.size());
  for (size_t i = 0; i < statements.size(); ++i) {
    ds.pairs.push_back({static_cast<int>(i), static_cast<int>(i), statements[i].id});
  }
  return ds;
}

bool ToyModelParams::all_finite() const {
  if (!std::isfinite(bias)) return false;
  auto finite = [](const Matrix& m) {
    return std::all_of(m.values.begin(), m.values.end(),
                       [](double v) { return std::isfinite(v); });
  };
  return finite(premise_embeddings) && finite(consequent_embeddings);
}

void TrainConfig::validate() const {
  if (lambda < 0.0) throw Error("lambda must be >= 0");
  if (learning_rate <= 0.0) throw Error("learning_rate must be > 0");
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (embedding_dim < 1) throw Error("embedding_dim must be >= 1");
  if (prob_clip_epsilon <= 0.0 || prob_clip_epsilon > 0.01) {
    throw Error("prob_clip_epsilon must be in (0, 0.01]");
  }
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open training config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError(std::string("training config is not valid JSON: ") + ex.what());
  }
  if (!doc.is_object()) throw ParseError("training config must be a JSON object");

  TrainConfig config;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "lambda") {
        config.lambda = value.get<double>();
      } else if (key == "learning_rate") {
        config.learning_rate = value.get<double>();
      } else if (key == "epochs") {
        config.epochs = value.get<int>();
      } else if (key == "embedding_dim") {
        config.embedding_dim = value.get<int>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "prob_clip_epsilon") {
        config.prob_clip_epsilon = value.get<double>();
      } else if (key == "shared_negation_init") {
        config.shared_negation_init = value.get<bool>();
      } else {
        throw ParseError("training config has unknown field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::type_error& ex) {
    throw ParseError(std::string("training config field has wrong type: ") + ex.what());
  }
  config.validate();
  return config;
}

std::string train_config_to_json(const TrainConfig& config) {
  nlohmann::ordered_json obj;
  obj["lambda"] = config.lambda;
  obj["learning_rate"] = config.learning_rate;
  obj["epochs"] = config.epochs;
  obj["embedding_dim"] = config.embedding_dim;
  obj["seed"] = config.seed;
  obj["prob_clip_epsilon"] = config.prob_clip_epsilon;
  obj["shared_negation_init"] = config.shared_negation_init;
  return obj.dump(2);
}

double predict_prob(const ToyModelParams& params, int premise_row, int consequent, double eps) {
  const int d = params.premise_embeddings.cols;
  const double s = dot(params.premise_embeddings.row(premise_row),
                       params.consequent_embeddings.row(consequent), d) +
                   params.bias;
  return std::clamp(sigmoid(s), eps, 1.0 - eps);
}

double loss_pos(const ToyModelParams& params, const ToyDataset& dataset, double eps) {
  double total = 0.0;
  for (const auto& pair : dataset.pairs) {
    total += -std::log(predict_prob(params, pair.premise, pair.consequent, eps));
  }
  return total;
}

double loss_neg(const ToyModelParams& params, const ToyDataset& dataset, double eps) {
  double total = 0.0;
  for (const auto& pair : dataset.pairs) {
    const double p = predict_prob(params, params.negated_row(pair.premise), pair.consequent, eps);
    total += -std::log(1.0 - p);
  }
  return total;
}

double loss_dual(const ToyModelParams& params, const ToyDataset& dataset, double lambda,
                 double eps) {
  return loss_pos(params, dataset, eps) + lambda * loss_neg(params, dataset, eps);
}

ToyModelParams gradients(const ToyModelParams& params, const ToyDataset& dataset, double lambda,
                         double eps) {
  const int d = params.premise_embeddings.cols;
  ToyModelParams grad;
  grad.premise_embeddings = Matrix(params.premise_embeddings.rows, d);
  grad.consequent_embeddings = Matrix(params.consequent_embeddings.rows, d);
  grad.bias = 0.0;

  // Accumulates dL/ds * (chain rule into u, v, b) for one scored pair.
  // A probability that landed outside [eps, 1-eps] sits on the flat part of
  // the clip, so its contribution is zero by definition.
  auto accumulate = [&](int premise_row, int consequent, double dl_ds_unclipped) {
    const double* u = params.premise_embeddings.row(premise_row);
    const double* v = params.consequent_embeddings.row(consequent);
    double* gu = grad.premise_embeddings.row(premise_row);
    double* gv = grad.consequent_embeddings.row(consequent);
    for (int k = 0; k < d; ++k) {
      gu[k] += dl_ds_unclipped * v[k];
      gv[k] += dl_ds_unclipped * u[k];
    }
    grad.bias += dl_ds_unclipped;
  };

  for (const auto& pair : dataset.pairs) {
    // Positive term: d(-log p)/ds = -(1 - p).
    {
      const int row = pair.premise;
      const double s = dot(params.premise_embeddings.row(row),
                           params.consequent_embeddings.row(pair.consequent), d) +
                       params.bias;
      const double p = sigmoid(s);
      if (p >= eps && p <= 1.0 - eps) accumulate(row, pair.consequent, -(1.0 - p));
    }
    // Counterfactual term: d(-log(1 - p))/ds = p, weighted by lambda.
    if (lambda != 0.0) {
      const int row = params.negated_row(pair.premise);
      const double s = dot(params.premise_embeddings.row(row),
                           params.consequent_embeddings.row(pair.consequent), d) +
                       params.bias;
      const double p = sigmoid(s);
      if (p >= eps && p <= 1.0 - eps) accumulate(row, pair.consequent, lambda * p);
    }
  }
  return grad;
}

ToyModelParams init_params(const ToyDataset& dataset, const TrainConfig& config) {
  dataset.validate();
  config.validate();
  const int n = dataset.premise_count();
  const int n_cons = dataset.consequent_count();
  const int d = config.embedding_dim;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 0.1);

  ToyModelParams params;
  params.premise_embeddings = Matrix(2 * n, d);
  params.consequent_embeddings = Matrix(n_cons, d);
  params.bias = 0.0;

  for (int i = 0; i < n; ++i) {
    double* row = params.premise_embeddings.row(i);
    for (int k = 0; k < d; ++k) row[k] = normal(rng);
  }
  for (int i = 0; i < n; ++i) {
    double* row = params.premise_embeddings.row(n + i);
    if (config.shared_negation_init) {
      const double* plain = params.premise_embeddings.row(i);
      std::copy(plain, plain + d, row);
    } else {
      for (int k = 0; k < d; ++k) row[k] = normal(rng);
    }
  }
  for (int i = 0; i < n_cons; ++i) {
    double* row = params.consequent_embeddings.row(i);
    for (int k = 0; k < d; ++k) row[k] = normal(rng);
  }
  return params;
}

namespace {

EpochStats stats_at(int epoch, const ToyModelParams& params, const ToyDataset& dataset,
                    const TrainConfig& config) {
  EpochStats stats;
  stats.epoch = epoch;
  stats.loss_pos = loss_pos(params, dataset, config.prob_clip_epsilon);
  stats.loss_neg = loss_neg(params, dataset, config.prob_clip_epsilon);
  stats.loss_dual = stats.loss_pos + config.lambda * stats.loss_neg;
  const MarginReport margins = distinguishability_report(params, dataset, config.prob_clip_epsilon);
  stats.min_margin = margins.min_margin;
  stats.mean_margin = margins.mean_margin;
  return stats;
}

}  // namespace

TrainResult train(const ToyDataset& dataset, const TrainConfig& config) {
  TrainResult result;
  result.params = init_params(dataset, config);
  result.trace.reserve(static_cast<size_t>(config.epochs) + 1);
  result.trace.push_back(stats_at(0, result.params, dataset, config));

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const ToyModelParams grad = gradients(result.params, dataset, config.lambda,
                                          config.prob_clip_epsilon);
    auto& prem = result.params.premise_embeddings.values;
    const auto& gprem = grad.premise_embeddings.values;
    for (size_t k = 0; k < prem.size(); ++k) prem[k] -= config.learning_rate * gprem[k];
    auto& cons = result.params.consequent_embeddings.values;
    const auto& gcons = grad.consequent_embeddings.values;
    for (size_t k = 0; k < cons.size(); ++k) cons[k] -= config.learning_rate * gcons[k];
    result.params.bias -= config.learning_rate * grad.bias;

    const EpochStats stats = stats_at(epoch, result.params, dataset, config);
    if (!std::isfinite(stats.loss_dual) || !result.params.all_finite()) {
      throw DivergenceError("loss became non-finite at epoch " + std::to_string(epoch) +
                            "; lower the learning rate");
    }
    result.trace.push_back(stats);
  }
  return result;
}

MarginReport distinguishability_report(const ToyModelParams& params, const ToyDataset& dataset,
                                       double eps) {
  MarginReport report;
  report.margins.reserve(dataset.pairs.size());
  double total = 0.0;
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& pair : dataset.pairs) {
    const double p_plain = predict_prob(params, pair.premise, pair.consequent, eps);
    const double p_negated =
        predict_prob(params, params.negated_row(pair.premise), pair.consequent, eps);
    const double margin = p_plain - p_negated;
    report.margins.push_back(margin);
    total += margin;
    lowest = std::min(lowest, margin);
  }
  report.min_margin = report.margins.empty() ? 0.0 : lowest;
  report.mean_margin =
      report.margins.empty() ? 0.0 : total / static_cast<double>(report.margins.size());
  return report;
}

ExperimentResult run_experiment(const ToyDataset& dataset, const TrainConfig& config) {
  config.validate();

  // Both arms must observe identical starting margins of exactly zero, so
  // the shared-row initialization is forced regardless of the config file.
  TrainConfig dual_config = config;
  dual_config.shared_negation_init = true;
  TrainConfig pos_config = dual_config;
  pos_config.lambda = 0.0;

  ExperimentResult result;
  result.dual_arm.name = "dual";
  result.dual_arm.lambda = dual_config.lambda;
  result.dual_arm.result = train(dataset, dual_config);
  result.dual_arm.final_margins = distinguishability_report(
      result.dual_arm.result.params, dataset, dual_config.prob_clip_epsilon);

  result.pos_arm.name = "pos";
  result.pos_arm.lambda = 0.0;
  result.pos_arm.result = train(dataset, pos_config);
  result.pos_arm.final_margins = distinguishability_report(
      result.pos_arm.result.params, dataset, pos_config.prob_clip_epsilon);

  result.gap = result.dual_arm.final_margins.min_margin - result.pos_arm.final_margins.min_margin;
  result.separation_holds = result.gap >= kSeparationGapThreshold;
  return result;
}

std::string experiment_csv(const ExperimentResult& result, std::uint64_t seed) {
  std::string out = "arm,lambda,seed,epoch,loss_pos,loss_neg,loss_dual,min_margin,mean_margin\n";
  auto append_arm = [&](const ExperimentArm& arm) {
    for (const EpochStats& stats : arm.result.trace) {
      out += arm.name;
      out += ',';
      out += format_double_full(arm.lambda);
      out += ',';
      out += std::to_string(seed);
      out += ',';
      out += std::to_string(stats.epoch);
      out += ',';
      out += format_double_full(stats.loss_pos);
      out += ',';
      out += format_double_full(stats.loss_neg);
      out += ',';
      out += format_double_full(stats.loss_dual);
      out += ',';
      out += format_double_full(stats.min_margin);
      out += ',';
      out += format_double_full(stats.mean_margin);
      out += '\n';
    }
  };
  append_arm(result.dual_arm);
  append_arm(result.pos_arm);
  return out;
}

}  // namespace ff
