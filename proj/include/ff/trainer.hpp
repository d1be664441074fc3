// ============================================================================
// ff/trainer.hpp — dual-objective trainer over a desk-scale Bernoulli judge
// ============================================================================
//
// The conditional probability that consequent j follows from premise atom x
// is a logistic bilinear score:
//
//     p(j | x) = sigmoid( u_x . v_j + b ),  clipped to [eps, 1 - eps]
//
// where u_x is a premise-atom embedding, v_j a consequent embedding, b a
// shared bias. Premise rows 0..N-1 hold the plain atoms P_i, rows N..2N-1
// their negations ~P_i.
//
// Two losses over a dataset of accepted pairs (P_i, Q_i):
//
//     L_pos  = -sum_i log p(Q_i | P_i)          (affirm what holds)
//     L_neg  = -sum_i log(1 - p(Q_i | ~P_i))    (deny what does not)
//     L_dual = L_pos + lambda * L_neg
//
// L_neg is the counterfactual-denial term: it pushes probability mass away
// from conclusions drawn under a negated premise. Training both terms from
// a shared initialization (each ~P_i row byte-identical to its P_i row, so
// every margin p(Q_i|P_i) - p(Q_i|~P_i) starts at exactly 0) makes the two
// arms directly comparable: the lambda=0 arm never receives gradient on the
// negated rows and cannot separate the distributions, the dual arm must.
//
// Full-batch fixed-step gradient descent; bit-reproducible for a fixed
// seed, config, and build. The gradient of the clip boundary is 0.
// ============================================================================
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ff {

struct Statement;  // corpus.hpp

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), values(static_cast<size_t>(r) * c, 0.0) {}

  double* row(int r) { return values.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return values.data() + static_cast<size_t>(r) * cols; }
  double& at(int r, int c) { return values[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct ToyDataset {
  struct Pair {
    int premise = 0;     // plain premise atom index, 0-based
    int consequent = 0;  // consequent atom index, 0-based
    std::string label;   // statement id or synthesized name
  };
  std::vector<Pair> pairs;

  int premise_count() const;     // distinct premise atoms (max index + 1)
  int consequent_count() const;  // distinct consequent atoms (max index + 1)

  // Throws Error on: empty pair list, out-of-range index, or a premise
  // appearing in more than one pair (separability: a premise and its
  // negation never both affirm a consequent).
  void validate() const;
};

// n_pairs disjoint premise/consequent atom pairs, labels p001..pNNN.
// Deterministic; the seed is recorded but the structure does not vary.
ToyDataset synthesize_dataset(int n_pairs, std::uint64_t seed);

// Statement i becomes atom pair i, labeled with the statement id.
ToyDataset dataset_from_corpus(const std::vector<Statement>& statements);

struct ToyModelParams {
  Matrix premise_embeddings;     // 2N x d; rows N..2N-1 are the negated atoms
  Matrix consequent_embeddings;  // N_c x d
  double bias = 0.0;

  int premise_count() const { return premise_embeddings.rows / 2; }
  int negated_row(int premise_index) const { return premise_index + premise_count(); }
  bool all_finite() const;

  friend bool operator==(const ToyModelParams&, const ToyModelParams&) = default;
};

inline constexpr double kDefaultProbClip = 1e-7;

struct TrainConfig {
  double lambda = 1.0;
  double learning_rate = 0.5;
  int epochs = 500;
  int embedding_dim = 8;
  std::uint64_t seed = 42;
  double prob_clip_epsilon = kDefaultProbClip;
  bool shared_negation_init = true;

  void validate() const;  // throws Error on out-of-range fields
};

// Flat JSON file with the TrainConfig field names; absent keys keep their
// defaults.
TrainConfig load_train_config(const std::filesystem::path& path);
std::string train_config_to_json(const TrainConfig& config);

// sigmoid(u_x . v_j + b) clipped to [eps, 1 - eps]. `premise_row` indexes
// the full 2N premise matrix, so both plain and negated atoms are reachable.
double predict_prob(const ToyModelParams& params, int premise_row, int consequent,
                    double eps = kDefaultProbClip);

double loss_pos(const ToyModelParams& params, const ToyDataset& dataset,
                double eps = kDefaultProbClip);
double loss_neg(const ToyModelParams& params, const ToyDataset& dataset,
                double eps = kDefaultProbClip);
double loss_dual(const ToyModelParams& params, const ToyDataset& dataset, double lambda,
                 double eps = kDefaultProbClip);

// Analytic gradient of loss_dual with respect to every parameter, returned
// in a params-shaped container. Clipped probabilities contribute zero.
ToyModelParams gradients(const ToyModelParams& params, const ToyDataset& dataset, double lambda,
                         double eps = kDefaultProbClip);

// Embeddings drawn from seeded normals with standard deviation 0.1, bias 0.
// With shared_negation_init each ~P_i row is copied byte-identical from its
// P_i row instead of being drawn.
ToyModelParams init_params(const ToyDataset& dataset, const TrainConfig& config);

struct EpochStats {
  int epoch = 0;  // 0 is the pre-training state
  double loss_pos = 0.0;
  double loss_neg = 0.0;
  double loss_dual = 0.0;
  double min_margin = 0.0;
  double mean_margin = 0.0;
};

struct TrainResult {
  ToyModelParams params;
  std::vector<EpochStats> trace;  // epoch 0 baseline plus one entry per epoch
};

// Full-batch gradient descent for config.epochs steps. Throws
// DivergenceError if the loss stops being finite.
TrainResult train(const ToyDataset& dataset, const TrainConfig& config);

struct MarginReport {
  std::vector<double> margins;  // per pair: p(Q_i|P_i) - p(Q_i|~P_i)
  double min_margin = 0.0;
  double mean_margin = 0.0;
};

MarginReport distinguishability_report(const ToyModelParams& params, const ToyDataset& dataset,
                                       double eps = kDefaultProbClip);

// Separation-ordering threshold: the dual arm's min margin must exceed the
// pos-only arm's by at least this much for the experiment to pass.
inline constexpr double kSeparationGapThreshold = 0.3;

struct ExperimentArm {
  std::string name;  // "dual" or "pos"
  double lambda = 0.0;
  TrainResult result;
  MarginReport final_margins;
};

struct ExperimentResult {
  ExperimentArm dual_arm;  // lambda = config.lambda
  ExperimentArm pos_arm;   // lambda = 0
  double gap = 0.0;        // dual min margin - pos min margin
  bool separation_holds = false;
};

// Two arms from one shared initialization (shared_negation_init is forced so
// all margins start at exactly 0); identical dataset, seed, and schedule.
ExperimentResult run_experiment(const ToyDataset& dataset, const TrainConfig& config);

// CSV: arm,lambda,seed,epoch,loss_pos,loss_neg,loss_dual,min_margin,mean_margin
std::string experiment_csv(const ExperimentResult& result, std::uint64_t seed);

}  // namespace ff
