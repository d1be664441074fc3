#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ff/corpus.hpp"
#include "ff/errors.hpp"
#include "ff/trainer.hpp"
#include "test_support.hpp"

using namespace ff;

namespace {

// Independent re-implementation of the two log-likelihood sums, written as
// plainly as possible so it can serve as an oracle for the library code.
double oracle_loss(const ToyModelParams& params, const ToyDataset& dataset, bool negated,
                   double eps) {
  double total = 0.0;
  const int n = params.premise_embeddings.rows / 2;
  for (const auto& pair : dataset.pairs) {
    const int row = negated ? pair.premise + n : pair.premise;
    double score = params.bias;
    for (int k = 0; k < params.premise_embeddings.cols; ++k) {
      score += params.premise_embeddings.at(row, k) * params.consequent_embeddings.at(pair.consequent, k);
    }
    double p = 1.0 / (1.0 + std::exp(-score));
    if (p < eps) p = eps;
    if (p > 1.0 - eps) p = 1.0 - eps;
    total += negated ? -std::log(1.0 - p) : -std::log(p);
  }
  return total;
}

ToyModelParams random_params(int n_pairs, int dim, std::uint64_t seed) {
  TrainConfig config;
  config.embedding_dim = dim;
  config.seed = seed;
  config.shared_negation_init = false;  // fully independent rows
  return init_params(synthesize_dataset(n_pairs, seed), config);
}

// Flat view over every parameter for the finite-difference sweep.
std::vector<double*> parameter_view(ToyModelParams& params) {
  std::vector<double*> view;
  for (auto& v : params.premise_embeddings.values) view.push_back(&v);
  for (auto& v : params.consequent_embeddings.values) view.push_back(&v);
  view.push_back(&params.bias);
  return view;
}

std::vector<double> gradient_flat(const ToyModelParams& params, const ToyDataset& dataset,
                                  double lambda, double eps) {
  ToyModelParams grad = gradients(params, dataset, lambda, eps);
  std::vector<double> flat;
  for (double v : grad.premise_embeddings.values) flat.push_back(v);
  for (double v : grad.consequent_embeddings.values) flat.push_back(v);
  flat.push_back(grad.bias);
  return flat;
}

ToyModelParams single_pair_params(double score) {
  ToyModelParams params;
  params.premise_embeddings = Matrix(2, 1);
  params.consequent_embeddings = Matrix(1, 1);
  params.premise_embeddings.at(0, 0) = 1.0;
  params.premise_embeddings.at(1, 0) = 1.0;
  params.consequent_embeddings.at(0, 0) = score;  // dot product = score
  params.bias = 0.0;
  return params;
}

ToyDataset single_pair_dataset() {
  ToyDataset ds;
  ds.pairs.push_back({0, 0, "only"});
  return ds;
}

}  // namespace

TEST_CASE("predict_prob is the clipped logistic of the bilinear score") {
  ToyModelParams zero;
  zero.premise_embeddings = Matrix(2, 4);
  zero.consequent_embeddings = Matrix(1, 4);
  CHECK(predict_prob(zero, 0, 0) == doctest::Approx(0.5));

  CHECK(predict_prob(single_pair_params(std::log(3.0)), 0, 0) == doctest::Approx(0.75));

  ToyModelParams saturated = single_pair_params(1000.0);
  CHECK(predict_prob(saturated, 0, 0, 1e-7) == doctest::Approx(1.0 - 1e-7));
  saturated.consequent_embeddings.at(0, 0) = -1000.0;
  CHECK(predict_prob(saturated, 0, 0, 1e-7) == doctest::Approx(1e-7));
}

TEST_CASE("single-pair losses at even odds are ln 2") {
  const ToyDataset ds = single_pair_dataset();
  ToyModelParams params;
  params.premise_embeddings = Matrix(2, 3);
  params.consequent_embeddings = Matrix(1, 3);
  CHECK(loss_pos(params, ds) == doctest::Approx(std::log(2.0)));
  CHECK(loss_neg(params, ds) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("perfect-fit limits drive both losses to the clip floor") {
  const ToyDataset ds = synthesize_dataset(20, 1);
  ToyModelParams params;
  params.premise_embeddings = Matrix(40, 1);
  params.consequent_embeddings = Matrix(20, 1);
  for (int i = 0; i < 20; ++i) {
    params.premise_embeddings.at(i, 0) = 50.0;        // p(Q|P) -> 1
    params.premise_embeddings.at(20 + i, 0) = -50.0;  // p(Q|~P) -> 0
    params.consequent_embeddings.at(i, 0) = 1.0;
  }
  const double eps = 1e-7;
  CHECK(loss_pos(params, ds, eps) ==
        doctest::Approx(20.0 * std::abs(std::log(1.0 - eps))).epsilon(0.5));
  CHECK(loss_pos(params, ds, eps) < 1e-5);
  CHECK(loss_neg(params, ds, eps) < 1e-5);
}

TEST_CASE("losses agree with an independent summation to 1e-12") {
  const ToyDataset ds = synthesize_dataset(20, 3);
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    const ToyModelParams params = random_params(20, 8, seed);
    const double eps = 1e-7;
    CHECK(std::abs(loss_pos(params, ds, eps) - oracle_loss(params, ds, false, eps)) <= 1e-12);
    CHECK(std::abs(loss_neg(params, ds, eps) - oracle_loss(params, ds, true, eps)) <= 1e-12);
  }
}

TEST_CASE("dual loss is exactly the lambda-weighted sum") {
  const ToyDataset ds = synthesize_dataset(20, 3);
  const ToyModelParams params = random_params(20, 8, 17);

  CHECK(loss_dual(params, ds, 0.0) == loss_pos(params, ds));  // exact, not approx
  const double a = loss_pos(params, ds);
  const double b = loss_neg(params, ds);
  CHECK(std::abs(loss_dual(params, ds, 1.0) - (a + b)) <= 1e-12);
  CHECK(std::abs(loss_dual(params, ds, 2.5) - (a + 2.5 * b)) <= 1e-12);
}

TEST_CASE("gradient at indifference: hand-derived values") {
  const ToyDataset ds = single_pair_dataset();
  ToyModelParams zero;
  zero.premise_embeddings = Matrix(2, 3);
  zero.consequent_embeddings = Matrix(1, 3);

  const ToyModelParams grad = gradients(zero, ds, 0.0);
  // d(-log p)/d bias = -(1 - p) = -0.5 at p = 0.5; embedding gradients are
  // products with the zero vectors.
  CHECK(grad.bias == doctest::Approx(-0.5));
  for (double v : grad.premise_embeddings.values) CHECK(v == 0.0);
  for (double v : grad.consequent_embeddings.values) CHECK(v == 0.0);
}

TEST_CASE("lambda 0 never touches the negated-premise rows") {
  const ToyDataset ds = synthesize_dataset(20, 3);
  const ToyModelParams params = random_params(20, 8, 23);
  const ToyModelParams grad = gradients(params, ds, 0.0);
  for (int i = 20; i < 40; ++i) {
    for (int k = 0; k < 8; ++k) CHECK(grad.premise_embeddings.at(i, k) == 0.0);
  }

  // Through a whole training run the rows stay byte-identical to init.
  TrainConfig config;
  config.lambda = 0.0;
  config.epochs = 120;
  config.seed = 23;
  config.shared_negation_init = false;
  const ToyModelParams init = init_params(ds, config);
  const TrainResult result = train(ds, config);
  for (int i = 20; i < 40; ++i) {
    for (int k = 0; k < 8; ++k) {
      CHECK(result.params.premise_embeddings.at(i, k) == init.premise_embeddings.at(i, k));
    }
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  const ToyDataset ds = synthesize_dataset(20, 3);
  const double h = 1e-5;
  const double eps = 1e-7;
  for (std::uint64_t seed : {101ULL, 102ULL, 103ULL}) {
    for (double lambda : {0.0, 1.0, 2.5}) {
      ToyModelParams params = random_params(20, 8, seed);
      const std::vector<double> analytic = gradient_flat(params, ds, lambda, eps);
      const std::vector<double*> view = parameter_view(params);
      REQUIRE(analytic.size() == view.size());

      double worst = 0.0;
      for (size_t i = 0; i < view.size(); ++i) {
        const double saved = *view[i];
        *view[i] = saved + h;
        const double up = loss_dual(params, ds, lambda, eps);
        *view[i] = saved - h;
        const double down = loss_dual(params, ds, lambda, eps);
        *view[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double diff = std::abs(analytic[i] - fd);
        if (diff > 1e-8) {  // absolute escape for exact zeros
          worst = std::max(worst, diff / std::max(std::abs(analytic[i]), std::abs(fd)));
        }
      }
      CAPTURE(seed);
      CAPTURE(lambda);
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("shared initialization starts every margin at exactly zero") {
  const ToyDataset ds = synthesize_dataset(20, 7);
  TrainConfig config;
  config.seed = 7;
  config.shared_negation_init = true;
  const ToyModelParams params = init_params(ds, config);
  const MarginReport report = distinguishability_report(params, ds);
  for (double margin : report.margins) CHECK(margin == 0.0);
  CHECK(report.min_margin == 0.0);
  CHECK(report.mean_margin == 0.0);

  // Zero-epoch training reports the same thing through the trace.
  config.epochs = 0;
  const TrainResult result = train(ds, config);
  REQUIRE(result.trace.size() == 1);
  CHECK(result.trace[0].epoch == 0);
  CHECK(result.trace[0].min_margin == 0.0);
  CHECK(result.trace[0].mean_margin == 0.0);
}

TEST_CASE("default training converges and separates the distributions") {
  const ToyDataset ds = synthesize_dataset(20, 42);
  TrainConfig config;  // defaults: d=8, lr=0.5, 500 epochs, lambda=1
  const TrainResult result = train(ds, config);
  REQUIRE(result.trace.size() == 501);
  CHECK(result.trace.back().loss_dual < 0.05 * 20);

  const MarginReport margins = distinguishability_report(result.params, ds);
  CHECK(margins.min_margin >= 0.8);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  const ToyDataset ds = synthesize_dataset(20, 5);
  TrainConfig config;
  config.epochs = 80;
  config.seed = 99;
  const TrainResult a = train(ds, config);
  const TrainResult b = train(ds, config);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].loss_dual == b.trace[i].loss_dual);  // bitwise
    CHECK(a.trace[i].min_margin == b.trace[i].min_margin);
  }
  CHECK(a.params == b.params);
}

TEST_CASE("runaway learning rates raise DivergenceError") {
  const ToyDataset ds = synthesize_dataset(8, 1);
  TrainConfig config;
  config.learning_rate = 1e300;
  config.epochs = 50;
  CHECK_THROWS_AS(train(ds, config), DivergenceError);
}

TEST_CASE("dataset synthesis and corpus mapping have the documented shape") {
  const ToyDataset ds = synthesize_dataset(20, 9);
  REQUIRE(ds.pairs.size() == 20);
  CHECK(ds.pairs[0].label == "p001");
  CHECK(ds.pairs[19].label == "p020");
  ds.validate();

  TrainConfig config;
  const ToyModelParams params = init_params(ds, config);
  CHECK(params.premise_embeddings.rows == 40);
  CHECK(params.consequent_embeddings.rows == 20);
  CHECK(params.premise_embeddings.cols == 8);

  const ToyDataset one = synthesize_dataset(1, 9);
  CHECK(one.pairs.size() == 1);

  const auto statements = load_corpus(fftest::data_dir() / "medical_sample.jsonl");
  const ToyDataset mapped = dataset_from_corpus(statements);
  REQUIRE(mapped.pairs.size() == 5);
  CHECK(mapped.pairs[0].label == statements[0].id);
  CHECK(mapped.pairs[4].label == statements[4].id);
  mapped.validate();

  ToyDataset broken;
  broken.pairs.push_back({0, 0, "a"});
  broken.pairs.push_back({0, 1, "b"});  // same premise affirming twice
  CHECK_THROWS_AS(broken.validate(), Error);
  CHECK_THROWS_AS(ToyDataset{}.validate(), Error);
}

TEST_CASE("train config files parse, default, and validate") {
  fftest::TempDir dir;
  {
    std::ofstream out(dir.file("full.json"));
    out << R"({"lambda": 2.0, "learning_rate": 0.1, "epochs": 10, "embedding_dim": 4,
               "seed": 7, "prob_clip_epsilon": 1e-6, "shared_negation_init": false})";
  }
  const TrainConfig full = load_train_config(dir.file("full.json"));
  CHECK(full.lambda == 2.0);
  CHECK(full.learning_rate == 0.1);
  CHECK(full.epochs == 10);
  CHECK(full.embedding_dim == 4);
  CHECK(full.seed == 7);
  CHECK(full.prob_clip_epsilon == 1e-6);
  CHECK(full.shared_negation_init == false);

  {
    std::ofstream out(dir.file("partial.json"));
    out << R"({"lambda": 0.5})";
  }
  const TrainConfig partial = load_train_config(dir.file("partial.json"));
  CHECK(partial.lambda == 0.5);
  CHECK(partial.epochs == 500);  // untouched default

  {
    std::ofstream out(dir.file("typo.json"));
    out << R"({"lamda": 0.5})";
  }
  CHECK_THROWS_AS(load_train_config(dir.file("typo.json")), ParseError);

  {
    std::ofstream out(dir.file("range.json"));
    out << R"({"prob_clip_epsilon": 0.3})";
  }
  CHECK_THROWS_AS(load_train_config(dir.file("range.json")), Error);

  // Serialization round-trip.
  std::ofstream out(dir.file("rt.json"));
  out << train_config_to_json(full);
  out.close();
  const TrainConfig rt = load_train_config(dir.file("rt.json"));
  CHECK(rt.lambda == full.lambda);
  CHECK(rt.seed == full.seed);
  CHECK(rt.shared_negation_init == full.shared_negation_init);
}

TEST_CASE("the two-arm experiment separates dual from pos-only training") {
  const ToyDataset ds = synthesize_dataset(20, 42);
  TrainConfig config;
  config.seed = 42;
  config.shared_negation_init = false;  // forced back on by the experiment

  const ExperimentResult result = run_experiment(ds, config);
  CHECK(result.dual_arm.lambda == 1.0);
  CHECK(result.pos_arm.lambda == 0.0);
  // Both arms start from the same shared rows: margins exactly zero.
  CHECK(result.dual_arm.result.trace[0].min_margin == 0.0);
  CHECK(result.pos_arm.result.trace[0].min_margin == 0.0);
  CHECK(result.dual_arm.result.trace[0].loss_pos == result.pos_arm.result.trace[0].loss_pos);

  CHECK(result.dual_arm.final_margins.min_margin >= 0.8);
  CHECK(result.pos_arm.final_margins.min_margin <= 0.2);
  CHECK(result.gap >= kSeparationGapThreshold);
  CHECK(result.separation_holds);

  // CSV shape: header plus a row per arm per epoch (incl. the epoch-0 row).
  const std::string csv = experiment_csv(result, config.seed);
  std::istringstream stream(csv);
  std::string line;
  std::getline(stream, line);
  CHECK(line == "arm,lambda,seed,epoch,loss_pos,loss_neg,loss_dual,min_margin,mean_margin");
  int rows = 0, dual_rows = 0;
  while (std::getline(stream, line)) {
    ++rows;
    if (line.rfind("dual,", 0) == 0) ++dual_rows;
  }
  CHECK(rows == 2 * 501);
  CHECK(dual_rows == 501);
  CHECK(csv.find("dual,1,42,0,") != std::string::npos);

  // Bit-identical reruns.
  const ExperimentResult again = run_experiment(ds, config);
  CHECK(experiment_csv(again, config.seed) == csv);
}
