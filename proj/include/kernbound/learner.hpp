#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kernbound/bounds.hpp"
#include "kernbound/kernel.hpp"
#include "kernbound/rademacher.hpp"

namespace kernbound {

struct TrainOptions {
  double reg_c = 1.0;
  int max_outer = 50;
  double tol = 1e-6;
  int max_inner = 500;
  double inner_tol = 1e-10;

  void validate() const;
};

struct Model {
  CombinationWeights mu;
  Eigen::VectorXd alpha;  // label-signed coefficients: h(x) = sum_i alpha_i K(x_i, x)
  std::vector<KernelSpec> kernel_specs;
  BoundFamily family = BoundFamily::L1;
  std::string train_sample_ref;  // content hash of the training sample
  std::vector<double> objective_log;
  bool converged = true;
};

// Alternating minimization of the soft-margin dual objective over the
// combined kernel: full projected-gradient ascent on alpha inside the box
// [0, reg_c]^m at fixed mu, then one projected-gradient step on mu with
// backtracking so the logged objective never increases.
Model train(const Sample& sample, const KernelDictionary& dict,
            BoundFamily family, const TrainOptions& options);

// Scores for query points given cross-Gram matrices (one per base kernel,
// each query-size x train-size).
Eigen::VectorXd predict(const Model& model,
                        const std::vector<Eigen::MatrixXd>& cross_grams);

// Fraction of points with y_i * score_i <= rho; the boundary counts as a
// violation.
double margin_loss(const Eigen::VectorXd& scores, const std::vector<int>& labels,
                   double rho);

struct BoundChoice {
  enum class Kind { TraceR, Ceiling, EmpiricalExact, EmpiricalMc };

  Kind kind = Kind::Ceiling;
  int r = 2;                          // TraceR
  std::int64_t mc_trials = 200000;    // EmpiricalMc
  std::uint64_t mc_seed = 0;          // EmpiricalMc
  int exact_cap = kDefaultExactCap;   // EmpiricalExact

  std::string render() const;
};

struct Certificate {
  double margin_loss = 0.0;
  double complexity_term = 0.0;
  double confidence_term = 0.0;
  double total = 0.0;
  std::string bound_choice;
  double rho = 1.0;
  double delta = 0.05;
  int m = 0;
  int p = 0;
  std::uint64_t dictionary_hash = 0;
  std::optional<std::uint64_t> seed;
};

// Largest rho for which the model's alpha stays inside the hypothesis ball.
double admissible_rho_max(const Model& model, const KernelDictionary& dict);

// Holdout-free generalization certificate: margin loss on the training
// sample plus twice the chosen complexity bound plus the confidence term
// 2 sqrt(ln(2/delta) / (2m)).
Certificate certify(const Model& model, const Sample& sample,
                    const KernelDictionary& dict, const MarginConfig& config,
                    const BoundChoice& choice);

}  // namespace kernbound
