#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "textproc.hpp"

namespace geoinfer {

struct ClassPrediction {
  int32_t label = -1;
  std::vector<double> posterior;  // one probability per class, sums to 1
};

// Multinomial naive Bayes with additive smoothing. Class-conditional
// feature probabilities are (alpha + count) / (alpha * V + total).
struct MnbModel {
  std::vector<double> log_prior;         // K entries; -inf marks an empty class
  std::vector<double> feature_log_prob;  // K * V, row per class
  double alpha = 1.0;
  int32_t n_classes = 0;
  int32_t n_features = 0;
  uint64_t vocabulary_hash = 0;  // 0 = not bound to a vocabulary

  double log_prob(int32_t label, int32_t feature) const {
    return feature_log_prob[static_cast<size_t>(label) * n_features + feature];
  }
};

// Labels are dense ints >= 0; K is 1 + the largest label. Pass n_features
// to fix the feature space; by default it is inferred from the data.
// Weighted counts are used throughout when sample_weights is non-empty.
MnbModel mnb_fit(std::span<const FeatureVector> X, std::span<const int32_t> y,
                 double alpha = 1.0, std::span<const double> sample_weights = {},
                 int32_t n_features = -1);

// Full multinomial log-likelihood log p(x | label), including the
// multinomial coefficient term computed with log-gamma.
double mnb_log_likelihood(const MnbModel& model, const FeatureVector& x, int32_t label);

// Argmax of log prior + sum x_i log p_i (the coefficient is constant across
// classes); ties go to the lowest label. Posterior via log-sum-exp.
ClassPrediction mnb_predict(const MnbModel& model, const FeatureVector& x);

struct LogitOptions {
  double l2 = 1.0;
  int max_iter = 100;
  double tol = 1e-4;     // stop when the gradient max-norm falls below this
  bool balanced = true;  // class weight N / (K * n_k) folded into samples
  uint64_t seed = 0;     // reserved; fitting is deterministic from zero init
};

// Multiclass softmax regression fit by full-batch gradient ascent with
// backtracking line search. The L2 penalty applies to weights only.
struct LogitModel {
  std::vector<double> weights;  // K * V, row per class
  std::vector<double> bias;     // K
  double l2 = 0.0;
  int iterations = 0;
  bool converged = false;
  int32_t n_classes = 0;
  int32_t n_features = 0;
  std::vector<double> objective_trace;  // objective after each accepted step
  uint64_t vocabulary_hash = 0;

  double weight(int32_t label, int32_t feature) const {
    return weights[static_cast<size_t>(label) * n_features + feature];
  }
};

LogitModel logit_fit(std::span<const FeatureVector> X, std::span<const int32_t> y,
                     const LogitOptions& opt = {},
                     std::span<const double> sample_weights = {},
                     int32_t n_features = -1);

std::vector<double> logit_predict_proba(const LogitModel& model, const FeatureVector& x);
ClassPrediction logit_predict(const LogitModel& model, const FeatureVector& x);

// Penalized log-likelihood and its gradient for a parameter vector laid out
// as K*V weights followed by K biases. Exposed so the fitting step can be
// checked against finite differences of the objective.
double logit_objective(std::span<const double> params, int32_t n_classes,
                       int32_t n_features, std::span<const FeatureVector> X,
                       std::span<const int32_t> y, std::span<const double> weights,
                       double l2);
std::vector<double> logit_gradient(std::span<const double> params, int32_t n_classes,
                                   int32_t n_features, std::span<const FeatureVector> X,
                                   std::span<const int32_t> y,
                                   std::span<const double> weights, double l2);

}  // namespace geoinfer
