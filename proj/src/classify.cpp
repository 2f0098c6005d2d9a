#include "classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geoinfer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct TrainingShape {
  int32_t n_classes = 0;
  int32_t n_features = 0;
  std::vector<double> weights;  // resolved per-sample weights
};

TrainingShape check_training(std::span<const FeatureVector> X, std::span<const int32_t> y,
                             std::span<const double> sample_weights, int32_t n_features) {
  if (X.empty()) raise(Errc::empty_training, "no training documents");
  if (X.size() != y.size()) {
    raise(Errc::label_mismatch, "document and label counts differ: " +
                                    std::to_string(X.size()) + " vs " +
                                    std::to_string(y.size()));
  }
  if (!sample_weights.empty() && sample_weights.size() != X.size()) {
    raise(Errc::label_mismatch, "sample weight count differs from document count");
  }

  TrainingShape shape;
  for (int32_t label : y) {
    if (label < 0) raise(Errc::invalid_argument, "labels must be non-negative");
    shape.n_classes = std::max(shape.n_classes, label + 1);
  }
  int32_t max_feature = -1;
  for (const FeatureVector& x : X) {
    int32_t prev = -1;
    for (const auto& [id, count] : x.entries) {
      if (id < 0 || count < 1 || id <= prev) {
        raise(Errc::invalid_argument, "feature vectors must be sorted with counts >= 1");
      }
      prev = id;
      max_feature = std::max(max_feature, id);
    }
  }
  shape.n_features = n_features >= 0 ? n_features : max_feature + 1;
  if (max_feature >= shape.n_features) {
    raise(Errc::invalid_argument, "feature id exceeds the declared feature count");
  }

  shape.weights.assign(X.size(), 1.0);
  for (size_t i = 0; i < sample_weights.size(); ++i) {
    if (!(sample_weights[i] > 0.0)) {
      raise(Errc::invalid_argument, "sample weights must be positive");
    }
    shape.weights[i] = sample_weights[i];
  }
  return shape;
}

double log_sum_exp(std::span<const double> scores) {
  double hi = kNegInf;
  for (double s : scores) hi = std::max(hi, s);
  if (hi == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - hi);
  return hi + std::log(sum);
}

ClassPrediction prediction_from_scores(std::vector<double>&& scores) {
  ClassPrediction pred;
  const double lse = log_sum_exp(scores);
  pred.posterior.resize(scores.size());
  for (size_t k = 0; k < scores.size(); ++k) {
    pred.posterior[k] = scores[k] == kNegInf ? 0.0 : std::exp(scores[k] - lse);
  }
  pred.label = 0;
  for (size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[pred.label]) pred.label = static_cast<int32_t>(k);
  }
  return pred;
}

}  // namespace

MnbModel mnb_fit(std::span<const FeatureVector> X, std::span<const int32_t> y,
                 double alpha, std::span<const double> sample_weights,
                 int32_t n_features) {
  if (!(alpha > 0.0)) raise(Errc::invalid_argument, "alpha must be > 0");
  const TrainingShape shape = check_training(X, y, sample_weights, n_features);
  const int32_t K = shape.n_classes;
  const int32_t V = shape.n_features;

  MnbModel model;
  model.alpha = alpha;
  model.n_classes = K;
  model.n_features = V;
  model.log_prior.assign(K, kNegInf);
  model.feature_log_prob.assign(static_cast<size_t>(K) * V, 0.0);

  std::vector<double> class_weight(K, 0.0);
  std::vector<double> counts(static_cast<size_t>(K) * V, 0.0);
  std::vector<double> totals(K, 0.0);
  double weight_sum = 0.0;
  for (size_t i = 0; i < X.size(); ++i) {
    const double w = shape.weights[i];
    const int32_t k = y[i];
    class_weight[k] += w;
    weight_sum += w;
    for (const auto& [id, count] : X[i].entries) {
      counts[static_cast<size_t>(k) * V + id] += w * count;
      totals[k] += w * count;
    }
  }

  for (int32_t k = 0; k < K; ++k) {
    if (class_weight[k] > 0.0) model.log_prior[k] = std::log(class_weight[k] / weight_sum);
    const double denom = std::log(alpha * V + totals[k]);
    for (int32_t j = 0; j < V; ++j) {
      model.feature_log_prob[static_cast<size_t>(k) * V + j] =
          std::log(alpha + counts[static_cast<size_t>(k) * V + j]) - denom;
    }
  }
  return model;
}

double mnb_log_likelihood(const MnbModel& model, const FeatureVector& x, int32_t label) {
  if (label < 0 || label >= model.n_classes) {
    raise(Errc::unknown_label, "label " + std::to_string(label) + " out of range");
  }
  // log [ (sum x_i)! / prod x_i! ] + sum x_i log p_i, over in-space features.
  double total = 0.0;
  double log_coeff = 0.0;
  double log_terms = 0.0;
  for (const auto& [id, count] : x.entries) {
    if (id >= model.n_features) continue;
    total += count;
    log_coeff -= std::lgamma(static_cast<double>(count) + 1.0);
    log_terms += count * model.log_prob(label, id);
  }
  log_coeff += std::lgamma(total + 1.0);
  return log_coeff + log_terms;
}

ClassPrediction mnb_predict(const MnbModel& model, const FeatureVector& x) {
  std::vector<double> scores(model.log_prior.begin(), model.log_prior.end());
  for (int32_t k = 0; k < model.n_classes; ++k) {
    if (scores[k] == kNegInf) continue;
    for (const auto& [id, count] : x.entries) {
      if (id >= model.n_features) continue;
      scores[k] += count * model.log_prob(k, id);
    }
  }
  return prediction_from_scores(std::move(scores));
}

double logit_objective(std::span<const double> params, int32_t n_classes,
                       int32_t n_features, std::span<const FeatureVector> X,
                       std::span<const int32_t> y, std::span<const double> weights,
                       double l2) {
  const size_t wsize = static_cast<size_t>(n_classes) * n_features;
  std::vector<double> scores(n_classes);
  double ll = 0.0;
  for (size_t i = 0; i < X.size(); ++i) {
    for (int32_t k = 0; k < n_classes; ++k) {
      double s = params[wsize + k];  // bias
      for (const auto& [id, count] : X[i].entries) {
        if (id >= n_features) continue;
        s += params[static_cast<size_t>(k) * n_features + id] * count;
      }
      scores[k] = s;
    }
    const double w = weights.empty() ? 1.0 : weights[i];
    ll += w * (scores[y[i]] - log_sum_exp(scores));
  }
  double penalty = 0.0;
  for (size_t j = 0; j < wsize; ++j) penalty += params[j] * params[j];
  return ll - 0.5 * l2 * penalty;
}

std::vector<double> logit_gradient(std::span<const double> params, int32_t n_classes,
                                   int32_t n_features, std::span<const FeatureVector> X,
                                   std::span<const int32_t> y,
                                   std::span<const double> weights, double l2) {
  const size_t wsize = static_cast<size_t>(n_classes) * n_features;
  std::vector<double> grad(wsize + n_classes, 0.0);
  std::vector<double> scores(n_classes);
  for (size_t i = 0; i < X.size(); ++i) {
    for (int32_t k = 0; k < n_classes; ++k) {
      double s = params[wsize + k];
      for (const auto& [id, count] : X[i].entries) {
        if (id >= n_features) continue;
        s += params[static_cast<size_t>(k) * n_features + id] * count;
      }
      scores[k] = s;
    }
    const double lse = log_sum_exp(scores);
    const double w = weights.empty() ? 1.0 : weights[i];
    for (int32_t k = 0; k < n_classes; ++k) {
      const double coef = w * ((y[i] == k ? 1.0 : 0.0) - std::exp(scores[k] - lse));
      grad[wsize + k] += coef;
      for (const auto& [id, count] : X[i].entries) {
        if (id >= n_features) continue;
        grad[static_cast<size_t>(k) * n_features + id] += coef * count;
      }
    }
  }
  for (size_t j = 0; j < wsize; ++j) grad[j] -= l2 * params[j];
  return grad;
}

LogitModel logit_fit(std::span<const FeatureVector> X, std::span<const int32_t> y,
                     const LogitOptions& opt, std::span<const double> sample_weights,
                     int32_t n_features) {
  if (!(opt.l2 >= 0.0) || opt.max_iter < 1 || !(opt.tol > 0.0)) {
    raise(Errc::invalid_argument, "bad logit options");
  }
  TrainingShape shape = check_training(X, y, sample_weights, n_features);
  const int32_t K = shape.n_classes;
  const int32_t V = shape.n_features;

  std::vector<int64_t> class_count(K, 0);
  for (int32_t label : y) ++class_count[label];
  const int32_t present = static_cast<int32_t>(
      std::count_if(class_count.begin(), class_count.end(), [](int64_t c) { return c > 0; }));
  if (present < 2) raise(Errc::single_class, "need at least two distinct labels");

  if (opt.balanced) {
    const double N = static_cast<double>(y.size());
    for (size_t i = 0; i < X.size(); ++i) {
      shape.weights[i] *= N / (present * static_cast<double>(class_count[y[i]]));
    }
  }

  const size_t wsize = static_cast<size_t>(K) * V;
  std::vector<double> params(wsize + K, 0.0);

  LogitModel model;
  model.l2 = opt.l2;
  model.n_classes = K;
  model.n_features = V;

  double objective = logit_objective(params, K, V, X, y, shape.weights, opt.l2);
  model.objective_trace.push_back(objective);
  double step = 1.0;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    const std::vector<double> grad =
        logit_gradient(params, K, V, X, y, shape.weights, opt.l2);
    double grad_max = 0.0;
    double grad_sq = 0.0;
    for (double g : grad) {
      grad_max = std::max(grad_max, std::fabs(g));
      grad_sq += g * g;
    }
    if (grad_max < opt.tol) {
      model.converged = true;
      break;
    }

    // Backtracking line search along the ascent direction (Armijo rule).
    std::vector<double> trial(params.size());
    double trial_objective = kNegInf;
    bool accepted = false;
    step = std::min(step * 2.0, 1e4);
    while (step > 1e-20) {
      for (size_t j = 0; j < params.size(); ++j) trial[j] = params[j] + step * grad[j];
      trial_objective = logit_objective(trial, K, V, X, y, shape.weights, opt.l2);
      if (trial_objective >= objective + 1e-4 * step * grad_sq) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no improving step left at this scale

    params.swap(trial);
    objective = trial_objective;
    model.objective_trace.push_back(objective);
    model.iterations = iter + 1;
  }

  model.weights.assign(params.begin(), params.begin() + wsize);
  model.bias.assign(params.begin() + wsize, params.end());
  return model;
}

std::vector<double> logit_predict_proba(const LogitModel& model, const FeatureVector& x) {
  std::vector<double> scores(model.bias);
  for (int32_t k = 0; k < model.n_classes; ++k) {
    for (const auto& [id, count] : x.entries) {
      if (id >= model.n_features) continue;
      scores[k] += model.weight(k, id) * count;
    }
  }
  const double lse = log_sum_exp(scores);
  std::vector<double> proba(scores.size());
  for (size_t k = 0; k < scores.size(); ++k) proba[k] = std::exp(scores[k] - lse);
  return proba;
}

ClassPrediction logit_predict(const LogitModel& model, const FeatureVector& x) {
  ClassPrediction pred;
  pred.posterior = logit_predict_proba(model, x);
  pred.label = 0;
  for (size_t k = 1; k < pred.posterior.size(); ++k) {
    if (pred.posterior[k] > pred.posterior[pred.label]) pred.label = static_cast<int32_t>(k);
  }
  return pred;
}

}  // namespace geoinfer
