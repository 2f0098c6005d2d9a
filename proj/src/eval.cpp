#include "eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "classify.hpp"
#include "featurize.hpp"

namespace geoinfer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> sorted_copy(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double aed(std::span<const double> errors_km) {
  if (errors_km.empty()) raise(Errc::empty_input, "no error distances");
  double sum = 0.0;
  for (double e : errors_km) sum += e;
  return sum / static_cast<double>(errors_km.size());
}

double med(std::span<const double> errors_km) {
  if (errors_km.empty()) raise(Errc::empty_input, "no error distances");
  const std::vector<double> v = sorted_copy(errors_km);
  const size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double acc_at(std::span<const double> errors_km, double threshold_km) {
  if (errors_km.empty()) raise(Errc::empty_input, "no error distances");
  if (!(threshold_km >= 0.0)) raise(Errc::invalid_argument, "threshold must be >= 0");
  size_t within = 0;
  for (double e : errors_km) {
    if (e <= threshold_km) ++within;
  }
  return static_cast<double>(within) / static_cast<double>(errors_km.size());
}

double error_at_accuracy(std::span<const double> errors_km, double q) {
  if (errors_km.empty()) raise(Errc::empty_input, "no error distances");
  if (!(q > 0.0) || q > 1.0) raise(Errc::invalid_argument, "q must lie in (0, 1]");
  const std::vector<double> v = sorted_copy(errors_km);
  const size_t n = v.size();
  size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<size_t>(rank, 1, n);
  return v[rank - 1];
}

std::map<int32_t, double> bias_weights(const std::map<int32_t, int64_t>& leaf_counts) {
  std::map<int32_t, double> weights;
  if (leaf_counts.empty()) return weights;
  int64_t total = 0;
  for (const auto& [leaf, count] : leaf_counts) {
    if (count < 1) raise(Errc::invalid_argument, "leaf counts must be >= 1");
    total += count;
  }
  const double K = static_cast<double>(leaf_counts.size());
  for (const auto& [leaf, count] : leaf_counts) {
    weights[leaf] = static_cast<double>(total) / (K * static_cast<double>(count));
  }
  return weights;
}

std::vector<std::vector<int32_t>> kfold_split(int32_t n, std::span<const int32_t> labels,
                                              int k, uint64_t seed) {
  if (k < 2) raise(Errc::invalid_argument, "k must be >= 2");
  if (static_cast<size_t>(n) != labels.size()) {
    raise(Errc::label_mismatch, "label count does not match record count");
  }
  if (n < k) {
    raise(Errc::too_few_records,
          "need at least " + std::to_string(k) + " records, have " + std::to_string(n));
  }

  std::map<int32_t, std::vector<int32_t>> groups;
  for (int32_t i = 0; i < n; ++i) groups[labels[i]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::vector<int32_t>> folds(k);
  int cursor = 0;  // carried across groups so fold sizes stay balanced
  for (auto& [label, members] : groups) {
    std::shuffle(members.begin(), members.end(), rng);
    for (int32_t idx : members) {
      folds[cursor].push_back(idx);
      cursor = (cursor + 1) % k;
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) raise(Errc::dimension_mismatch, "series differ in length");
  const size_t n = x.size();
  if (n < 2) return kNaN;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

GridDiagnostics grid_diagnostics(std::span<const PredictionOutcome> outcomes,
                                 std::span<const LeafStats> leaf_stats) {
  std::map<int32_t, std::pair<int64_t, int64_t>> by_prediction;  // leaf -> (predicted, correct)
  std::map<int32_t, int64_t> support;
  for (const PredictionOutcome& o : outcomes) {
    auto& [predicted, correct] = by_prediction[o.predicted_leaf];
    ++predicted;
    if (o.predicted_leaf == o.actual_leaf) ++correct;
    ++support[o.actual_leaf];
  }
  if (by_prediction.size() < 2) {
    raise(Errc::insufficient_leaves, "need predictions into at least two leaves");
  }

  GridDiagnostics diag;
  std::vector<double> log_counts, precisions;
  for (const LeafStats& stats : leaf_stats) {
    LeafDiagnostic row;
    row.leaf_id = stats.leaf_id;
    row.count = stats.count;
    row.log_count = stats.count > 0 ? std::log(static_cast<double>(stats.count)) : kNaN;
    auto pit = by_prediction.find(stats.leaf_id);
    row.predicted = pit == by_prediction.end() ? 0 : pit->second.first;
    row.correct = pit == by_prediction.end() ? 0 : pit->second.second;
    auto sit = support.find(stats.leaf_id);
    row.support = sit == support.end() ? 0 : sit->second;
    row.precision = row.predicted > 0
                        ? static_cast<double>(row.correct) / static_cast<double>(row.predicted)
                        : kNaN;
    row.recall = row.support > 0
                     ? static_cast<double>(row.correct) / static_cast<double>(row.support)
                     : kNaN;
    if (row.predicted > 0 && stats.count > 0) {
      log_counts.push_back(row.log_count);
      precisions.push_back(row.precision);
    }
    diag.rows.push_back(row);
  }
  diag.pearson_r = pearson(log_counts, precisions);
  return diag;
}

EvalReport cross_validate(const std::vector<Record>& records, const PipelineConfig& cfg,
                          const std::string& classifier, int32_t capacity,
                          const TestHook* hook) {
  cfg.validate();
  if (classifier != "mnb" && classifier != "logit") {
    raise(Errc::invalid_argument, "unknown classifier: " + classifier);
  }
  const int32_t n = static_cast<int32_t>(records.size());
  if (n == 0) raise(Errc::empty_training, "no records to evaluate");
  if (n < cfg.k_folds) {
    raise(Errc::too_few_records, "fewer records than folds");
  }

  // Tokenization does not depend on the fold split, so do it once.
  std::vector<std::vector<std::string>> docs(n);
  std::vector<IndexedPoint> all_points(n);
  for (int32_t i = 0; i < n; ++i) {
    docs[i] = normalize_tokenize(records[i].text, cfg.tokenizer);
    all_points[i] = IndexedPoint{static_cast<uint32_t>(i), records[i].point};
  }

  const auto tight_bounds = [](std::span<const IndexedPoint> pts) {
    BoundingBox b{90.0, -90.0, 180.0, -180.0};
    for (const IndexedPoint& ip : pts) {
      b.min_lat = std::min(b.min_lat, ip.point.lat);
      b.max_lat = std::max(b.max_lat, ip.point.lat);
      b.min_lon = std::min(b.min_lon, ip.point.lon);
      b.max_lon = std::max(b.max_lon, ip.point.lon);
    }
    return b;
  };

  // Stratification labels come from a partition over the full dataset; the
  // per-fold model partitions are rebuilt from training points only.
  const QuadtreePartition full_partition = QuadtreePartition::build(
      all_points, tight_bounds(all_points), capacity, cfg.max_depth);
  std::vector<int32_t> strat_labels(n);
  for (int32_t i = 0; i < n; ++i) strat_labels[i] = full_partition.locate(records[i].point);

  const auto folds = kfold_split(n, strat_labels, cfg.k_folds, cfg.seed);

  EvalReport report;
  report.classifier = classifier;
  report.capacity = capacity;
  report.k_folds = cfg.k_folds;
  report.seed = cfg.seed;
  report.n_records = n;
  report.config_fingerprint = cfg.fingerprint();

  std::vector<char> in_test(n);
  for (int f = 0; f < cfg.k_folds; ++f) {
    std::fill(in_test.begin(), in_test.end(), 0);
    for (int32_t idx : folds[f]) in_test[idx] = 1;

    std::vector<int32_t> train_idx;
    train_idx.reserve(n - folds[f].size());
    for (int32_t i = 0; i < n; ++i) {
      if (!in_test[i]) train_idx.push_back(i);
    }

    const auto t0 = std::chrono::steady_clock::now();

    std::vector<IndexedPoint> train_points;
    train_points.reserve(train_idx.size());
    for (int32_t i : train_idx) {
      train_points.push_back(IndexedPoint{static_cast<uint32_t>(i), records[i].point});
    }
    std::optional<QuadtreePartition> fold_partition;
    if (!cfg.global_partition) {
      fold_partition.emplace(QuadtreePartition::build(
          train_points, tight_bounds(train_points), capacity, cfg.max_depth));
    }
    const QuadtreePartition& partition =
        cfg.global_partition ? full_partition : *fold_partition;

    std::vector<int32_t> train_labels(train_idx.size());
    std::map<int32_t, int64_t> leaf_counts;
    for (size_t t = 0; t < train_idx.size(); ++t) {
      train_labels[t] = partition.locate(records[train_idx[t]].point);
      ++leaf_counts[train_labels[t]];
    }

    std::vector<std::vector<std::string>> train_docs;
    train_docs.reserve(train_idx.size());
    for (int32_t i : train_idx) train_docs.push_back(docs[i]);
    const FeatureSpace fs = build_feature_space(train_docs, cfg);

    std::vector<FeatureVector> X;
    X.reserve(train_idx.size());
    for (const auto& doc : train_docs) X.push_back(vectorize(doc, fs.vocab));

    std::vector<double> sample_weights;
    if (cfg.bias_train) {
      const auto weights = bias_weights(leaf_counts);
      sample_weights.reserve(train_labels.size());
      for (int32_t label : train_labels) sample_weights.push_back(weights.at(label));
    }

    MnbModel mnb;
    LogitModel logit;
    if (!hook) {
      if (classifier == "mnb") {
        mnb = mnb_fit(X, train_labels, cfg.alpha, sample_weights, fs.vocab.size());
      } else {
        LogitOptions opt = cfg.logit;
        opt.seed = cfg.seed;
        logit = logit_fit(X, train_labels, opt, sample_weights, fs.vocab.size());
      }
    }

    const double fit_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto report_weights = bias_weights(leaf_counts);
    std::vector<double> fold_errors;
    std::vector<PredictionOutcome> fold_outcomes;
    fold_errors.reserve(folds[f].size());
    for (int32_t i : folds[f]) {
      PredictionOutcome out;
      out.record_id = records[i].record_id;
      out.fold = f;
      out.actual = records[i].point;
      out.actual_leaf = partition.locate_nearest(records[i].point);

      if (hook) {
        if (hook->kind == TestHook::Kind::perfect) {
          out.predicted_leaf = out.actual_leaf;
          out.predicted_point = out.actual;
          out.confidence = 1.0;
        } else {
          out.predicted_leaf = hook->leaf_id;
          out.predicted_point = partition.leaves().at(hook->leaf_id).centroid;
          out.confidence = 1.0;
        }
      } else {
        const FeatureVector x = vectorize(docs[i], fs.vocab);
        const ClassPrediction pred =
            classifier == "mnb" ? mnb_predict(mnb, x) : logit_predict(logit, x);
        out.predicted_leaf = pred.label;
        out.predicted_point = partition.leaves().at(pred.label).centroid;
        out.confidence = pred.posterior[pred.label];
      }

      out.error_km = haversine_km(out.actual, out.predicted_point);
      if (cfg.bias_report) {
        auto wit = report_weights.find(out.actual_leaf);
        out.weight = wit == report_weights.end() ? 1.0 : wit->second;
      }
      fold_errors.push_back(out.error_km);
      fold_outcomes.push_back(out);
    }

    FoldMetrics fm;
    fm.fold = f;
    fm.n_test = static_cast<int64_t>(folds[f].size());
    fm.aed_km = aed(fold_errors);
    fm.med_km = med(fold_errors);
    fm.acc_at_161 = acc_at(fold_errors, 161.0);
    fm.fit_seconds = cfg.record_timing ? fit_seconds : 0.0;
    report.per_fold.push_back(fm);
    report.measured_fit_seconds += fit_seconds;

    // Per-leaf diagnostics for this fold's partition, when defined.
    std::map<int32_t, int64_t> distinct_predicted;
    for (const PredictionOutcome& o : fold_outcomes) ++distinct_predicted[o.predicted_leaf];
    if (distinct_predicted.size() >= 2) {
      GridDiagnostics diag = grid_diagnostics(fold_outcomes, partition.leaf_stats());
      for (LeafDiagnostic& row : diag.rows) {
        row.fold = f;
        report.per_leaf.push_back(row);
      }
    }

    report.outcomes.insert(report.outcomes.end(), fold_outcomes.begin(), fold_outcomes.end());
  }

  std::vector<double> errors;
  errors.reserve(report.outcomes.size());
  for (const PredictionOutcome& o : report.outcomes) errors.push_back(o.error_km);
  report.aed_km = aed(errors);
  report.med_km = med(errors);
  report.acc_at_161 = acc_at(errors, 161.0);
  report.err_at_acc90_km = error_at_accuracy(errors, 0.90);

  if (cfg.bias_report) {
    double wsum = 0.0, werr = 0.0, wwithin = 0.0;
    std::vector<std::pair<double, double>> weighted;  // (error, weight)
    weighted.reserve(report.outcomes.size());
    for (const PredictionOutcome& o : report.outcomes) {
      wsum += o.weight;
      werr += o.weight * o.error_km;
      if (o.error_km <= 161.0) wwithin += o.weight;
      weighted.emplace_back(o.error_km, o.weight);
    }
    std::sort(weighted.begin(), weighted.end());
    double cum = 0.0;
    double wmed = weighted.back().first;
    for (const auto& [err, w] : weighted) {
      cum += w;
      if (cum >= 0.5 * wsum) {
        wmed = err;
        break;
      }
    }
    report.weighted_aed_km = werr / wsum;
    report.weighted_med_km = wmed;
    report.weighted_acc_at_161 = wwithin / wsum;
  }

  std::vector<double> pooled_logs, pooled_precisions;
  for (const LeafDiagnostic& row : report.per_leaf) {
    if (row.predicted > 0 && row.count > 0) {
      pooled_logs.push_back(row.log_count);
      pooled_precisions.push_back(row.precision);
    }
  }
  report.pearson_r = pearson(pooled_logs, pooled_precisions);

  report.total_fit_seconds = cfg.record_timing ? report.measured_fit_seconds : 0.0;
  return report;
}

}  // namespace geoinfer
