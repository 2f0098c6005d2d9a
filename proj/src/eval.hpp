#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "geo.hpp"
#include "quadtree.hpp"
#include "textproc.hpp"

namespace geoinfer {

// Mean error distance in km.
double aed(std::span<const double> errors_km);
// Median error distance; an even count averages the two middle values.
double med(std::span<const double> errors_km);
// Fraction of errors <= threshold_km (161 km is the 100-mile rule).
double acc_at(std::span<const double> errors_km, double threshold_km = 161.0);
// Smallest error e such that acc_at(errors, e) >= q: the ceil(q*N)-th order
// statistic. q must lie in (0, 1].
double error_at_accuracy(std::span<const double> errors_km, double q = 0.90);

// Inverse-frequency weights per leaf: w_k = N / (K * n_k). The weighted
// mean of the weights over all samples is 1.
std::map<int32_t, double> bias_weights(const std::map<int32_t, int64_t>& leaf_counts);

// Stratified k-fold assignment: each label group is shuffled with the seed
// and dealt round-robin, carrying the dealing position across groups so
// fold sizes stay within one of each other. Throws too_few_records when
// n < k. Returns k disjoint index lists covering 0..n-1.
std::vector<std::vector<int32_t>> kfold_split(int32_t n, std::span<const int32_t> labels,
                                              int k, uint64_t seed);

struct PredictionOutcome {
  uint32_t record_id = 0;
  int fold = 0;
  GeoPoint actual;
  int32_t actual_leaf = -1;
  int32_t predicted_leaf = -1;
  GeoPoint predicted_point;
  double error_km = 0.0;
  double confidence = 0.0;
  double weight = 1.0;  // bias weight of the actual leaf when enabled
};

struct LeafDiagnostic {
  int fold = 0;
  int32_t leaf_id = -1;
  int64_t count = 0;       // training points in the leaf
  double log_count = 0.0;  // natural log of count
  int64_t predicted = 0;   // test records predicted into this leaf
  int64_t correct = 0;
  int64_t support = 0;     // test records actually in this leaf
  double precision = 0.0;  // NaN when nothing was predicted into the leaf
  double recall = 0.0;     // NaN when support is zero
};

struct GridDiagnostics {
  std::vector<LeafDiagnostic> rows;
  // Pearson correlation between log leaf count and per-leaf precision over
  // leaves with defined precision; NaN when variance vanishes.
  double pearson_r = 0.0;
};

// Requires at least two distinct predicted leaves (insufficient_leaves
// otherwise). Leaves never predicted into get NaN precision and are
// excluded from the correlation.
GridDiagnostics grid_diagnostics(std::span<const PredictionOutcome> outcomes,
                                 std::span<const LeafStats> leaf_stats);

// Pearson correlation coefficient; NaN when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct FoldMetrics {
  int fold = 0;
  int64_t n_test = 0;
  double aed_km = 0.0;
  double med_km = 0.0;
  double acc_at_161 = 0.0;
  double fit_seconds = 0.0;  // stays 0 unless timing is enabled
};

struct EvalReport {
  std::string classifier;
  int32_t capacity = 0;
  int k_folds = 0;
  uint64_t seed = 0;
  int64_t n_records = 0;
  std::string config_fingerprint;

  double aed_km = 0.0;
  double med_km = 0.0;
  double acc_at_161 = 0.0;
  double err_at_acc90_km = 0.0;

  // Present only when bias-aware reporting is on.
  std::optional<double> weighted_aed_km;
  std::optional<double> weighted_med_km;
  std::optional<double> weighted_acc_at_161;

  std::vector<FoldMetrics> per_fold;
  std::vector<LeafDiagnostic> per_leaf;  // fold-tagged rows
  double pearson_r = 0.0;                // pooled over all defined rows

  std::vector<PredictionOutcome> outcomes;  // pooled, in fold order
  double total_fit_seconds = 0.0;           // 0 unless timing is enabled
  double measured_fit_seconds = 0.0;        // always the real wall clock
};

// Hooks for exercising the evaluation plumbing with known-perfect or
// constant classifiers. Not reachable from configuration files.
struct TestHook {
  enum class Kind { perfect, fixed_leaf };
  Kind kind = Kind::perfect;
  int32_t leaf_id = 0;
};

// Stratified k-fold cross-validation of the full pipeline: per fold, a
// quadtree is built from training points, training records are labeled by
// leaf, a feature space is built from training text, the classifier is fit,
// and test records are scored by the distance from their true coordinate to
// the predicted leaf's centroid. Fold labels for stratification come from a
// full-data partition at the same capacity.
EvalReport cross_validate(const std::vector<Record>& records, const PipelineConfig& cfg,
                          const std::string& classifier, int32_t capacity,
                          const TestHook* hook = nullptr);

}  // namespace geoinfer
