// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit when
// any gating criterion fails. Tolerances are pinned in the checks below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "classify.hpp"
#include "config.hpp"
#include "embedding.hpp"
#include "eval.hpp"
#include "geo.hpp"
#include "json.hpp"
#include "pipeline.hpp"
#include "quadtree.hpp"
#include "synthetic.hpp"

using namespace geoinfer;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& note = "") {
  std::printf("%s - %s%s%s\n", pass ? "PASS" : "FAIL", name.c_str(),
              note.empty() ? "" : ": ", note.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct TempDir {
  std::string path = synth::temp_dir("accept");
  ~TempDir() { fs::remove_all(path); }
};

// ---------------------------------------------------------------------------
// 1. Haversine versus an independent spherical-law-of-cosines oracle.

double law_of_cosines_km(const GeoPoint& a, const GeoPoint& b) {
  const double d2r = M_PI / 180.0;
  const double p1 = a.lat * d2r, p2 = b.lat * d2r;
  double c = std::sin(p1) * std::sin(p2) +
             std::cos(p1) * std::cos(p2) * std::cos((b.lon - a.lon) * d2r);
  c = std::min(1.0, std::max(-1.0, c));
  return kEarthRadiusKm * std::acos(c);
}

void criterion_haversine() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> lat(25.0, 49.0), lon(-124.0, -67.0);

  int checked = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
    const double h = haversine_km(a, b);
    const double o = law_of_cosines_km(a, b);
    if (h <= 1.0) continue;
    ++checked;
    worst = std::max(worst, std::fabs(h - o) / o);
  }
  const double elapsed = seconds_since(start);

  char note[160];
  std::snprintf(note, sizeof(note), "%d pairs > 1 km, worst rel err %.2e, %.3f s",
                checked, worst, elapsed);
  report("haversine agrees with law-of-cosines oracle (0.5%, < 1 s)",
         checked > 9000 && worst < 0.005 && elapsed < 1.0, note);
}

// ---------------------------------------------------------------------------
// 2. Quadtree capacity invariant at scale.

void criterion_quadtree_capacity() {
  const BoundingBox bounds{24.0, 50.0, -125.0, -66.0};
  const auto points = synth::random_points(100000, bounds, 8675309);

  const auto start = std::chrono::steady_clock::now();
  const auto tree = QuadtreePartition::build(points, bounds, 1000, 20);
  const double elapsed = seconds_since(start);

  int64_t total = 0;
  bool capacity_ok = true;
  for (const QuadtreeLeaf& leaf : tree.leaves()) {
    total += static_cast<int64_t>(leaf.point_ids.size());
    if (leaf.depth < 20 && leaf.point_ids.size() > 1000) capacity_ok = false;
  }

  char note[160];
  std::snprintf(note, sizeof(note), "%d leaves, sum %lld, %.3f s", tree.leaf_count(),
                static_cast<long long>(total), elapsed);
  report("quadtree capacity invariant on 1e5 points (cap 1000, < 2 s)",
         capacity_ok && total == 100000 && elapsed < 2.0, note);
}

// ---------------------------------------------------------------------------
// 3. Radius query equals brute force.

void criterion_radius_query() {
  std::mt19937_64 rng(424242);
  const BoundingBox bounds{25.0, 49.0, -124.0, -67.0};
  std::uniform_real_distribution<double> lat(24.0, 50.0), lon(-125.0, -66.0);
  std::uniform_real_distribution<double> radius(0.0, 1200.0);

  bool all_equal = true;
  for (int instance = 0; instance < 20 && all_equal; ++instance) {
    const auto points = synth::random_points(1000, bounds, 5000 + instance);
    const auto tree = QuadtreePartition::build(points, bounds, 25);

    for (int q = 0; q < 10; ++q) {
      const GeoPoint center{lat(rng), lon(rng)};
      const double r = radius(rng);
      std::vector<uint32_t> expect;
      for (const auto& ip : points) {
        if (haversine_km(center, ip.point) <= r) expect.push_back(ip.record_id);
      }
      std::sort(expect.begin(), expect.end());
      if (tree.radius_query(center, r) != expect) {
        all_equal = false;
        break;
      }
    }
  }
  report("radius query set-equals brute force (20 x 1000 pts x 10 queries)", all_equal);
}

// ---------------------------------------------------------------------------
// 4. Naive Bayes versus direct probability enumeration, exhaustively.

int64_t ipow(int64_t base, int exp) {
  int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void criterion_mnb_enumeration() {
  // Every corpus with one document per class, 3 classes x 3 features,
  // per-document counts <= 3 (empty documents excluded: 63^3 corpora), each
  // scored against a fixed set of test documents. The oracle works in exact
  // integer arithmetic: with alpha = 1 the posterior of class k is
  // proportional to prod_j (1 + c_kj)^t_j / (3 + total_k)^T, so classes
  // compare by int64 cross-multiplication with no rounding anywhere. When
  // the exact scores tie, any tied class is a correct answer (the products
  // are equal, so the enumeration cannot prefer one); otherwise the match
  // must be exact.
  const int32_t V = 3;
  std::vector<std::vector<int32_t>> combos;
  for (int a = 0; a <= 3; ++a) {
    for (int b = 0; b <= 3; ++b) {
      for (int c = 0; c <= 3; ++c) {
        if (a + b + c > 0) combos.push_back({a, b, c});
      }
    }
  }

  const std::vector<std::vector<int32_t>> tests = {
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {3, 0, 2}, {2, 3, 1}, {0, 0, 0}};

  const auto to_fv = [](const std::vector<int32_t>& counts) {
    FeatureVector x;
    for (int32_t j = 0; j < static_cast<int32_t>(counts.size()); ++j) {
      if (counts[j] > 0) x.entries.emplace_back(j, counts[j]);
    }
    return x;
  };

  long long corpora = 0, scored = 0, mismatches = 0, strict = 0;
  for (size_t ia = 0; ia < combos.size(); ++ia) {
    for (size_t ib = 0; ib < combos.size(); ++ib) {
      for (size_t ic = 0; ic < combos.size(); ++ic) {
        ++corpora;
        const std::vector<FeatureVector> X = {to_fv(combos[ia]), to_fv(combos[ib]),
                                              to_fv(combos[ic])};
        const std::vector<int32_t> y = {0, 1, 2};
        const MnbModel m = mnb_fit(X, y, 1.0, {}, V);

        const std::vector<int32_t>* docs[3] = {&combos[ia], &combos[ib], &combos[ic]};
        int64_t den[3];  // 3 + total count, the shared smoothing denominator
        for (int k = 0; k < 3; ++k) {
          den[k] = 3 + (*docs[k])[0] + (*docs[k])[1] + (*docs[k])[2];
        }

        for (const auto& t : tests) {
          ++scored;
          const int T = t[0] + t[1] + t[2];
          int64_t num[3];  // prod_j (1 + c_kj)^t_j, at most 4^6
          for (int k = 0; k < 3; ++k) {
            num[k] = 1;
            for (int j = 0; j < V; ++j) num[k] *= ipow(1 + (*docs[k])[j], t[j]);
          }
          // score_a > score_b  <=>  num_a * den_b^T > num_b * den_a^T;
          // priors are uniform (one document per class) and cancel.
          const auto cmp = [&](int a, int b) {
            return num[a] * ipow(den[b], T) - num[b] * ipow(den[a], T);
          };
          int best = 0;
          for (int k = 1; k < 3; ++k) {
            if (cmp(k, best) > 0) best = k;
          }
          bool tied[3];
          int tie_count = 0;
          for (int k = 0; k < 3; ++k) {
            tied[k] = cmp(k, best) == 0;
            tie_count += tied[k];
          }
          if (tie_count == 1) ++strict;

          const int32_t got = mnb_predict(m, to_fv(t)).label;
          if (got < 0 || got > 2 || !tied[got]) ++mismatches;
        }
      }
    }
  }

  char note[200];
  std::snprintf(note, sizeof(note),
                "%lld corpora x %zu docs, %lld strictly decided of %lld, %lld mismatches",
                corpora, tests.size(), strict, scored, mismatches);
  report("naive Bayes matches exhaustive probability enumeration (exact)",
         mismatches == 0, note);
}

// ---------------------------------------------------------------------------
// 5. Logit gradient versus central finite differences.

void criterion_logit_gradient() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> count(0, 3);
  std::uniform_real_distribution<double> param(-0.8, 0.8);
  std::uniform_real_distribution<double> l2_choice(0.0, 2.0);

  const int32_t K = 3, V = 4, N = 5;
  bool grads_ok = true;
  double worst = 0.0;

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FeatureVector> X;
    std::vector<int32_t> y;
    for (int i = 0; i < N; ++i) {
      FeatureVector x;
      for (int32_t j = 0; j < V; ++j) {
        const int c = count(rng);
        if (c > 0) x.entries.emplace_back(j, c);
      }
      X.push_back(std::move(x));
      y.push_back(i % K);  // all three classes appear
    }
    const double l2 = l2_choice(rng);
    std::vector<double> params(K * V + K);
    for (auto& prm : params) prm = param(rng);

    const auto grad = logit_gradient(params, K, V, X, y, {}, l2);
    const double h = 1e-5;
    for (size_t i = 0; i < params.size(); ++i) {
      auto plus = params, minus = params;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (logit_objective(plus, K, V, X, y, {}, l2) -
                         logit_objective(minus, K, V, X, y, {}, l2)) /
                        (2.0 * h);
      const double rel = std::fabs(fd - grad[i]) / std::max(1.0, std::fabs(grad[i]));
      worst = std::max(worst, rel);
      if (rel > 1e-5) grads_ok = false;
    }
  }

  // Monotone objective trace on a fresh random problem.
  std::vector<FeatureVector> X;
  std::vector<int32_t> y;
  for (int i = 0; i < 40; ++i) {
    FeatureVector x;
    for (int32_t j = 0; j < 6; ++j) {
      const int c = count(rng);
      if (c > 0) x.entries.emplace_back(j, c);
    }
    X.push_back(std::move(x));
    y.push_back(i % 3);
  }
  const LogitModel m = logit_fit(X, y);
  bool monotone = m.objective_trace.size() >= 2;
  for (size_t i = 1; i < m.objective_trace.size(); ++i) {
    if (m.objective_trace[i] < m.objective_trace[i - 1] - 1e-12) monotone = false;
  }

  char note[160];
  std::snprintf(note, sizeof(note), "worst rel err %.2e over 20 problems, trace len %zu",
                worst, m.objective_trace.size());
  report("logit gradient matches finite differences (1e-5) and ascent is monotone",
         grads_ok && monotone, note);
}

// ---------------------------------------------------------------------------
// 6. Metric oracles.

void criterion_metrics() {
  bool ok = true;

  const std::vector<double> errs = {4.0, 1.0, 3.0, 2.0};
  ok = ok && aed(errs) == 2.5;
  ok = ok && med(errs) == 2.5;
  ok = ok && med(std::vector<double>{9.0, 1.0, 5.0}) == 5.0;

  const std::vector<double> accs = {100.0, 161.0, 161.0001, 200.0};
  ok = ok && acc_at(accs, 161.0) == 0.5;  // inclusive threshold

  const std::vector<double> deciles = {70.0, 10.0, 50.0, 30.0, 90.0,
                                       100.0, 20.0, 40.0, 60.0, 80.0};
  ok = ok && error_at_accuracy(deciles, 0.90) == 90.0;
  ok = ok && error_at_accuracy(deciles, 1.00) == 100.0;
  ok = ok && error_at_accuracy(deciles, 0.05) == 10.0;

  // Monotonicity of accuracy in the threshold over random inputs.
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> err(0.0, 900.0);
  for (int trial = 0; trial < 20 && ok; ++trial) {
    std::vector<double> errors;
    for (int i = 0; i < 100; ++i) errors.push_back(err(rng));
    double prev = -1.0;
    for (double d = 0.0; d <= 950.0; d += 23.0) {
      const double a = acc_at(errors, d);
      if (a < prev) ok = false;
      prev = a;
    }
  }

  report("error metrics match hand-built examples; accuracy monotone in threshold", ok);
}

// ---------------------------------------------------------------------------
// 7. End-to-end synthetic reproduction through cmd_evaluate.

void criterion_end_to_end() {
  TempDir tmp;
  const auto records =
      synth::cluster_corpus(synth::four_city_clusters(50), 1000, 8, 0.10, 20, 777);

  PipelineConfig cfg;
  cfg.corpus_path = tmp.path + "/corpus.tsv";
  cfg.output_dir = tmp.path + "/out";
  cfg.capacity = 500;
  cfg.classifiers = {"logit"};
  // Plain bag-of-words: on a corpus this small every CBOW vector shares one
  // dominant direction, so cosine merging would fold the disjoint city
  // vocabularies into the shared noise tokens and erase the signal the
  // criterion measures. The reduction path has its own criterion.
  cfg.embedding = PipelineConfig::EmbeddingSource::off;
  synth::write_file(cfg.corpus_path, synth::to_tsv(records));

  const auto start = std::chrono::steady_clock::now();
  bool ok = false;
  double acc = 0.0, med_km = 0.0, elapsed = 0.0;
  std::string note;
  try {
    cmd_evaluate(cfg);
    elapsed = seconds_since(start);

    const auto report_doc =
        nlohmann::json::parse(synth::read_file(tmp.path + "/out/report.json"));
    const auto& metrics = report_doc.at("runs").at(0).at("metrics");
    acc = metrics.at("acc_at_161").get<double>();
    med_km = metrics.at("med_km").get<double>();
    ok = acc >= 0.95 && med_km < 50.0 && elapsed < 60.0;

    char buf[160];
    std::snprintf(buf, sizeof(buf), "ACC@161 %.4f, MED %.2f km, %.1f s", acc, med_km,
                  elapsed);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report("4-cluster synthetic end-to-end: ACC@161 >= 0.95, MED < 50 km, < 60 s", ok,
         note);
}

// ---------------------------------------------------------------------------
// 8. Qualitative capacity trend: finer partitions help.

void criterion_capacity_trend() {
  TempDir tmp;
  const auto clusters = synth::grid_clusters(4, 4, 30.0, 5.0, -115.0, 10.0);
  const auto records = synth::cluster_corpus(clusters, 300, 6, 0.0, 0, 99);

  PipelineConfig cfg;
  cfg.corpus_path = tmp.path + "/corpus.tsv";
  cfg.output_dir = tmp.path + "/out";
  cfg.capacities = {2000, 150};
  cfg.classifiers = {"mnb"};
  cfg.embedding = PipelineConfig::EmbeddingSource::off;
  cfg.k_folds = 5;
  synth::write_file(cfg.corpus_path, synth::to_tsv(records));

  bool ok = false;
  std::string note;
  try {
    cmd_evaluate(cfg);
    const auto report_doc =
        nlohmann::json::parse(synth::read_file(tmp.path + "/out/report.json"));
    double med_coarse = 0.0, med_fine = 0.0;
    for (const auto& run : report_doc.at("runs")) {
      const double m = run.at("metrics").at("med_km").get<double>();
      if (run.at("capacity").get<int>() == 2000) med_coarse = m;
      if (run.at("capacity").get<int>() == 150) med_fine = m;
    }
    ok = med_fine < med_coarse;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "MED %.2f km at cap 150 vs %.2f km at cap 2000",
                  med_fine, med_coarse);
    note = buf;
  } catch (const std::exception& e) {
    note = e.what();
  }
  report("capacity trend: finest MED strictly below coarsest (16 clusters)", ok, note);
}

// ---------------------------------------------------------------------------
// 9. Vocabulary reduction properties.

void criterion_vocab_reduction() {
  bool ok = true;
  std::string note;

  // Hand enumeration: bigram multisets of good/goood share 5 of 6 grams.
  ok = ok && jaccard_similarity(char_ngram_set("good", 2), char_ngram_set("goood", 2)) ==
                 5.0 / 6.0;

  // The pair merges at threshold 0.8.
  {
    std::vector<std::vector<std::string>> corpus;
    for (int i = 0; i < 10; ++i) corpus.push_back({"good"});
    corpus.push_back({"goood"});
    const auto vocab = Vocabulary::build(corpus, 1);
    const MergeMap merges = reduce_vocabulary(vocab, EmbeddingTable{}, 0.85, 0.80, 2);
    ok = ok && merges.canonical("goood") == "good";
  }

  // Idempotence on random vocabularies: canonical(canonical(t)) stabilizes
  // after one application for every token, with and without embeddings.
  std::mt19937_64 rng(2025);
  const std::string alphabet = "abcdefgh";
  for (int trial = 0; trial < 10 && ok; ++trial) {
    std::vector<std::string> tokens;
    std::set<std::string> seen;
    for (int i = 0; i < 60; ++i) {
      std::string t;
      const int len = 3 + static_cast<int>(rng() % 5);
      for (int c = 0; c < len; ++c) t += alphabet[rng() % alphabet.size()];
      if (rng() % 3 == 0 && !tokens.empty()) {
        t = tokens[rng() % tokens.size()];  // near-duplicate base
        t.insert(rng() % t.size(), 1, t[rng() % t.size()]);
      }
      if (seen.insert(t).second) tokens.push_back(t);
    }
    std::vector<int64_t> dfs;
    for (size_t i = 0; i < tokens.size(); ++i) dfs.push_back(1 + rng() % 30);
    const auto vocab = Vocabulary::from_parts(tokens, dfs, {});

    EmbeddingTable table(8);
    for (const auto& t : tokens) {
      std::vector<float> v(8);
      for (auto& x : v) x = static_cast<float>(rng() % 1000) / 500.0f - 1.0f;
      table.add(t, std::move(v));
    }

    const MergeMap merges = reduce_vocabulary(vocab, table, 0.9, 0.7, 2);
    for (const auto& t : tokens) {
      const std::string& once = merges.canonical(t);
      if (merges.canonical(once) != once) ok = false;
      if (merges.is_merged(once)) ok = false;  // canonical targets stay roots
    }
    // Applying the map yields a vocabulary that contains no merged token as
    // a feature.
    const Vocabulary reduced = apply_merge_map(vocab, merges);
    for (const auto& [from, target] : merges.entries()) {
      if (reduced.id_of(from) != reduced.id_of(target.first)) ok = false;
      for (const auto& feature : reduced.tokens()) {
        if (feature == from) ok = false;
      }
    }
  }

  report("vocabulary reduction: goood->good at 0.8 (jaccard 5/6), merges idempotent",
         ok);
}

// ---------------------------------------------------------------------------
// 10. Reference-corpus reproduction, informational.

void criterion_reference_corpus() {
  const char* path = std::getenv("GEOINFER_REFERENCE_CORPUS");
  if (!path || !*path) {
    report("reference-corpus reproduction (informational)", true,
           "skipped, set GEOINFER_REFERENCE_CORPUS to a TSV corpus to enable");
    return;
  }

  TempDir tmp;
  PipelineConfig cfg;
  cfg.corpus_path = path;
  cfg.output_dir = tmp.path;
  cfg.capacity = 5000;
  cfg.classifiers = {"logit"};
  std::string note;
  try {
    cmd_evaluate(cfg);
    const auto doc = nlohmann::json::parse(synth::read_file(tmp.path + "/report.json"));
    const auto& metrics = doc.at("runs").at(0).at("metrics");
    const double acc = metrics.at("acc_at_161").get<double>();
    const double med_km = metrics.at("med_km").get<double>();
    const double aed_km = metrics.at("aed_km").get<double>();

    // Published reference rows for this configuration: MED 39.15 km,
    // AED 598.44 km, ACC@161 59.47% (and 45.00 / 600.79 / 60.24 on the
    // smaller companion corpus). Advisory band: ACC within 10 points.
    const bool within = std::fabs(acc - 0.5947) <= 0.10 || std::fabs(acc - 0.6024) <= 0.10;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "MED %.2f km, AED %.2f km, ACC@161 %.4f; reference 39.15 / 598.44 / "
                  "0.5947, advisory band %s",
                  med_km, aed_km, acc, within ? "met" : "NOT met");
    note = buf;
  } catch (const std::exception& e) {
    note = std::string("run failed: ") + e.what();
  }
  // Informational: never gates.
  report("reference-corpus reproduction (informational)", true, note);
}

// ---------------------------------------------------------------------------
// 11. Byte-identical artifacts across identical runs.

void criterion_determinism() {
  TempDir tmp;
  const auto records =
      synth::cluster_corpus(synth::four_city_clusters(12), 150, 6, 0.05, 10, 31415);

  PipelineConfig cfg;
  cfg.corpus_path = tmp.path + "/corpus.tsv";
  cfg.capacity = 120;
  cfg.classifiers = {"mnb", "logit"};
  cfg.k_folds = 3;
  cfg.cbow.dim = 16;
  cfg.cbow.epochs = 2;
  cfg.logit.max_iter = 30;
  synth::write_file(cfg.corpus_path, synth::to_tsv(records));

  bool ok = true;
  std::string note;
  try {
    cfg.output_dir = tmp.path + "/a";
    cmd_evaluate(cfg);
    cfg.output_dir = tmp.path + "/b";
    cmd_evaluate(cfg);

    for (const char* name : {"metrics.csv", "report.json", "diagnostics_mnb_120.csv",
                             "diagnostics_logit_120.csv"}) {
      const std::string a = synth::read_file(tmp.path + "/a/" + std::string(name));
      const std::string b = synth::read_file(tmp.path + "/b/" + std::string(name));
      if (a.empty() || a != b) {
        ok = false;
        note = std::string(name) + " differs";
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    note = e.what();
  }
  report("identical config and seed give byte-identical CSV/JSON artifacts", ok, note);
}

}  // namespace

int main() {
  criterion_haversine();
  criterion_quadtree_capacity();
  criterion_radius_query();
  criterion_mnb_enumeration();
  criterion_logit_gradient();
  criterion_metrics();
  criterion_end_to_end();
  criterion_capacity_trend();
  criterion_vocab_reduction();
  criterion_reference_corpus();
  criterion_determinism();

  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
