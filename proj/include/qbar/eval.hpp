#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "qbar/error.hpp"

namespace qbar {

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;

  long total() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp; fp += o.fp; tn += o.tn; fn += o.fn;
    return *this;
  }
};

/// Exact counts; anomaly = positive class.
ConfusionCounts confusion(const std::vector<bool>& labels,
                          const std::vector<bool>& predictions);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// P = tp/(tp+fp), R = tp/(tp+fn), F1 = 2PR/(P+R); 0/0 := 0 throughout.
Prf1 prf1(const ConfusionCounts& counts);

/// Average precision: each positive contributes the precision at its score
/// threshold (ties share one threshold), divided by the number of positives.
/// Equivalently the step-function integral of the PR curve. Constant scores
/// therefore give exactly the positive prevalence.
double aupr(const std::vector<bool>& labels, std::span<const double> scores);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// One point per distinct threshold, descending; prediction rule is
/// score >= threshold. Ties in the underlying sort are resolved by stable
/// input order, which only affects emission order, not the points.
std::vector<PrPoint> pr_curve(const std::vector<bool>& labels,
                              std::span<const double> scores);

struct CreatorSample {
  std::string creator_id;
  bool label = false;       // anomaly?
  bool prediction = false;  // flagged?
};

/// fp/(fp+tn) per creator over that creator's samples; 0/0 := 0. Every known
/// creator gets an entry; a sample naming an unknown creator is an error.
std::map<std::string, double> per_creator_fpr(
    std::span<const CreatorSample> samples,
    std::span<const std::string> known_creators);

struct MetricSummary {
  double mean = 0.0;
  double std_dev = 0.0;   // population
  double ci95_half = 0.0; // 1.96 * std / sqrt(n)
};

struct SeedMetrics {
  uint64_t seed = 0;
  Prf1 pooled;
  double pooled_aupr = 0.0;
};

struct AggregateReport {
  int n_seeds = 0;
  MetricSummary precision, recall, f1, aupr;
};

AggregateReport aggregate_seeds(std::span<const SeedMetrics> reports);

}  // namespace qbar
