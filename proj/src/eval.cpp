#include "qbar/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qbar {

ConfusionCounts confusion(const std::vector<bool>& labels,
                          const std::vector<bool>& predictions) {
  if (labels.size() != predictions.size())
    fail(ErrorCode::LengthMismatch, "labels and predictions differ in length");
  ConfusionCounts c;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i])
      labels[i] ? ++c.tp : ++c.fp;
    else
      labels[i] ? ++c.fn : ++c.tn;
  }
  return c;
}

Prf1 prf1(const ConfusionCounts& c) {
  Prf1 out;
  out.precision = (c.tp + c.fp) > 0 ? double(c.tp) / double(c.tp + c.fp) : 0.0;
  out.recall = (c.tp + c.fn) > 0 ? double(c.tp) / double(c.tp + c.fn) : 0.0;
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

namespace {

std::vector<size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

double aupr(const std::vector<bool>& labels, std::span<const double> scores) {
  if (labels.size() != scores.size())
    fail(ErrorCode::LengthMismatch, "labels and scores differ in length");
  long n_pos = 0;
  for (bool y : labels) n_pos += y ? 1 : 0;
  if (n_pos == 0) fail(ErrorCode::NoPositives, "no positive labels");

  const auto idx = order_by_score_desc(scores);
  double ap = 0.0;
  long tp = 0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    long group_tp = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      group_tp += labels[idx[j]] ? 1 : 0;
      ++j;
    }
    tp += group_tp;
    ap += double(group_tp) * double(tp) / double(j);
    i = j;
  }
  return ap / double(n_pos);
}

std::vector<PrPoint> pr_curve(const std::vector<bool>& labels,
                              std::span<const double> scores) {
  if (labels.size() != scores.size())
    fail(ErrorCode::LengthMismatch, "labels and scores differ in length");
  long n_pos = 0;
  for (bool y : labels) n_pos += y ? 1 : 0;
  if (n_pos == 0) fail(ErrorCode::NoPositives, "no positive labels");

  const auto idx = order_by_score_desc(scores);
  std::vector<PrPoint> points;
  long tp = 0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      tp += labels[idx[j]] ? 1 : 0;
      ++j;
    }
    PrPoint p;
    p.threshold = scores[idx[i]];
    p.precision = double(tp) / double(j);
    p.recall = double(tp) / double(n_pos);
    points.push_back(p);
    i = j;
  }
  return points;
}

std::map<std::string, double> per_creator_fpr(
    std::span<const CreatorSample> samples,
    std::span<const std::string> known_creators) {
  std::map<std::string, std::pair<long, long>> counts;  // creator -> (fp, tn)
  for (const auto& id : known_creators) counts[id] = {0, 0};
  for (const auto& s : samples) {
    auto it = counts.find(s.creator_id);
    if (it == counts.end())
      fail(ErrorCode::UnknownCreator, "sample for unknown creator " + s.creator_id);
    if (!s.label) {
      if (s.prediction)
        ++it->second.first;
      else
        ++it->second.second;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [id, c] : counts) {
    const long denom = c.first + c.second;
    out[id] = denom > 0 ? double(c.first) / double(denom) : 0.0;
  }
  return out;
}

namespace {

MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  var /= n;  // population
  s.std_dev = std::sqrt(var);
  s.ci95_half = 1.96 * s.std_dev / std::sqrt(n);
  return s;
}

}  // namespace

AggregateReport aggregate_seeds(std::span<const SeedMetrics> reports) {
  if (reports.size() < 2)
    fail(ErrorCode::TooFewReports, "need at least 2 seed reports");
  AggregateReport out;
  out.n_seeds = static_cast<int>(reports.size());
  std::vector<double> p, r, f, a;
  for (const auto& rep : reports) {
    p.push_back(rep.pooled.precision);
    r.push_back(rep.pooled.recall);
    f.push_back(rep.pooled.f1);
    a.push_back(rep.pooled_aupr);
  }
  out.precision = summarize(p);
  out.recall = summarize(r);
  out.f1 = summarize(f);
  out.aupr = summarize(a);
  return out;
}

}  // namespace qbar
