#include "alwb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "alwb/errors.hpp"
#include "alwb/rng.hpp"

namespace alwb {

double f1_score(double precision, double recall) {
  return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

PRF PRF::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  PRF r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

namespace {

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

template <typename Sink>
void count_matches(const SpanSets& gold, const SpanSets& pred, Sink&& sink) {
  if (gold.size() != pred.size()) {
    throw DataError("phrase_prf: " + std::to_string(gold.size()) + " gold vs " + std::to_string(pred.size()) +
                    " predicted sentences");
  }
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const std::set<ConceptSpan> g(gold[s].begin(), gold[s].end());
    const std::set<ConceptSpan> p(pred[s].begin(), pred[s].end());
    for (const auto& span : p) sink(span.type, g.count(span) ? 0 : 1);
    for (const auto& span : g) {
      if (!p.count(span)) sink(span.type, 2);
    }
  }
}

}  // namespace

PRF phrase_prf(const SpanSets& gold, const SpanSets& pred) {
  Counts c;
  count_matches(gold, pred, [&](const std::string&, int kind) {
    (kind == 0 ? c.tp : kind == 1 ? c.fp : c.fn) += 1;
  });
  return PRF::from_counts(c.tp, c.fp, c.fn);
}

std::map<std::string, PRF> phrase_prf_by_type(const SpanSets& gold, const SpanSets& pred) {
  std::map<std::string, Counts> by;
  count_matches(gold, pred, [&](const std::string& type, int kind) {
    auto& c = by[type];
    (kind == 0 ? c.tp : kind == 1 ? c.fp : c.fn) += 1;
  });
  std::map<std::string, PRF> out;
  for (const auto& [type, c] : by) out.emplace(type, PRF::from_counts(c.tp, c.fp, c.fn));
  return out;
}

TTestResult five_by_two_ttest(const FoldMatrix& scores_a, const FoldMatrix& scores_b) {
  TTestResult r;
  r.differences = scores_a - scores_b;
  const Eigen::Matrix<double, 5, 1> mean = r.differences.rowwise().mean();
  const double var_sum = (r.differences.colwise() - mean).squaredNorm();
  const double numerator = r.differences(0, 0);
  if (var_sum == 0.0) {
    if (numerator == 0.0) {
      r.t_statistic = 0.0;
      r.significant_at_05 = false;
    } else {
      r.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), numerator);
      r.significant_at_05 = true;
    }
    return r;
  }
  r.t_statistic = numerator / std::sqrt(var_sum / 5.0);
  r.significant_at_05 = std::abs(r.t_statistic) > kT5Critical05;
  return r;
}

std::array<Halving, 5> make_5x2_splits(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw DataError("5x2 splits need at least 2 sequences");
  std::array<Halving, 5> out;
  for (std::size_t rep = 0; rep < 5; ++rep) {
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(derive_seed(seed, 0x35783263ULL + rep));
    shuffle(ids, rng);
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    std::vector<int> a(ids.begin(), ids.begin() + half);
    std::vector<int> b(ids.begin() + half, ids.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    out[rep] = {std::move(a), std::move(b)};
  }
  return out;
}

std::array<Halving, 5> make_5x2_splits(const Corpus& train, std::uint64_t seed) {
  return make_5x2_splits(train.size(), seed);
}

}  // namespace alwb
