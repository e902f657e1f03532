#pragma once

// Exact-match phrase-level precision/recall/F1 and the 5x2cv paired t-test.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "alwb/corpus.hpp"

namespace alwb {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  static PRF from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
};

/// Harmonic mean, 0 when p + r = 0.
double f1_score(double precision, double recall);

using SpanSets = std::vector<std::vector<ConceptSpan>>;

/// Micro-averaged over all concept types. A predicted span counts as a true
/// positive iff a gold span has the same type, start and end. Throws
/// DataError when the sentence counts differ.
PRF phrase_prf(const SpanSets& gold, const SpanSets& pred);

/// Per concept type breakdown of phrase_prf.
std::map<std::string, PRF> phrase_prf_by_type(const SpanSets& gold, const SpanSets& pred);

/// Two-tailed critical value of Student t with 5 degrees of freedom, alpha 0.05.
inline constexpr double kT5Critical05 = 2.571;

using FoldMatrix = Eigen::Matrix<double, 5, 2>;

struct TTestResult {
  double t_statistic = 0.0;  ///< +/-infinity when every fold variance is 0
  int degrees_of_freedom = 5;
  bool significant_at_05 = false;
  FoldMatrix differences = FoldMatrix::Zero();
};

/// Dietterich's 5x2cv paired t-test on per-fold scores of systems a and b.
TTestResult five_by_two_ttest(const FoldMatrix& scores_a, const FoldMatrix& scores_b);

/// One replication: two disjoint halves of the sequence ids.
using Halving = std::pair<std::vector<int>, std::vector<int>>;

/// Five independent random halvings of seq ids 0..n-1. Throws DataError when
/// n < 2.
std::array<Halving, 5> make_5x2_splits(std::size_t n, std::uint64_t seed);
std::array<Halving, 5> make_5x2_splits(const Corpus& train, std::uint64_t seed);

}  // namespace alwb
