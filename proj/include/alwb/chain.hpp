#pragma once

// Exact inference on a linear chain given log-space potentials. Templated on
// the scalar so tests can cross-check against long double.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace alwb {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Log potentials of one sequence: emission is n x L, transition(i, j) scores
/// label i followed by label j, start/stop score the first/last label.
template <typename Scalar>
struct ChainScores {
  MatrixX<Scalar> emission;
  MatrixX<Scalar> transition;
  VectorX<Scalar> start;
  VectorX<Scalar> stop;

  Eigen::Index length() const { return emission.rows(); }
  Eigen::Index labels() const { return emission.cols(); }
};

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  using S = typename Derived::Scalar;
  const S m = x.maxCoeff();
  if (m == -std::numeric_limits<S>::infinity()) return m;
  return m + std::log((x.derived().array() - m).exp().sum());
}

template <typename Scalar>
struct BasicLattice {
  ChainScores<Scalar> scores;
  MatrixX<Scalar> log_alpha;  ///< n x L
  MatrixX<Scalar> log_beta;   ///< n x L
  Scalar log_z = 0;           ///< from the forward pass
  Scalar log_z_beta = 0;      ///< from the backward pass

  /// P(y_t = l | x), n x L.
  MatrixX<Scalar> marginals() const {
    return (log_alpha + log_beta).array().unaryExpr([this](Scalar v) { return std::exp(v - log_z); }).matrix();
  }

  /// P(y_{t-1} = i, y_t = j | x) for 1 <= t < n, L x L.
  MatrixX<Scalar> pair_marginal(Eigen::Index t) const {
    const auto L = scores.labels();
    MatrixX<Scalar> p(L, L);
    for (Eigen::Index i = 0; i < L; ++i) {
      for (Eigen::Index j = 0; j < L; ++j) {
        p(i, j) = std::exp(log_alpha(t - 1, i) + scores.transition(i, j) + scores.emission(t, j) + log_beta(t, j) -
                           log_z);
      }
    }
    return p;
  }

  /// Sum of pair_marginal(t) over 1 <= t < n.
  MatrixX<Scalar> pair_marginal_sum() const {
    const auto n = scores.length();
    const auto L = scores.labels();
    MatrixX<Scalar> acc = MatrixX<Scalar>::Zero(L, L);
    const Scalar t_max = n > 1 ? scores.transition.maxCoeff() : Scalar(0);
    if (!std::isfinite(static_cast<double>(t_max))) {
      for (Eigen::Index t = 1; t < n; ++t) acc += pair_marginal(t);
      return acc;
    }
    const MatrixX<Scalar> et = (scores.transition.array() - t_max).exp().matrix();
    VectorX<Scalar> u(L), v(L), w(L);
    for (Eigen::Index t = 1; t < n; ++t) {
      const Scalar mu = log_alpha.row(t - 1).maxCoeff();
      u = (log_alpha.row(t - 1).array() - mu).exp().transpose();
      w = (scores.emission.row(t) + log_beta.row(t)).transpose();
      const Scalar mv = w.maxCoeff();
      v = (w.array() - mv).exp().matrix();
      using std::exp;
      acc.noalias() += exp(mu + mv + t_max - log_z) * (u * v.transpose()).cwiseProduct(et);
    }
    return acc;
  }
};

/// Forward-backward in log space. Requires length >= 1.
template <typename Scalar>
BasicLattice<Scalar> forward_backward_log(ChainScores<Scalar> scores) {
  const auto n = scores.length();
  const auto L = scores.labels();
  BasicLattice<Scalar> lat;
  lat.log_alpha.resize(n, L);
  lat.log_beta.resize(n, L);
  VectorX<Scalar> work(L);

  lat.log_alpha.row(0) = scores.start.transpose() + scores.emission.row(0);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      work = lat.log_alpha.row(t - 1).transpose() + scores.transition.col(j);
      lat.log_alpha(t, j) = log_sum_exp(work) + scores.emission(t, j);
    }
  }
  lat.log_z = log_sum_exp((lat.log_alpha.row(n - 1).transpose() + scores.stop).eval());

  lat.log_beta.row(n - 1) = scores.stop.transpose();
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    for (Eigen::Index i = 0; i < L; ++i) {
      work = scores.transition.row(i).transpose() + scores.emission.row(t + 1).transpose() +
             lat.log_beta.row(t + 1).transpose();
      lat.log_beta(t, i) = log_sum_exp(work);
    }
  }
  lat.log_z_beta =
      log_sum_exp((scores.start + scores.emission.row(0).transpose() + lat.log_beta.row(0).transpose()).eval());
  lat.scores = std::move(scores);
  return lat;
}

/// Same result as forward_backward_log, computed with per-position rescaled
/// probabilities so each step is a matrix-vector product. Falls back to the
/// log-space recursion when a rescaled row underflows or is not finite.
template <typename Scalar>
BasicLattice<Scalar> forward_backward(ChainScores<Scalar> scores) {
  using std::exp;
  using std::log;
  const auto n = scores.length();
  const auto L = scores.labels();
  const Scalar t_max = scores.transition.maxCoeff();
  if (!std::isfinite(static_cast<double>(t_max))) return forward_backward_log(std::move(scores));
  const MatrixX<Scalar> et = (scores.transition.array() - t_max).exp().matrix();
  // exp(emission - row max), with the row max kept as an additive log term
  MatrixX<Scalar> ee(n, L);
  VectorX<Scalar> e_max(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    e_max(t) = scores.emission.row(t).maxCoeff();
    if (!std::isfinite(static_cast<double>(e_max(t)))) return forward_backward_log(std::move(scores));
    ee.row(t) = (scores.emission.row(t).array() - e_max(t)).exp();
  }
  const Scalar s_max = scores.start.maxCoeff();
  const Scalar f_max = scores.stop.maxCoeff();
  if (!std::isfinite(static_cast<double>(s_max)) || !std::isfinite(static_cast<double>(f_max))) {
    return forward_backward_log(std::move(scores));
  }
  const VectorX<Scalar> es = (scores.start.array() - s_max).exp().matrix();
  const VectorX<Scalar> ef = (scores.stop.array() - f_max).exp().matrix();

  BasicLattice<Scalar> lat;
  lat.log_alpha.resize(n, L);
  lat.log_beta.resize(n, L);
  VectorX<Scalar> a = es.cwiseProduct(ee.row(0).transpose());
  Scalar offset = s_max + e_max(0);
  for (Eigen::Index t = 0;; ++t) {
    const Scalar sum = a.sum();
    if (!(sum > 0) || !std::isfinite(static_cast<double>(sum))) return forward_backward_log(std::move(scores));
    a /= sum;
    offset += log(sum);
    lat.log_alpha.row(t) = a.array().log().transpose() + offset;
    if (t + 1 == n) break;
    a = (et.transpose() * a).cwiseProduct(ee.row(t + 1).transpose());
    offset += t_max + e_max(t + 1);
  }
  lat.log_z = offset + log(a.dot(ef)) + f_max;

  VectorX<Scalar> b = ef;
  offset = f_max;
  VectorX<Scalar> tmp(L);
  for (Eigen::Index t = n - 1;; --t) {
    const Scalar sum = b.sum();
    if (!(sum > 0) || !std::isfinite(static_cast<double>(sum))) return forward_backward_log(std::move(scores));
    b /= sum;
    offset += log(sum);
    lat.log_beta.row(t) = b.array().log().transpose() + offset;
    if (t == 0) break;
    tmp = b.cwiseProduct(ee.row(t).transpose());
    b = et * tmp;
    offset += t_max + e_max(t);
  }
  lat.log_z_beta = offset + log(es.cwiseProduct(ee.row(0).transpose()).dot(b)) + s_max + e_max(0);
  if (!std::isfinite(static_cast<double>(lat.log_z)) || !std::isfinite(static_cast<double>(lat.log_z_beta))) {
    return forward_backward_log(std::move(scores));
  }
  lat.scores = std::move(scores);
  return lat;
}

/// Unnormalized log score of a label path.
template <typename Scalar>
Scalar path_score(const ChainScores<Scalar>& s, std::span<const int> path) {
  Scalar v = s.start(path[0]) + s.emission(0, path[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    v += s.transition(path[t - 1], path[t]) + s.emission(ti, path[t]);
  }
  return v + s.stop(path.back());
}

template <typename Scalar>
struct BasicViterbi {
  std::vector<int> path;
  Scalar score = 0;
};

/// Best path; every argmax (backpointers and the final label) keeps the
/// lowest label index among ties.
template <typename Scalar>
BasicViterbi<Scalar> viterbi(const ChainScores<Scalar>& s) {
  const auto n = s.length();
  const auto L = s.labels();
  MatrixX<Scalar> delta(n, L);
  Eigen::MatrixXi back(n, L);
  delta.row(0) = s.start.transpose() + s.emission.row(0);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      Eigen::Index best = 0;
      Scalar best_v = delta(t - 1, 0) + s.transition(0, j);
      for (Eigen::Index i = 1; i < L; ++i) {
        const Scalar v = delta(t - 1, i) + s.transition(i, j);
        if (v > best_v) {
          best_v = v;
          best = i;
        }
      }
      delta(t, j) = best_v + s.emission(t, j);
      back(t, j) = static_cast<int>(best);
    }
  }
  Eigen::Index last = 0;
  Scalar best_v = delta(n - 1, 0) + s.stop(0);
  for (Eigen::Index j = 1; j < L; ++j) {
    const Scalar v = delta(n - 1, j) + s.stop(j);
    if (v > best_v) {
      best_v = v;
      last = j;
    }
  }
  BasicViterbi<Scalar> out;
  out.path.resize(static_cast<std::size_t>(n));
  out.path.back() = static_cast<int>(last);
  for (Eigen::Index t = n - 1; t > 0; --t) {
    out.path[static_cast<std::size_t>(t - 1)] = back(t, out.path[static_cast<std::size_t>(t)]);
  }
  out.score = best_v;
  return out;
}

}  // namespace alwb
