#pragma once

// Linear-chain CRF over binary string features: penalized maximum-likelihood
// training, forward-backward, Viterbi and sequence posteriors.

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "alwb/chain.hpp"
#include "alwb/featgen.hpp"

namespace alwb {

using Lattice = BasicLattice<double>;
using ViterbiResult = BasicViterbi<double>;

/// Feature indices per position plus gold label indices (empty when
/// unlabelled). Index 0 is the bias feature and is present at every position.
struct EncodedSequence {
  std::vector<std::vector<int>> features;
  std::vector<int> labels;
  int id = -1;

  std::size_t size() const { return features.size(); }
};

struct LabeledSequence {
  FeatureVector features;
  std::vector<std::string> labels;
  int id = -1;
};

inline constexpr const char* kBiasFeature = "<bias>";

/// Weight layout: emission (F x L, row-major), transition (L x L, row-major),
/// start (L), stop (L).
class CrfModel {
 public:
  CrfModel() = default;
  CrfModel(std::vector<std::string> labels, std::vector<std::string> features, double sigma2 = 10.0);

  int num_labels() const { return static_cast<int>(labels_.size()); }
  int num_features() const { return static_cast<int>(features_.size()); }
  Eigen::Index num_weights() const;

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& features() const { return features_; }
  int label_index(const std::string& label) const;  ///< -1 when unknown
  int feature_index(const std::string& feature) const;  ///< -1 when unknown

  double sigma2() const { return sigma2_; }
  void set_sigma2(double s) { sigma2_ = s; }

  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd& weights() { return weights_; }

  using RowMatrixMap =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  RowMatrixMap emission() const;
  RowMatrixMap transition() const;
  Eigen::Map<const Eigen::VectorXd> start() const;
  Eigen::Map<const Eigen::VectorXd> stop() const;

  Eigen::Index transition_offset() const;
  Eigen::Index start_offset() const;
  Eigen::Index stop_offset() const;

  /// Map features to indices, dropping those outside the alphabet.
  EncodedSequence encode(const FeatureVector& features) const;
  /// Also encodes labels; throws DataError on an unknown label.
  EncodedSequence encode(const LabeledSequence& seq) const;

  std::vector<std::string> decode_labels(const std::vector<int>& path) const;

  bool operator==(const CrfModel& o) const {
    return labels_ == o.labels_ && features_ == o.features_ && sigma2_ == o.sigma2_ && weights_ == o.weights_;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> features_;
  std::unordered_map<std::string, int> label_index_;
  std::unordered_map<std::string, int> feature_index_;
  Eigen::VectorXd weights_;
  double sigma2_ = 10.0;
};

/// Alphabets from the data: labels with "O" first then sorted, features
/// with the bias first then sorted. Weights start at zero.
CrfModel make_model(const std::vector<LabeledSequence>& data, double sigma2 = 10.0);

ChainScores<double> chain_scores(const CrfModel& model, const EncodedSequence& seq);

Lattice forward_backward(const CrfModel& model, const EncodedSequence& seq);
ViterbiResult viterbi(const CrfModel& model, const EncodedSequence& seq);

/// P(y* | x), in (0, 1].
double sequence_confidence(const CrfModel& model, const EncodedSequence& seq);

/// Sum of log P(y|x) over `data`, minus ||w||^2 / (2 sigma2) when
/// with_penalty, and its gradient (empirical - expected - w / sigma2).
/// Throws DataError naming the sequence id when a term is not finite.
double log_likelihood_and_gradient(const CrfModel& model, const std::vector<EncodedSequence>& data,
                                   Eigen::VectorXd& gradient, bool with_penalty = true, int threads = 1);

struct CrfTrainConfig {
  double sigma2 = 10.0;
  int max_iterations = 300;
  double relative_tolerance = 1e-6;
  int threads = 1;
};

struct TrainStats {
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Optimize model.weights in place starting from their current values.
TrainStats fit(CrfModel& model, const std::vector<EncodedSequence>& data, const CrfTrainConfig& config);

/// make_model + zero start + fit. Throws DataError on empty data.
CrfModel train_crf(const std::vector<LabeledSequence>& data, const CrfTrainConfig& config = {},
                   TrainStats* stats = nullptr);

std::vector<std::string> predict(const CrfModel& model, const FeatureVector& features);

/// Versioned text format; doubles in shortest round-trip form.
void write_model(std::ostream& out, const CrfModel& model);
CrfModel read_model(std::istream& in);

}  // namespace alwb
