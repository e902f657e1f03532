#include "alwb/crf.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <thread>

#include "alwb/errors.hpp"
#include "alwb/lbfgs.hpp"
#include "alwb/text.hpp"

namespace alwb {

CrfModel::CrfModel(std::vector<std::string> labels, std::vector<std::string> features, double sigma2)
    : labels_(std::move(labels)), features_(std::move(features)), sigma2_(sigma2) {
  if (labels_.empty()) throw DataError("crf: empty label alphabet");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!label_index_.emplace(labels_[i], static_cast<int>(i)).second) throw DataError("crf: duplicate label");
  }
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (!feature_index_.emplace(features_[i], static_cast<int>(i)).second) {
      throw DataError("crf: duplicate feature '" + features_[i] + "'");
    }
  }
  weights_ = Eigen::VectorXd::Zero(num_weights());
}

Eigen::Index CrfModel::num_weights() const {
  const Eigen::Index L = num_labels();
  return num_features() * L + L * L + 2 * L;
}

Eigen::Index CrfModel::transition_offset() const { return Eigen::Index(num_features()) * num_labels(); }
Eigen::Index CrfModel::start_offset() const { return transition_offset() + Eigen::Index(num_labels()) * num_labels(); }
Eigen::Index CrfModel::stop_offset() const { return start_offset() + num_labels(); }

CrfModel::RowMatrixMap CrfModel::emission() const {
  return RowMatrixMap(weights_.data(), num_features(), num_labels());
}
CrfModel::RowMatrixMap CrfModel::transition() const {
  return RowMatrixMap(weights_.data() + transition_offset(), num_labels(), num_labels());
}
Eigen::Map<const Eigen::VectorXd> CrfModel::start() const {
  return Eigen::Map<const Eigen::VectorXd>(weights_.data() + start_offset(), num_labels());
}
Eigen::Map<const Eigen::VectorXd> CrfModel::stop() const {
  return Eigen::Map<const Eigen::VectorXd>(weights_.data() + stop_offset(), num_labels());
}

int CrfModel::label_index(const std::string& label) const {
  const auto it = label_index_.find(label);
  return it == label_index_.end() ? -1 : it->second;
}

int CrfModel::feature_index(const std::string& feature) const {
  const auto it = feature_index_.find(feature);
  return it == feature_index_.end() ? -1 : it->second;
}

EncodedSequence CrfModel::encode(const FeatureVector& features) const {
  EncodedSequence seq;
  seq.features.resize(features.size());
  const int bias = feature_index(kBiasFeature);
  for (std::size_t t = 0; t < features.size(); ++t) {
    auto& idx = seq.features[t];
    if (bias >= 0) idx.push_back(bias);
    for (const auto& f : features[t]) {
      const int i = feature_index(f);
      if (i >= 0 && i != bias) idx.push_back(i);
    }
  }
  return seq;
}

EncodedSequence CrfModel::encode(const LabeledSequence& seq) const {
  if (seq.features.size() != seq.labels.size()) throw DataError("crf: features and labels differ in length");
  EncodedSequence out = encode(seq.features);
  out.id = seq.id;
  for (const auto& lab : seq.labels) {
    const int i = label_index(lab);
    if (i < 0) throw DataError("crf: unknown label '" + lab + "'");
    out.labels.push_back(i);
  }
  return out;
}

std::vector<std::string> CrfModel::decode_labels(const std::vector<int>& path) const {
  std::vector<std::string> out;
  out.reserve(path.size());
  for (int p : path) out.push_back(labels_[static_cast<std::size_t>(p)]);
  return out;
}

CrfModel make_model(const std::vector<LabeledSequence>& data, double sigma2) {
  std::set<std::string> labels;
  std::set<std::string> feats;
  for (const auto& s : data) {
    labels.insert(s.labels.begin(), s.labels.end());
    for (const auto& fs : s.features) feats.insert(fs.begin(), fs.end());
  }
  std::vector<std::string> label_list;
  if (labels.erase("O")) label_list.emplace_back("O");
  label_list.insert(label_list.end(), labels.begin(), labels.end());
  feats.erase(kBiasFeature);
  std::vector<std::string> feat_list{kBiasFeature};
  feat_list.insert(feat_list.end(), feats.begin(), feats.end());
  return CrfModel(std::move(label_list), std::move(feat_list), sigma2);
}

ChainScores<double> chain_scores(const CrfModel& model, const EncodedSequence& seq) {
  const auto n = static_cast<Eigen::Index>(seq.size());
  const int L = model.num_labels();
  ChainScores<double> s;
  s.emission = Eigen::MatrixXd::Zero(n, L);
  const double* w = model.weights().data();
  for (Eigen::Index t = 0; t < n; ++t) {
    for (int f : seq.features[static_cast<std::size_t>(t)]) {
      const double* row = w + static_cast<Eigen::Index>(f) * L;
      for (int l = 0; l < L; ++l) s.emission(t, l) += row[l];
    }
  }
  s.transition = model.transition();
  s.start = model.start();
  s.stop = model.stop();
  return s;
}

Lattice forward_backward(const CrfModel& model, const EncodedSequence& seq) {
  return forward_backward(chain_scores(model, seq));
}

ViterbiResult viterbi(const CrfModel& model, const EncodedSequence& seq) { return viterbi(chain_scores(model, seq)); }

double sequence_confidence(const CrfModel& model, const EncodedSequence& seq) {
  const auto lat = forward_backward(model, seq);
  const auto best = viterbi(lat.scores);
  return std::min(1.0, std::exp(best.score - lat.log_z));
}

namespace {

// Adds log P(y|x) of each sequence in [begin, end) to `value` and its
// gradient (empirical minus expected counts) to `grad`.
void accumulate(const CrfModel& model, const std::vector<EncodedSequence>& data, std::size_t begin, std::size_t end,
                double& value, Eigen::VectorXd& grad) {
  const int L = model.num_labels();
  const auto toff = model.transition_offset();
  const auto soff = model.start_offset();
  const auto eoff = model.stop_offset();
  double* g = grad.data();
  for (std::size_t k = begin; k < end; ++k) {
    const auto& seq = data[k];
    if (seq.size() == 0) continue;
    const auto lat = forward_backward(model, seq);
    const double ll = path_score(lat.scores, std::span<const int>(seq.labels)) - lat.log_z;
    if (!std::isfinite(ll)) {
      throw DataError("crf: non-finite log-likelihood for sequence id " + std::to_string(seq.id));
    }
    value += ll;
    const Eigen::MatrixXd marg = lat.marginals();
    const auto n = static_cast<Eigen::Index>(seq.size());
    for (Eigen::Index t = 0; t < n; ++t) {
      const int y = seq.labels[static_cast<std::size_t>(t)];
      for (int f : seq.features[static_cast<std::size_t>(t)]) {
        double* row = g + static_cast<Eigen::Index>(f) * L;
        for (int l = 0; l < L; ++l) row[l] -= marg(t, l);
        row[y] += 1.0;
      }
      if (t > 0) g[toff + seq.labels[static_cast<std::size_t>(t - 1)] * L + y] += 1.0;
    }
    if (n > 1) {
      const Eigen::MatrixXd pm = lat.pair_marginal_sum();
      for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) g[toff + i * L + j] -= pm(i, j);
      }
    }
    for (int l = 0; l < L; ++l) {
      g[soff + l] -= marg(0, l);
      g[eoff + l] -= marg(n - 1, l);
    }
    g[soff + seq.labels.front()] += 1.0;
    g[eoff + seq.labels.back()] += 1.0;
  }
}

}  // namespace

double log_likelihood_and_gradient(const CrfModel& model, const std::vector<EncodedSequence>& data,
                                   Eigen::VectorXd& gradient, bool with_penalty, int threads) {
  gradient = Eigen::VectorXd::Zero(model.num_weights());
  double value = 0.0;
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || data.size() < 2 * workers) {
    accumulate(model, data, 0, data.size(), value, gradient);
  } else {
    // static contiguous partition, reduced in worker order
    std::vector<double> values(workers, 0.0);
    std::vector<Eigen::VectorXd> grads(workers, Eigen::VectorXd::Zero(model.num_weights()));
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          accumulate(model, data, w * data.size() / workers, (w + 1) * data.size() / workers, values[w], grads[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (std::size_t w = 0; w < workers; ++w) {
      if (errors[w]) std::rethrow_exception(errors[w]);
      value += values[w];
      gradient += grads[w];
    }
  }
  if (with_penalty) {
    const auto& w = model.weights();
    value -= w.squaredNorm() / (2.0 * model.sigma2());
    gradient -= w / model.sigma2();
  }
  return value;
}

TrainStats fit(CrfModel& model, const std::vector<EncodedSequence>& data, const CrfTrainConfig& config) {
  if (data.empty()) throw DataError("crf: no training data");
  if (!(config.sigma2 > 0)) throw ConfigError("crf: sigma2 must be positive");
  model.set_sigma2(config.sigma2);
  CrfModel work = model;
  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    work.weights() = x;
    const double v = log_likelihood_and_gradient(work, data, grad, true, config.threads);
    grad = -grad;
    return -v;
  };
  LbfgsOptions opt;
  opt.max_iterations = config.max_iterations;
  opt.relative_tolerance = config.relative_tolerance;
  const auto res = lbfgs_minimize(objective, model.weights(), opt);
  if (!std::isfinite(res.value) || !res.x.allFinite()) throw DataError("crf: optimization produced non-finite weights");
  model.weights() = res.x;
  return {-res.value, res.iterations, res.converged};
}

CrfModel train_crf(const std::vector<LabeledSequence>& data, const CrfTrainConfig& config, TrainStats* stats) {
  if (data.empty()) throw DataError("crf: no training data");
  CrfModel model = make_model(data, config.sigma2);
  std::vector<EncodedSequence> encoded;
  encoded.reserve(data.size());
  for (const auto& s : data) encoded.push_back(model.encode(s));
  const auto st = fit(model, encoded, config);
  if (stats) *stats = st;
  return model;
}

std::vector<std::string> predict(const CrfModel& model, const FeatureVector& features) {
  if (features.empty()) return {};
  return model.decode_labels(viterbi(model, model.encode(features)).path);
}

void write_model(std::ostream& out, const CrfModel& model) {
  out << "alwb-crf 1\n";
  out << "sigma2 " << text::format_double(model.sigma2()) << '\n';
  out << "labels " << model.num_labels() << '\n';
  for (const auto& l : model.labels()) out << l << '\n';
  out << "features " << model.num_features() << '\n';
  for (const auto& f : model.features()) out << f << '\n';
  out << "weights " << model.num_weights() << '\n';
  for (Eigen::Index i = 0; i < model.num_weights(); ++i) out << text::format_double(model.weights()(i)) << '\n';
}

CrfModel read_model(std::istream& in) {
  std::string line;
  auto next = [&]() -> std::string {
    if (!std::getline(in, line)) throw DataError("crf model: truncated file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  auto counted = [&](const std::string& key) -> long long {
    const auto parts = text::split(next(), ' ');
    if (parts.size() != 2 || parts[0] != key) throw DataError("crf model: expected '" + key + " <n>'");
    try {
      return text::parse_int(parts[1]);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("crf model: ") + e.what());
    }
  };
  if (next() != "alwb-crf 1") throw DataError("crf model: unsupported format or version");
  const auto sig = text::split(next(), ' ');
  if (sig.size() != 2 || sig[0] != "sigma2") throw DataError("crf model: expected sigma2");
  double sigma2 = 0;
  try {
    sigma2 = text::parse_double(sig[1]);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("crf model: ") + e.what());
  }
  std::vector<std::string> labels(static_cast<std::size_t>(counted("labels")));
  for (auto& l : labels) l = next();
  std::vector<std::string> feats(static_cast<std::size_t>(counted("features")));
  for (auto& f : feats) f = next();
  CrfModel model(std::move(labels), std::move(feats), sigma2);
  if (counted("weights") != model.num_weights()) throw DataError("crf model: weight count mismatch");
  try {
    for (Eigen::Index i = 0; i < model.num_weights(); ++i) model.weights()(i) = text::parse_double(next());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("crf model: ") + e.what());
  }
  return model;
}

}  // namespace alwb
