#include "replica/policy_net.hpp"

#include <cmath>
#include <string>

namespace replica {

namespace {

void check_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  if (!m.allFinite()) throw NonFiniteError(std::string("non-finite values in ") + what);
}

}  // namespace

PolicyParams PolicyParams::zeros(const NetDims& d) {
  PolicyParams p;
  p.w1 = Eigen::MatrixXd::Zero(d.hidden, d.input);
  p.b1 = Eigen::VectorXd::Zero(d.hidden);
  p.wp = Eigen::MatrixXd::Zero(d.actions, d.hidden);
  p.bp = Eigen::VectorXd::Zero(d.actions);
  p.wv = Eigen::VectorXd::Zero(d.hidden);
  p.bv = 0.0;
  return p;
}

NetDims PolicyParams::dims() const {
  return NetDims{static_cast<int>(w1.cols()), static_cast<int>(w1.rows()),
                 static_cast<int>(wp.rows())};
}

std::size_t PolicyParams::num_parameters() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + wp.size() + bp.size() + wv.size() + 1);
}

std::array<Eigen::Map<Eigen::VectorXd>, 6> PolicyParams::tensors() {
  return {Eigen::Map<Eigen::VectorXd>(w1.data(), w1.size()),
          Eigen::Map<Eigen::VectorXd>(b1.data(), b1.size()),
          Eigen::Map<Eigen::VectorXd>(wp.data(), wp.size()),
          Eigen::Map<Eigen::VectorXd>(bp.data(), bp.size()),
          Eigen::Map<Eigen::VectorXd>(wv.data(), wv.size()),
          Eigen::Map<Eigen::VectorXd>(&bv, 1)};
}

std::array<Eigen::Map<const Eigen::VectorXd>, 6> PolicyParams::tensors() const {
  return {Eigen::Map<const Eigen::VectorXd>(w1.data(), w1.size()),
          Eigen::Map<const Eigen::VectorXd>(b1.data(), b1.size()),
          Eigen::Map<const Eigen::VectorXd>(wp.data(), wp.size()),
          Eigen::Map<const Eigen::VectorXd>(bp.data(), bp.size()),
          Eigen::Map<const Eigen::VectorXd>(wv.data(), wv.size()),
          Eigen::Map<const Eigen::VectorXd>(&bv, 1)};
}

PolicyParams init_params(const NetDims& dims, std::uint64_t seed) {
  if (dims.input < 1 || dims.hidden < 1 || dims.actions < 1) {
    throw std::invalid_argument("network dimensions must be positive");
  }
  Rng rng = make_rng(seed, Stream::kPolicyInit);
  PolicyParams p = PolicyParams::zeros(dims);
  auto fill = [&rng](Eigen::Ref<Eigen::MatrixXd> m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    // Row-major fill so the draw order does not depend on storage order.
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = u(rng);
  };
  fill(p.w1, dims.input);
  fill(p.wp, dims.hidden);
  fill(p.wv, dims.hidden);
  return p;
}

Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const double top = logits.maxCoeff();
  const double log_sum = std::log((logits.array() - top).exp().sum());
  return (logits.array() - top - log_sum).matrix();
}

ActionDistribution forward(const PolicyParams& params, std::span<const double> observation) {
  if (static_cast<Eigen::Index>(observation.size()) != params.w1.cols()) {
    throw std::invalid_argument("observation has length " + std::to_string(observation.size()) +
                                ", network expects " + std::to_string(params.w1.cols()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(observation.data(),
                                            static_cast<Eigen::Index>(observation.size()));
  const Eigen::VectorXd h = (params.w1 * x + params.b1).array().tanh().matrix();
  ActionDistribution dist;
  dist.logits = params.wp * h + params.bp;
  dist.value = params.wv.dot(h) + params.bv;
  check_finite(dist.logits, "policy logits");
  if (!std::isfinite(dist.value)) throw NonFiniteError("non-finite value estimate");
  dist.log_probs = log_softmax(dist.logits);
  return dist;
}

ForwardCache forward_batch(const PolicyParams& params,
                           const Eigen::Ref<const Eigen::MatrixXd>& observations) {
  if (observations.rows() != params.w1.cols()) {
    throw std::invalid_argument("observation batch has " + std::to_string(observations.rows()) +
                                " rows, network expects " + std::to_string(params.w1.cols()));
  }
  ForwardCache cache;
  cache.hidden.noalias() = params.w1 * observations;
  cache.hidden.colwise() += params.b1;
  cache.hidden = cache.hidden.array().tanh().matrix();

  Eigen::MatrixXd logits = params.wp * cache.hidden;
  logits.colwise() += params.bp;
  check_finite(logits, "policy logits");
  cache.log_probs.resize(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) cache.log_probs.col(j) = log_softmax(logits.col(j));

  cache.values = (params.wv.transpose() * cache.hidden).transpose();
  cache.values.array() += params.bv;
  check_finite(cache.values, "value estimates");
  return cache;
}

PolicyGradients backward(const PolicyParams& params,
                         const Eigen::Ref<const Eigen::MatrixXd>& observations,
                         const ForwardCache& cache, const OutputGradient& upstream) {
  check_finite(upstream.logits, "logit gradient");
  check_finite(upstream.values, "value gradient");
  PolicyGradients g;
  g.wp.noalias() = upstream.logits * cache.hidden.transpose();
  g.bp = upstream.logits.rowwise().sum();
  g.wv.noalias() = cache.hidden * upstream.values;
  g.bv = upstream.values.sum();

  Eigen::MatrixXd d_hidden = params.wp.transpose() * upstream.logits;
  d_hidden.noalias() += params.wv * upstream.values.transpose();
  // tanh'(a) = 1 - h^2
  d_hidden.array() *= 1.0 - cache.hidden.array().square();

  g.w1.noalias() = d_hidden * observations.transpose();
  g.b1 = d_hidden.rowwise().sum();
  for (const auto& t : g.tensors()) check_finite(t, "parameter gradient");
  return g;
}

std::pair<int, double> sample_action(const ActionDistribution& dist, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const Eigen::Index n = dist.log_probs.size();
  double cumulative = 0.0;
  Eigen::Index last_positive = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = std::exp(dist.log_probs[i]);
    if (p <= 0.0) continue;
    last_positive = i;
    cumulative += p;
    if (u < cumulative) return {static_cast<int>(i), dist.log_probs[i]};
  }
  // Rounding left the total just below u.
  return {static_cast<int>(last_positive), dist.log_probs[last_positive]};
}

int greedy_action(const ActionDistribution& dist) {
  Eigen::Index best = 0;
  dist.logits.maxCoeff(&best);
  return static_cast<int>(best);
}

double entropy(const Eigen::Ref<const Eigen::VectorXd>& log_probs) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < log_probs.size(); ++i) {
    const double p = std::exp(log_probs[i]);
    if (p > 0.0) h -= p * log_probs[i];
  }
  return h;
}

}  // namespace replica
