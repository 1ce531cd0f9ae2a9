#ifndef REPLICA_POLICY_NET_HPP_
#define REPLICA_POLICY_NET_HPP_

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>

#include "replica/random.hpp"

namespace replica {

struct NetDims {
  int input = 0;
  int hidden = 128;
  int actions = 0;

  friend bool operator==(const NetDims&, const NetDims&) = default;
};

// Shared tanh trunk with a categorical policy head and a scalar value head:
//   h = tanh(w1 x + b1), logits = wp h + bp, value = wv . h + bv
struct PolicyParams {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd wp;  // actions x hidden
  Eigen::VectorXd bp;
  Eigen::VectorXd wv;
  double bv = 0.0;

  static PolicyParams zeros(const NetDims& dims);
  NetDims dims() const;
  std::size_t num_parameters() const;

  // Views over every parameter tensor in a fixed order (w1, b1, wp, bp, wv, bv).
  std::array<Eigen::Map<Eigen::VectorXd>, 6> tensors();
  std::array<Eigen::Map<const Eigen::VectorXd>, 6> tensors() const;
};

using PolicyGradients = PolicyParams;

// Raised when a forward or backward pass produces NaN or infinity.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
PolicyParams init_params(const NetDims& dims, std::uint64_t seed);

struct ActionDistribution {
  Eigen::VectorXd logits;
  Eigen::VectorXd log_probs;
  double value = 0.0;
};

ActionDistribution forward(const PolicyParams& params, std::span<const double> observation);

// Numerically stable log-softmax of one logit vector.
Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits);

// Batched forward pass; column j of every matrix belongs to sample j.
struct ForwardCache {
  Eigen::MatrixXd hidden;     // hidden x batch, post-activation
  Eigen::MatrixXd log_probs;  // actions x batch
  Eigen::VectorXd values;     // batch
};

ForwardCache forward_batch(const PolicyParams& params,
                           const Eigen::Ref<const Eigen::MatrixXd>& observations);

// Gradient of a scalar loss with respect to the network outputs.
struct OutputGradient {
  Eigen::MatrixXd logits;  // actions x batch
  Eigen::VectorXd values;  // batch
};

PolicyGradients backward(const PolicyParams& params,
                         const Eigen::Ref<const Eigen::MatrixXd>& observations,
                         const ForwardCache& cache, const OutputGradient& upstream);

std::pair<int, double> sample_action(const ActionDistribution& dist, Rng& rng);
int greedy_action(const ActionDistribution& dist);

// -sum p log p, with 0 log 0 = 0.
double entropy(const Eigen::Ref<const Eigen::VectorXd>& log_probs);
inline double entropy(const ActionDistribution& dist) { return entropy(dist.log_probs); }

}  // namespace replica

#endif  // REPLICA_POLICY_NET_HPP_
