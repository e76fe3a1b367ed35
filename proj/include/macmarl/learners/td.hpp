#pragma once

#include <Eigen/Dense>

#include "macmarl/core/joint_actions.hpp"
#include "macmarl/neural/recurrent_q_net.hpp"
#include "macmarl/replay/buffers.hpp"

namespace macmarl::learners {

using Net = neural::RecurrentQNet<double>;
using Optimizer = neural::Optimizer<double>;

/// Step scales for non-negative (alpha) and negative (beta) TD errors.
struct HystereticConfig {
  double alpha = 1.0;
  double beta = 0.2;
  void validate() const;
};

enum class TargetMode { Decentralized, CentralizedUnconditional, CentralizedConditional };

/// Per-entry quantities of a padded batch, all T x B.
struct TDBatch {
  Eigen::MatrixXd q;
  Eigen::MatrixXd y;
  Eigen::MatrixXd mask;
  Eigen::MatrixXi actions;
  Eigen::MatrixXi tau;

  int steps() const { return static_cast<int>(q.rows()); }
  int batch() const { return static_cast<int>(q.cols()); }
  Eigen::MatrixXd td() const { return (y - q).cwiseProduct(mask); }
};

/// Double-Q targets from stacked network outputs over the T+1 input steps
/// of `batch` (column s * B + b):
///   y = r + γ^τ · q_target(h', argmax_{m'} q_online(h', m'))
/// with a zero bootstrap on done entries and y = 0 on padding. For
/// CentralizedConditional the argmax is restricted so that undone agents keep
/// their running macros; `space` is required for that mode.
Eigen::MatrixXd td_targets(const Eigen::MatrixXd& q_online, const Eigen::MatrixXd& q_target,
                           const replay::PaddedBatch& batch, double gamma, TargetMode mode,
                           const JointActionSpace* space = nullptr);

/// Targets computed with the net's θ (selection) and θ⁻ (valuation).
Eigen::MatrixXd decentralized_targets(const Net& net, const replay::PaddedBatch& batch, double gamma);
Eigen::MatrixXd centralized_targets_unconditional(const Net& net, const replay::PaddedBatch& batch, double gamma);
Eigen::MatrixXd centralized_targets_conditional(const Net& net, const replay::PaddedBatch& batch,
                                                const JointActionSpace& space, double gamma);

/// Picks Q(h_t, m_t) out of stacked online outputs.
Eigen::MatrixXd predicted_values(const Eigen::MatrixXd& q_online, const replay::PaddedBatch& batch);

struct UpdateStats {
  double loss = 0.0;
  double grad_norm = 0.0;
  int entries = 0;
};

/// Gradient of the masked mean squared TD loss, with each entry's gradient
/// scaled by alpha (y - q >= 0) or beta (y - q < 0). Requires the net's cached
/// forward pass over the batch's T+1 input steps.
Net::Vector hysteretic_gradient(const Net& net, const TDBatch& td, const HystereticConfig& hyst,
                                UpdateStats* stats = nullptr);

/// hysteretic_gradient followed by one optimizer step.
UpdateStats hysteretic_update(Net& net, const TDBatch& td, const HystereticConfig& hyst, Optimizer& opt);

/// Masked mean squared error update without hysteresis.
UpdateStats centralized_update(Net& net, const TDBatch& td, Optimizer& opt);

/// Full training step on one padded batch: forward (θ, cached), forward
/// (θ⁻), targets, update. Decentralized mode applies `hyst`; centralized
/// modes use alpha = beta = 1.
UpdateStats train_on_batch(Net& net, Optimizer& opt, const replay::PaddedBatch& batch, double gamma,
                           TargetMode mode, const HystereticConfig& hyst, const JointActionSpace* space = nullptr);

/// Linear decay from `start` to `end` over `decay_episodes`, constant after.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  int decay_episodes = 1000;
  double value(int episode) const;
};

}  // namespace macmarl::learners
