#include "macmarl/learners/td.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace macmarl::learners {

void HystereticConfig::validate() const {
  if (!(beta > 0.0 && beta <= alpha)) throw std::invalid_argument("hysteresis requires 0 < beta <= alpha");
}

Eigen::MatrixXd td_targets(const Eigen::MatrixXd& q_online, const Eigen::MatrixXd& q_target,
                           const replay::PaddedBatch& batch, double gamma, TargetMode mode,
                           const JointActionSpace* space) {
  const int T = batch.steps;
  const int B = batch.batch;
  const Eigen::Index cols = static_cast<Eigen::Index>(T + 1) * B;
  if (q_online.cols() != cols || q_target.cols() != cols || q_online.rows() != q_target.rows())
    throw std::invalid_argument("network output shape does not match the batch");
  if (mode == TargetMode::CentralizedConditional) {
    if (!space) throw std::invalid_argument("conditional targets need the joint action space");
    if (space->size() != q_online.rows()) throw std::invalid_argument("joint action space does not match Q head");
    if (batch.continuing.size() != static_cast<std::size_t>(T) * B)
      throw std::invalid_argument("conditional targets need per-entry undone masks");
  }

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(T, B);
  std::vector<std::optional<int>> pinned;
  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < B; ++b) {
      if (batch.mask(t, b) == 0.0) continue;
      double value = batch.rewards(t, b);
      if (batch.done(t, b) == 0.0) {
        const Eigen::Index next = static_cast<Eigen::Index>(t + 1) * B + b;
        int best;
        if (mode == TargetMode::CentralizedConditional) {
          const auto& cont = batch.continuing[static_cast<std::size_t>(t) * B + b];
          pinned.assign(cont.size(), std::nullopt);
          for (std::size_t i = 0; i < cont.size(); ++i)
            if (cont[i] >= 0) pinned[i] = cont[i];
          best = argmax_over(q_online.col(next), space->restricted(pinned));
        } else {
          best = argmax(q_online.col(next));
        }
        value += std::pow(gamma, batch.tau(t, b)) * q_target(best, next);
      }
      y(t, b) = value;
    }
  }
  return y;
}

namespace {

Eigen::MatrixXd targets_with(const Net& net, const replay::PaddedBatch& batch, double gamma, TargetMode mode,
                             const JointActionSpace* space) {
  const Eigen::MatrixXd on = net.evaluate_sequence(batch.inputs, batch.batch, Net::Params::Online);
  const Eigen::MatrixXd tg = net.evaluate_sequence(batch.inputs, batch.batch, Net::Params::Target);
  return td_targets(on, tg, batch, gamma, mode, space);
}

}  // namespace

Eigen::MatrixXd decentralized_targets(const Net& net, const replay::PaddedBatch& batch, double gamma) {
  return targets_with(net, batch, gamma, TargetMode::Decentralized, nullptr);
}

Eigen::MatrixXd centralized_targets_unconditional(const Net& net, const replay::PaddedBatch& batch, double gamma) {
  return targets_with(net, batch, gamma, TargetMode::CentralizedUnconditional, nullptr);
}

Eigen::MatrixXd centralized_targets_conditional(const Net& net, const replay::PaddedBatch& batch,
                                                const JointActionSpace& space, double gamma) {
  return targets_with(net, batch, gamma, TargetMode::CentralizedConditional, &space);
}

Eigen::MatrixXd predicted_values(const Eigen::MatrixXd& q_online, const replay::PaddedBatch& batch) {
  const int T = batch.steps;
  const int B = batch.batch;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(T, B);
  for (int t = 0; t < T; ++t)
    for (int b = 0; b < B; ++b)
      if (batch.mask(t, b) != 0.0) q(t, b) = q_online(batch.actions(t, b), static_cast<Eigen::Index>(t) * B + b);
  return q;
}

Net::Vector hysteretic_gradient(const Net& net, const TDBatch& td, const HystereticConfig& hyst,
                                UpdateStats* stats) {
  const int T = td.steps();
  const int B = td.batch();
  const Eigen::MatrixXd err = td.td();
  neural::require_finite(err, "TD error");
  const double n = td.mask.sum();
  UpdateStats s;
  s.entries = static_cast<int>(n);
  // The network was run over T + 1 input steps; the last step only feeds targets.
  Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(net.config().output_dim, static_cast<Eigen::Index>(T + 1) * B);
  if (n > 0.0) {
    for (int t = 0; t < T; ++t) {
      for (int b = 0; b < B; ++b) {
        if (td.mask(t, b) == 0.0) continue;
        const double e = err(t, b);
        const double w = e >= 0.0 ? hyst.alpha : hyst.beta;
        s.loss += e * e / n;
        // d/dq of (y - q)^2 / n, scaled per entry.
        dout(td.actions(t, b), static_cast<Eigen::Index>(t) * B + b) = -2.0 * w * e / n;
      }
    }
  }
  Net::Vector grad = net.backward_sequence(dout);
  s.grad_norm = grad.norm();
  if (stats) *stats = s;
  return grad;
}

UpdateStats hysteretic_update(Net& net, const TDBatch& td, const HystereticConfig& hyst, Optimizer& opt) {
  UpdateStats stats;
  const Net::Vector grad = hysteretic_gradient(net, td, hyst, &stats);
  if (!std::isfinite(stats.loss)) throw neural::NumericalError("non-finite loss");
  opt.step(net.params(), grad);
  return stats;
}

UpdateStats centralized_update(Net& net, const TDBatch& td, Optimizer& opt) {
  return hysteretic_update(net, td, HystereticConfig{1.0, 1.0}, opt);
}

UpdateStats train_on_batch(Net& net, Optimizer& opt, const replay::PaddedBatch& batch, double gamma,
                           TargetMode mode, const HystereticConfig& hyst, const JointActionSpace* space) {
  if (batch.steps == 0 || batch.mask.sum() == 0.0) return {};
  TDBatch td;
  const Eigen::MatrixXd on = net.forward_sequence(batch.inputs, batch.batch);
  const Eigen::MatrixXd tg = net.evaluate_sequence(batch.inputs, batch.batch, Net::Params::Target);
  td.y = td_targets(on, tg, batch, gamma, mode, space);
  td.q = predicted_values(on, batch);
  td.mask = batch.mask;
  td.actions = batch.actions;
  td.tau = batch.tau;
  if (mode == TargetMode::Decentralized) return hysteretic_update(net, td, hyst, opt);
  return centralized_update(net, td, opt);
}

double EpsilonSchedule::value(int episode) const {
  if (decay_episodes <= 0 || episode >= decay_episodes) return end;
  if (episode <= 0) return start;
  return start + (end - start) * static_cast<double>(episode) / decay_episodes;
}

}  // namespace macmarl::learners
