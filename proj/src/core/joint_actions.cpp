#include "macmarl/core/joint_actions.hpp"

#include <stdexcept>

namespace macmarl {

JointActionSpace::JointActionSpace(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw std::invalid_argument("joint action space needs at least one agent");
  total_ = 1;
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("agent action count must be positive");
    total_ *= s;
  }
}

int JointActionSpace::encode(std::span<const int> components) const {
  if (components.size() != sizes_.size()) throw std::invalid_argument("joint action arity mismatch");
  int index = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (components[i] < 0 || components[i] >= sizes_[i])
      throw std::out_of_range("joint action component out of range");
    index = index * sizes_[i] + components[i];
  }
  return index;
}

std::vector<int> JointActionSpace::decode(int index) const {
  if (index < 0 || index >= total_) throw std::out_of_range("joint action index out of range");
  std::vector<int> out(sizes_.size());
  for (std::size_t i = sizes_.size(); i-- > 0;) {
    out[i] = index % sizes_[i];
    index /= sizes_[i];
  }
  return out;
}

std::vector<int> JointActionSpace::enumerate(const std::vector<std::vector<int>>& allowed) const {
  if (allowed.size() != sizes_.size()) throw std::invalid_argument("allowed-set arity mismatch");
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    if (allowed[i].empty()) return {};
    for (int a : allowed[i])
      if (a < 0 || a >= sizes_[i]) throw std::out_of_range("allowed component out of range");
  }
  // Odometer over the per-agent allowed lists.
  std::vector<std::size_t> digit(allowed.size(), 0);
  std::vector<int> out;
  std::vector<int> components(allowed.size());
  while (true) {
    for (std::size_t i = 0; i < allowed.size(); ++i) components[i] = allowed[i][digit[i]];
    out.push_back(encode(components));
    std::size_t k = allowed.size();
    while (k-- > 0) {
      if (++digit[k] < allowed[k].size()) break;
      digit[k] = 0;
      if (k == 0) return out;
    }
  }
}

std::vector<int> JointActionSpace::restricted(std::span<const std::optional<int>> pinned) const {
  if (pinned.size() != sizes_.size()) throw std::invalid_argument("pinned arity mismatch");
  std::vector<std::vector<int>> allowed(sizes_.size());
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (pinned[i]) {
      if (*pinned[i] < 0 || *pinned[i] >= sizes_[i])
        throw std::out_of_range("pinned macro outside the agent's macro set");
      allowed[i] = {*pinned[i]};
    } else {
      for (int a = 0; a < sizes_[i]; ++a) allowed[i].push_back(a);
    }
  }
  return enumerate(allowed);
}

int argmax_over(const Eigen::Ref<const Eigen::VectorXd>& q, std::span<const int> candidates) {
  if (candidates.empty()) throw std::invalid_argument("argmax over an empty candidate set");
  int best = candidates[0];
  for (int c : candidates)
    if (q[c] > q[best]) best = c;
  return best;
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (q.size() == 0) throw std::invalid_argument("argmax of an empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = i;
  return static_cast<int>(best);
}

}  // namespace macmarl
