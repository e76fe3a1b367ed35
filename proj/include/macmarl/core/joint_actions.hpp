#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace macmarl {

/// Mixed-radix indexing of the joint macro-action product set. Agent 0 is the
/// most significant digit.
class JointActionSpace {
 public:
  JointActionSpace() = default;
  explicit JointActionSpace(std::vector<int> sizes);

  int num_agents() const { return static_cast<int>(sizes_.size()); }
  int size() const { return total_; }
  int agent_size(int agent) const { return sizes_[agent]; }
  const std::vector<int>& sizes() const { return sizes_; }

  int encode(std::span<const int> components) const;
  std::vector<int> decode(int index) const;

  /// All joint indices whose components lie in the per-agent allowed sets.
  std::vector<int> enumerate(const std::vector<std::vector<int>>& allowed) const;

  /// Joint indices with the given agents pinned to fixed components.
  std::vector<int> restricted(std::span<const std::optional<int>> pinned) const;

 private:
  std::vector<int> sizes_;
  int total_ = 1;
};

/// Index of the maximum of `q` over `candidates` (first maximum wins).
int argmax_over(const Eigen::Ref<const Eigen::VectorXd>& q, std::span<const int> candidates);

/// Index of the maximum of `q` over all entries (first maximum wins).
int argmax(const Eigen::Ref<const Eigen::VectorXd>& q);

}  // namespace macmarl
