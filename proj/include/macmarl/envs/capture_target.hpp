#pragma once

#include <array>
#include <vector>

#include "macmarl/core/types.hpp"
#include "macmarl/envs/grid.hpp"

namespace macmarl::envs {

struct CaptureTargetConfig {
  int grid_size = 4;
  int horizon = 60;
  double flicker_probability = 0.3;
  double transition_noise = 0.1;
  double discount = 0.95;
  /// Expose the five primitive moves as one-tick macros instead of
  /// Move_to_Target / Stay.
  bool primitive_actions = false;
};

struct CaptureTargetState {
  int grid_size = 4;
  std::array<Cell, 2> agent_pos{};
  Cell target_pos{};
  int tick = 0;
};

/// Two agents capture a randomly moving, flickering target on a torus.
///
/// Primitive actions: 0 up, 1 down, 2 left, 3 right, 4 stay.
/// Macro-observation (5 values): own row, own col (normalized to [0,1]),
/// target row, target col (normalized, 0 when unseen), unseen flag.
/// Primitive observation: [row, col, seen, target_row, target_col] with -1
/// target coordinates when unseen.
class CaptureTarget final : public EnvModel {
 public:
  enum Action : int { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };
  enum Macro : int { MoveToTarget = 0, StayMacro = 1 };
  static constexpr int kObsDim = 5;

  explicit CaptureTarget(CaptureTargetConfig config = {});

  std::string id() const override { return config_.primitive_actions ? "capture_target_primitive" : "capture_target"; }
  int num_agents() const override { return 2; }
  std::span<const MacroActionSpec> macro_actions(int agent) const override;
  int num_primitive_actions(int) const override { return 5; }
  int macro_obs_dim(int) const override { return kObsDim; }
  int horizon() const override { return config_.horizon; }
  double discount() const override { return config_.discount; }
  int tick() const override { return state_.tick; }

  void reset(Rng& rng) override;
  StepOutcome step(std::span<const int> joint_action, Rng& rng) override;
  std::vector<AgentObservation> observe(Rng& rng) override;
  std::unique_ptr<EnvModel> clone() const override { return std::make_unique<CaptureTarget>(*this); }

  const CaptureTargetState& state() const { return state_; }
  void set_state(const CaptureTargetState& s) { state_ = s; }
  const CaptureTargetConfig& config() const { return config_; }

  /// Observation built from explicit flicker draws (one per agent).
  std::vector<AgentObservation> observe_with_draws(std::span<const double> flicker_draws) const;

  /// Toroidal move of one cell.
  Cell moved(Cell c, int action) const;

 private:
  CaptureTargetConfig config_;
  CaptureTargetState state_;
  std::vector<MacroActionSpec> macros_;
};

}  // namespace macmarl::envs
