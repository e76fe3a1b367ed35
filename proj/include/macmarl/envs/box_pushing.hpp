#pragma once

#include <array>
#include <optional>
#include <vector>

#include "macmarl/core/types.hpp"
#include "macmarl/envs/grid.hpp"

namespace macmarl::envs {

struct BoxPushingConfig {
  int grid_size = 6;
  int horizon = 100;
  double discount = 0.98;
  /// Expose the four primitive actions as one-tick macros.
  bool primitive_actions = false;
};

/// Initial placement for a square grid of even size n:
///   boxes on row n/2-1; big box on columns n/2-1 and n/2;
///   small boxes on columns c and n-1-c with c = (n/2-1)/2;
///   agents on the bottom corners facing north. Row 0 is the goal row.
struct BoxPushingLayout {
  int grid_size = 0;
  std::array<Cell, 2> agents{};
  std::array<Heading, 2> headings{};
  std::array<Cell, 2> small_boxes{};
  /// Western cell of the two-cell big box.
  Cell big_box{};
};

BoxPushingLayout box_pushing_layout(int grid_size);

struct BoxPushingState {
  int grid_size = 0;
  std::array<Cell, 2> agent_pos{};
  std::array<Heading, 2> heading{};
  std::array<Cell, 2> small_box_pos{};
  Cell big_box_pos{};
  int tick = 0;
  bool terminal = false;
};

/// Cooperative box pushing on a grid.
///
/// Primitive actions: 0 move-forward, 1 turn-left, 2 turn-right, 3 stay.
/// Macro set (per agent i): 0 Turn_left, 1 Turn_right, 2 Stay,
/// 3 Move_to_small_box (the box on agent i's side), 4 Move_to_big_box (the
/// waypoint below the big box's i-th cell), 5 Push.
/// Macro-observation: one-hot over {empty, teammate, boundary, small box,
/// big box} for the cell in front of the agent.
class BoxPushing final : public EnvModel {
 public:
  enum Action : int { Forward = 0, TurnLeft = 1, TurnRight = 2, Stay = 3 };
  enum Macro : int { TurnLeftMacro = 0, TurnRightMacro = 1, StayMacro = 2, MoveToSmallBox = 3,
                     MoveToBigBox = 4, Push = 5 };
  enum FrontCell : int { Empty = 0, Teammate = 1, Boundary = 2, SmallBox = 3, BigBox = 4 };
  static constexpr int kObsDim = 5;

  static constexpr double kStepReward = -0.1;
  static constexpr double kBigBoxReward = 100.0;
  static constexpr double kSmallBoxReward = 10.0;
  static constexpr double kPenalty = -5.0;

  explicit BoxPushing(BoxPushingConfig config = {});

  std::string id() const override { return config_.primitive_actions ? "box_pushing_primitive" : "box_pushing"; }
  int num_agents() const override { return 2; }
  std::span<const MacroActionSpec> macro_actions(int agent) const override { return macros_[agent]; }
  int num_primitive_actions(int) const override { return 4; }
  int macro_obs_dim(int) const override { return kObsDim; }
  int horizon() const override { return config_.horizon; }
  double discount() const override { return config_.discount; }
  int tick() const override { return state_.tick; }

  void reset(Rng& rng) override;
  StepOutcome step(std::span<const int> joint_action, Rng& rng) override;
  std::vector<AgentObservation> observe(Rng& rng) override;
  std::unique_ptr<EnvModel> clone() const override { return std::make_unique<BoxPushing>(*this); }

  const BoxPushingState& state() const { return state_; }
  void set_state(const BoxPushingState& s) { state_ = s; }
  const BoxPushingConfig& config() const { return config_; }

  std::vector<AgentObservation> observe() const;
  FrontCell front_cell(int agent) const;

 private:
  BoxPushingConfig config_;
  BoxPushingState state_;
  std::array<std::vector<MacroActionSpec>, 2> macros_;
};

/// First primitive action of a shortest turn/forward path from (pos, heading)
/// to `goal` facing north, avoiding `obstacles`. Empty if unreachable or
/// already there.
std::optional<int> navigate_to(int grid_size, Cell pos, Heading heading, Cell goal,
                               std::span<const Cell> obstacles);

}  // namespace macmarl::envs
