#pragma once

#include <array>
#include <deque>
#include <vector>

#include "macmarl/core/types.hpp"

namespace macmarl::envs {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

/// Fixed coordinate map of the 7 (x) by 5 (y) workspace. The workshop is the
/// strip x <= 2, the tool room the strip x >= 5; the rest is corridor.
struct WarehouseMap {
  static constexpr double kWidth = 7.0;
  static constexpr double kHeight = 5.0;
  static constexpr double kWorkshopMaxX = 2.0;
  static constexpr double kToolRoomMinX = 5.0;
  static constexpr Point kWorkshopWaypoint{1.0, 2.5};
  static constexpr Point kToolRoomWaypoint{6.5, 4.5};
  static constexpr std::array<Point, 2> kTableWaypoints{Point{5.2, 2.0}, Point{5.2, 3.0}};
  static constexpr std::array<Point, 2> kTurtlebotStart{Point{3.0, 2.0}, Point{3.0, 3.0}};

  static bool in_workshop(Point p) { return p.x <= kWorkshopMaxX; }
  static bool in_tool_room(Point p) { return p.x >= kToolRoomMinX; }
};

struct WarehouseConfig {
  double speed = 0.6;
  int horizon = 150;
  double discount = 0.95;
  int human_step_time = 18;
  int task_steps = 4;
  int search_cost = 6;
  int pass_cost = 4;
  int wait_cost = 1;
  int get_tool_timeout = 10;
  int waiting_spots = 2;
};

struct TurtlebotState {
  Point pos;
  /// Tool ids in pickup order; tool j is the one needed to start step j + 2.
  std::vector<int> tools;
};

struct WarehouseState {
  std::array<TurtlebotState, 2> turtlebots{};
  /// Found tools waiting on the table, oldest first.
  std::deque<int> waiting;
  int tools_found = 0;
  int human_step = 1;
  int human_timer = 18;
  /// Human holds the tool for step human_step + 1.
  bool human_has_next_tool = false;
  int tools_delivered = 0;
  int tick = 0;
};

/// Warehouse tool delivery with two Turtlebots (agents 0, 1) and a Fetch
/// robot (agent 2).
///
/// Turtlebot primitive actions: 0 stay, 1 drive to workshop, 2 drive to tool
/// room, 3 drive to own table waypoint. Fetch primitive actions: 0 idle,
/// 1 work (intermediate tick), 2 finish search, 3 finish pass to Turtlebot 0,
/// 4 finish pass to Turtlebot 1.
///
/// Turtlebot macros: 0 Go_to_WS, 1 Go_to_TR, 2 Get_Tool.
/// Fetch macros: 0 Wait_T, 1 Search_Tool, 2 Pass_to_T(0), 3 Pass_to_T(1).
///
/// Turtlebot macro-observation (15): x/7, y/5; human step one-hot (4) plus
/// invalid flag (valid only in the workshop); tools carried one-hot 0..3;
/// waiting-spot count one-hot 0..2 plus invalid flag (valid only in the tool
/// room). Fetch macro-observation (5): waiting count one-hot 0..2; Turtlebot 0
/// and Turtlebot 1 beside the table.
class Warehouse final : public EnvModel {
 public:
  enum TurtlebotAction : int { TbStay = 0, TbToWorkshop = 1, TbToToolRoom = 2, TbToTable = 3 };
  enum FetchAction : int { FetchIdle = 0, FetchWork = 1, FetchFinishSearch = 2, FetchFinishPass0 = 3,
                           FetchFinishPass1 = 4 };
  enum TurtlebotMacro : int { GoToWS = 0, GoToTR = 1, GetTool = 2 };
  enum FetchMacro : int { WaitT = 0, SearchTool = 1, PassToT0 = 2, PassToT1 = 3 };
  static constexpr int kFetch = 2;
  static constexpr int kTurtlebotObsDim = 15;
  static constexpr int kFetchObsDim = 5;

  static constexpr double kStepReward = -1.0;
  static constexpr double kDeliveryReward = 100.0;
  static constexpr double kEmptyPassPenalty = -10.0;

  explicit Warehouse(WarehouseConfig config = {});

  std::string id() const override { return "warehouse"; }
  int num_agents() const override { return 3; }
  std::span<const MacroActionSpec> macro_actions(int agent) const override;
  int num_primitive_actions(int agent) const override { return agent == kFetch ? 5 : 4; }
  int macro_obs_dim(int agent) const override { return agent == kFetch ? kFetchObsDim : kTurtlebotObsDim; }
  int horizon() const override { return config_.horizon; }
  double discount() const override { return config_.discount; }
  int tick() const override { return state_.tick; }

  void reset(Rng& rng) override;
  StepOutcome step(std::span<const int> joint_action, Rng& rng) override;
  std::vector<AgentObservation> observe(Rng& rng) override;
  std::unique_ptr<EnvModel> clone() const override { return std::make_unique<Warehouse>(*this); }

  std::vector<AgentObservation> observe() const;
  const WarehouseState& state() const { return state_; }
  void set_state(const WarehouseState& s) { state_ = s; }
  const WarehouseConfig& config() const { return config_; }

  bool beside_table(int turtlebot) const;
  bool at_workshop(int turtlebot) const;
  /// Ticks needed to drive between two points at the configured speed.
  int travel_ticks(Point from, Point to) const;

 private:
  bool deliver();

  WarehouseConfig config_;
  WarehouseState state_;
  std::array<std::vector<MacroActionSpec>, 3> macros_;
};

}  // namespace macmarl::envs
