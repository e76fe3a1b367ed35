#include "macmarl/envs/warehouse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace macmarl::envs {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

constexpr double kArrivalTolerance = 1e-9;

// Turtlebot controller view: [x, y, tools carried, beside own table spot, at workshop, at tool room].
enum TbView : int { kX = 0, kY, kCarried, kAtTable, kAtWorkshop, kAtToolRoom, kTbViewSize };

bool flag(const PrimitiveObs& v, int i) { return v[i] > 0.5; }

MacroActionSpec drive_macro(int id, std::string name, int action, int arrival_flag) {
  MacroActionSpec spec;
  spec.id = id;
  spec.name = std::move(name);
  spec.controller = [action, arrival_flag](const PrimitiveHistory& h) {
    return flag(h.latest(), arrival_flag) ? static_cast<int>(Warehouse::TbStay) : action;
  };
  spec.terminator = [arrival_flag](const PrimitiveHistory& h) {
    return flag(h.latest(), arrival_flag) ? 1.0 : 0.0;
  };
  return spec;
}

MacroActionSpec get_tool_macro(int timeout) {
  MacroActionSpec spec;
  spec.id = Warehouse::GetTool;
  spec.name = "Get_Tool";
  spec.controller = [](const PrimitiveHistory& h) {
    return flag(h.latest(), kAtTable) ? static_cast<int>(Warehouse::TbStay)
                                      : static_cast<int>(Warehouse::TbToTable);
  };
  spec.terminator = [timeout](const PrimitiveHistory& h) {
    const auto run = h.since_macro_start();
    const auto& now = run.back();
    const auto& before = run[run.size() - 2];
    if (now[kCarried] > before[kCarried]) return 1.0;
    // Ticks spent waiting beside the table, counted from arrival.
    int waited = 0;
    for (std::size_t k = 1; k < run.size(); ++k)
      if (flag(run[k - 1], kAtTable) && flag(run[k], kAtTable)) ++waited;
    return waited >= timeout ? 1.0 : 0.0;
  };
  return spec;
}

MacroActionSpec timed_fetch_macro(int id, std::string name, int cost, int finish_action) {
  MacroActionSpec spec;
  spec.id = id;
  spec.name = std::move(name);
  spec.controller = [cost, finish_action](const PrimitiveHistory& h) {
    return h.ticks_in_macro() == cost - 1 ? finish_action : static_cast<int>(Warehouse::FetchWork);
  };
  spec.terminator = [cost](const PrimitiveHistory& h) { return h.ticks_in_macro() >= cost ? 1.0 : 0.0; };
  return spec;
}

}  // namespace

Warehouse::Warehouse(WarehouseConfig config) : config_(config) {
  if (!(config_.speed > 0.0)) throw std::invalid_argument("turtlebot speed must be positive");
  if (config_.horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (config_.task_steps < 2) throw std::invalid_argument("task needs at least two steps");
  for (int tb = 0; tb < 2; ++tb) {
    macros_[tb] = {drive_macro(GoToWS, "Go_to_WS", TbToWorkshop, kAtWorkshop),
                   drive_macro(GoToTR, "Go_to_TR", TbToToolRoom, kAtToolRoom),
                   get_tool_macro(config_.get_tool_timeout)};
  }
  macros_[kFetch] = {timed_fetch_macro(WaitT, "Wait_T", config_.wait_cost, FetchIdle),
                     timed_fetch_macro(SearchTool, "Search_Tool", config_.search_cost, FetchFinishSearch),
                     timed_fetch_macro(PassToT0, "Pass_to_T(0)", config_.pass_cost, FetchFinishPass0),
                     timed_fetch_macro(PassToT1, "Pass_to_T(1)", config_.pass_cost, FetchFinishPass1)};
  Rng unused(0);
  reset(unused);
}

std::span<const MacroActionSpec> Warehouse::macro_actions(int agent) const { return macros_.at(agent); }

void Warehouse::reset(Rng&) {
  state_ = WarehouseState{};
  for (int tb = 0; tb < 2; ++tb) state_.turtlebots[tb].pos = WarehouseMap::kTurtlebotStart[tb];
  state_.human_timer = config_.human_step_time;
}

int Warehouse::travel_ticks(Point from, Point to) const {
  return static_cast<int>(std::ceil(distance(from, to) / config_.speed - kArrivalTolerance));
}

bool Warehouse::beside_table(int tb) const {
  return distance(state_.turtlebots[tb].pos, WarehouseMap::kTableWaypoints[tb]) <= kArrivalTolerance;
}

bool Warehouse::at_workshop(int tb) const {
  return distance(state_.turtlebots[tb].pos, WarehouseMap::kWorkshopWaypoint) <= kArrivalTolerance;
}

bool Warehouse::deliver() {
  auto& s = state_;
  if (s.human_has_next_tool || s.human_step >= config_.task_steps) return false;
  const int needed = s.human_step - 1;
  for (int tb = 0; tb < 2; ++tb) {
    if (!at_workshop(tb)) continue;
    auto& tools = s.turtlebots[tb].tools;
    const auto it = std::find(tools.begin(), tools.end(), needed);
    if (it == tools.end()) continue;
    tools.erase(it);
    s.human_has_next_tool = true;
    ++s.tools_delivered;
    return true;
  }
  return false;
}

StepOutcome Warehouse::step(std::span<const int> joint_action, Rng&) {
  if (joint_action.size() != 3) throw std::invalid_argument("warehouse expects 3 actions");
  for (int i = 0; i < 3; ++i)
    if (joint_action[i] < 0 || joint_action[i] >= num_primitive_actions(i))
      throw std::out_of_range("invalid warehouse action for robot " + std::to_string(i));

  auto& s = state_;
  StepOutcome out;
  out.reward = kStepReward;

  for (int tb = 0; tb < 2; ++tb) {
    Point goal;
    switch (joint_action[tb]) {
      case TbToWorkshop: goal = WarehouseMap::kWorkshopWaypoint; break;
      case TbToToolRoom: goal = WarehouseMap::kToolRoomWaypoint; break;
      case TbToTable: goal = WarehouseMap::kTableWaypoints[tb]; break;
      default: continue;
    }
    Point& p = s.turtlebots[tb].pos;
    const double d = distance(p, goal);
    if (d <= config_.speed + kArrivalTolerance) {
      p = goal;
    } else {
      p.x += (goal.x - p.x) * config_.speed / d;
      p.y += (goal.y - p.y) * config_.speed / d;
    }
  }

  switch (joint_action[kFetch]) {
    case FetchFinishSearch:
      // With both waiting spots occupied the search is wasted (Fetch frozen).
      if (static_cast<int>(s.waiting.size()) < config_.waiting_spots &&
          s.tools_found < config_.task_steps - 1)
        s.waiting.push_back(s.tools_found++);
      break;
    case FetchFinishPass0:
    case FetchFinishPass1: {
      const int receiver = joint_action[kFetch] == FetchFinishPass0 ? 0 : 1;
      if (!beside_table(0) && !beside_table(1)) {
        out.reward += kEmptyPassPenalty;
      } else if (beside_table(receiver) && !s.waiting.empty()) {
        s.turtlebots[receiver].tools.push_back(s.waiting.front());
        s.waiting.pop_front();
      }
      break;
    }
    default:
      break;
  }

  int deliveries = deliver() ? 1 : 0;
  if (s.human_timer > 0) --s.human_timer;
  while (s.human_timer == 0 && s.human_has_next_tool && s.human_step < config_.task_steps) {
    ++s.human_step;
    s.human_has_next_tool = false;
    s.human_timer = config_.human_step_time;
    deliveries += deliver() ? 1 : 0;
  }
  out.reward += kDeliveryReward * deliveries;

  ++s.tick;
  out.done = s.tools_delivered >= config_.task_steps - 1 || s.tick >= config_.horizon;
  return out;
}

std::vector<AgentObservation> Warehouse::observe() const {
  const auto& s = state_;
  std::vector<AgentObservation> out(3);
  for (int tb = 0; tb < 2; ++tb) {
    const Point p = s.turtlebots[tb].pos;
    const int carried = static_cast<int>(s.turtlebots[tb].tools.size());
    auto& v = out[tb].primitive;
    v.resize(kTbViewSize);
    v << p.x, p.y, carried, beside_table(tb) ? 1.0 : 0.0, at_workshop(tb) ? 1.0 : 0.0,
        distance(p, WarehouseMap::kToolRoomWaypoint) <= kArrivalTolerance ? 1.0 : 0.0;

    ObsVec z = ObsVec::Zero(kTurtlebotObsDim);
    z[0] = p.x / WarehouseMap::kWidth;
    z[1] = p.y / WarehouseMap::kHeight;
    if (WarehouseMap::in_workshop(p))
      z[2 + std::clamp(s.human_step - 1, 0, 3)] = 1.0;
    else
      z[6] = 1.0;
    z[7 + std::min(carried, 3)] = 1.0;
    if (WarehouseMap::in_tool_room(p))
      z[11 + std::min(static_cast<int>(s.waiting.size()), 2)] = 1.0;
    else
      z[14] = 1.0;
    out[tb].macro = z;
  }
  const int waiting = static_cast<int>(s.waiting.size());
  auto& f = out[kFetch];
  f.primitive.resize(3);
  f.primitive << waiting, beside_table(0) ? 1.0 : 0.0, beside_table(1) ? 1.0 : 0.0;
  f.macro = ObsVec::Zero(kFetchObsDim);
  f.macro[std::min(waiting, 2)] = 1.0;
  f.macro[3] = beside_table(0) ? 1.0 : 0.0;
  f.macro[4] = beside_table(1) ? 1.0 : 0.0;
  return out;
}

std::vector<AgentObservation> Warehouse::observe(Rng&) { return std::as_const(*this).observe(); }

}  // namespace macmarl::envs
