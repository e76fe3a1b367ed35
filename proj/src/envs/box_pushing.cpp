#include "macmarl/envs/box_pushing.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace macmarl::envs {

BoxPushingLayout box_pushing_layout(int n) {
  if (n < 4 || n > 30 || n % 2 != 0)
    throw std::invalid_argument("box pushing grid size must be even and in 4..30");
  BoxPushingLayout layout;
  layout.grid_size = n;
  const int box_row = n / 2 - 1;
  const int small_col = (n / 2 - 1) / 2;
  layout.big_box = {box_row, n / 2 - 1};
  layout.small_boxes = {Cell{box_row, small_col}, Cell{box_row, n - 1 - small_col}};
  layout.agents = {Cell{n - 1, 0}, Cell{n - 1, n - 1}};
  layout.headings = {Heading::North, Heading::North};
  return layout;
}

namespace {

// Controller view layout (primitive observation).
enum ViewIndex : int { kRow = 0, kCol, kHeading, kFront, kSmall0Row, kSmall0Col, kSmall1Row,
                       kSmall1Col, kBigRow, kBigCol, kMateRow, kMateCol, kViewSize };

Cell view_cell(const PrimitiveObs& v, int row_index) {
  return {static_cast<int>(v[row_index]), static_cast<int>(v[row_index + 1])};
}

std::vector<Cell> view_obstacles(const PrimitiveObs& v, Cell goal) {
  const Cell big = view_cell(v, kBigRow);
  std::vector<Cell> out{view_cell(v, kSmall0Row), view_cell(v, kSmall1Row), big,
                        Cell{big.row, big.col + 1}};
  const Cell mate = view_cell(v, kMateRow);
  if (mate != goal) out.push_back(mate);
  return out;
}

using GoalFn = Cell (*)(const PrimitiveObs&, int agent);

Cell small_box_waypoint(const PrimitiveObs& v, int agent) {
  const Cell box = view_cell(v, agent == 0 ? kSmall0Row : kSmall1Row);
  return {box.row + 1, box.col};
}

Cell big_box_waypoint(const PrimitiveObs& v, int agent) {
  const Cell big = view_cell(v, kBigRow);
  return {big.row + 1, big.col + agent};
}

MacroActionSpec navigation_macro(int id, std::string name, int grid, int agent, GoalFn goal_of) {
  MacroActionSpec spec;
  spec.id = id;
  spec.name = std::move(name);
  spec.controller = [grid, agent, goal_of](const PrimitiveHistory& h) {
    const auto& v = h.latest();
    const Cell goal = goal_of(v, agent);
    const auto obstacles = view_obstacles(v, goal);
    const auto step = navigate_to(grid, view_cell(v, kRow), static_cast<Heading>(static_cast<int>(v[kHeading])),
                                  goal, obstacles);
    return step.value_or(static_cast<int>(BoxPushing::Stay));
  };
  spec.terminator = [grid, agent, goal_of](const PrimitiveHistory& h) {
    const auto& v = h.latest();
    const Cell goal = goal_of(v, agent);
    const Cell pos = view_cell(v, kRow);
    const auto heading = static_cast<Heading>(static_cast<int>(v[kHeading]));
    if (pos == goal && heading == Heading::North) return 1.0;
    const auto obstacles = view_obstacles(v, goal);
    // Unreachable waypoint: give control back instead of idling forever.
    return navigate_to(grid, pos, heading, goal, obstacles) ? 0.0 : 1.0;
  };
  return spec;
}

MacroActionSpec push_macro() {
  MacroActionSpec spec;
  spec.id = BoxPushing::Push;
  spec.name = "Push";
  spec.controller = [](const PrimitiveHistory&) { return static_cast<int>(BoxPushing::Forward); };
  spec.terminator = [](const PrimitiveHistory& h) {
    const auto& obs = h.observations;
    const Cell now = view_cell(obs[obs.size() - 1], kRow);
    const Cell before = view_cell(obs[obs.size() - 2], kRow);
    return now == before ? 1.0 : 0.0;
  };
  return spec;
}

}  // namespace

std::optional<int> navigate_to(int n, Cell pos, Heading heading, Cell goal,
                               std::span<const Cell> obstacles) {
  if (pos == goal && heading == Heading::North) return std::nullopt;
  if (!inside(goal, n, n)) return std::nullopt;
  auto blocked = [&](Cell c) {
    return !inside(c, n, n) || std::find(obstacles.begin(), obstacles.end(), c) != obstacles.end();
  };
  if (blocked(goal)) return std::nullopt;

  auto index = [n](Cell c, Heading h) { return (c.row * n + c.col) * 4 + static_cast<int>(h); };
  std::vector<int> first(static_cast<std::size_t>(n * n * 4), -1);
  std::deque<std::pair<Cell, Heading>> frontier;
  first[index(pos, heading)] = BoxPushing::Stay;  // visited marker for the start
  frontier.emplace_back(pos, heading);
  bool at_start = true;
  while (!frontier.empty()) {
    const auto [c, h] = frontier.front();
    frontier.pop_front();
    const int origin = first[index(c, h)];
    const std::array<std::pair<int, std::pair<Cell, Heading>>, 3> moves{{
        {BoxPushing::Forward, {ahead(c, h), h}},
        {BoxPushing::TurnLeft, {c, turn_left(h)}},
        {BoxPushing::TurnRight, {c, turn_right(h)}},
    }};
    for (const auto& [action, next] : moves) {
      if (action == BoxPushing::Forward && blocked(next.first)) continue;
      const int k = index(next.first, next.second);
      if (first[k] != -1) continue;
      first[k] = at_start ? action : origin;
      if (next.first == goal && next.second == Heading::North) return first[k];
      frontier.push_back(next);
    }
    at_start = false;
  }
  return std::nullopt;
}

BoxPushing::BoxPushing(BoxPushingConfig config) : config_(config) {
  (void)box_pushing_layout(config_.grid_size);  // validates the size
  if (config_.horizon < 1) throw std::invalid_argument("horizon must be positive");
  for (int agent = 0; agent < 2; ++agent) {
    auto& m = macros_[agent];
    if (config_.primitive_actions) {
      m = {one_tick_macro(0, "move_forward", Forward), one_tick_macro(1, "turn_left", TurnLeft),
           one_tick_macro(2, "turn_right", TurnRight), one_tick_macro(3, "stay", Stay)};
    } else {
      m = {one_tick_macro(TurnLeftMacro, "Turn_left", TurnLeft),
           one_tick_macro(TurnRightMacro, "Turn_right", TurnRight),
           one_tick_macro(StayMacro, "Stay", Stay),
           navigation_macro(MoveToSmallBox, "Move_to_small_box", config_.grid_size, agent, &small_box_waypoint),
           navigation_macro(MoveToBigBox, "Move_to_big_box", config_.grid_size, agent, &big_box_waypoint),
           push_macro()};
    }
  }
  Rng unused(0);
  reset(unused);
}

void BoxPushing::reset(Rng&) {
  const auto layout = box_pushing_layout(config_.grid_size);
  state_.grid_size = layout.grid_size;
  state_.agent_pos = layout.agents;
  state_.heading = layout.headings;
  state_.small_box_pos = layout.small_boxes;
  state_.big_box_pos = layout.big_box;
  state_.tick = 0;
  state_.terminal = false;
}

namespace {

enum class Intent { None, Bump, PushBigAlone, PushSmall, Move, Blocked };

}  // namespace

StepOutcome BoxPushing::step(std::span<const int> joint_action, Rng&) {
  if (joint_action.size() != 2) throw std::invalid_argument("box pushing expects 2 actions");
  for (int a : joint_action)
    if (a < 0 || a > 3) throw std::out_of_range("invalid box pushing action");
  if (state_.terminal) throw std::logic_error("step on a finished box pushing episode");

  const int n = state_.grid_size;
  auto& s = state_;
  StepOutcome out;
  out.reward = kStepReward;

  auto is_big = [&](Cell c) { return c.row == s.big_box_pos.row && (c.col == s.big_box_pos.col || c.col == s.big_box_pos.col + 1); };
  auto small_at = [&](Cell c) -> int {
    for (int k = 0; k < 2; ++k)
      if (s.small_box_pos[k] == c) return k;
    return -1;
  };

  for (int i = 0; i < 2; ++i) {
    if (joint_action[i] == TurnLeft) s.heading[i] = turn_left(s.heading[i]);
    if (joint_action[i] == TurnRight) s.heading[i] = turn_right(s.heading[i]);
  }

  const bool both_forward = joint_action[0] == Forward && joint_action[1] == Forward;
  const bool both_north = s.heading[0] == Heading::North && s.heading[1] == Heading::North;
  const Cell below_left{s.big_box_pos.row + 1, s.big_box_pos.col};
  const Cell below_right{s.big_box_pos.row + 1, s.big_box_pos.col + 1};
  const bool in_place = (s.agent_pos[0] == below_left && s.agent_pos[1] == below_right) ||
                        (s.agent_pos[1] == below_left && s.agent_pos[0] == below_right);
  if (both_forward && both_north && in_place) {
    s.big_box_pos.row -= 1;
    s.agent_pos[0].row -= 1;
    s.agent_pos[1].row -= 1;
    if (s.big_box_pos.row == 0) {
      out.reward += kBigBoxReward;
      out.done = true;
    }
  } else {
    std::array<Intent, 2> intent{Intent::None, Intent::None};
    std::array<Cell, 2> target{};
    std::array<int, 2> box{-1, -1};
    for (int i = 0; i < 2; ++i) {
      if (joint_action[i] != Forward) continue;
      target[i] = ahead(s.agent_pos[i], s.heading[i]);
      if (!inside(target[i], n, n)) {
        intent[i] = Intent::Bump;
      } else if (is_big(target[i])) {
        intent[i] = Intent::PushBigAlone;
      } else if (const int k = small_at(target[i]); k >= 0) {
        box[i] = k;
        intent[i] = s.heading[i] == Heading::North ? Intent::PushSmall : Intent::Blocked;
      } else if (target[i] == s.agent_pos[1 - i]) {
        intent[i] = Intent::Blocked;
      } else {
        intent[i] = Intent::Move;
      }
    }
    // Small-box pushes need a free destination cell.
    for (int i = 0; i < 2; ++i) {
      if (intent[i] != Intent::PushSmall) continue;
      const Cell dest = ahead(s.small_box_pos[box[i]], Heading::North);
      const int j = 1 - i;
      const bool occupied = is_big(dest) || small_at(dest) >= 0 || s.agent_pos[j] == dest ||
                            (intent[j] == Intent::Move && target[j] == dest) || !inside(dest, n, n);
      if (occupied) intent[i] = Intent::Blocked;
    }
    // Moves that collide with the other agent's destination stay put.
    for (int i = 0; i < 2; ++i) {
      if (intent[i] != Intent::Move) continue;
      const int j = 1 - i;
      const bool clash = ((intent[j] == Intent::Move || intent[j] == Intent::PushSmall) && target[j] == target[i]) ||
                         (intent[j] == Intent::PushSmall && ahead(s.small_box_pos[box[j]], Heading::North) == target[i]);
      if (clash) intent[i] = Intent::Blocked;
    }
    if (intent[0] == Intent::Move && intent[1] == Intent::Move && target[0] == target[1])
      intent[0] = intent[1] = Intent::Blocked;

    for (int i = 0; i < 2; ++i) {
      switch (intent[i]) {
        case Intent::Bump:
        case Intent::PushBigAlone:
          out.reward += kPenalty;
          break;
        case Intent::PushSmall: {
          auto& b = s.small_box_pos[box[i]];
          b = ahead(b, Heading::North);
          s.agent_pos[i] = target[i];
          if (b.row == 0) {
            out.reward += kSmallBoxReward;
            out.done = true;
          }
          break;
        }
        case Intent::Move:
          s.agent_pos[i] = target[i];
          break;
        default:
          break;
      }
    }
  }

  ++s.tick;
  if (s.tick >= config_.horizon) out.done = true;
  s.terminal = out.done;
  return out;
}

BoxPushing::FrontCell BoxPushing::front_cell(int agent) const {
  const auto& s = state_;
  const Cell c = ahead(s.agent_pos[agent], s.heading[agent]);
  if (!inside(c, s.grid_size, s.grid_size)) return Boundary;
  if (c == s.agent_pos[1 - agent]) return Teammate;
  if (c == s.small_box_pos[0] || c == s.small_box_pos[1]) return SmallBox;
  if (c.row == s.big_box_pos.row && (c.col == s.big_box_pos.col || c.col == s.big_box_pos.col + 1))
    return BigBox;
  return Empty;
}

std::vector<AgentObservation> BoxPushing::observe() const {
  const auto& s = state_;
  std::vector<AgentObservation> out(2);
  for (int i = 0; i < 2; ++i) {
    const int front = front_cell(i);
    out[i].macro = ObsVec::Zero(kObsDim);
    out[i].macro[front] = 1.0;
    auto& v = out[i].primitive;
    v.resize(kViewSize);
    const Cell mate = s.agent_pos[1 - i];
    v << s.agent_pos[i].row, s.agent_pos[i].col, static_cast<int>(s.heading[i]), front,
        s.small_box_pos[0].row, s.small_box_pos[0].col, s.small_box_pos[1].row, s.small_box_pos[1].col,
        s.big_box_pos.row, s.big_box_pos.col, mate.row, mate.col;
  }
  return out;
}

std::vector<AgentObservation> BoxPushing::observe(Rng&) { return std::as_const(*this).observe(); }

}  // namespace macmarl::envs
