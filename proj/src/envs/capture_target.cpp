#include "macmarl/envs/capture_target.hpp"

#include <cstdlib>
#include <optional>
#include <stdexcept>

namespace macmarl::envs {

namespace {

// Shortest signed displacement on a ring of size n.
int ring_delta(int from, int to, int n) {
  int d = ((to - from) % n + n) % n;
  if (d > n / 2) d -= n;
  return d;
}

// Most recent target sighting in the whole episode history.
std::optional<Cell> last_seen_target(const PrimitiveHistory& h) {
  for (auto it = h.observations.rbegin(); it != h.observations.rend(); ++it)
    if ((*it)[2] > 0.5) return Cell{static_cast<int>((*it)[3]), static_cast<int>((*it)[4])};
  return std::nullopt;
}

Cell own_cell(const PrimitiveObs& o) { return {static_cast<int>(o[0]), static_cast<int>(o[1])}; }

MacroActionSpec move_to_target(int grid) {
  MacroActionSpec spec;
  spec.id = CaptureTarget::MoveToTarget;
  spec.name = "Move_to_Target";
  spec.controller = [grid](const PrimitiveHistory& h) {
    const auto target = last_seen_target(h);
    if (!target) return static_cast<int>(CaptureTarget::Stay);
    const Cell me = own_cell(h.latest());
    const int dr = ring_delta(me.row, target->row, grid);
    const int dc = ring_delta(me.col, target->col, grid);
    if (dr == 0 && dc == 0) return static_cast<int>(CaptureTarget::Stay);
    if (std::abs(dr) >= std::abs(dc))
      return static_cast<int>(dr < 0 ? CaptureTarget::Up : CaptureTarget::Down);
    return static_cast<int>(dc < 0 ? CaptureTarget::Left : CaptureTarget::Right);
  };
  spec.terminator = [](const PrimitiveHistory& h) {
    const auto target = last_seen_target(h);
    if (!target) return 1.0;
    return own_cell(h.latest()) == *target ? 1.0 : 0.0;
  };
  return spec;
}

}  // namespace

CaptureTarget::CaptureTarget(CaptureTargetConfig config) : config_(config) {
  if (config_.grid_size < 4 || config_.grid_size > 30)
    throw std::invalid_argument("capture target grid size must be in 4..30");
  if (config_.horizon < 1) throw std::invalid_argument("horizon must be positive");
  state_.grid_size = config_.grid_size;
  if (config_.primitive_actions) {
    macros_ = {one_tick_macro(0, "up", Up), one_tick_macro(1, "down", Down),
               one_tick_macro(2, "left", Left), one_tick_macro(3, "right", Right),
               one_tick_macro(4, "stay", Stay)};
  } else {
    macros_ = {move_to_target(config_.grid_size), one_tick_macro(StayMacro, "Stay", Stay)};
  }
}

std::span<const MacroActionSpec> CaptureTarget::macro_actions(int) const { return macros_; }

void CaptureTarget::reset(Rng& rng) {
  const auto n = static_cast<std::size_t>(config_.grid_size);
  state_.grid_size = config_.grid_size;
  for (auto& a : state_.agent_pos) {
    a.row = static_cast<int>(rng.uniform_int(n));
    a.col = static_cast<int>(rng.uniform_int(n));
  }
  state_.target_pos.row = static_cast<int>(rng.uniform_int(n));
  state_.target_pos.col = static_cast<int>(rng.uniform_int(n));
  state_.tick = 0;
}

Cell CaptureTarget::moved(Cell c, int action) const {
  const int n = config_.grid_size;
  switch (action) {
    case Up: c.row -= 1; break;
    case Down: c.row += 1; break;
    case Left: c.col -= 1; break;
    case Right: c.col += 1; break;
    case Stay: break;
    default: throw std::out_of_range("invalid capture target action");
  }
  c.row = (c.row % n + n) % n;
  c.col = (c.col % n + n) % n;
  return c;
}

StepOutcome CaptureTarget::step(std::span<const int> joint_action, Rng& rng) {
  if (joint_action.size() != 2) throw std::invalid_argument("capture target expects 2 actions");
  for (int a : joint_action)
    if (a < 0 || a > 4) throw std::out_of_range("invalid capture target action");
  for (int i = 0; i < 2; ++i) {
    // One noise draw per agent per tick keeps the stream layout fixed.
    const bool slip = rng.uniform() < config_.transition_noise;
    if (!slip) state_.agent_pos[i] = moved(state_.agent_pos[i], joint_action[i]);
  }
  state_.target_pos = moved(state_.target_pos, static_cast<int>(rng.uniform_int(5)));
  ++state_.tick;

  StepOutcome out;
  if (state_.agent_pos[0] == state_.target_pos && state_.agent_pos[1] == state_.target_pos) {
    out.reward = 1.0;
    out.done = true;
  }
  if (state_.tick >= config_.horizon) out.done = true;
  return out;
}

std::vector<AgentObservation> CaptureTarget::observe_with_draws(std::span<const double> draws) const {
  const double scale = 1.0 / (config_.grid_size - 1);
  std::vector<AgentObservation> out(2);
  for (int i = 0; i < 2; ++i) {
    const bool seen = draws[i] >= config_.flicker_probability;
    const Cell me = state_.agent_pos[i];
    const Cell t = state_.target_pos;
    auto& o = out[i];
    o.primitive.resize(5);
    o.primitive << me.row, me.col, seen ? 1.0 : 0.0, seen ? t.row : -1.0, seen ? t.col : -1.0;
    o.macro.resize(kObsDim);
    o.macro << me.row * scale, me.col * scale, seen ? t.row * scale : 0.0, seen ? t.col * scale : 0.0,
        seen ? 0.0 : 1.0;
  }
  return out;
}

std::vector<AgentObservation> CaptureTarget::observe(Rng& rng) {
  const std::array<double, 2> draws{rng.uniform(), rng.uniform()};
  return observe_with_draws(draws);
}

}  // namespace macmarl::envs
