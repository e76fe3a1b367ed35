#include "macmarl/harness/oracles.hpp"

#include <algorithm>

#include "macmarl/envs/box_pushing.hpp"
#include "macmarl/envs/capture_target.hpp"
#include "macmarl/envs/warehouse.hpp"

namespace macmarl::harness {

namespace {

bool contains(std::span<const int> v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

int pick(std::span<const int> available, int preferred, int fallback) {
  if (contains(available, preferred)) return preferred;
  if (contains(available, fallback)) return fallback;
  return available.front();
}

bool under_big_box(const envs::BoxPushingState& s, int agent) {
  const envs::Cell goal{s.big_box_pos.row + 1, s.big_box_pos.col + agent};
  return s.agent_pos[agent] == goal && s.heading[agent] == envs::Heading::North;
}

}  // namespace

ScriptedController::Rule box_pushing_big_box_rule() {
  return [](const EnvModel& env, int agent, const JointMacroState&, std::span<const AgentObservation>,
            std::span<const int> available) {
    using envs::BoxPushing;
    const auto& s = dynamic_cast<const BoxPushing&>(env).state();
    if (!under_big_box(s, agent)) return pick(available, BoxPushing::MoveToBigBox, BoxPushing::StayMacro);
    if (under_big_box(s, 1 - agent)) return pick(available, BoxPushing::Push, BoxPushing::StayMacro);
    return pick(available, BoxPushing::StayMacro, BoxPushing::StayMacro);
  };
}

ScriptedController::Rule box_pushing_small_box_rule() {
  return [](const EnvModel& env, int agent, const JointMacroState&, std::span<const AgentObservation>,
            std::span<const int> available) {
    using envs::BoxPushing;
    if (agent == 1) return pick(available, BoxPushing::StayMacro, BoxPushing::StayMacro);
    const auto& bp = dynamic_cast<const BoxPushing&>(env);
    const auto& s = bp.state();
    const envs::Cell goal{s.small_box_pos[0].row + 1, s.small_box_pos[0].col};
    const bool placed = s.agent_pos[0] == goal && s.heading[0] == envs::Heading::North;
    return pick(available, placed ? BoxPushing::Push : BoxPushing::MoveToSmallBox, BoxPushing::StayMacro);
  };
}

ScriptedController::Rule capture_target_rule() {
  return [](const EnvModel&, int, const JointMacroState&, std::span<const AgentObservation>,
            std::span<const int> available) {
    return pick(available, envs::CaptureTarget::MoveToTarget, envs::CaptureTarget::StayMacro);
  };
}

ScriptedController::Rule warehouse_rule() {
  return [](const EnvModel& env, int agent, const JointMacroState& state, std::span<const AgentObservation>,
            std::span<const int> available) {
    using envs::Warehouse;
    const auto& wh = dynamic_cast<const Warehouse&>(env);
    const auto& s = wh.state();
    if (agent != Warehouse::kFetch) {
      const bool carrying = !s.turtlebots[agent].tools.empty();
      return pick(available, carrying ? Warehouse::GoToWS : Warehouse::GetTool, Warehouse::GoToTR);
    }
    if (!s.waiting.empty()) {
      for (int tb = 0; tb < 2; ++tb) {
        const auto& running = state.per_agent[tb].active_macro;
        const bool fetching = running && *running == Warehouse::GetTool && !state.undone_mask.empty() &&
                              state.undone_mask[tb];
        if (wh.beside_table(tb) || fetching)
          return pick(available, tb == 0 ? Warehouse::PassToT0 : Warehouse::PassToT1, Warehouse::WaitT);
      }
    }
    const int remaining = wh.config().task_steps - 1 - s.tools_found;
    if (remaining > 0 && static_cast<int>(s.waiting.size()) < wh.config().waiting_spots)
      return pick(available, Warehouse::SearchTool, Warehouse::WaitT);
    return pick(available, Warehouse::WaitT, Warehouse::WaitT);
  };
}

void RandomController::select(const EnvModel& env, JointMacroState& state, std::span<const AgentObservation> obs,
                              Rng& rng) {
  std::vector<MacroSelector> selectors(state.num_agents());
  for (auto& s : selectors)
    s = [](int, const ObsVec&, std::span<const int> available, Rng& r) {
      return available[r.uniform_int(available.size())];
    };
  select_macros_decentralized(env, selectors, state, obs, rng);
}

std::unique_ptr<Controller> oracle_controller(const envs::EnvConfig& config) {
  if (config.env == "box_pushing") return std::make_unique<ScriptedController>(box_pushing_big_box_rule());
  if (config.env == "capture_target") return std::make_unique<ScriptedController>(capture_target_rule());
  if (config.env == "warehouse") return std::make_unique<ScriptedController>(warehouse_rule());
  throw ConfigError("no reference policy for environment '" + config.env + "'");
}

EvalSummary oracle_return(const envs::EnvConfig& config, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  auto macro_config = config;
  macro_config.primitive = false;
  auto env = envs::make_env(macro_config);
  auto controller = oracle_controller(macro_config);
  if (config.env == "box_pushing") episodes = 1;
  Rng rng(seed);
  std::vector<double> returns;
  for (int k = 0; k < episodes; ++k) returns.push_back(run_episode(*env, *controller, rng).discounted_return);
  return summarize(std::move(returns));
}

}  // namespace macmarl::harness
