#include "macmarl/harness/runner.hpp"

#include <algorithm>
#include <cmath>

namespace macmarl::harness {

DecentralizedController::DecentralizedController(const std::vector<learners::Net>& nets, std::vector<int> net_of,
                                                 double epsilon)
    : nets_(&nets), net_of_(std::move(net_of)), epsilon_(epsilon) {}

void DecentralizedController::begin_episode(const EnvModel& env) {
  if (static_cast<int>(net_of_.size()) != env.num_agents())
    throw ExecutionError("controller net mapping does not match agent count");
  hidden_.clear();
  for (int i = 0; i < env.num_agents(); ++i) hidden_.push_back((*nets_)[net_of_[i]].zero_hidden(1));
}

void DecentralizedController::select(const EnvModel& env, JointMacroState& state,
                                     std::span<const AgentObservation> obs, Rng& rng) {
  std::vector<MacroSelector> selectors(state.num_agents());
  for (int i = 0; i < state.num_agents(); ++i) {
    selectors[i] = [this](int agent, const ObsVec& z, std::span<const int> available, Rng& r) {
      const auto q = (*nets_)[net_of_[agent]].step(z, hidden_[agent]);
      return epsilon_greedy(q, available, epsilon_, r);
    };
  }
  select_macros_decentralized(env, selectors, state, obs, rng);
}

CentralizedController::CentralizedController(const learners::Net& net, double epsilon)
    : net_(&net), epsilon_(epsilon) {}

void CentralizedController::begin_episode(const EnvModel&) { hidden_ = net_->zero_hidden(1); }

void CentralizedController::select(const EnvModel& env, JointMacroState& state,
                                   std::span<const AgentObservation> obs, Rng& rng) {
  const JointQFunction q = [this](const ObsVec& joint) { return net_->step(joint, hidden_); };
  select_macros_centralized(env, q, state, obs, epsilon_, rng);
}

void ScriptedController::select(const EnvModel& env, JointMacroState& state, std::span<const AgentObservation> obs,
                                Rng& rng) {
  std::vector<MacroSelector> selectors(state.num_agents());
  for (int i = 0; i < state.num_agents(); ++i) {
    selectors[i] = [&](int agent, const ObsVec&, std::span<const int> available, Rng&) {
      return rule_(env, agent, state, obs, available);
    };
  }
  select_macros_decentralized(env, selectors, state, obs, rng);
}

EpisodeResult run_episode(EnvModel& env, Controller& controller, Rng& rng,
                          const std::function<void(const TickContext&)>& on_tick,
                          const std::function<void(const EnvModel&)>& on_end) {
  env.reset(rng);
  auto obs = env.observe(rng);
  JointMacroState state = begin_episode(env, obs);
  controller.begin_episode(env);
  ObsVec joint_selection = joint_observation(state, obs);
  controller.select(env, state, obs, rng);

  const double gamma = env.discount();
  EpisodeResult result;
  const int n = state.num_agents();
  std::vector<ObsVec> selection_obs(n);
  while (true) {
    for (int i = 0; i < n; ++i) selection_obs[i] = state.per_agent[i].last_selection_obs;
    const auto macros = state.active_macros();
    const TickResult tick = run_primitive_tick(env, state, rng);
    result.discounted_return += std::pow(gamma, result.ticks) * tick.reward;
    result.total_reward += tick.reward;
    ++result.ticks;
    const bool any = std::any_of(tick.term_flags.begin(), tick.term_flags.end(), [](bool b) { return b; });
    const ObsVec joint_fresh = any ? joint_observation(state, tick.observations) : joint_selection;
    if (on_tick) on_tick(TickContext{selection_obs, joint_selection, macros, tick, joint_fresh});
    if (tick.done) break;
    if (any) {
      joint_selection = joint_fresh;
      controller.select(env, state, tick.observations, rng);
    }
  }
  if (on_end) on_end(env);
  return result;
}

}  // namespace macmarl::harness
