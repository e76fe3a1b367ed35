#include "macmarl/core/execution.hpp"

#include <algorithm>
#include <string>

namespace macmarl {

MacroActionSpec one_tick_macro(int id, std::string name, int primitive_action) {
  MacroActionSpec spec;
  spec.id = id;
  spec.name = std::move(name);
  spec.controller = [primitive_action](const PrimitiveHistory&) { return primitive_action; };
  spec.terminator = [](const PrimitiveHistory&) { return 1.0; };
  return spec;
}

void validate_macro_sets(const EnvModel& env) {
  for (int i = 0; i < env.num_agents(); ++i) {
    const auto macros = env.macro_actions(i);
    if (macros.empty()) throw std::logic_error("agent without macro-actions");
    for (std::size_t k = 0; k < macros.size(); ++k) {
      if (macros[k].id != static_cast<int>(k))
        throw std::logic_error("macro ids must be contiguous from 0");
      if (!macros[k].controller || !macros[k].terminator)
        throw std::logic_error("macro '" + macros[k].name + "' lacks controller or terminator");
    }
  }
}

std::vector<int> JointMacroState::active_macros() const {
  std::vector<int> out;
  out.reserve(per_agent.size());
  for (const auto& a : per_agent) out.push_back(a.active_macro.value_or(-1));
  return out;
}

std::vector<bool> JointMacroState::needs_selection() const {
  std::vector<bool> out(per_agent.size());
  for (std::size_t i = 0; i < per_agent.size(); ++i)
    out[i] = !per_agent[i].active_macro.has_value() || !undone_mask[i];
  return out;
}

JointMacroState begin_episode(const EnvModel& env, std::span<const AgentObservation> initial) {
  if (static_cast<int>(initial.size()) != env.num_agents())
    throw ExecutionError("initial observation count does not match agent count");
  JointMacroState state;
  state.tick = env.tick();
  state.joint_start_tick = state.tick;
  state.undone_mask.assign(initial.size(), false);
  state.per_agent.resize(initial.size());
  for (std::size_t i = 0; i < initial.size(); ++i) {
    auto& a = state.per_agent[i];
    a.primitive_history.observations = {initial[i].primitive};
    a.primitive_history.macro_start = 0;
    a.last_selection_obs = initial[i].macro;
  }
  return state;
}

TickResult run_primitive_tick(EnvModel& env, JointMacroState& state, Rng& rng) {
  const int n = state.num_agents();
  TickResult result;
  result.primitive_actions.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& a = state.per_agent[i];
    if (!a.active_macro) throw ExecutionError("no active macro for agent " + std::to_string(i));
    const auto& spec = env.macro_actions(i)[*a.active_macro];
    const int action = spec.controller(a.primitive_history);
    if (action < 0 || action >= env.num_primitive_actions(i))
      throw ExecutionError("invalid primitive action " + std::to_string(action) + " from macro '" +
                           spec.name + "'");
    result.primitive_actions[i] = action;
  }

  const StepOutcome outcome = env.step(result.primitive_actions, rng);
  result.reward = outcome.reward;
  result.observations = env.observe(rng);
  state.tick = env.tick();

  result.term_flags.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& a = state.per_agent[i];
    a.primitive_history.observations.push_back(result.observations[i].primitive);
    ++a.steps_elapsed;
    const double p = env.macro_actions(i)[*a.active_macro].terminator(a.primitive_history);
    if (!(p >= 0.0 && p <= 1.0)) throw ExecutionError("terminator probability outside [0,1]");
    result.term_flags[i] = rng.bernoulli(p);
  }

  result.done = outcome.done || state.tick >= env.horizon();
  if (result.done) std::fill(result.term_flags.begin(), result.term_flags.end(), true);
  for (int i = 0; i < n; ++i) state.undone_mask[i] = !result.term_flags[i];
  return result;
}

std::vector<int> available_macros(const EnvModel& env, int agent, const AgentMacroState& agent_state,
                                  const ObsVec& newest) {
  const auto macros = env.macro_actions(agent);
  std::vector<int> out;
  const bool constrained =
      std::any_of(macros.begin(), macros.end(), [](const auto& m) { return bool(m.available); });
  if (!constrained) {
    for (const auto& spec : macros) out.push_back(spec.id);
    return out;
  }
  std::vector<ObsVec> history = agent_state.macro_history;
  history.push_back(newest);
  for (const auto& spec : macros)
    if (spec.is_available(history)) out.push_back(spec.id);
  if (out.empty())
    throw ExecutionError("no available macro-action for agent " + std::to_string(agent));
  return out;
}

int epsilon_greedy(const Eigen::Ref<const Eigen::VectorXd>& q, std::span<const int> candidates,
                   double epsilon, Rng& rng) {
  if (candidates.empty()) throw ExecutionError("no available macro-action");
  if (rng.uniform() < epsilon) return candidates[rng.uniform_int(candidates.size())];
  return argmax_over(q, candidates);
}

namespace {

void commit_selection(AgentMacroState& a, int macro, const AgentObservation& obs) {
  a.active_macro = macro;
  a.steps_elapsed = 0;
  a.last_selection_obs = obs.macro;
  a.macro_history.push_back(obs.macro);
  a.primitive_history.macro_start = a.primitive_history.observations.size() - 1;
}

}  // namespace

void select_macros_decentralized(const EnvModel& env, std::span<const MacroSelector> selectors,
                                 JointMacroState& state, std::span<const AgentObservation> obs,
                                 Rng& rng) {
  const int n = state.num_agents();
  if (static_cast<int>(selectors.size()) != n || static_cast<int>(obs.size()) != n)
    throw ExecutionError("selector/observation count does not match agent count");
  const auto reselect = state.needs_selection();
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (!reselect[i]) continue;
    auto& a = state.per_agent[i];
    const auto available = available_macros(env, i, a, obs[i].macro);
    const int choice = selectors[i](i, obs[i].macro, available, rng);
    if (std::find(available.begin(), available.end(), choice) == available.end())
      throw ExecutionError("selector chose an unavailable macro-action");
    commit_selection(a, choice, obs[i]);
    any = true;
  }
  if (any) state.joint_start_tick = state.tick;
}

ObsVec joint_observation(const JointMacroState& state, std::span<const AgentObservation> obs) {
  const auto reselect = state.needs_selection();
  Eigen::Index dim = 0;
  for (int i = 0; i < state.num_agents(); ++i)
    dim += reselect[i] ? obs[i].macro.size() : state.per_agent[i].last_selection_obs.size();
  ObsVec joint(dim);
  Eigen::Index offset = 0;
  for (int i = 0; i < state.num_agents(); ++i) {
    const ObsVec& part = reselect[i] ? obs[i].macro : state.per_agent[i].last_selection_obs;
    joint.segment(offset, part.size()) = part;
    offset += part.size();
  }
  return joint;
}

void select_macros_centralized(const EnvModel& env, const JointQFunction& q_function,
                               JointMacroState& state, std::span<const AgentObservation> obs,
                               double epsilon, Rng& rng) {
  const int n = state.num_agents();
  if (static_cast<int>(obs.size()) != n) throw ExecutionError("observation count mismatch");
  const auto reselect = state.needs_selection();
  if (std::none_of(reselect.begin(), reselect.end(), [](bool b) { return b; }))
    throw ExecutionError("centralized selection requires a terminated agent");

  std::vector<int> sizes(n);
  std::vector<std::vector<int>> allowed(n);
  for (int i = 0; i < n; ++i) {
    sizes[i] = env.num_macros(i);
    if (reselect[i])
      allowed[i] = available_macros(env, i, state.per_agent[i], obs[i].macro);
    else
      allowed[i] = {*state.per_agent[i].active_macro};
  }
  const JointActionSpace space(sizes);
  const auto candidates = space.enumerate(allowed);
  const Eigen::VectorXd q = q_function(joint_observation(state, obs));
  if (q.size() != space.size()) throw ExecutionError("joint Q head size mismatch");
  const auto components = space.decode(epsilon_greedy(q, candidates, epsilon, rng));
  for (int i = 0; i < n; ++i)
    if (reselect[i]) commit_selection(state.per_agent[i], components[i], obs[i]);
  state.joint_start_tick = state.tick;
}

}  // namespace macmarl
