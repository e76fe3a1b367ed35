#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "macmarl/core/joint_actions.hpp"
#include "macmarl/core/types.hpp"

namespace macmarl {

struct AgentMacroState {
  std::optional<int> active_macro;
  /// Primitive ticks executed since `active_macro` was selected.
  int steps_elapsed = 0;
  ObsVec last_selection_obs;
  PrimitiveHistory primitive_history;
  /// Macro-observations seen at each of this agent's selections.
  std::vector<ObsVec> macro_history;
};

struct JointMacroState {
  std::vector<AgentMacroState> per_agent;
  int tick = 0;
  int joint_start_tick = 0;
  /// True for agents whose macro did not terminate at the most recent tick.
  std::vector<bool> undone_mask;

  int num_agents() const { return static_cast<int>(per_agent.size()); }
  std::vector<int> active_macros() const;
  /// Agents that must choose a macro now (terminated, or never selected).
  std::vector<bool> needs_selection() const;
};

struct TickResult {
  double reward = 0.0;
  std::vector<bool> term_flags;
  bool done = false;
  std::vector<int> primitive_actions;
  /// Observations emitted after the tick (primitive + encoded macro view).
  std::vector<AgentObservation> observations;
};

/// Starts an episode: the environment must already be reset and `initial`
/// must be its first observation.
JointMacroState begin_episode(const EnvModel& env, std::span<const AgentObservation> initial);

/// Executes one primitive tick: every agent's controller emits an action, the
/// environment advances, terminators are sampled. On episode end (environment
/// or horizon) every agent is flagged as terminated.
TickResult run_primitive_tick(EnvModel& env, JointMacroState& state, Rng& rng);

/// Per-agent macro chooser: (agent, newest macro-observation, available macro
/// ids, stream) -> macro id.
using MacroSelector =
    std::function<int(int agent, const ObsVec& obs, std::span<const int> available, Rng& rng)>;

/// Every agent that terminated (or has no macro yet) chooses independently;
/// running agents are untouched.
void select_macros_decentralized(const EnvModel& env, std::span<const MacroSelector> selectors,
                                 JointMacroState& state, std::span<const AgentObservation> obs,
                                 Rng& rng);

/// Joint macro-action values for a joint observation (concatenated per-agent
/// macro-observations).
using JointQFunction = std::function<Eigen::VectorXd(const ObsVec& joint_obs)>;

/// Centralized choice by restricted argmax: undone agents keep their running
/// macro, the others range over their available macros. With probability
/// `epsilon` a uniform draw over the restricted set replaces the argmax.
void select_macros_centralized(const EnvModel& env, const JointQFunction& q_function,
                               JointMacroState& state, std::span<const AgentObservation> obs,
                               double epsilon, Rng& rng);

/// Joint macro-observation used by centralized learners: the agents' latest
/// selection observations with re-selecting agents replaced by `obs`.
ObsVec joint_observation(const JointMacroState& state, std::span<const AgentObservation> obs);

/// Available macro ids for `agent` given its history extended by `newest`.
std::vector<int> available_macros(const EnvModel& env, int agent, const AgentMacroState& agent_state,
                                  const ObsVec& newest);

/// Uniform draw with probability epsilon, otherwise first maximum of `q` over
/// `candidates`.
int epsilon_greedy(const Eigen::Ref<const Eigen::VectorXd>& q, std::span<const int> candidates,
                   double epsilon, Rng& rng);

}  // namespace macmarl
