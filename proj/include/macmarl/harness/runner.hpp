#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "macmarl/core/execution.hpp"
#include "macmarl/learners/td.hpp"

namespace macmarl::harness {

/// Chooses macros for every agent that needs one (terminated or unassigned).
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void begin_episode(const EnvModel& env) = 0;
  virtual void select(const EnvModel& env, JointMacroState& state, std::span<const AgentObservation> obs,
                      Rng& rng) = 0;
};

/// Each agent runs its own recurrent net on its own macro-observation stream
/// and picks ε-greedily among its available macros. `net_of[i]` names the net
/// used by agent i.
class DecentralizedController final : public Controller {
 public:
  DecentralizedController(const std::vector<learners::Net>& nets, std::vector<int> net_of, double epsilon);
  void begin_episode(const EnvModel& env) override;
  void select(const EnvModel& env, JointMacroState& state, std::span<const AgentObservation> obs,
              Rng& rng) override;
  void set_epsilon(double epsilon) { epsilon_ = epsilon; }

 private:
  const std::vector<learners::Net>* nets_;
  std::vector<int> net_of_;
  double epsilon_;
  std::vector<learners::Net::Hidden> hidden_;
};

/// One recurrent net over the joint macro-observation; restricted ε-greedy
/// joint selection keeps undone agents on their running macros.
class CentralizedController final : public Controller {
 public:
  CentralizedController(const learners::Net& net, double epsilon);
  void begin_episode(const EnvModel& env) override;
  void select(const EnvModel& env, JointMacroState& state, std::span<const AgentObservation> obs,
              Rng& rng) override;
  void set_epsilon(double epsilon) { epsilon_ = epsilon; }

 private:
  const learners::Net* net_;
  double epsilon_;
  learners::Net::Hidden hidden_;
};

/// Hand-written policy: `rule(env, agent, state, obs, available)` is called for
/// every agent needing a macro. Rules may inspect the full environment state.
class ScriptedController final : public Controller {
 public:
  using Rule = std::function<int(const EnvModel& env, int agent, const JointMacroState& state,
                                 std::span<const AgentObservation> obs, std::span<const int> available)>;
  explicit ScriptedController(Rule rule) : rule_(std::move(rule)) {}
  void begin_episode(const EnvModel&) override {}
  void select(const EnvModel& env, JointMacroState& state, std::span<const AgentObservation> obs,
              Rng& rng) override;

 private:
  Rule rule_;
};

/// What happened on one primitive tick, as seen by a recorder.
struct TickContext {
  /// Each agent's observation at the selection of its running macro.
  std::span<const ObsVec> selection_obs;
  /// Joint observation at the start of the running joint macro-action.
  const ObsVec& joint_selection_obs;
  std::span<const int> macros;
  const TickResult& tick;
  /// Joint observation after the tick (undone agents keep their selection obs).
  const ObsVec& joint_fresh_obs;
};

struct EpisodeResult {
  double discounted_return = 0.0;
  double total_reward = 0.0;
  int ticks = 0;
};

/// Runs one episode from reset to done (environment end or horizon).
EpisodeResult run_episode(EnvModel& env, Controller& controller, Rng& rng,
                          const std::function<void(const TickContext&)>& on_tick = {},
                          const std::function<void(const EnvModel&)>& on_end = {});

}  // namespace macmarl::harness
