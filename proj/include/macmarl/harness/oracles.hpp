#pragma once

#include <cstdint>
#include <memory>

#include "macmarl/envs/factory.hpp"
#include "macmarl/harness/runner.hpp"
#include "macmarl/harness/trainer.hpp"

namespace macmarl::harness {

/// Box pushing: both agents go under the big box; an agent that arrives first
/// stays until its teammate is in place, then both push.
ScriptedController::Rule box_pushing_big_box_rule();
/// Box pushing: agent 0 goes to its small box and pushes it home while agent 1
/// stays. The best return available without cooperation.
ScriptedController::Rule box_pushing_small_box_rule();
/// Capture target: both agents always run Move_to_Target.
ScriptedController::Rule capture_target_rule();
/// Warehouse: Turtlebots fetch tools and bring them to the workshop; the Fetch
/// passes waiting tools to a Turtlebot heading for the table, otherwise
/// searches while tools remain, otherwise waits.
ScriptedController::Rule warehouse_rule();

/// Uniform choice among each agent's available macros.
class RandomController final : public Controller {
 public:
  void begin_episode(const EnvModel&) override {}
  void select(const EnvModel& env, JointMacroState& state, std::span<const AgentObservation> obs,
              Rng& rng) override;
};

/// Reference policy for an environment config (macro-action variant; the
/// primitive flag is ignored).
std::unique_ptr<Controller> oracle_controller(const envs::EnvConfig& config);

/// Greedy discounted return of the reference policy. Box pushing is
/// deterministic and uses a single episode.
EvalSummary oracle_return(const envs::EnvConfig& config, int episodes = 200, std::uint64_t seed = 12345);

}  // namespace macmarl::harness
