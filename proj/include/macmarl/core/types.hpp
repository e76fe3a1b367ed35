#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "macmarl/core/rng.hpp"

namespace macmarl {

/// Encoded macro-observation z (environment specific, fixed length per agent).
using ObsVec = Eigen::VectorXd;

/// Low-level sensor reading consumed by macro-action controllers.
using PrimitiveObs = Eigen::VectorXd;

/// Thrown for violated preconditions of the execution model (missing macro,
/// out-of-range primitive action, empty availability set).
class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Primitive observation history of one agent over the current episode.
/// `macro_start` indexes the observation at which the running macro began.
struct PrimitiveHistory {
  std::vector<PrimitiveObs> observations;
  std::size_t macro_start = 0;

  const PrimitiveObs& latest() const { return observations.back(); }
  const PrimitiveObs& at_macro_start() const { return observations[macro_start]; }
  /// Primitive ticks executed since the running macro began.
  int ticks_in_macro() const {
    return static_cast<int>(observations.size() - 1 - macro_start);
  }
  std::span<const PrimitiveObs> since_macro_start() const {
    return std::span<const PrimitiveObs>(observations).subspan(macro_start);
  }
};

/// A macro-action: termination probability, initiation test and low-level
/// controller. `available` receives the agent's macro-observation history
/// (the newest entry is the candidate selection observation).
struct MacroActionSpec {
  int id = 0;
  std::string name;
  std::function<int(const PrimitiveHistory&)> controller;
  std::function<double(const PrimitiveHistory&)> terminator;
  std::function<bool(std::span<const ObsVec>)> available;

  bool is_available(std::span<const ObsVec> history) const {
    return !available || available(history);
  }
};

/// Convenience: a macro that runs one primitive action for exactly one tick.
MacroActionSpec one_tick_macro(int id, std::string name, int primitive_action);

struct AgentObservation {
  PrimitiveObs primitive;
  ObsVec macro;
};

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
};

/// Opaque multi-agent simulator with shared scalar reward. `step` must be a
/// pure function of internal state, joint primitive action and the stream.
class EnvModel {
 public:
  virtual ~EnvModel() = default;

  virtual std::string id() const = 0;
  virtual int num_agents() const = 0;
  virtual std::span<const MacroActionSpec> macro_actions(int agent) const = 0;
  virtual int num_primitive_actions(int agent) const = 0;
  virtual int macro_obs_dim(int agent) const = 0;
  virtual int horizon() const = 0;
  virtual double discount() const = 0;
  virtual int tick() const = 0;

  virtual void reset(Rng& rng) = 0;
  virtual StepOutcome step(std::span<const int> joint_action, Rng& rng) = 0;
  virtual std::vector<AgentObservation> observe(Rng& rng) = 0;

  virtual std::unique_ptr<EnvModel> clone() const = 0;

  int num_macros(int agent) const { return static_cast<int>(macro_actions(agent).size()); }
};

/// Checks id contiguity of every agent's macro set.
void validate_macro_sets(const EnvModel& env);

}  // namespace macmarl
