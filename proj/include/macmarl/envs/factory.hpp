#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "macmarl/core/key_value.hpp"
#include "macmarl/core/types.hpp"

namespace macmarl::envs {

/// Environment selection plus its tunable parameters. A value of 0 for
/// `horizon` (or a negative `discount`) means "the environment's default".
struct EnvConfig {
  std::string env = "box_pushing";
  int grid = 6;
  int horizon = 0;
  double speed = 0.6;
  double discount = -1.0;
  bool primitive = false;
  std::uint64_t seed = 0;
};

/// Applies one `key = value` pair; returns false for keys it does not own.
/// Recognized keys: env, grid, horizon, speed, discount, primitive, seed.
bool apply_env_key(EnvConfig& config, const std::string& key, const std::string& value);

/// Scenario file: only env keys are allowed.
EnvConfig parse_scenario(const KeyValues& kv);
EnvConfig load_scenario(const std::string& path);
void write_env_keys(std::ostream& out, const EnvConfig& config);

std::unique_ptr<EnvModel> make_env(const EnvConfig& config);

/// Default discount per environment id (capture_target 0.95, box_pushing 0.98,
/// warehouse 0.95).
double default_discount(const std::string& env);

/// Parses "WxH" (square grids only) or a bare integer.
int parse_grid_size(const std::string& text);

/// One primitive tick of an episode, as written to trajectory logs.
struct TrajectoryRecord {
  int tick = 0;
  std::vector<int> joint_action;
  double reward = 0.0;
  std::vector<bool> term_flags;
  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Newline-delimited JSON, one object per tick:
/// {"tick":1,"action":[0,3],"reward":-0.1,"term":[false,true]}
void write_trajectory_record(std::ostream& out, const TrajectoryRecord& record);
std::vector<TrajectoryRecord> read_trajectory_log(std::istream& in);

}  // namespace macmarl::envs
