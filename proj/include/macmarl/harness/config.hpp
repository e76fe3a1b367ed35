#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "macmarl/core/key_value.hpp"
#include "macmarl/envs/factory.hpp"
#include "macmarl/learners/td.hpp"
#include "macmarl/replay/buffers.hpp"

namespace macmarl::harness {

enum class LearnerMode { Decentralized, CentralizedConditional, CentralizedUnconditional };

std::string to_string(LearnerMode mode);
LearnerMode parse_learner_mode(const std::string& text);

/// Every hyperparameter of a training run. Keys in the config file match the
/// field names below (env keys as in envs::EnvConfig).
struct RunConfig {
  envs::EnvConfig env;
  LearnerMode mode = LearnerMode::Decentralized;

  std::vector<int> pre_widths{32, 32};
  int recurrent_width = 64;
  std::vector<int> post_widths{32};

  double hysteresis_alpha = 1.0;
  double hysteresis_beta = 0.2;

  /// "adam" or "sgd".
  std::string optimizer = "adam";
  double learning_rate = 1e-3;
  double clip_norm = 0.0;

  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_episodes = 1000;

  int buffer_capacity = 1000;
  int batch_size = 16;
  /// "episode" or "trace".
  std::string sample_mode = "episode";
  int trace_length = 0;
  int warmup_episodes = 10;
  int updates_per_episode = 1;
  int target_sync_period = 50;

  int episodes = 1000;
  int eval_period = 10;
  int eval_episodes = 10;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  bool share_parameters = false;

  double discount() const;
  learners::TargetMode target_mode() const;
  replay::SampleSpec sample_spec() const;
  learners::HystereticConfig hysteresis() const;
  learners::EpsilonSchedule epsilon() const;
  learners::Optimizer::Settings optimizer_settings() const;

  /// Throws ConfigError on invalid values.
  void validate() const;
};

/// Unknown keys are rejected with ConfigError.
RunConfig parse_run_config(const KeyValues& kv);
RunConfig load_run_config(const std::string& path);
/// Writes every field; parse_run_config(write) reproduces the config exactly.
void write_run_config(std::ostream& out, const RunConfig& config);
std::string run_config_text(const RunConfig& config);

}  // namespace macmarl::harness
