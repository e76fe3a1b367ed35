#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "macmarl/harness/config.hpp"
#include "macmarl/harness/runner.hpp"
#include "macmarl/replay/buffers.hpp"

namespace macmarl::harness {

struct MetricsRecord {
  int episode = 0;
  double return_mean = 0.0;
  double return_stderr = 0.0;
  std::uint64_t seed = 0;
  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

struct EvalSummary {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<double> returns;
};

/// Mean and standard error (sample standard deviation / sqrt(n)).
EvalSummary summarize(std::vector<double> returns);

/// Owns the environment, nets, optimizers, buffer and random streams of one
/// seeded training run.
class Trainer {
 public:
  Trainer(RunConfig config, std::uint64_t seed);

  /// One ε-greedy episode recorded into the buffer, then the configured
  /// updates, target sync and (every eval_period episodes) greedy evaluation.
  void train_episode();
  /// Trains until `episode() == until` (defaults to config.episodes).
  void train(std::optional<int> until = std::nullopt);

  /// Greedy evaluation on a copy of the environment with its own stream;
  /// learner state is untouched.
  EvalSummary evaluate(int episodes, std::uint64_t eval_seed) const;
  /// Greedy controller over the current parameters (valid while *this lives).
  std::unique_ptr<Controller> greedy_controller() const;

  int episode() const { return episode_; }
  long updates() const { return updates_; }
  std::uint64_t seed() const { return seed_; }
  const RunConfig& config() const { return config_; }
  const EnvModel& env() const { return *env_; }
  const std::vector<MetricsRecord>& metrics() const { return metrics_; }
  const std::vector<learners::Net>& nets() const { return nets_; }
  const std::vector<learners::Optimizer>& optimizers() const { return optimizers_; }
  const std::optional<replay::MacCerts>& certs() const { return certs_; }
  const std::optional<replay::MacJerts>& jerts() const { return jerts_; }
  const Rng& act_rng() const { return act_rng_; }
  const Rng& sample_rng() const { return sample_rng_; }

  /// Checkpoint: config, seed, counters, random streams, nets (θ, θ⁻),
  /// optimizer state, replay buffer and metrics.
  void save(std::ostream& out) const;
  static Trainer load(std::istream& in);
  void save_file(const std::string& path) const;
  static Trainer load_file(const std::string& path);

 private:
  Trainer(RunConfig config, std::uint64_t seed, bool initialize);
  void update();
  std::uint64_t eval_seed_for(int episode) const;

  RunConfig config_;
  std::uint64_t seed_;
  std::unique_ptr<EnvModel> env_;
  std::vector<learners::Net> nets_;
  std::vector<learners::Optimizer> optimizers_;
  std::vector<int> net_of_;
  std::optional<replay::MacCerts> certs_;
  std::optional<replay::MacJerts> jerts_;
  Rng act_rng_;
  Rng sample_rng_;
  int episode_ = 0;
  long updates_ = 0;
  std::vector<MetricsRecord> metrics_;
};

/// Sliding mean over a 10-neighbor window [i-5, i+4]; where that window does
/// not fit, the window shrinks symmetrically to [i-k, i+k], k = min(i, n-1-i).
std::vector<double> smooth_curve(const std::vector<double>& series, int window = 10);

/// Smoothed value at the last index whose full window fits (mean of the last
/// `window` raw values); falls back to the plain mean for short series.
double final_smoothed(const std::vector<double>& series, int window = 10);

/// CSV with header `episode,return_mean,return_stderr,seed`.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> smooth_metrics(const std::vector<MetricsRecord>& records, int window = 10);

}  // namespace macmarl::harness
